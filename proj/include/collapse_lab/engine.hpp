// Stochastic amplitude-transfer engine: a martingale random walk on branch
// masses with absorbing endpoints, interleaved with unitary evolution under
// a global sequencing counter.

#ifndef COLLAPSE_LAB_ENGINE_HPP
#define COLLAPSE_LAB_ENGINE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "collapse_lab/rng.hpp"
#include "collapse_lab/state.hpp"

namespace clab {

enum class BoundaryPolicy : std::uint8_t { CLAMP_STEP };

enum class SequencingMode : std::uint8_t { DISTINCT_S, FORCED_SAME_S };

enum class Branch : std::uint8_t { INTERACTING, NONINTERACTING };

inline const char* to_string(Branch b) {
    return b == Branch::INTERACTING ? "INTERACTING" : "NONINTERACTING";
}

struct CollapseConfig {
    double delta_ave = 0.01;  // squared-amplitude step per interaction
    BoundaryPolicy boundary_policy = BoundaryPolicy::CLAMP_STEP;
    std::uint64_t master_seed = 0;
    SequencingMode sequencing_mode = SequencingMode::DISTINCT_S;

    // Throws DomainError unless 0 < delta_ave <= 0.5.
    void validate() const;
};

// Global interaction-ordering index; monotone within a trial.
class SequenceCounter {
public:
    std::uint64_t value() const { return s_; }

    std::uint64_t advance() { return ++s_; }

private:
    std::uint64_t s_ = 0;
};

struct WalkResult {
    Branch absorbed_branch = Branch::NONINTERACTING;
    std::uint64_t steps = 0;
    std::optional<std::vector<double>> trajectory;  // masses after each step, when recorded
};

// One clamped symmetric mass move: p -> p +/- min(delta, p, 1-p). Endpoints
// are reached exactly. The up/down average equals p (the martingale the Born
// rule rides on).
double clamped_mass_step(double mass_interacting, double delta, bool move_up);

struct CollapseStepResult {
    PureState state;
    double mass_interacting = 0.0;
    double mass_noninteracting = 0.0;
    bool step_taken = false;                // false when skipped (same-s) or degenerate
    bool degenerate = false;                // decomposition was trivial: absorption signal
    std::optional<Branch> absorbed;         // set when this step drove a mass to 0 or 1
};

// Applies one stochastic amplitude transfer to the decomposed state. All
// amplitudes inside each branch are rescaled by a real positive factor, so
// relative phases within a branch never change. Same-s steps (FORCED_SAME_S,
// or an explicit s collision passed by the caller) leave the state untouched.
CollapseStepResult collapse_step(PureState state, const BranchDecomposition& decomposition,
                                 const CollapseConfig& config, RngStream& rng,
                                 const SequenceCounter& s, bool same_s_as_partner = false);

inline constexpr std::uint64_t kDefaultWalkStepBudget = 1'000'000'000ULL;

// Iterates the clamped mass walk from p0 until absorption at exactly 0 or 1.
// Throws StepBudgetError past max_steps.
WalkResult run_walk(double p0, const CollapseConfig& config, RngStream& rng,
                    std::uint64_t max_steps = kDefaultWalkStepBudget, bool record_trajectory = false);

struct ScheduledInteraction {
    int target = 0;                              // detector flipped when control is x-up
    int control = 0;
    BranchPredicate interacting;                 // empty: basis indices with control bit up
    std::optional<std::uint64_t> s_value;        // explicit sequencing slot; default auto
};

struct EvolutionStep {
    std::uint64_t s = 0;
    double mass_before = 0.0;   // interacting mass seen by this step
    double mass_after = 0.0;
    bool step_taken = false;
    bool degenerate = false;
};

struct EvolutionResult {
    PureState state;
    std::vector<EvolutionStep> steps;
    std::optional<std::uint64_t> absorbed_at;  // 1-based step index of first absorption
    std::optional<Branch> absorbed_branch;
    std::uint64_t distinct_s_count = 0;
};

// Applies each scheduled unitary, then one collapse step with the
// decomposition induced by that interaction's predicate. After absorption the
// dead branch holds exact zeros, so later decompositions stay degenerate until
// an interaction induces a fresh nontrivial split.
EvolutionResult interleaved_evolution(PureState initial, const std::vector<ScheduledInteraction>& schedule,
                                      const CollapseConfig& config, RngStream& rng);

// Empirical RMS deviation of the interacting mass from p0 after n_steps,
// estimated over trials. This is the engine's only statement about
// per-interaction deviations from linearity.
double mass_rms_deviation(double p0, double delta, std::uint64_t n_steps, std::uint64_t trials,
                          std::uint64_t master_seed);

}  // namespace clab

#endif
