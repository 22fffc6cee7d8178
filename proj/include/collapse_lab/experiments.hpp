// Experiment harnesses: the N-detector parity protocol, the singlet
// no-signaling check, the coupled-eraser collapse signal, and walk ensembles.
//
// Every experiment derives trial t's randomness from
// RngStream::for_trial(config.master_seed, t), so reports and trial records
// are identical for any worker count.

#ifndef COLLAPSE_LAB_EXPERIMENTS_HPP
#define COLLAPSE_LAB_EXPERIMENTS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "collapse_lab/engine.hpp"
#include "collapse_lab/state.hpp"

namespace clab {

// ---------------------------------------------------------------------------
// Bell N-detector parity experiment

struct BellParityReport {
    int n_detectors = 0;
    std::uint64_t trials = 0;
    std::uint64_t count_consistent = 0;          // q = +1 outcomes
    std::uint64_t count_collapse_signature = 0;  // q = -1 outcomes
    double r_sup = 0.0;                          // (consistent - signature) / trials
    double collapse_fraction = 0.0;              // 1 - r_sup
    std::pair<double, double> confidence_interval{0.0, 0.0};  // Wilson band mapped onto r_sup
};

struct BellTrial {
    std::uint64_t trial_index = 0;
    std::uint32_t outcome = 0;  // z-basis index, bit i = particle i, 1 = down
    ParityClass parity = ParityClass::EVEN;
    std::int8_t q = 0;
    std::optional<std::uint32_t> steps_to_absorption;
    std::uint32_t s_count = 0;
};

BellParityReport run_bell_parity(int n_detectors, std::uint64_t trials, const CollapseConfig& config,
                                 unsigned workers = 1, std::vector<BellTrial>* records = nullptr,
                                 int max_particles = kDefaultMaxParticles);

// ---------------------------------------------------------------------------
// EPR singlet no-signaling check

inline constexpr std::uint64_t kDefaultEprChainLength = 64;

struct EprTrial {
    std::uint64_t trial_index = 0;
    std::uint8_t outcome = 0;  // joint x-basis index: bit 0 = particle a, bit 1 = particle b
    std::optional<std::uint32_t> steps_to_absorption;
    std::uint32_t s_count = 0;
};

struct EprReport {
    std::uint64_t trials = 0;
    bool measured_side_a = false;
    std::uint64_t chain_length = 0;
    std::uint64_t count_b_up = 0;
    std::uint64_t count_b_down = 0;
    std::uint64_t count_anticorrelated = 0;

    std::array<double, 2> b_marginal() const {
        const double m = static_cast<double>(trials);
        return {static_cast<double>(count_b_up) / m, static_cast<double>(count_b_down) / m};
    }
};

// Prepares (1/sqrt2)(|x_a up>|x_b down> - |x_a down>|x_b up>); when
// measure_side_a is set, runs chain_length a-side entangling interactions with
// collapse steps before sampling the joint x-basis outcome.
EprReport run_epr_no_signaling(std::uint64_t trials, const CollapseConfig& config, bool measure_side_a,
                               unsigned workers = 1, std::uint64_t chain_length = kDefaultEprChainLength,
                               std::vector<EprTrial>* records = nullptr);

// ---------------------------------------------------------------------------
// Coupled-eraser (EMZI) collapse signal

enum class EmziChannel : std::uint8_t { SS, AA, SA, AS, NONINTERACTING };

const char* to_string(EmziChannel c);

// Three-branch amplitudes after the two entangling interactions; both small
// interacting branches start at |alpha|^2 = |gamma|^2 = r_branch * delta_ave.
struct EmziBranchState {
    Amplitude alpha{0.0, 0.0};
    Amplitude gamma{0.0, 0.0};
    Amplitude beta{0.0, 0.0};
    double r_branch = 1.0;
};

EmziBranchState make_emzi_initial(double r_branch, double delta_ave);

// Detection probabilities {SS, AA, SA, AS, noninteracting} of the
// symmetric/antisymmetric channel decomposition for given branch amplitudes.
std::array<double, 5> emzi_channel_probabilities(Amplitude alpha_prime, Amplitude gamma_prime);

// Cross-channel fraction (r - sqrt(r^2 - 1)) / (4 r); DomainError for r < 1.
double emzi_analytic_cross_fraction(double r_branch);

struct EmziTrial {
    std::uint64_t trial_index = 0;
    EmziChannel channel = EmziChannel::NONINTERACTING;
    std::uint32_t s_count = 2;  // 1 when both interactions share one s slot
};

struct EmziReport {
    std::uint64_t trials = 0;
    double r_branch = 1.0;
    double delta_ave = 0.0;
    std::array<std::uint64_t, 5> channel_counts{};  // indexed by EmziChannel
    double p_SS = 0.0, p_AA = 0.0, p_SA = 0.0, p_AS = 0.0, p_noninteracting = 0.0;
    double detection_probability = 0.0;  // 1 - p_noninteracting
    double cross_fraction = 0.0;         // (SA + AS) / (SS + AA + SA + AS)
    double analytic_cross_fraction = 0.0;
};

// Two independent collapse steps per trial (the interactions sit at distinct
// sequencing slots); FORCED_SAME_S suppresses both shifts as a negative
// control, which zeroes the cross channels.
EmziReport run_emzi_mc(double r_branch, double delta_ave, std::uint64_t trials,
                       const CollapseConfig& config, unsigned workers = 1,
                       std::vector<EmziTrial>* records = nullptr);

// ---------------------------------------------------------------------------
// Walk ensembles and analytic collapse time

// Expected absorption steps p0 (1 - p0) / delta^2; 1/(4 delta^2) at p0 = 1/2.
double expected_collapse_steps(double p0, double delta_ave);

struct WalkTrial {
    std::uint64_t trial_index = 0;
    Branch absorbed_branch = Branch::NONINTERACTING;
    std::uint64_t steps = 0;
};

struct WalkReport {
    std::uint64_t trials = 0;
    double p0 = 0.0;
    double delta_ave = 0.0;
    std::uint64_t count_interacting = 0;
    std::uint64_t total_steps = 0;
    double freq_interacting = 0.0;
    double mean_steps = 0.0;
    double expected_steps = 0.0;
};

WalkReport run_walk_ensemble(double p0, std::uint64_t trials, const CollapseConfig& config,
                             unsigned workers = 1, std::uint64_t max_steps = kDefaultWalkStepBudget,
                             std::vector<WalkTrial>* records = nullptr);

}  // namespace clab

#endif
