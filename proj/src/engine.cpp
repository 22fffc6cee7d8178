#include "collapse_lab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace clab {

void CollapseConfig::validate() const {
    if (!(delta_ave > 0.0) || !(delta_ave <= 0.5)) {
        std::ostringstream msg;
        msg << "delta_ave must lie in (0, 0.5], got " << delta_ave;
        throw DomainError(msg.str());
    }
}

double clamped_mass_step(double mass_interacting, double delta, bool move_up) {
    const double p = mass_interacting;
    const double eff = std::min({delta, p, 1.0 - p});
    if (move_up) return (eff >= 1.0 - p) ? 1.0 : p + eff;
    return (eff >= p) ? 0.0 : p - eff;
}

CollapseStepResult collapse_step(PureState state, const BranchDecomposition& decomposition,
                                 const CollapseConfig& config, RngStream& rng,
                                 const SequenceCounter& s, bool same_s_as_partner) {
    (void)s;  // the counter value itself never enters the update rule
    config.validate();

    CollapseStepResult result{std::move(state), decomposition.mass_interacting,
                              decomposition.mass_noninteracting, false, false, std::nullopt};

    if (decomposition.is_degenerate()) {
        result.degenerate = true;
        return result;
    }
    // Same-s spacelike interactions leave a trivial decomposition: no shift.
    if (config.sequencing_mode == SequencingMode::FORCED_SAME_S || same_s_as_partner) return result;

    // Walk the normalized mass fraction so exactly equal branches sit at
    // exactly 0.5 even though (1/sqrt2)^2 rounds one ulp high.
    const double p_raw = decomposition.mass_interacting;
    const double q_raw = decomposition.mass_noninteracting;
    const double p = p_raw / (p_raw + q_raw);
    const double p_new = clamped_mass_step(p, config.delta_ave, rng.next_coin());
    const double q_new = 1.0 - p_new;

    auto& amps = result.state.amplitudes();
    if (p_new == 0.0) {
        for (std::uint64_t idx : decomposition.interacting_set) amps[idx] = Amplitude{0.0, 0.0};
    } else {
        const double scale = std::sqrt(p_new / p_raw);
        for (std::uint64_t idx : decomposition.interacting_set) amps[idx] *= scale;
    }
    if (q_new == 0.0) {
        for (std::uint64_t idx : decomposition.noninteracting_set) amps[idx] = Amplitude{0.0, 0.0};
    } else {
        const double scale = std::sqrt(q_new / q_raw);
        for (std::uint64_t idx : decomposition.noninteracting_set) amps[idx] *= scale;
    }

    result.mass_interacting = p_new;
    result.mass_noninteracting = q_new;
    result.step_taken = true;
    if (p_new == 1.0) result.absorbed = Branch::INTERACTING;
    if (p_new == 0.0) result.absorbed = Branch::NONINTERACTING;
    return result;
}

WalkResult run_walk(double p0, const CollapseConfig& config, RngStream& rng, std::uint64_t max_steps,
                    bool record_trajectory) {
    config.validate();
    if (!(p0 > 0.0) || !(p0 < 1.0)) {
        std::ostringstream msg;
        msg << "p0 must lie in (0, 1), got " << p0;
        throw DomainError(msg.str());
    }

    WalkResult result;
    if (record_trajectory) result.trajectory.emplace();

    double p = p0;
    while (p != 0.0 && p != 1.0) {
        if (result.steps >= max_steps) {
            std::ostringstream msg;
            msg << "walk from p0=" << p0 << " with delta=" << config.delta_ave << " not absorbed after "
                << max_steps << " steps";
            throw StepBudgetError(msg.str());
        }
        p = clamped_mass_step(p, config.delta_ave, rng.next_coin());
        ++result.steps;
        if (result.trajectory) result.trajectory->push_back(p);
    }
    result.absorbed_branch = (p == 1.0) ? Branch::INTERACTING : Branch::NONINTERACTING;
    return result;
}

EvolutionResult interleaved_evolution(PureState initial, const std::vector<ScheduledInteraction>& schedule,
                                      const CollapseConfig& config, RngStream& rng) {
    config.validate();

    EvolutionResult result{std::move(initial), {}, std::nullopt, std::nullopt, 0};
    result.steps.reserve(schedule.size());

    // Assign sequencing slots up front: an interaction sharing its s with any
    // spacelike partner in the schedule produces no amplitude shift.
    SequenceCounter counter;
    const bool same_s_mode = config.sequencing_mode == SequencingMode::FORCED_SAME_S;
    std::vector<std::uint64_t> s_values(schedule.size());
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (schedule[k].s_value)
            s_values[k] = *schedule[k].s_value;
        else if (same_s_mode || k == 0)
            s_values[k] = counter.value();
        else
            s_values[k] = counter.advance();
    }
    std::vector<std::uint64_t> distinct(s_values);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    result.distinct_s_count = distinct.size();
    auto shared_s = [&](std::size_t k) {
        return std::count(s_values.begin(), s_values.end(), s_values[k]) > 1;
    };

    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const ScheduledInteraction& interaction = schedule[k];
        result.state = apply_controlled_flip(std::move(result.state), interaction.target, interaction.control);

        const std::uint64_t s_value = s_values[k];
        const bool s_collision = shared_s(k);

        const int control = interaction.control;
        BranchPredicate predicate = interaction.interacting;
        if (!predicate)
            predicate = [control](std::uint64_t idx) { return !PureState::bit_is_down(idx, control); };

        const BranchDecomposition decomposition = branch_decompose(result.state, predicate);
        CollapseStepResult step =
            collapse_step(std::move(result.state), decomposition, config, rng, counter, s_collision);
        result.state = std::move(step.state);
        result.steps.push_back(EvolutionStep{s_value, decomposition.mass_interacting, step.mass_interacting,
                                             step.step_taken, step.degenerate});
        if (step.absorbed && !result.absorbed_at) {
            result.absorbed_at = k + 1;
            result.absorbed_branch = step.absorbed;
        }
    }
    return result;
}

double mass_rms_deviation(double p0, double delta, std::uint64_t n_steps, std::uint64_t trials,
                          std::uint64_t master_seed) {
    if (!(p0 > 0.0) || !(p0 < 1.0)) throw DomainError("p0 must lie in (0, 1)");
    if (trials == 0) throw DomainError("trials must be positive");
    double sum_sq = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        RngStream rng = RngStream::for_trial(master_seed, t);
        double p = p0;
        for (std::uint64_t k = 0; k < n_steps && p != 0.0 && p != 1.0; ++k)
            p = clamped_mass_step(p, delta, rng.next_coin());
        sum_sq += (p - p0) * (p - p0);
    }
    return std::sqrt(sum_sq / static_cast<double>(trials));
}

}  // namespace clab
