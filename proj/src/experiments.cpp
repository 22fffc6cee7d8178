#include "collapse_lab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

#include "collapse_lab/stats.hpp"

namespace clab {

namespace {

constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;

// Runs per_trial(t) for t in [0, trials) across workers. Trials are
// independent; each writes only to its own slots, so the split is free to be
// contiguous blocks.
template <typename PerTrial>
void parallel_trials(std::uint64_t trials, unsigned workers, PerTrial&& per_trial) {
    if (workers <= 1 || trials < 2) {
        for (std::uint64_t t = 0; t < trials; ++t) per_trial(t);
        return;
    }
    const unsigned n_threads = static_cast<unsigned>(std::min<std::uint64_t>(workers, trials));
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
        const std::uint64_t lo = trials * w / n_threads;
        const std::uint64_t hi = trials * (w + 1) / n_threads;
        pool.emplace_back([lo, hi, &per_trial] {
            for (std::uint64_t t = lo; t < hi; ++t) per_trial(t);
        });
    }
    for (auto& th : pool) th.join();
}

std::uint64_t sample_from(const std::array<double, 5>& probs, RngStream& rng) {
    const double u = rng.next_unit();
    double cumulative = 0.0;
    for (std::uint64_t i = 0; i + 1 < probs.size(); ++i) {
        cumulative += probs[i];
        if (u < cumulative) return i;
    }
    return probs.size() - 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bell parity

BellParityReport run_bell_parity(int n_detectors, std::uint64_t trials, const CollapseConfig& config,
                                 unsigned workers, std::vector<BellTrial>* records, int max_particles) {
    config.validate();
    if (n_detectors < 1) throw DomainError("bell-parity needs at least one detector");
    if (n_detectors + 1 > max_particles) {
        std::ostringstream msg;
        msg << "n_detectors must lie in [1, " << max_particles - 1 << "], got " << n_detectors;
        throw CapacityError(msg.str());
    }
    if (trials == 0) throw DomainError("trials must be positive");

    std::vector<BellTrial> local;
    std::vector<BellTrial>& out = records ? *records : local;
    out.assign(trials, BellTrial{});

    std::vector<int> all_particles(static_cast<std::size_t>(n_detectors) + 1);
    std::iota(all_particles.begin(), all_particles.end(), 0);
    std::vector<ScheduledInteraction> schedule(static_cast<std::size_t>(n_detectors));
    for (int d = 1; d <= n_detectors; ++d) schedule[static_cast<std::size_t>(d - 1)].target = d;

    parallel_trials(trials, workers, [&](std::uint64_t t) {
        RngStream rng = RngStream::for_trial(config.master_seed, t);
        EvolutionResult ev =
            interleaved_evolution(make_initial_state(n_detectors, max_particles), schedule, config, rng);
        const PureState z_state = change_basis(std::move(ev.state), all_particles);
        const std::uint64_t outcome = sample_outcome(z_state, rng);
        const ParityClass parity = parity_classify(outcome, 1, n_detectors + 1);
        const bool z0_up = !PureState::bit_is_down(outcome, 0);
        const bool consistent =
            (z0_up && parity == ParityClass::EVEN) || (!z0_up && parity == ParityClass::ODD);

        BellTrial& rec = out[t];
        rec.trial_index = t;
        rec.outcome = static_cast<std::uint32_t>(outcome);
        rec.parity = parity;
        rec.q = consistent ? 1 : -1;
        if (ev.absorbed_at) rec.steps_to_absorption = static_cast<std::uint32_t>(*ev.absorbed_at);
        rec.s_count = static_cast<std::uint32_t>(ev.distinct_s_count);
    });

    BellParityReport report;
    report.n_detectors = n_detectors;
    report.trials = trials;
    for (const BellTrial& rec : out)
        (rec.q > 0 ? report.count_consistent : report.count_collapse_signature) += 1;
    report.r_sup = (static_cast<double>(report.count_consistent) -
                    static_cast<double>(report.count_collapse_signature)) /
                   static_cast<double>(trials);
    report.collapse_fraction = 1.0 - report.r_sup;
    const auto [lo, hi] = wilson_interval(report.count_consistent, trials);
    report.confidence_interval = {2.0 * lo - 1.0, 2.0 * hi - 1.0};
    return report;
}

// ---------------------------------------------------------------------------
// EPR no-signaling

namespace {

PureState make_singlet() {
    // (1/sqrt2)(|x_a up>|x_b down> - |x_a down>|x_b up>), a = particle 0
    std::vector<Amplitude> amps(4, Amplitude{0.0, 0.0});
    amps[0b10] = Amplitude{kInvSqrt2, 0.0};
    amps[0b01] = Amplitude{-kInvSqrt2, 0.0};
    return PureState(2, std::move(amps), {Basis::X, Basis::X});
}

}  // namespace

EprReport run_epr_no_signaling(std::uint64_t trials, const CollapseConfig& config, bool measure_side_a,
                               unsigned workers, std::uint64_t chain_length,
                               std::vector<EprTrial>* records) {
    config.validate();
    if (trials == 0) throw DomainError("trials must be positive");

    std::vector<EprTrial> local;
    std::vector<EprTrial>& out = records ? *records : local;
    out.assign(trials, EprTrial{});

    const BranchPredicate a_up = [](std::uint64_t idx) { return !PureState::bit_is_down(idx, 0); };

    parallel_trials(trials, workers, [&](std::uint64_t t) {
        RngStream rng = RngStream::for_trial(config.master_seed, t);
        PureState state = make_singlet();

        EprTrial& rec = out[t];
        rec.trial_index = t;

        if (measure_side_a) {
            // Each a-side entangling interaction in the chain contributes one
            // amplitude-transfer step on the a-up / a-down split. The chain
            // detectors themselves are not tracked in the register.
            SequenceCounter seq;
            for (std::uint64_t k = 0; k < chain_length; ++k) {
                if (k > 0) seq.advance();
                const BranchDecomposition d = branch_decompose(state, a_up);
                CollapseStepResult step = collapse_step(std::move(state), d, config, rng, seq);
                state = std::move(step.state);
                if (step.absorbed && !rec.steps_to_absorption)
                    rec.steps_to_absorption = static_cast<std::uint32_t>(k + 1);
            }
            rec.s_count = chain_length == 0 ? 0
                          : config.sequencing_mode == SequencingMode::FORCED_SAME_S
                              ? 1
                              : static_cast<std::uint32_t>(chain_length);
        }

        rec.outcome = static_cast<std::uint8_t>(sample_outcome(state, rng));
    });

    EprReport report;
    report.trials = trials;
    report.measured_side_a = measure_side_a;
    report.chain_length = measure_side_a ? chain_length : 0;
    for (const EprTrial& rec : out) {
        const bool b_down = (rec.outcome & 0b10) != 0;
        (b_down ? report.count_b_down : report.count_b_up) += 1;
        const bool a_down = (rec.outcome & 0b01) != 0;
        if (a_down != b_down) report.count_anticorrelated += 1;
    }
    return report;
}

// ---------------------------------------------------------------------------
// EMZI

const char* to_string(EmziChannel c) {
    switch (c) {
        case EmziChannel::SS: return "SS";
        case EmziChannel::AA: return "AA";
        case EmziChannel::SA: return "SA";
        case EmziChannel::AS: return "AS";
        case EmziChannel::NONINTERACTING: return "noninteracting";
    }
    return "?";
}

EmziBranchState make_emzi_initial(double r_branch, double delta_ave) {
    if (!(r_branch >= 1.0)) throw DomainError("r_branch must be >= 1");
    if (!(r_branch * delta_ave <= 0.5))
        throw DomainError("r_branch * delta_ave must not exceed 0.5");
    const double small = r_branch * delta_ave;
    EmziBranchState s;
    s.alpha = Amplitude{std::sqrt(small), 0.0};
    s.gamma = Amplitude{std::sqrt(small), 0.0};
    s.beta = Amplitude{std::sqrt(std::max(0.0, 1.0 - 2.0 * small)), 0.0};
    s.r_branch = r_branch;
    return s;
}

std::array<double, 5> emzi_channel_probabilities(Amplitude alpha_prime, Amplitude gamma_prime) {
    const double p_same = 0.25 * std::norm(alpha_prime + gamma_prime);
    const double p_cross = 0.25 * std::norm(alpha_prime - gamma_prime);
    const double p_non = std::max(0.0, 1.0 - 2.0 * p_same - 2.0 * p_cross);
    return {p_same, p_same, p_cross, p_cross, p_non};
}

double emzi_analytic_cross_fraction(double r_branch) {
    if (!(r_branch >= 1.0)) throw DomainError("r_branch must be >= 1");
    return (r_branch - std::sqrt(r_branch * r_branch - 1.0)) / (4.0 * r_branch);
}

EmziReport run_emzi_mc(double r_branch, double delta_ave, std::uint64_t trials,
                       const CollapseConfig& config, unsigned workers, std::vector<EmziTrial>* records) {
    CollapseConfig effective = config;
    effective.delta_ave = delta_ave;
    effective.validate();
    if (trials == 0) throw DomainError("trials must be positive");
    make_emzi_initial(r_branch, delta_ave);  // validates the branch construction

    std::vector<EmziTrial> local;
    std::vector<EmziTrial>& out = records ? *records : local;
    out.assign(trials, EmziTrial{});

    const double small = r_branch * delta_ave;
    const bool frozen = config.sequencing_mode == SequencingMode::FORCED_SAME_S;

    parallel_trials(trials, workers, [&](std::uint64_t t) {
        RngStream rng = RngStream::for_trial(config.master_seed, t);
        // Two timelike-separated interactions: independent fair coins on the
        // a-branch and the b-branch masses.
        double alpha_sq = small;
        double gamma_sq = small;
        if (!frozen) {
            alpha_sq = clamped_mass_step(alpha_sq, delta_ave, rng.next_coin());
            gamma_sq = clamped_mass_step(gamma_sq, delta_ave, rng.next_coin());
        }
        const auto probs = emzi_channel_probabilities(Amplitude{std::sqrt(alpha_sq), 0.0},
                                                      Amplitude{std::sqrt(gamma_sq), 0.0});
        out[t].trial_index = t;
        out[t].channel = static_cast<EmziChannel>(sample_from(probs, rng));
        out[t].s_count = frozen ? 1 : 2;
    });

    EmziReport report;
    report.trials = trials;
    report.r_branch = r_branch;
    report.delta_ave = delta_ave;
    for (const EmziTrial& rec : out) report.channel_counts[static_cast<std::size_t>(rec.channel)] += 1;

    const double m = static_cast<double>(trials);
    report.p_SS = static_cast<double>(report.channel_counts[0]) / m;
    report.p_AA = static_cast<double>(report.channel_counts[1]) / m;
    report.p_SA = static_cast<double>(report.channel_counts[2]) / m;
    report.p_AS = static_cast<double>(report.channel_counts[3]) / m;
    report.p_noninteracting = static_cast<double>(report.channel_counts[4]) / m;
    report.detection_probability = 1.0 - report.p_noninteracting;

    const std::uint64_t detected = report.channel_counts[0] + report.channel_counts[1] +
                                   report.channel_counts[2] + report.channel_counts[3];
    const std::uint64_t cross = report.channel_counts[2] + report.channel_counts[3];
    report.cross_fraction = detected == 0 ? 0.0 : static_cast<double>(cross) / static_cast<double>(detected);
    report.analytic_cross_fraction = emzi_analytic_cross_fraction(r_branch);
    return report;
}

// ---------------------------------------------------------------------------
// Walks

double expected_collapse_steps(double p0, double delta_ave) {
    if (!(p0 > 0.0) || !(p0 < 1.0)) throw DomainError("p0 must lie in (0, 1)");
    if (!(delta_ave > 0.0)) throw DomainError("delta_ave must be positive");
    return p0 * (1.0 - p0) / (delta_ave * delta_ave);
}

WalkReport run_walk_ensemble(double p0, std::uint64_t trials, const CollapseConfig& config,
                             unsigned workers, std::uint64_t max_steps, std::vector<WalkTrial>* records) {
    config.validate();
    if (trials == 0) throw DomainError("trials must be positive");
    if (!(p0 > 0.0) || !(p0 < 1.0)) throw DomainError("p0 must lie in (0, 1)");

    std::vector<WalkTrial> local;
    std::vector<WalkTrial>& out = records ? *records : local;
    out.assign(trials, WalkTrial{});

    parallel_trials(trials, workers, [&](std::uint64_t t) {
        RngStream rng = RngStream::for_trial(config.master_seed, t);
        const WalkResult walk = run_walk(p0, config, rng, max_steps);
        out[t] = WalkTrial{t, walk.absorbed_branch, walk.steps};
    });

    WalkReport report;
    report.trials = trials;
    report.p0 = p0;
    report.delta_ave = config.delta_ave;
    for (const WalkTrial& rec : out) {
        if (rec.absorbed_branch == Branch::INTERACTING) report.count_interacting += 1;
        report.total_steps += rec.steps;
    }
    report.freq_interacting = static_cast<double>(report.count_interacting) / static_cast<double>(trials);
    report.mean_steps = static_cast<double>(report.total_steps) / static_cast<double>(trials);
    report.expected_steps = expected_collapse_steps(p0, config.delta_ave);
    return report;
}

}  // namespace clab
