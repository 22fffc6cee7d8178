#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "collapse_lab/engine.hpp"
#include "collapse_lab/rng.hpp"
#include "collapse_lab/state.hpp"

using namespace clab;

namespace {

const BranchPredicate kSubjectUp = [](std::uint64_t idx) { return !PureState::bit_is_down(idx, 0); };

CollapseConfig config_with(double delta, std::uint64_t seed = 1,
                           SequencingMode mode = SequencingMode::DISTINCT_S) {
    CollapseConfig c;
    c.delta_ave = delta;
    c.master_seed = seed;
    c.sequencing_mode = mode;
    return c;
}

PureState random_phased_pair_state(RngStream& rng) {
    // four-component state split between subject-up and subject-down branches,
    // with arbitrary phases
    std::vector<Amplitude> amps(4);
    double norm = 0.0;
    for (auto& a : amps) {
        a = std::polar(0.3 + rng.next_unit(), 6.28318530717958648 * rng.next_unit());
        norm += std::norm(a);
    }
    for (auto& a : amps) a /= std::sqrt(norm);
    return PureState(2, std::move(amps), {Basis::X, Basis::X});
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_THROWS_AS(config_with(0.0).validate(), DomainError);
    CHECK_THROWS_AS(config_with(0.7).validate(), DomainError);
    CHECK_THROWS_AS(config_with(-0.1).validate(), DomainError);
    CHECK_NOTHROW(config_with(0.5).validate());
}

TEST_CASE("clamped mass step") {
    CHECK(clamped_mass_step(0.5, 0.1, true) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(clamped_mass_step(0.5, 0.1, false) == doctest::Approx(0.4).epsilon(1e-15));
    // the step cannot exceed either branch mass
    CHECK(clamped_mass_step(0.005, 0.01, false) == 0.0);
    CHECK(clamped_mass_step(0.005, 0.01, true) == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(clamped_mass_step(0.995, 0.01, true) == 1.0);

    SUBCASE("two-outcome average equals the current mass (martingale)") {
        const double ps[] = {1e-6, 0.005, 0.01, 0.1, 0.25, 0.3, 0.5, 0.7, 0.9, 0.995, 1.0 - 1e-6};
        const double deltas[] = {1e-9, 1e-4, 0.005, 0.01, 0.05, 0.1, 0.3, 0.5};
        for (double p : ps)
            for (double d : deltas) {
                const double avg = 0.5 * (clamped_mass_step(p, d, true) + clamped_mass_step(p, d, false));
                CHECK(std::abs(avg - p) <= 1e-15);
            }
    }
}

TEST_CASE("collapse step on a register state") {
    PureState pair = apply_controlled_flip(make_initial_state(1), 1);
    const BranchDecomposition d = branch_decompose(pair, kSubjectUp);
    SequenceCounter seq;

    SUBCASE("moves the branch mass by +/- delta") {
        RngStream rng(3, 0);
        const CollapseStepResult r = collapse_step(pair, d, config_with(0.1), rng, seq);
        CHECK(r.step_taken);
        const bool up = r.mass_interacting > 0.5;
        CHECK(r.mass_interacting == doctest::Approx(up ? 0.6 : 0.4).epsilon(1e-13));
        CHECK(r.mass_interacting + r.mass_noninteracting == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(r.state.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("FORCED_SAME_S leaves the state untouched") {
        RngStream rng(3, 0);
        const CollapseStepResult r =
            collapse_step(pair, d, config_with(0.1, 1, SequencingMode::FORCED_SAME_S), rng, seq);
        CHECK_FALSE(r.step_taken);
        CHECK(r.mass_interacting == d.mass_interacting);
        for (std::uint64_t i = 0; i < pair.dim(); ++i)
            CHECK(r.state.amplitudes()[i] == pair.amplitudes()[i]);
    }
    SUBCASE("degenerate decomposition is an absorption signal, not a step") {
        RngStream rng(3, 0);
        const BranchDecomposition trivial = branch_decompose(pair, [](std::uint64_t) { return true; });
        const CollapseStepResult r = collapse_step(pair, trivial, config_with(0.1), rng, seq);
        CHECK(r.degenerate);
        CHECK_FALSE(r.step_taken);
    }
    SUBCASE("absorbing step zeroes the dead branch exactly") {
        RngStream rng(3, 0);
        const CollapseStepResult r = collapse_step(pair, d, config_with(0.5), rng, seq);
        REQUIRE(r.absorbed.has_value());
        const auto& amps = r.state.amplitudes();
        if (*r.absorbed == Branch::INTERACTING) {
            CHECK(amps[0b11] == Amplitude{0.0, 0.0});
            CHECK(std::abs(amps[0b00]) == doctest::Approx(1.0).epsilon(1e-13));
        } else {
            CHECK(amps[0b00] == Amplitude{0.0, 0.0});
            CHECK(std::abs(amps[0b11]) == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
}

TEST_CASE("collapse step preserves relative phases within each branch") {
    RngStream state_rng(11, 0);
    for (int rep = 0; rep < 10; ++rep) {
        const PureState s = random_phased_pair_state(state_rng);
        const BranchDecomposition d = branch_decompose(s, kSubjectUp);
        SequenceCounter seq;
        RngStream rng(17, static_cast<std::uint64_t>(rep));
        const CollapseStepResult r = collapse_step(s, d, config_with(0.02), rng, seq);
        REQUIRE(r.step_taken);
        // ratio within the interacting branch (indices 0b00, 0b10 are subject-up)
        const auto ratio_before = s.amplitudes()[0b10] / s.amplitudes()[0b00];
        const auto ratio_after = r.state.amplitudes()[0b10] / r.state.amplitudes()[0b00];
        CHECK(std::abs(ratio_after - ratio_before) < 1e-12);
        const auto n_before = s.amplitudes()[0b11] / s.amplitudes()[0b01];
        const auto n_after = r.state.amplitudes()[0b11] / r.state.amplitudes()[0b01];
        CHECK(std::abs(n_after - n_before) < 1e-12);
    }
}

TEST_CASE("walk absorbs on the delta grid") {
    RngStream rng(21, 0);
    const WalkResult r = run_walk(0.2, config_with(0.1), rng, kDefaultWalkStepBudget, true);
    REQUIRE(r.trajectory.has_value());
    for (double mass : *r.trajectory) {
        const double grid = mass / 0.1;
        CHECK(std::abs(grid - std::round(grid)) < 1e-9);
    }
    const double final_mass = r.trajectory->back();
    CHECK((final_mass == 0.0 || final_mass == 1.0));
    CHECK(r.steps == r.trajectory->size());
}

TEST_CASE("walk statistics") {
    SUBCASE("absorption frequency recovers p0 (born rule)") {
        const double p0s[] = {0.1, 0.3, 0.5, 0.9};
        const std::uint64_t walks = 100000;
        for (double p0 : p0s) {
            const CollapseConfig cfg = config_with(0.05, 1234);
            std::uint64_t interacting = 0;
            for (std::uint64_t t = 0; t < walks; ++t) {
                RngStream rng = RngStream::for_trial(cfg.master_seed, t);
                if (run_walk(p0, cfg, rng).absorbed_branch == Branch::INTERACTING) ++interacting;
            }
            const double freq = static_cast<double>(interacting) / static_cast<double>(walks);
            const double bound = 4.0 * std::sqrt(p0 * (1.0 - p0) / static_cast<double>(walks));
            CHECK(std::abs(freq - p0) < bound);
        }
    }
    SUBCASE("off-grid-free start: p0 = 0.3 with delta = 0.02") {
        const CollapseConfig cfg = config_with(0.02, 4242);
        const std::uint64_t walks = 100000;
        std::uint64_t interacting = 0;
        for (std::uint64_t t = 0; t < walks; ++t) {
            RngStream rng = RngStream::for_trial(cfg.master_seed, t);
            if (run_walk(0.3, cfg, rng).absorbed_branch == Branch::INTERACTING) ++interacting;
        }
        CHECK(std::abs(interacting / static_cast<double>(walks) - 0.300) < 0.005);
    }
    SUBCASE("mean absorption steps near p0(1-p0)/delta^2") {
        const CollapseConfig cfg = config_with(0.05, 77);
        const std::uint64_t walks = 100000;
        std::uint64_t total = 0;
        for (std::uint64_t t = 0; t < walks; ++t) {
            RngStream rng = RngStream::for_trial(cfg.master_seed, t);
            total += run_walk(0.5, cfg, rng).steps;
        }
        const double mean = static_cast<double>(total) / static_cast<double>(walks);
        CHECK(std::abs(mean - 100.0) < 5.0);
    }
    SUBCASE("step budget error") {
        RngStream rng(5, 0);
        CHECK_THROWS_AS(run_walk(0.5, config_with(0.001), rng, 10), StepBudgetError);
    }
    SUBCASE("p0 domain") {
        RngStream rng(5, 0);
        CHECK_THROWS_AS(run_walk(0.0, config_with(0.1), rng), DomainError);
        CHECK_THROWS_AS(run_walk(1.0, config_with(0.1), rng), DomainError);
    }
}

TEST_CASE("walk trajectories are bit-identical for identical (seed, trial)") {
    for (std::uint64_t trial : {0ULL, 5ULL, 900ULL}) {
        RngStream a = RngStream::for_trial(42, trial);
        RngStream b = RngStream::for_trial(42, trial);
        const WalkResult ra = run_walk(0.37, config_with(0.01), a, kDefaultWalkStepBudget, true);
        const WalkResult rb = run_walk(0.37, config_with(0.01), b, kDefaultWalkStepBudget, true);
        CHECK(ra.steps == rb.steps);
        CHECK(ra.absorbed_branch == rb.absorbed_branch);
        REQUIRE(ra.trajectory->size() == rb.trajectory->size());
        for (std::size_t i = 0; i < ra.trajectory->size(); ++i)
            CHECK((*ra.trajectory)[i] == (*rb.trajectory)[i]);
    }
}

TEST_CASE("interleaved evolution") {
    auto chain_schedule = [](int n_det) {
        std::vector<ScheduledInteraction> schedule(static_cast<std::size_t>(n_det));
        for (int d = 1; d <= n_det; ++d) schedule[static_cast<std::size_t>(d - 1)].target = d;
        return schedule;
    };

    SUBCASE("vanishing delta reproduces plain unitary evolution") {
        RngStream rng(9, 0);
        const EvolutionResult ev =
            interleaved_evolution(make_initial_state(1), chain_schedule(1), config_with(1e-9), rng);
        const PureState pure = apply_controlled_flip(make_initial_state(1), 1);
        for (std::uint64_t i = 0; i < pure.dim(); ++i)
            CHECK(std::abs(ev.state.amplitudes()[i] - pure.amplitudes()[i]) < 1e-6);
    }
    SUBCASE("FORCED_SAME_S equals the unitary result exactly") {
        RngStream rng(9, 1);
        const EvolutionResult ev = interleaved_evolution(
            make_initial_state(3), chain_schedule(3), config_with(0.3, 1, SequencingMode::FORCED_SAME_S), rng);
        PureState pure = make_initial_state(3);
        for (int d = 1; d <= 3; ++d) pure = apply_controlled_flip(std::move(pure), d);
        for (std::uint64_t i = 0; i < pure.dim(); ++i)
            CHECK(ev.state.amplitudes()[i] == pure.amplitudes()[i]);
        CHECK(ev.distinct_s_count == 1);
        for (const EvolutionStep& step : ev.steps) CHECK_FALSE(step.step_taken);
    }
    SUBCASE("explicit same-s pair produces no shift for either member") {
        std::vector<ScheduledInteraction> schedule = chain_schedule(3);
        schedule[0].s_value = 7;
        schedule[1].s_value = 7;
        RngStream rng(9, 2);
        const EvolutionResult ev =
            interleaved_evolution(make_initial_state(3), schedule, config_with(0.2), rng);
        CHECK_FALSE(ev.steps[0].step_taken);
        CHECK_FALSE(ev.steps[1].step_taken);
        CHECK(ev.steps[2].step_taken);
        CHECK(ev.distinct_s_count == 2);
    }
    SUBCASE("delta = 0.5 on equal branches absorbs in one step, each side half the time") {
        const std::uint64_t trials = 10000;
        std::uint64_t interacting = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            RngStream rng = RngStream::for_trial(31, t);
            const EvolutionResult ev =
                interleaved_evolution(make_initial_state(1), chain_schedule(1), config_with(0.5), rng);
            REQUIRE(ev.absorbed_at.has_value());
            CHECK(*ev.absorbed_at == 1);
            if (*ev.absorbed_branch == Branch::INTERACTING) ++interacting;
        }
        CHECK(std::abs(interacting / static_cast<double>(trials) - 0.5) < 0.01);
    }
    SUBCASE("absorption fraction matches the abstract walk (chain never remixes branches)") {
        const std::uint64_t trials = 50000;
        const double delta = 0.05;
        std::uint64_t absorbed_by_10_schedule = 0;
        std::uint64_t absorbed_by_10_walk = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            RngStream rng = RngStream::for_trial(63, t);
            const EvolutionResult ev =
                interleaved_evolution(make_initial_state(10), chain_schedule(10), config_with(delta), rng);
            if (ev.absorbed_at) ++absorbed_by_10_schedule;

            RngStream walk_rng = RngStream::for_trial(64, t);
            const WalkResult walk = run_walk(0.5, config_with(delta), walk_rng);
            if (walk.steps <= 10) ++absorbed_by_10_walk;
        }
        const double f1 = absorbed_by_10_schedule / static_cast<double>(trials);
        const double f2 = absorbed_by_10_walk / static_cast<double>(trials);
        const double sigma = std::sqrt((f1 * (1 - f1) + f2 * (1 - f2)) / static_cast<double>(trials));
        CHECK(std::abs(f1 - f2) < 3.0 * sigma + 1e-9);
    }
    SUBCASE("after absorption the remaining schedule keeps the decomposition degenerate") {
        std::uint64_t t = 0;
        // find a trial absorbing before the schedule ends
        for (;; ++t) {
            RngStream rng = RngStream::for_trial(99, t);
            const EvolutionResult ev =
                interleaved_evolution(make_initial_state(10), std::vector<ScheduledInteraction>{
                    {1, 0, {}, {}}, {2, 0, {}, {}}, {3, 0, {}, {}}, {4, 0, {}, {}},
                    {5, 0, {}, {}}, {6, 0, {}, {}}, {7, 0, {}, {}}, {8, 0, {}, {}},
                    {9, 0, {}, {}}, {10, 0, {}, {}}}, config_with(0.25), rng);
            if (ev.absorbed_at && *ev.absorbed_at < 10) {
                for (std::size_t k = *ev.absorbed_at; k < ev.steps.size(); ++k) {
                    CHECK(ev.steps[k].degenerate);
                    CHECK_FALSE(ev.steps[k].step_taken);
                }
                const double mass = branch_decompose(ev.state, kSubjectUp).mass_interacting;
                CHECK((mass == 0.0 || mass == 1.0));
                break;
            }
            REQUIRE(t < 1000);
        }
    }
}

TEST_CASE("rms mass deviation grows like delta * sqrt(n) before clamping matters") {
    const double rms = mass_rms_deviation(0.5, 0.01, 40, 20000, 3);
    const double expected = 0.01 * std::sqrt(40.0);
    CHECK(std::abs(rms - expected) / expected < 0.05);
}
