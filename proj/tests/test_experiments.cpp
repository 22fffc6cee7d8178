#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "collapse_lab/experiments.hpp"
#include "collapse_lab/stats.hpp"

using namespace clab;

namespace {

CollapseConfig config_with(double delta, std::uint64_t seed,
                           SequencingMode mode = SequencingMode::DISTINCT_S) {
    CollapseConfig c;
    c.delta_ave = delta;
    c.master_seed = seed;
    c.sequencing_mode = mode;
    return c;
}

}  // namespace

TEST_CASE("bell parity") {
    SUBCASE("tiny delta: superposition signature is perfect") {
        const BellParityReport r = run_bell_parity(10, 10000, config_with(1e-9, 42), 4);
        CHECK(r.count_collapse_signature == 0);
        CHECK(r.r_sup == 1.0);
        CHECK(r.collapse_fraction == 0.0);
    }
    SUBCASE("forced collapse on the first step: q averages to zero") {
        const BellParityReport r = run_bell_parity(10, 10000, config_with(0.5, 42), 4);
        CHECK(std::abs(r.r_sup) < 0.04);
        CHECK(r.count_consistent + r.count_collapse_signature == r.trials);
    }
    SUBCASE("single detector: only perfectly correlated outcomes") {
        std::vector<BellTrial> records;
        run_bell_parity(1, 10000, config_with(1e-9, 7), 4, &records);
        for (const BellTrial& t : records) CHECK((t.outcome == 0b00 || t.outcome == 0b11));
    }
    SUBCASE("forced same-s reproduces the unitary statistics exactly") {
        const BellParityReport r =
            run_bell_parity(6, 2000, config_with(0.5, 3, SequencingMode::FORCED_SAME_S), 2);
        CHECK(r.count_collapse_signature == 0);
        CHECK(r.r_sup == 1.0);
    }
    SUBCASE("report confidence interval brackets r_sup") {
        const BellParityReport r = run_bell_parity(4, 5000, config_with(0.05, 11), 2);
        CHECK(r.confidence_interval.first <= r.r_sup);
        CHECK(r.confidence_interval.second >= r.r_sup);
    }
    SUBCASE("domain checks") {
        CHECK_THROWS_AS(run_bell_parity(0, 100, config_with(0.1, 1)), DomainError);
        CHECK_THROWS_AS(run_bell_parity(24, 100, config_with(0.1, 1)), CapacityError);
        CHECK_THROWS_AS(run_bell_parity(5, 0, config_with(0.1, 1)), DomainError);
    }
}

TEST_CASE("parity signature in the unitary limit is exact amplitude cancellation") {
    // no collapse steps at all: every signature outcome carries probability 0.0
    for (int n_det = 1; n_det <= 20; ++n_det) {
        PureState s = make_initial_state(n_det);
        for (int d = 1; d <= n_det; ++d) s = apply_controlled_flip(std::move(s), d);
        std::vector<int> all(static_cast<std::size_t>(n_det) + 1);
        for (int p = 0; p <= n_det; ++p) all[static_cast<std::size_t>(p)] = p;
        s = change_basis(std::move(s), all);
        const auto probs = born_probabilities(s);
        for (std::uint64_t idx = 0; idx < probs.size(); ++idx) {
            const bool z0_up = !PureState::bit_is_down(idx, 0);
            const ParityClass parity = parity_classify(idx, 1, n_det + 1);
            const bool signature =
                (z0_up && parity == ParityClass::ODD) || (!z0_up && parity == ParityClass::EVEN);
            if (signature) REQUIRE(probs[idx] == 0.0);
        }
    }
}

TEST_CASE("epr no-signaling") {
    SUBCASE("without a-side measurement the b marginal is symmetric") {
        const EprReport r = run_epr_no_signaling(20000, config_with(0.1, 5), false, 4);
        const auto marginal = r.b_marginal();
        CHECK(std::abs(marginal[0] - 0.5) < 4.0 * std::sqrt(0.25 / 20000.0));
        CHECK(r.count_anticorrelated == r.trials);
    }
    SUBCASE("a-side collapse chains leave the b marginal flat") {
        for (double delta : {0.01, 0.1, 0.5}) {
            const EprReport with = run_epr_no_signaling(50000, config_with(delta, 8), true, 4);
            const EprReport without = run_epr_no_signaling(50000, config_with(delta, 9), false, 4);
            const auto ma = with.b_marginal();
            const auto mb = without.b_marginal();
            const double tv = tv_distance(std::span(ma.data(), 2), std::span(mb.data(), 2));
            CHECK(tv < 4.0 * std::sqrt(1.0 / 50000.0));
            CHECK(with.count_anticorrelated == with.trials);
        }
    }
    SUBCASE("at delta = 0.5 the chain collapses immediately and outcomes stay anticorrelated") {
        std::vector<EprTrial> records;
        const EprReport r = run_epr_no_signaling(2000, config_with(0.5, 13), true, 2, 16, &records);
        CHECK(r.count_anticorrelated == r.trials);
        for (const EprTrial& t : records) {
            REQUIRE(t.steps_to_absorption.has_value());
            CHECK(*t.steps_to_absorption == 1);
        }
    }
}

TEST_CASE("emzi analytic cross fraction") {
    CHECK(emzi_analytic_cross_fraction(1.0) == doctest::Approx(0.25).epsilon(1e-15));
    // (2 - sqrt(3)) / 8
    CHECK(emzi_analytic_cross_fraction(2.0) == doctest::Approx(0.03349364905389035).epsilon(1e-12));
    CHECK(std::abs(emzi_analytic_cross_fraction(2.0) - 0.033494) < 1e-6);
    CHECK_THROWS_AS(emzi_analytic_cross_fraction(0.5), DomainError);
    SUBCASE("large-r tail approaches 1/(8 r^2)") {
        for (double r : {100.0, 1000.0, 10000.0}) {
            const double tail = 1.0 / (8.0 * r * r);
            CHECK(emzi_analytic_cross_fraction(r) == doctest::Approx(tail).epsilon(1e-4));
        }
    }
}

TEST_CASE("emzi channel probabilities by exact enumeration at r = 1") {
    const double delta = 0.01;
    const EmziBranchState init = make_emzi_initial(1.0, delta);
    CHECK(std::norm(init.alpha) == doctest::Approx(delta).epsilon(1e-13));
    CHECK(std::norm(init.alpha) + std::norm(init.gamma) + std::norm(init.beta) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // the four equally likely sign pairs (up/down on each branch)
    struct Case { bool a_up, g_up; };
    for (const Case c : {Case{true, false}, Case{false, true}, Case{true, true}, Case{false, false}}) {
        const double a2 = clamped_mass_step(delta, delta, c.a_up);
        const double g2 = clamped_mass_step(delta, delta, c.g_up);
        const auto probs = emzi_channel_probabilities(Amplitude{std::sqrt(a2), 0.0},
                                                      Amplitude{std::sqrt(g2), 0.0});
        if (c.a_up != c.g_up) {
            // one branch doubled, the other zeroed: every channel gets delta/2
            for (int ch = 0; ch < 4; ++ch) CHECK(probs[ch] == doctest::Approx(delta / 2).epsilon(1e-12));
        } else if (c.a_up) {
            // both doubled: 2*delta on SS and AA, nothing on the cross channels
            CHECK(probs[0] == doctest::Approx(2 * delta).epsilon(1e-12));
            CHECK(probs[1] == doctest::Approx(2 * delta).epsilon(1e-12));
            CHECK(probs[2] == 0.0);
            CHECK(probs[3] == 0.0);
        } else {
            // both zeroed: nothing reaches the interacting channels
            for (int ch = 0; ch < 4; ++ch) CHECK(probs[ch] == 0.0);
        }
    }
    // at r = 1 a down move zeroes the branch exactly
    CHECK(clamped_mass_step(delta, delta, false) == 0.0);
}

TEST_CASE("emzi monte carlo") {
    SUBCASE("r = 1 signal near one quarter, total detection near 2 delta") {
        const double delta = 0.01;
        const EmziReport r = run_emzi_mc(1.0, delta, 1000000, config_with(delta, 42), 4);
        CHECK(std::abs(r.cross_fraction - 0.25) < 0.003);
        CHECK(std::abs(r.detection_probability - 2 * delta) < 0.001);
        CHECK(r.analytic_cross_fraction == doctest::Approx(0.25));
        const double sum = r.p_SS + r.p_AA + r.p_SA + r.p_AS + r.p_noninteracting;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("monte carlo tracks the analytic value across r") {
        for (double r_branch : {1.5, 2.0, 5.0, 10.0}) {
            const EmziReport r = run_emzi_mc(r_branch, 0.01, 400000, config_with(0.01, 23), 4);
            const std::uint64_t detected = r.channel_counts[0] + r.channel_counts[1] +
                                           r.channel_counts[2] + r.channel_counts[3];
            REQUIRE(detected > 0);
            const double expectation = emzi_analytic_cross_fraction(r_branch);
            const double se = std::sqrt(expectation * (1.0 - expectation) / static_cast<double>(detected));
            CHECK(std::abs(r.cross_fraction - expectation) < 4.0 * se);
        }
    }
    SUBCASE("same-s negative control kills the cross channels") {
        const EmziReport r =
            run_emzi_mc(1.0, 0.01, 100000, config_with(0.01, 3, SequencingMode::FORCED_SAME_S), 4);
        CHECK(r.channel_counts[2] == 0);
        CHECK(r.channel_counts[3] == 0);
        CHECK(r.cross_fraction == 0.0);
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(run_emzi_mc(0.5, 0.01, 100, config_with(0.01, 1)), DomainError);
        CHECK_THROWS_AS(run_emzi_mc(100.0, 0.01, 100, config_with(0.01, 1)), DomainError);
        CHECK_THROWS_AS(run_emzi_mc(1.0, 0.01, 0, config_with(0.01, 1)), DomainError);
    }
}

TEST_CASE("expected collapse steps") {
    CHECK(expected_collapse_steps(0.5, 0.01) == doctest::Approx(2500.0).epsilon(1e-12));
    CHECK(expected_collapse_steps(0.5, 0.05) == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(expected_collapse_steps(0.1, 0.01) == doctest::Approx(900.0).epsilon(1e-12));
    CHECK_THROWS_AS(expected_collapse_steps(0.0, 0.01), DomainError);

    SUBCASE("monte carlo agreement away from the symmetric point") {
        const WalkReport r = run_walk_ensemble(0.1, 100000, config_with(0.01, 5), 4);
        CHECK(std::abs(r.mean_steps - 900.0) / 900.0 < 0.05);
        CHECK(r.expected_steps == doctest::Approx(900.0));
    }
}

TEST_CASE("experiment reports are identical for every worker count") {
    const CollapseConfig cfg = config_with(0.05, 2024);

    const BellParityReport b1 = run_bell_parity(6, 4000, cfg, 1);
    const BellParityReport b8 = run_bell_parity(6, 4000, cfg, 8);
    CHECK(b1.count_consistent == b8.count_consistent);
    CHECK(b1.count_collapse_signature == b8.count_collapse_signature);
    CHECK(b1.r_sup == b8.r_sup);

    std::vector<EmziTrial> e1, e8;
    run_emzi_mc(2.0, 0.05, 30000, cfg, 1, &e1);
    run_emzi_mc(2.0, 0.05, 30000, cfg, 8, &e8);
    REQUIRE(e1.size() == e8.size());
    for (std::size_t i = 0; i < e1.size(); ++i) CHECK(e1[i].channel == e8[i].channel);

    const WalkReport w1 = run_walk_ensemble(0.3, 20000, cfg, 1);
    const WalkReport w3 = run_walk_ensemble(0.3, 20000, cfg, 3);
    CHECK(w1.total_steps == w3.total_steps);
    CHECK(w1.count_interacting == w3.count_interacting);
}
