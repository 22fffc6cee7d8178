// Estimators and uncertainty for experiment reports.

#ifndef COLLAPSE_LAB_STATS_HPP
#define COLLAPSE_LAB_STATS_HPP

#include <cstdint>
#include <span>
#include <utility>

#include "collapse_lab/errors.hpp"

namespace clab {

struct BinomialSummary {
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
    double point = 0.0;
    double interval_lo = 0.0;
    double interval_hi = 0.0;
    double z = 1.96;
};

// Mean of +/-1 trial scores; 1 - result estimates the collapse fraction.
double superposition_measure(std::span<const int> q_values);

// Wilson score interval for a binomial proportion, clipped to [0, 1].
std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

BinomialSummary binomial_summary(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

// Total variation distance (1/2) sum |a_i - b_i| between two distributions on
// the same support.
double tv_distance(std::span<const double> dist_a, std::span<const double> dist_b);

}  // namespace clab

#endif
