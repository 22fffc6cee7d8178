#include "collapse_lab/stats.hpp"

#include <algorithm>
#include <cmath>

namespace clab {

double superposition_measure(std::span<const int> q_values) {
    if (q_values.empty()) throw DomainError("superposition measure needs at least one trial");
    long long sum = 0;
    for (int q : q_values) {
        if (q != 1 && q != -1) throw DomainError("q values must be +1 or -1");
        sum += q;
    }
    return static_cast<double>(sum) / static_cast<double>(q_values.size());
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
    if (trials == 0) throw DomainError("wilson interval needs at least one trial");
    if (successes > trials) throw DomainError("successes cannot exceed trials");
    if (!(z > 0.0)) throw DomainError("z must be positive");

    const double n = static_cast<double>(trials);
    const double p_hat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p_hat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

BinomialSummary binomial_summary(std::uint64_t successes, std::uint64_t trials, double z) {
    const auto [lo, hi] = wilson_interval(successes, trials, z);
    BinomialSummary s;
    s.successes = successes;
    s.trials = trials;
    s.point = static_cast<double>(successes) / static_cast<double>(trials);
    s.interval_lo = lo;
    s.interval_hi = hi;
    s.z = z;
    return s;
}

double tv_distance(std::span<const double> dist_a, std::span<const double> dist_b) {
    if (dist_a.size() != dist_b.size()) throw DomainError("tv distance needs a shared support");
    double total = 0.0;
    for (std::size_t i = 0; i < dist_a.size(); ++i) total += std::abs(dist_a[i] - dist_b[i]);
    return 0.5 * total;
}

}  // namespace clab
