#ifndef ERWRE_STATS_HPP
#define ERWRE_STATS_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace erwre {

struct KsResult {
    double statistic = 0.0;
    double critical = 0.0;
    bool reject = false;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic critical value
// c(level) * sqrt((n + m) / (n m)), c(level) = sqrt(-ln(level / 2) / 2).
// Throws std::invalid_argument for an empty sample or level outside (0,1).
KsResult two_sample_test(std::span<const double> a, std::span<const double> b, double level);

double ks_critical_coefficient(double level);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double estimate = 0.0;
};

// p_hat +- z_mult * sqrt(p_hat (1 - p_hat) / trials), clipped to [0, 1].
// Throws std::invalid_argument for trials == 0.
Interval binomial_interval(std::uint64_t successes, std::uint64_t trials, double z_mult);

// Sample statistics; all throw std::invalid_argument on empty input.
double median(std::vector<double> values);
double mean(std::span<const double> values);
// Unbiased sample variance (needs at least two values).
double variance(std::span<const double> values);

} // namespace erwre

#endif // ERWRE_STATS_HPP
