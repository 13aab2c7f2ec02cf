#include "erwre/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace erwre {

double ks_critical_coefficient(double level)
{
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("significance level must lie in (0,1)");
    }
    return std::sqrt(-std::log(level / 2.0) / 2.0);
}

KsResult two_sample_test(std::span<const double> a, std::span<const double> b, double level)
{
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("two_sample_test needs two nonempty samples");
    }
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());

    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    // Advance past every copy of the smaller value so ties are compared
    // only after both empirical CDFs have jumped.
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }

    KsResult r;
    r.statistic = d;
    r.critical = ks_critical_coefficient(level) * std::sqrt((n + m) / (n * m));
    r.reject = r.statistic > r.critical;
    return r;
}

Interval binomial_interval(std::uint64_t successes, std::uint64_t trials, double z_mult)
{
    if (trials == 0) {
        throw std::invalid_argument("binomial_interval needs at least one trial");
    }
    if (successes > trials) {
        throw std::invalid_argument("more successes than trials");
    }
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double half = z_mult * std::sqrt(p * (1.0 - p) / n);
    return {std::max(0.0, p - half), std::min(1.0, p + half), p};
}

double median(std::vector<double> values)
{
    if (values.empty()) {
        throw std::invalid_argument("median of an empty sample");
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower =
        *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

double mean(std::span<const double> values)
{
    if (values.empty()) {
        throw std::invalid_argument("mean of an empty sample");
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double variance(std::span<const double> values)
{
    if (values.size() < 2) {
        throw std::invalid_argument("variance needs at least two values");
    }
    const double mu = mean(values);
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mu) * (v - mu);
    }
    return ss / static_cast<double>(values.size() - 1);
}

} // namespace erwre
