#include "erwre/branching.hpp"

#include "erwre/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace erwre {

namespace {

// Largest population for which the offspring sum is drawn exactly.
constexpr Population kExactOffspringLimit = 1e12;

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) noexcept
{
    const std::uint64_t s = a + b;
    return s < a ? std::numeric_limits<std::uint64_t>::max() : s;
}

void check_sequences(std::span<const double> p_seq, std::span<const Population> m_seq,
                     std::size_t n)
{
    if (p_seq.size() < n || m_seq.size() < n) {
        throw std::invalid_argument("environment sequences shorter than n");
    }
}

} // namespace

Population bpre_step(Population z, double p, Population m, CounterStream& rng)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("offspring parameter must lie in (0,1)");
    }
    if (z <= 0.0) {
        return m;
    }
    Population offspring = 0.0;
    if (z <= kExactOffspringLimit) {
        // Failures (prob p) before z successes (prob 1-p).
        std::negative_binomial_distribution<long long> nb(static_cast<long long>(z), 1.0 - p);
        offspring = static_cast<Population>(nb(rng));
    } else {
        const double mean = z * p / (1.0 - p);
        const double sd = std::sqrt(z * p) / (1.0 - p);
        std::normal_distribution<double> normal(0.0, 1.0);
        offspring = std::max(0.0, std::round(mean + sd * normal(rng)));
    }
    return std::min(offspring + m, kPopulationCap);
}

BranchingPath simulate_bpre(const EnvironmentSpec& laws, std::uint64_t seed, std::uint64_t tag,
                            const BpreOptions& options)
{
    laws.validate();
    CounterStream offspring_rng(seed, tag, Domain::Offspring);
    const auto env_domain = static_cast<std::uint64_t>(Domain::GenerationEnv);

    BranchingPath path;
    path.values.reserve(options.generations + 1);
    path.values.push_back(1.0);
    Population z = 1.0;
    for (std::size_t j = 1; j <= options.generations; ++j) {
        const double p = sample_p(laws.p_law, to_open_unit(hash_words({seed, tag, env_domain, j, 0})));
        const Population m =
            cookie_quantile(laws.cookie_law, to_open_unit(hash_words({seed, tag, env_domain, j, 1})));
        path.offspring_p.push_back(p);
        path.immigrants.push_back(m);

        z = bpre_step(z, p, m, offspring_rng);
        path.values.push_back(z);
        if (z == 0.0 && !path.first_zero) {
            path.first_zero = j;
            if (options.stop_at_extinction) {
                break;
            }
        }
    }
    return path;
}

Population simulate_Z_direct(std::span<const double> p_seq, std::span<const Population> m_seq,
                             std::size_t n, CounterStream& rng)
{
    check_sequences(p_seq, m_seq, n);
    Population z = 1.0;
    for (std::size_t j = 1; j <= n; ++j) {
        z = bpre_step(z, p_seq[j - 1], m_seq[j - 1], rng);
    }
    return z;
}

Population simulate_Z_decomposed(std::span<const double> p_seq,
                                 std::span<const Population> m_seq, std::size_t n,
                                 CounterStream& rng)
{
    check_sequences(p_seq, m_seq, n);
    Population total = 0.0;
    for (std::size_t family = 0; family <= n; ++family) {
        Population size = family == 0 ? 1.0 : m_seq[family - 1];
        for (std::size_t g = family + 1; g <= n && size > 0.0; ++g) {
            size = bpre_step(size, p_seq[g - 1], 0.0, rng);
        }
        total = std::min(total + size, kPopulationCap);
    }
    return total;
}

// ---- coupled V ------------------------------------------------------------

CoupledPath simulate_V(const Environment& env, const CoinSource& coins,
                       const CoupledOptions& options)
{
    if (options.k_max < 1) {
        throw std::invalid_argument("k_max must be at least 1");
    }
    CoupledPath path;
    path.values.push_back(1);
    path.failures_consumed.push_back(0);
    path.flips_consumed.push_back(0);
    path.lower_bound.push_back(false);

    for (std::size_t k = 1; k <= options.k_max; ++k) {
        const auto z = static_cast<std::int64_t>(k);
        const Site site = env.site(z);
        const std::uint64_t parents = path.values[k - 1];
        const std::uint64_t wanted = std::min(parents, options.scan_budget);

        std::uint64_t successes = 0;
        std::uint64_t failures = 0;
        std::uint64_t i = site.m;
        const std::uint64_t key = coins.site_key(z);
        while (failures < wanted) {
            ++i;
            // Same draw as coins.flip(site, z, i) past the cookies.
            if (to_open_unit(hash_continue(key, {i})) < site.p) {
                ++successes;
            } else {
                ++failures;
            }
        }

        path.values.push_back(saturating_add(site.m, successes));
        path.failures_consumed.push_back(failures);
        path.flips_consumed.push_back(i - site.m);
        path.lower_bound.push_back(path.lower_bound[k - 1] || parents > options.scan_budget);

        if (path.values[k] == 0 && !path.first_zero) {
            path.first_zero = k;
            if (options.stop_at_extinction) {
                break;
            }
        }
    }
    return path;
}

// ---- random difference equation -------------------------------------------

double rde_step(double x, double alpha, double m)
{
    if (!(alpha > 0.0) || !(m >= 0.0) || !(x >= 0.0)) {
        throw std::domain_error("rde_step needs alpha > 0 and x, m >= 0");
    }
    return alpha * x + m;
}

RDEPath simulate_rde(std::span<const double> alphas, std::span<const double> ms, std::size_t n)
{
    if (alphas.size() < n || ms.size() < n) {
        throw std::invalid_argument("sequences shorter than n");
    }
    RDEPath path;
    path.alphas.assign(alphas.begin(), alphas.begin() + static_cast<std::ptrdiff_t>(n));
    path.immigrations.assign(ms.begin(), ms.begin() + static_cast<std::ptrdiff_t>(n));
    path.x_values.reserve(n + 1);
    path.x_values.push_back(0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        path.x_values.push_back(rde_step(path.x_values.back(), alphas[k - 1], ms[k - 1]));
    }
    path.w_value = simulate_W(alphas, ms, n);
    return path;
}

double simulate_W(std::span<const double> alphas, std::span<const double> ms, std::size_t n)
{
    if (alphas.size() < n || ms.size() < n) {
        throw std::invalid_argument("sequences shorter than n");
    }
    double w = 0.0;
    double weight = 1.0;
    for (std::size_t k = 1; k <= n; ++k) {
        w += weight * ms[k - 1];
        weight *= alphas[k - 1];
    }
    return w;
}

RegimeLabel bpre_classify(double tail_liminf, double tail_limsup, double mean_log_mu)
{
    if (!(mean_log_mu < 0.0)) {
        throw UnsupportedRegimeError("only subcritical processes (E[log mu] < 0) are classified");
    }
    const double threshold = -mean_log_mu;
    if (tail_liminf > threshold) {
        return RegimeLabel::RightTransient;
    }
    if (tail_limsup < threshold) {
        return RegimeLabel::Recurrent;
    }
    return RegimeLabel::Indeterminate;
}

} // namespace erwre
