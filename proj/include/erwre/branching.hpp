// Branching processes in random environment with immigration, the
// walk-coupled process V_k, and the random difference equation X_n / W_n.

#ifndef ERWRE_BRANCHING_HPP
#define ERWRE_BRANCHING_HPP

#include "erwre/counter_rng.hpp"
#include "erwre/environment.hpp"
#include "erwre/regime.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace erwre {

// Population sizes of the free-running process. Exact integers below 2^53;
// above that the offspring sum is drawn from its normal limit.
using Population = double;

inline constexpr Population kPopulationCap = 1e306;

// Sum of z i.i.d. offspring counts with P[xi = n] = p^n (1-p), plus m
// immigrants. Throws std::domain_error unless 0 < p < 1.
Population bpre_step(Population z, double p, Population m, CounterStream& rng);

struct BranchingPath {
    std::vector<Population> values;         // Z_0 = 1, Z_1, ..., Z_n
    std::optional<std::size_t> first_zero;  // first n with Z_n = 0
    std::vector<double> offspring_p;        // p_j, stored at index j - 1
    std::vector<Population> immigrants;     // M_j, stored at index j - 1
};

struct BpreOptions {
    std::size_t generations = 10000;
    bool stop_at_extinction = false;
};

// A path of the process with i.i.d. generation environments (p_j, M_j) drawn
// from the p- and cookie-laws of `laws` (the mask is ignored).
BranchingPath simulate_bpre(const EnvironmentSpec& laws, std::uint64_t seed, std::uint64_t tag,
                            const BpreOptions& options);

// Z_n generation by generation for fixed environment sequences
// (p_seq[j-1], m_seq[j-1]) = (p_j, M_j).
Population simulate_Z_direct(std::span<const double> p_seq, std::span<const Population> m_seq,
                             std::size_t n, CounterStream& rng);

// Z_n as the sum of n+1 independent immigrant families: family 0 starts with
// one individual, family j >= 1 with M_j, and each reproduces through
// generations j+1..n.
Population simulate_Z_decomposed(std::span<const double> p_seq,
                                 std::span<const Population> m_seq, std::size_t n,
                                 CounterStream& rng);

// ---- the walk-coupled process ---------------------------------------------

struct CoupledOptions {
    std::size_t k_max = 1;
    bool stop_at_extinction = false;
    // At most this many failures are scanned per site. When V_{k-1} exceeds
    // it, V_k (and every later value) is a lower bound and flagged as such.
    std::uint64_t scan_budget = 10'000'000;
};

struct CoupledPath {
    std::vector<std::uint64_t> values;            // V_0 = 1, ..., V_K
    std::optional<std::size_t> first_zero;
    std::vector<std::uint64_t> failures_consumed; // per site k (index k)
    std::vector<std::uint64_t> flips_consumed;    // flips used beyond index M_k
    std::vector<bool> lower_bound;                // V_k is only a lower bound

    std::uint64_t at(std::size_t k) const noexcept { return k < values.size() ? values[k] : 0; }
};

// V_k built from the same flips coin_flip(k, i), i > M_k, that the walk uses:
// xi_j^(k) is the number of successes between the (j-1)-th and j-th failure.
CoupledPath simulate_V(const Environment& env, const CoinSource& coins,
                       const CoupledOptions& options);

// ---- random difference equation -------------------------------------------

// alpha * x + m. Throws std::domain_error for alpha <= 0, m < 0 or x < 0.
double rde_step(double x, double alpha, double m);

struct RDEPath {
    std::vector<double> x_values;  // X_0 = 0, ..., X_n
    double w_value = 0.0;          // W_n
    std::vector<double> alphas;    // alpha_k at index k - 1
    std::vector<double> immigrations;
};

RDEPath simulate_rde(std::span<const double> alphas, std::span<const double> ms, std::size_t n);

// W_n = sum_{k=1..n} alpha_1 ... alpha_{k-1} M_k, accumulated left to right.
double simulate_W(std::span<const double> alphas, std::span<const double> ms, std::size_t n);

// Recurrence/transience of a subcritical process from the immigration tail
// functional t * P[log M > t]. Throws UnsupportedRegimeError unless
// mean_log_mu < 0. Transience maps to RightTransient.
RegimeLabel bpre_classify(double tail_liminf, double tail_limsup, double mean_log_mu);

} // namespace erwre

#endif // ERWRE_BRANCHING_HPP
