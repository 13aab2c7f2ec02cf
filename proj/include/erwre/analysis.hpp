// Quenched hitting probabilities, the regime classifier and its tail inputs.

#ifndef ERWRE_ANALYSIS_HPP
#define ERWRE_ANALYSIS_HPP

#include "erwre/environment.hpp"
#include "erwre/regime.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace erwre {

// Probability that a cookie-free walk started at -k hits -k-1 before z:
//
//   1 - 1 / (1 + sum_{l=-z+1}^{k} prod_{j=l}^{k} rho_{-j}),
//
// accumulated in log space so deep lattices do not overflow.
// Throws std::invalid_argument unless -k < z and k >= 1.
double hit_prob_closed(const Environment& env, std::int64_t z, std::int64_t k);

// The same probability from first-step analysis: solves
// h(x) = p_x h(x+1) + (1 - p_x) h(x-1) on -k <= x <= z-1 with h(-k-1) = 1,
// h(z) = 0 by tridiagonal elimination. Returns h over -k..z-1 (front is
// h(-k)).
std::vector<double> hit_prob_profile(const Environment& env, std::int64_t z, std::int64_t k);

double hit_prob_oracle(const Environment& env, std::int64_t z, std::int64_t k);

// Probability that after its first visit to -n the walk reaches -n-1 before
// z, when the only remaining cookies sit on -n:
//   (hit_prob_closed(z, n-1))^{M_{-n}} * hit_prob_closed(z, n).
// Throws std::invalid_argument unless n > max(0, -z).
double prob_A_n(const Environment& env, std::int64_t z, std::int64_t n);

struct TailDescriptor {
    bool log_moment_finite = true; // E[(log M_0)_+] < infinity
    double tail_liminf = 0.0;      // liminf t P[log M_0 > t]
    double tail_limsup = 0.0;      // limsup t P[log M_0 > t]

    bool operator==(const TailDescriptor&) const = default;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

TailDescriptor example_tail_descriptor(double lambda, double beta);

// Analytic descriptor for any supported cookie law.
TailDescriptor tail_descriptor(const CookieLaw& law);

// Trichotomy for cookies of maximal strength on a left-transient
// environment. Throws UnsupportedRegimeError unless mean_log_rho > 0.
RegimeLabel classify_regime_thm1(const TailDescriptor& tails, double mean_log_rho);

// Zero-cookie baseline: sign of E[log rho_0].
RegimeLabel classify_rwre(double mean_log_rho);

// Best available prediction for a whole-line environment spec: the RWRE
// baseline when there are no cookies, otherwise the cookie classifier
// (Indeterminate when its hypotheses do not apply).
RegimeLabel predict_regime(const EnvironmentSpec& spec);

// Partial sums S_N = sum_{n<=N} M_{-n} x^n for N = 1..n_terms, with
// m_seq[n-1] = M_{-n}. Throws std::domain_error unless 0 < x < 1.
std::vector<double> power_series_diagnostic(std::span<const double> m_seq, double x,
                                            std::size_t n_terms);

// ---- environment windows as JSON ------------------------------------------

// JSON array of {"z": int, "p": real, "m": int} records.
Environment::Window window_from_json(const std::string& text);
std::string window_to_json(const Environment::Window& window);

// Sites lo..hi of `env`, e.g. -k-1..z for the hitting formulas.
Environment::Window export_window(const Environment& env, std::int64_t lo, std::int64_t hi);

} // namespace erwre

#endif // ERWRE_ANALYSIS_HPP
