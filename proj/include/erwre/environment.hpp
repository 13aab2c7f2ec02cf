// Random environments (p_z, M_z) and the indexed coin family.

#ifndef ERWRE_ENVIRONMENT_HPP
#define ERWRE_ENVIRONMENT_HPP

#include "erwre/counter_rng.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>

namespace erwre {

using CookieCount = std::uint64_t;

// Integer cookie counts saturate here. A walk can never consume this many
// cookies, so a saturated site behaves exactly like the true one.
inline constexpr CookieCount kCookieCap = CookieCount{1} << 62;

// Real-valued cookie/immigration sizes saturate here (keeps sums finite).
inline constexpr double kRealCookieCap = 1e300;

// ---- laws of p_z ----------------------------------------------------------

struct FixedP {
    double p;

    bool operator==(const FixedP&) const = default;
};

// p = p_a with probability w, p_b otherwise.
struct TwoPointP {
    double p_a;
    double p_b;
    double w;

    bool operator==(const TwoPointP&) const = default;
};

using PLaw = std::variant<FixedP, TwoPointP>;

// ---- laws of M_z ----------------------------------------------------------

struct NoCookies {
    bool operator==(const NoCookies&) const = default;
};

struct FixedCount {
    CookieCount m;

    bool operator==(const FixedCount&) const = default;
};

// P[M >= k] = (1 + beta log k)^-lambda for k >= 2, P[M = 1] = 0.
struct ExampleLaw {
    double lambda;
    double beta;

    bool operator==(const ExampleLaw&) const = default;
};

// Uniform on {0, ..., m_max}.
struct BoundedUniform {
    CookieCount m_max;

    bool operator==(const BoundedUniform&) const = default;
};

using CookieLaw = std::variant<NoCookies, FixedCount, ExampleLaw, BoundedUniform>;

enum class Mask { Everywhere, PositiveOnly, NegativeOnly };

struct EnvironmentSpec {
    PLaw p_law = FixedP{0.5};
    CookieLaw cookie_law = NoCookies{};
    Mask mask = Mask::Everywhere;

    // Throws std::domain_error when a p value is outside (0,1) or a law
    // parameter is out of range.
    void validate() const;

    bool operator==(const EnvironmentSpec&) const = default;
};

bool receives_cookies(Mask mask, std::int64_t z) noexcept;

std::string to_string(Mask mask);
Mask parse_mask(const std::string& text);

struct Site {
    double p = 0.5;
    CookieCount m = 0;

    bool operator==(const Site&) const = default;
};

// A seed-deterministic realization of the i.i.d. family (p_z, M_z).
// Sites listed in the optional window override the sampled values; this is
// how fixed fixtures (and JSON-exported windows) are evaluated.
class Environment {
public:
    using Window = std::map<std::int64_t, Site>;

    Environment(EnvironmentSpec spec, std::uint64_t master_seed);

    // Every site outside `window` follows `spec`.
    Environment(EnvironmentSpec spec, std::uint64_t master_seed, Window window);

    Site site(std::int64_t z) const;

    const EnvironmentSpec& spec() const noexcept { return spec_; }
    std::uint64_t master_seed() const noexcept { return seed_; }
    const Window* window() const noexcept { return window_.get(); }

private:
    EnvironmentSpec spec_;
    std::uint64_t seed_;
    std::shared_ptr<const Window> window_;
};

inline Site materialize_site(const Environment& env, std::int64_t z) { return env.site(z); }

// The indexed family X_i^(z) of +-1 flips. flip(z, i) for i <= M_z is +1.
class CoinSource {
public:
    CoinSource(std::uint64_t master_seed, std::uint64_t stream_tag) noexcept
        : seed_{master_seed},
          tag_{stream_tag},
          prefix_{hash_words({master_seed, stream_tag, static_cast<std::uint64_t>(Domain::Coin)})}
    {
    }

    // Uniform variate behind flip (z, i); independent of the environment.
    double uniform(std::int64_t z, std::uint64_t i) const noexcept;

    // Hash state for site z: uniform(z, i) is to_open_unit(hash_continue(site_key(z), {i})).
    std::uint64_t site_key(std::int64_t z) const noexcept
    {
        return hash_continue(prefix_, {static_cast<std::uint64_t>(z)});
    }

    int flip(const Site& site, std::int64_t z, std::uint64_t i) const noexcept
    {
        if (i <= site.m) {
            return +1;
        }
        return uniform(z, i) < site.p ? +1 : -1;
    }

    int flip(const Environment& env, std::int64_t z, std::uint64_t i) const
    {
        return flip(env.site(z), z, i);
    }

    std::uint64_t master_seed() const noexcept { return seed_; }
    std::uint64_t stream_tag() const noexcept { return tag_; }

private:
    std::uint64_t seed_;
    std::uint64_t tag_;
    std::uint64_t prefix_; // hash state after (seed, tag, Domain::Coin)
};

// Throws std::domain_error for i == 0.
int coin_flip(const CoinSource& coins, const Environment& env, std::int64_t z, std::uint64_t i);

// ---- closed-form functionals ----------------------------------------------

// (1-p)/p; std::domain_error unless 0 < p < 1.
double rho(double p);

double mean_log_rho(const EnvironmentSpec& spec);

// Inverse-CDF draw of p from its law.
double sample_p(const PLaw& law, double u);

// P[M >= k] under the example law, k >= 2.
double example_tail(double lambda, double beta, double k);

// Inverse CDF of the example law as a real number (an exact integer below
// 2^53), saturating at kRealCookieCap. Throws std::domain_error unless 0<u<1.
double example_cookie_quantile(double lambda, double beta, double u);

// Integer version, saturating at kCookieCap. Never returns 1.
CookieCount sample_cookie_example(double lambda, double beta, double u);

// Real-valued inverse CDF for any cookie law (used for immigration sizes).
double cookie_quantile(const CookieLaw& law, double u);

CookieCount saturate_cookies(double m) noexcept;

// P[log M_0 > t], t >= 0. For the example law and e^t >= 2 this uses the
// continuous tail (1 + beta t)^-lambda.
double cookie_log_tail(const EnvironmentSpec& spec, double t);

// ---- flat key=value form --------------------------------------------------

using KeyValues = std::map<std::string, std::string>;

// Keys: p_law, p, p_a, p_b, w, cookie_law, lambda, beta, m, m_max, mask.
EnvironmentSpec spec_from_key_values(const KeyValues& kv);
KeyValues spec_to_key_values(const EnvironmentSpec& spec);

std::string describe(const EnvironmentSpec& spec);

} // namespace erwre

#endif // ERWRE_ENVIRONMENT_HPP
