#include "erwre/environment.hpp"

#include "erwre/counter_rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace erwre {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_open_probability(double p, const char* what)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error(std::string(what) + " must lie in (0,1)");
    }
}

std::string format_real(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_real(const KeyValues& kv, const std::string& key)
{
    auto it = kv.find(key);
    if (it == kv.end()) {
        throw std::invalid_argument("missing key '" + key + "'");
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(it->second, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != it->second.size()) {
        throw std::invalid_argument("key '" + key + "' is not a number: " + it->second);
    }
    return value;
}

CookieCount parse_count(const KeyValues& kv, const std::string& key)
{
    auto it = kv.find(key);
    if (it == kv.end()) {
        throw std::invalid_argument("missing key '" + key + "'");
    }
    std::size_t used = 0;
    unsigned long long value = 0;
    try {
        value = std::stoull(it->second, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != it->second.size() || it->second.front() == '-') {
        throw std::invalid_argument("key '" + key + "' is not a count: " + it->second);
    }
    return value;
}

std::string value_or(const KeyValues& kv, const std::string& key, const std::string& fallback)
{
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

} // namespace

void EnvironmentSpec::validate() const
{
    std::visit(Overloaded{
                   [](const FixedP& law) { require_open_probability(law.p, "p"); },
                   [](const TwoPointP& law) {
                       require_open_probability(law.p_a, "p_a");
                       require_open_probability(law.p_b, "p_b");
                       if (!(law.w >= 0.0 && law.w <= 1.0)) {
                           throw std::domain_error("w must lie in [0,1]");
                       }
                   },
               },
               p_law);
    std::visit(Overloaded{
                   [](const NoCookies&) {},
                   [](const FixedCount& law) {
                       if (law.m > kCookieCap) {
                           throw std::domain_error("m exceeds the cookie cap");
                       }
                   },
                   [](const ExampleLaw& law) {
                       if (!(law.lambda > 0.0) || !(law.beta > 0.0) || !std::isfinite(law.lambda) ||
                           !std::isfinite(law.beta)) {
                           throw std::domain_error("lambda and beta must be positive");
                       }
                   },
                   [](const BoundedUniform& law) {
                       if (law.m_max > kCookieCap) {
                           throw std::domain_error("m_max exceeds the cookie cap");
                       }
                   },
               },
               cookie_law);
}

bool receives_cookies(Mask mask, std::int64_t z) noexcept
{
    switch (mask) {
    case Mask::Everywhere:
        return true;
    case Mask::PositiveOnly:
        return z > 0;
    case Mask::NegativeOnly:
        return z < 0;
    }
    return false;
}

std::string to_string(Mask mask)
{
    switch (mask) {
    case Mask::Everywhere:
        return "everywhere";
    case Mask::PositiveOnly:
        return "positive";
    case Mask::NegativeOnly:
        return "negative";
    }
    return "?";
}

Mask parse_mask(const std::string& text)
{
    if (text == "everywhere") return Mask::Everywhere;
    if (text == "positive") return Mask::PositiveOnly;
    if (text == "negative") return Mask::NegativeOnly;
    throw std::invalid_argument("unknown mask '" + text + "' (everywhere|positive|negative)");
}

// ---- Environment ----------------------------------------------------------

Environment::Environment(EnvironmentSpec spec, std::uint64_t master_seed)
    : spec_{std::move(spec)}, seed_{master_seed}
{
    spec_.validate();
}

Environment::Environment(EnvironmentSpec spec, std::uint64_t master_seed, Window window)
    : Environment(std::move(spec), master_seed)
{
    for (const auto& [z, s] : window) {
        require_open_probability(s.p, "window p");
        if (s.m > kCookieCap) {
            throw std::domain_error("window m exceeds the cookie cap");
        }
    }
    window_ = std::make_shared<const Window>(std::move(window));
}

Site Environment::site(std::int64_t z) const
{
    if (window_) {
        if (auto it = window_->find(z); it != window_->end()) {
            return it->second;
        }
    }
    const auto key = static_cast<std::uint64_t>(z);
    Site s;
    s.p = sample_p(spec_.p_law,
                   to_open_unit(hash_words({seed_, static_cast<std::uint64_t>(Domain::SiteP), key})));
    if (receives_cookies(spec_.mask, z)) {
        const double u = to_open_unit(
            hash_words({seed_, static_cast<std::uint64_t>(Domain::SiteCookies), key}));
        s.m = saturate_cookies(cookie_quantile(spec_.cookie_law, u));
    }
    return s;
}

double CoinSource::uniform(std::int64_t z, std::uint64_t i) const noexcept
{
    return to_open_unit(hash_continue(prefix_, {static_cast<std::uint64_t>(z), i}));
}

int coin_flip(const CoinSource& coins, const Environment& env, std::int64_t z, std::uint64_t i)
{
    if (i == 0) {
        throw std::domain_error("visit index starts at 1");
    }
    return coins.flip(env, z, i);
}

// ---- closed forms ---------------------------------------------------------

double rho(double p)
{
    require_open_probability(p, "p");
    return (1.0 - p) / p;
}

double mean_log_rho(const EnvironmentSpec& spec)
{
    return std::visit(Overloaded{
                          [](const FixedP& law) { return std::log(rho(law.p)); },
                          [](const TwoPointP& law) {
                              return law.w * std::log(rho(law.p_a)) +
                                     (1.0 - law.w) * std::log(rho(law.p_b));
                          },
                      },
                      spec.p_law);
}

double sample_p(const PLaw& law, double u)
{
    return std::visit(Overloaded{
                          [](const FixedP& l) { return l.p; },
                          [u](const TwoPointP& l) { return u < l.w ? l.p_a : l.p_b; },
                      },
                      law);
}

double example_tail(double lambda, double beta, double k)
{
    return std::pow(1.0 + beta * std::log(k), -lambda);
}

double example_cookie_quantile(double lambda, double beta, double u)
{
    if (!(u > 0.0 && u < 1.0)) {
        throw std::domain_error("uniform variate must lie in (0,1)");
    }
    if (!(lambda > 0.0 && beta > 0.0)) {
        throw std::domain_error("lambda and beta must be positive");
    }
    if (u > example_tail(lambda, beta, 2.0)) {
        return 0.0;
    }
    // Largest k >= 2 with (1 + beta log k)^-lambda >= u.
    const double exponent = -std::log(u) / lambda;
    static const double log_cap = std::log(kRealCookieCap);
    if (exponent > 700.0) {
        return kRealCookieCap;
    }
    const double log_k = std::expm1(exponent) / beta;
    if (log_k >= log_cap) {
        return kRealCookieCap;
    }
    double k = std::max(2.0, std::floor(std::exp(log_k)));
    // The candidate is off by at most a couple of units from rounding. Resolve
    // it exactly while consecutive tails are still distinguishable in double.
    if (k < 0x1.0p40) {
        for (int guard = 0; guard < 4 && k > 2.0 && example_tail(lambda, beta, k) < u; ++guard) {
            k -= 1.0;
        }
        for (int guard = 0; guard < 4 && example_tail(lambda, beta, k + 1.0) >= u; ++guard) {
            k += 1.0;
        }
    }
    return k;
}

CookieCount saturate_cookies(double m) noexcept
{
    if (!(m < static_cast<double>(kCookieCap))) {
        return kCookieCap;
    }
    return static_cast<CookieCount>(m);
}

CookieCount sample_cookie_example(double lambda, double beta, double u)
{
    return saturate_cookies(example_cookie_quantile(lambda, beta, u));
}

double cookie_quantile(const CookieLaw& law, double u)
{
    return std::visit(Overloaded{
                          [](const NoCookies&) { return 0.0; },
                          [](const FixedCount& l) { return static_cast<double>(l.m); },
                          [u](const ExampleLaw& l) {
                              return example_cookie_quantile(l.lambda, l.beta, u);
                          },
                          [u](const BoundedUniform& l) {
                              const double n = static_cast<double>(l.m_max) + 1.0;
                              return std::min(std::floor(u * n), static_cast<double>(l.m_max));
                          },
                      },
                      law);
}

double cookie_log_tail(const EnvironmentSpec& spec, double t)
{
    if (!(t >= 0.0)) {
        throw std::domain_error("t must be nonnegative");
    }
    return std::visit(Overloaded{
                          [](const NoCookies&) { return 0.0; },
                          [t](const FixedCount& l) {
                              return (l.m >= 1 && std::log(static_cast<double>(l.m)) > t) ? 1.0 : 0.0;
                          },
                          [t](const ExampleLaw& l) {
                              if (t < std::log(2.0)) {
                                  return example_tail(l.lambda, l.beta, 2.0);
                              }
                              return std::pow(1.0 + l.beta * t, -l.lambda);
                          },
                          [t](const BoundedUniform& l) {
                              const double n = static_cast<double>(l.m_max);
                              const double above = n - std::floor(std::exp(t));
                              return above > 0.0 ? above / (n + 1.0) : 0.0;
                          },
                      },
                      spec.cookie_law);
}

// ---- key=value form -------------------------------------------------------

EnvironmentSpec spec_from_key_values(const KeyValues& kv)
{
    EnvironmentSpec spec;
    const std::string p_law = value_or(kv, "p_law", "fixed");
    if (p_law == "fixed") {
        spec.p_law = FixedP{parse_real(kv, "p")};
    } else if (p_law == "two_point") {
        spec.p_law = TwoPointP{parse_real(kv, "p_a"), parse_real(kv, "p_b"), parse_real(kv, "w")};
    } else {
        throw std::invalid_argument("unknown p_law '" + p_law + "' (fixed|two_point)");
    }

    const std::string cookie_law = value_or(kv, "cookie_law", "none");
    if (cookie_law == "none") {
        spec.cookie_law = NoCookies{};
    } else if (cookie_law == "fixed") {
        spec.cookie_law = FixedCount{parse_count(kv, "m")};
    } else if (cookie_law == "example") {
        spec.cookie_law = ExampleLaw{parse_real(kv, "lambda"), parse_real(kv, "beta")};
    } else if (cookie_law == "bounded_uniform") {
        spec.cookie_law = BoundedUniform{parse_count(kv, "m_max")};
    } else {
        throw std::invalid_argument("unknown cookie_law '" + cookie_law +
                                    "' (none|fixed|example|bounded_uniform)");
    }

    spec.mask = parse_mask(value_or(kv, "mask", "everywhere"));
    spec.validate();
    return spec;
}

KeyValues spec_to_key_values(const EnvironmentSpec& spec)
{
    KeyValues kv;
    std::visit(Overloaded{
                   [&](const FixedP& l) {
                       kv["p_law"] = "fixed";
                       kv["p"] = format_real(l.p);
                   },
                   [&](const TwoPointP& l) {
                       kv["p_law"] = "two_point";
                       kv["p_a"] = format_real(l.p_a);
                       kv["p_b"] = format_real(l.p_b);
                       kv["w"] = format_real(l.w);
                   },
               },
               spec.p_law);
    std::visit(Overloaded{
                   [&](const NoCookies&) { kv["cookie_law"] = "none"; },
                   [&](const FixedCount& l) {
                       kv["cookie_law"] = "fixed";
                       kv["m"] = std::to_string(l.m);
                   },
                   [&](const ExampleLaw& l) {
                       kv["cookie_law"] = "example";
                       kv["lambda"] = format_real(l.lambda);
                       kv["beta"] = format_real(l.beta);
                   },
                   [&](const BoundedUniform& l) {
                       kv["cookie_law"] = "bounded_uniform";
                       kv["m_max"] = std::to_string(l.m_max);
                   },
               },
               spec.cookie_law);
    kv["mask"] = to_string(spec.mask);
    return kv;
}

std::string describe(const EnvironmentSpec& spec)
{
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, v] : spec_to_key_values(spec)) {
        os << (first ? "" : " ") << k << '=' << v;
        first = false;
    }
    return os.str();
}

} // namespace erwre
