#include "erwre/analysis.hpp"

#include "erwre/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace erwre {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// log of sum_{l=-z+1}^{k} prod_{j=l}^{k} rho_{-j}; -inf for an empty sum.
double log_ratio_sum(const Environment& env, std::int64_t z, std::int64_t k)
{
    const std::int64_t lo = -z + 1;
    if (lo > k) {
        return -std::numeric_limits<double>::infinity();
    }
    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(k - lo + 1));
    double running = 0.0;
    double top = -std::numeric_limits<double>::infinity();
    for (std::int64_t l = k; l >= lo; --l) {
        running += std::log(rho(env.site(-l).p));
        logs.push_back(running);
        top = std::max(top, running);
    }
    double acc = 0.0;
    for (double v : logs) {
        acc += std::exp(v - top);
    }
    return top + std::log(acc);
}

// log(1 - 1/(1 + e^s)) = -log(1 + e^-s).
double log_hit_from(double s)
{
    if (s == -std::numeric_limits<double>::infinity()) {
        return s;
    }
    if (s > 0.0) {
        return -std::log1p(std::exp(-s));
    }
    return s - std::log1p(std::exp(s));
}

void require_window(std::int64_t z, std::int64_t k)
{
    if (k < 1 || -k >= z) {
        throw std::invalid_argument("hitting probability needs k >= 1 and -k < z");
    }
}

} // namespace

double hit_prob_closed(const Environment& env, std::int64_t z, std::int64_t k)
{
    require_window(z, k);
    return std::exp(log_hit_from(log_ratio_sum(env, z, k)));
}

std::vector<double> hit_prob_profile(const Environment& env, std::int64_t z, std::int64_t k)
{
    require_window(z, k);
    const auto n = static_cast<std::size_t>(z + k);
    std::vector<double> lower(n), upper(n), rhs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = env.site(-k + static_cast<std::int64_t>(i)).p;
        lower[i] = -(1.0 - p);
        upper[i] = -p;
    }
    // h(-k-1) = 1 moves to the right-hand side of the first row.
    rhs[0] = -lower[0];

    // Forward sweep with unit diagonal.
    std::vector<double> c_prime(n), d_prime(n);
    c_prime[0] = upper[0];
    d_prime[0] = rhs[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double denom = 1.0 - lower[i] * c_prime[i - 1];
        c_prime[i] = upper[i] / denom;
        d_prime[i] = (rhs[i] - lower[i] * d_prime[i - 1]) / denom;
    }
    std::vector<double> h(n);
    h[n - 1] = d_prime[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        h[i] = d_prime[i] - c_prime[i] * h[i + 1];
    }
    return h;
}

double hit_prob_oracle(const Environment& env, std::int64_t z, std::int64_t k)
{
    return hit_prob_profile(env, z, k).front();
}

double prob_A_n(const Environment& env, std::int64_t z, std::int64_t n)
{
    if (n < 1 || n <= -z) {
        throw std::invalid_argument("prob_A_n needs n > max(0, -z)");
    }
    const double log_final = log_hit_from(log_ratio_sum(env, z, n));
    const CookieCount m = env.site(-n).m;
    if (m == 0) {
        return std::exp(log_final);
    }
    // Each cookie at -n sends the walk to -n+1, which must come back to -n
    // before reaching z.
    const double log_return = log_hit_from(log_ratio_sum(env, z, n - 1));
    return std::exp(static_cast<double>(m) * log_return + log_final);
}

// ---- classifier -------------------------------------------------------------

TailDescriptor example_tail_descriptor(double lambda, double beta)
{
    if (!(lambda > 0.0 && beta > 0.0)) {
        throw std::domain_error("lambda and beta must be positive");
    }
    if (lambda > 1.0) {
        return {true, 0.0, 0.0};
    }
    if (lambda == 1.0) {
        return {false, 1.0 / beta, 1.0 / beta};
    }
    return {false, kInfinity, kInfinity};
}

TailDescriptor tail_descriptor(const CookieLaw& law)
{
    return std::visit(Overloaded{
                          [](const ExampleLaw& l) { return example_tail_descriptor(l.lambda, l.beta); },
                          [](const auto&) { return TailDescriptor{true, 0.0, 0.0}; },
                      },
                      law);
}

RegimeLabel classify_regime_thm1(const TailDescriptor& tails, double mean_log_rho)
{
    if (!(mean_log_rho > 0.0)) {
        throw UnsupportedRegimeError("the cookie classifier needs E[log rho_0] > 0");
    }
    if (tails.log_moment_finite) {
        return RegimeLabel::LeftTransient;
    }
    if (tails.tail_limsup < mean_log_rho) {
        return RegimeLabel::Recurrent;
    }
    if (tails.tail_liminf > mean_log_rho) {
        return RegimeLabel::RightTransient;
    }
    return RegimeLabel::Indeterminate;
}

RegimeLabel classify_rwre(double mean_log_rho)
{
    if (mean_log_rho > 0.0) return RegimeLabel::LeftTransient;
    if (mean_log_rho < 0.0) return RegimeLabel::RightTransient;
    return RegimeLabel::Recurrent;
}

RegimeLabel predict_regime(const EnvironmentSpec& spec)
{
    const double mlr = mean_log_rho(spec);
    const bool cookie_free = std::visit(Overloaded{
                                            [](const NoCookies&) { return true; },
                                            [](const FixedCount& l) { return l.m == 0; },
                                            [](const BoundedUniform& l) { return l.m_max == 0; },
                                            [](const ExampleLaw&) { return false; },
                                        },
                                        spec.cookie_law);
    if (cookie_free) {
        return classify_rwre(mlr);
    }
    if (!(mlr > 0.0)) {
        return RegimeLabel::Indeterminate;
    }
    const TailDescriptor tails = tail_descriptor(spec.cookie_law);
    switch (spec.mask) {
    case Mask::Everywhere:
        return classify_regime_thm1(tails, mlr);
    case Mask::PositiveOnly:
        // Right excursions are a.s. finite below the threshold; above it
        // escape to +infinity only has positive probability.
        return tails.tail_limsup < mlr ? RegimeLabel::LeftTransient : RegimeLabel::Indeterminate;
    case Mask::NegativeOnly:
        return tails.log_moment_finite ? RegimeLabel::LeftTransient : RegimeLabel::Recurrent;
    }
    return RegimeLabel::Indeterminate;
}

std::vector<double> power_series_diagnostic(std::span<const double> m_seq, double x,
                                            std::size_t n_terms)
{
    if (!(x > 0.0 && x < 1.0)) {
        throw std::domain_error("x must lie in (0,1)");
    }
    if (m_seq.size() < n_terms) {
        throw std::invalid_argument("fewer cookie counts than requested terms");
    }
    std::vector<double> sums;
    sums.reserve(n_terms);
    double acc = 0.0;
    double power = 1.0;
    for (std::size_t n = 1; n <= n_terms; ++n) {
        power *= x;
        acc += m_seq[n - 1] * power;
        sums.push_back(acc);
    }
    return sums;
}

// ---- JSON windows -----------------------------------------------------------

Environment::Window window_from_json(const std::string& text)
{
    Environment::Window window;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("window JSON: ") + e.what());
    }
    if (!doc.is_array()) {
        throw std::invalid_argument("window JSON must be an array of {z, p, m} records");
    }
    for (const auto& rec : doc) {
        try {
            Site s;
            s.p = rec.at("p").get<double>();
            s.m = rec.contains("m") ? rec.at("m").get<CookieCount>() : 0;
            if (!(s.p > 0.0 && s.p < 1.0)) {
                throw std::domain_error("window p must lie in (0,1)");
            }
            window[rec.at("z").get<std::int64_t>()] = s;
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(std::string("window record: ") + e.what());
        }
    }
    return window;
}

std::string window_to_json(const Environment::Window& window)
{
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& [z, s] : window) {
        doc.push_back({{"z", z}, {"p", s.p}, {"m", s.m}});
    }
    return doc.dump();
}

Environment::Window export_window(const Environment& env, std::int64_t lo, std::int64_t hi)
{
    Environment::Window window;
    for (std::int64_t z = lo; z <= hi; ++z) {
        window[z] = env.site(z);
    }
    return window;
}

} // namespace erwre
