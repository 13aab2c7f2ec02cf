#include "erwre/experiment.hpp"

#include "erwre/analysis.hpp"
#include "erwre/branching.hpp"
#include "erwre/counter_rng.hpp"
#include "erwre/errors.hpp"
#include "erwre/parallel.hpp"
#include "erwre/stats.hpp"
#include "erwre/walk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace erwre {

namespace {

using nlohmann::json;

// Width of the binomial intervals reported in aggregates.
constexpr double kIntervalSigmas = 4.0;

const std::set<std::string> kKnownKeys = {
    "p_law", "p",       "p_a",     "p_b",   "w",       "cookie_law", "lambda", "beta",
    "m",     "m_max",   "mask",    "seed",  "replicas", "horizon",   "kmax",   "format",
    "out",   "workers", "z",       "window", "level",
};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& text)
{
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        // Accept 1e5-style literals as long as they are integral.
        const double d = std::stod(text, &used);
        if (used == text.size() && d >= 0.0 && d == std::floor(d) && d < 1.8e19) {
            if (text.find_first_of(".eE") != std::string::npos) {
                return static_cast<std::uint64_t>(d);
            }
        }
        v = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || text.front() == '-') {
        throw UsageError("'" + key + "' expects a nonnegative integer, got '" + text + "'");
    }
    return v;
}

double parse_double(const std::string& key, const std::string& text)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw UsageError("'" + key + "' expects a number, got '" + text + "'");
    }
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_double(key, trim(item)));
    }
    if (out.empty()) {
        throw UsageError("'" + key + "' is empty");
    }
    return out;
}

std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string cell_text(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return v;
            } else if constexpr (std::is_same_v<T, double>) {
                return format_double(v);
            } else {
                return std::to_string(v);
            }
        },
        c);
}

json cell_json(const Cell& c)
{
    return std::visit([](const auto& v) { return json(v); }, c);
}

Cell hit_cell(const WalkSummary& s, std::int64_t target)
{
    auto it = s.hit_times.find(target);
    if (it == s.hit_times.end() || !it->second) {
        return std::string("timeout");
    }
    return *it->second;
}

json interval_json(std::uint64_t successes, std::uint64_t trials)
{
    const Interval iv = binomial_interval(successes, trials, kIntervalSigmas);
    return {{"estimate", iv.estimate}, {"lo", iv.lo}, {"hi", iv.hi}, {"count", successes},
            {"trials", trials}};
}

json spec_json(const EnvironmentSpec& spec)
{
    json j = json::object();
    for (const auto& [k, v] : spec_to_key_values(spec)) {
        j[k] = v;
    }
    return j;
}

std::string regime_or_unsupported(double liminf, double limsup, double mean_log_mu)
{
    try {
        return to_string(bpre_classify(liminf, limsup, mean_log_mu));
    } catch (const UnsupportedRegimeError&) {
        return "Unsupported";
    }
}

// Empirical direction of an ensemble of final positions.
std::string trend_label(std::uint64_t negative, std::uint64_t positive, std::uint64_t total)
{
    const double n = static_cast<double>(total);
    if (static_cast<double>(negative) >= 0.9 * n) return to_string(RegimeLabel::LeftTransient);
    if (static_cast<double>(positive) >= 0.9 * n) return to_string(RegimeLabel::RightTransient);
    return to_string(RegimeLabel::Indeterminate);
}

// ---- walk / excursion -------------------------------------------------------

void add_walk_columns(EnsembleReport& report)
{
    report.columns = {"replica", "seed",    "start", "steps", "final",
                      "min",     "max",     "returns", "t0",  "terminated_by"};
}

ReportRow walk_row(std::uint64_t replica, std::uint64_t seed, const WalkSummary& s)
{
    ReportRow row;
    row.cells = {replica,          seed,           s.start,
                 s.steps_taken,    s.final_position, s.min_position,
                 s.max_position,   s.returns_to_origin, hit_cell(s, 0),
                 std::string(to_string(s.terminated_by))};
    return row;
}

EnsembleReport run_walks(const ExperimentConfig& cfg, bool excursion)
{
    const std::uint64_t horizon = cfg.effective_horizon();
    auto summaries = parallel_map(cfg.replicas, cfg.workers, [&](std::size_t r) {
        const Environment env(cfg.env, replica_seed(cfg.seed, r));
        const CoinSource coins(cfg.seed, r);
        if (excursion) {
            return excursion_upcrossings(env, coins, horizon);
        }
        RunOptions options;
        options.horizon = horizon;
        options.watch_targets = {0};
        return run_walk(0, env, coins, options);
    });

    EnsembleReport report;
    add_walk_columns(report);
    std::vector<double> finals, returns, steps;
    std::uint64_t negative = 0, positive = 0, hit_zero = 0;
    std::uint64_t deepest = 0;
    double mean_u1 = 0.0;
    for (std::size_t r = 0; r < summaries.size(); ++r) {
        const WalkSummary& s = summaries[r];
        ReportRow row = walk_row(r, cfg.seed, s);
        if (excursion) {
            row.extra["upcrossings"] = s.upcrossings;
            deepest = std::max<std::uint64_t>(deepest, s.upcrossings.size() - 1);
            mean_u1 += static_cast<double>(s.upcrossings_at(1));
        }
        report.rows.push_back(std::move(row));
        finals.push_back(static_cast<double>(s.final_position));
        returns.push_back(static_cast<double>(s.returns_to_origin));
        steps.push_back(static_cast<double>(s.steps_taken));
        negative += s.final_position < 0;
        positive += s.final_position > 0;
        hit_zero += s.hit_times.at(0).has_value();
    }

    const std::uint64_t n = summaries.size();
    report.aggregate = {
        {"replicas", n},
        {"horizon", horizon},
        {"mean_final", mean(finals)},
        {"median_final", median(finals)},
        {"median_returns", median(returns)},
        {"median_steps", median(steps)},
        {"final_negative", interval_json(negative, n)},
        {"final_positive", interval_json(positive, n)},
        {"hit_zero", interval_json(hit_zero, n)},
        {"mean_log_rho", mean_log_rho(cfg.env)},
        {"predicted", to_string(predict_regime(cfg.env))},
        {"trend", trend_label(negative, positive, n)},
    };
    if (excursion) {
        report.aggregate["timeouts"] = n - hit_zero;
        report.aggregate["deepest_upcrossing_site"] = deepest;
        report.aggregate["mean_U1"] = mean_u1 / static_cast<double>(n);
    }
    return report;
}

// ---- couple -----------------------------------------------------------------

struct CoupleOutcome {
    std::vector<ReportRow> rows;
    std::uint64_t violations = 0;
    std::uint64_t bookkeeping_errors = 0;
    std::uint64_t lower_bounds = 0;
    bool returned = false;
};

CoupleOutcome couple_one(const ExperimentConfig& cfg, std::size_t r)
{
    const std::uint64_t horizon = cfg.effective_horizon();
    const Environment env(cfg.env, replica_seed(cfg.seed, r));
    const CoinSource coins(cfg.seed, r);
    const WalkSummary walk = excursion_upcrossings(env, coins, horizon);

    CoupledOptions options;
    options.k_max = std::max<std::size_t>(cfg.effective_k_max(),
                                          static_cast<std::size_t>(std::max<std::int64_t>(walk.max_position, 1)));
    // The walk consumes at most `horizon` flips in total, so scanning that
    // many failures per site covers every upcrossing it can make.
    options.scan_budget = horizon;
    const CoupledPath v = simulate_V(env, coins, options);

    CoupleOutcome out;
    const auto t0 = walk.hit_times.at(0);
    out.returned = t0.has_value();
    const Cell t0_cell = out.returned ? Cell{*t0} : Cell{std::string("timeout")};
    bool alive = true; // V_j > 0 for all 0 <= j < k
    for (std::size_t k = 1; k <= options.k_max; ++k) {
        alive = alive && v.values[k - 1] > 0;
        const std::uint64_t u = walk.upcrossings_at(k);
        const std::uint64_t vk = v.values[k];
        const std::uint64_t indicator = alive ? 1 : 0;
        const bool violation = out.returned ? (u != vk * indicator) : (u > vk);
        out.violations += violation;
        out.lower_bounds += v.lower_bound[k];
        const std::uint64_t expected_failures = std::min(v.values[k - 1], options.scan_budget);
        out.bookkeeping_errors += v.failures_consumed[k] != expected_failures;

        ReportRow row;
        row.cells = {static_cast<std::uint64_t>(r), t0_cell, static_cast<std::uint64_t>(k), u, vk,
                     indicator, static_cast<std::uint64_t>(violation)};
        out.rows.push_back(std::move(row));
    }
    return out;
}

EnsembleReport run_couple(const ExperimentConfig& cfg)
{
    auto outcomes = parallel_map(cfg.replicas, cfg.workers, [&](std::size_t r) { return couple_one(cfg, r); });

    EnsembleReport report;
    report.columns = {"replica", "t0_or_timeout", "k", "U_k", "V_k", "indicator", "violation"};
    std::uint64_t violations = 0, bookkeeping = 0, returned = 0, lower = 0;
    for (auto& o : outcomes) {
        violations += o.violations;
        bookkeeping += o.bookkeeping_errors;
        returned += o.returned;
        lower += o.lower_bounds;
        for (auto& row : o.rows) {
            report.rows.push_back(std::move(row));
        }
    }
    report.violations = violations + bookkeeping;
    report.aggregate = {
        {"paths", cfg.replicas},
        {"horizon", cfg.effective_horizon()},
        {"violations", violations},
        {"bookkeeping_errors", bookkeeping},
        {"returned", interval_json(returned, cfg.replicas)},
        {"timeouts", cfg.replicas - returned},
        {"lower_bound_values", lower},
    };
    return report;
}

// ---- bpre -------------------------------------------------------------------

struct BpreOutcome {
    std::vector<ReportRow> rows;
    std::optional<std::size_t> first_zero;
    bool above_square = true;
    double final_value = 0.0;
};

EnsembleReport run_bpre(const ExperimentConfig& cfg)
{
    const std::uint64_t generations = cfg.effective_horizon();
    const std::uint64_t shown = std::min(cfg.effective_k_max(), generations);
    const std::uint64_t square_hi = std::min<std::uint64_t>(100, generations);

    auto outcomes = parallel_map(cfg.replicas, cfg.workers, [&](std::size_t r) {
        BpreOptions options;
        options.generations = generations;
        const BranchingPath path = simulate_bpre(cfg.env, cfg.seed, r, options);
        BpreOutcome out;
        out.first_zero = path.first_zero;
        out.final_value = path.values.back();
        for (std::uint64_t n = 10; n <= square_hi; ++n) {
            out.above_square = out.above_square && path.values[n] >= static_cast<double>(n * n);
        }
        const Cell extinct = path.first_zero ? Cell{static_cast<std::uint64_t>(*path.first_zero)}
                                             : Cell{std::string("none")};
        for (std::uint64_t k = 0; k <= shown; ++k) {
            ReportRow row;
            row.cells = {static_cast<std::uint64_t>(r), k, path.values[k], extinct};
            out.rows.push_back(std::move(row));
        }
        return out;
    });

    EnsembleReport report;
    report.columns = {"replica", "k", "Z_n", "extinct_at"};
    std::uint64_t extinct = 0, survivors_above = 0;
    std::vector<double> first_zeros;
    for (auto& o : outcomes) {
        extinct += o.first_zero.has_value();
        if (o.first_zero) {
            first_zeros.push_back(static_cast<double>(*o.first_zero));
        }
        survivors_above += !o.first_zero && o.above_square && square_hi >= 10;
        for (auto& row : o.rows) {
            report.rows.push_back(std::move(row));
        }
    }
    const double mean_log_mu = -mean_log_rho(cfg.env);
    const TailDescriptor tails = tail_descriptor(cfg.env.cookie_law);
    report.aggregate = {
        {"paths", cfg.replicas},
        {"generations", generations},
        {"hit_zero", interval_json(extinct, cfg.replicas)},
        {"survive_above_square", interval_json(survivors_above, cfg.replicas)},
        {"median_first_zero", first_zeros.empty() ? json(nullptr) : json(median(first_zeros))},
        {"mean_log_mu", mean_log_mu},
        {"tail_liminf", tails.tail_liminf},
        {"tail_limsup", tails.tail_limsup},
        {"predicted", regime_or_unsupported(tails.tail_liminf, tails.tail_limsup, mean_log_mu)},
    };
    return report;
}

// ---- rde --------------------------------------------------------------------

struct RdeSequences {
    std::vector<double> alphas;
    std::vector<double> ms;
};

RdeSequences draw_rde_sequences(const ExperimentConfig& cfg, std::uint64_t replica,
                                std::uint64_t copy, std::size_t n)
{
    RdeSequences s;
    const auto domain = static_cast<std::uint64_t>(Domain::Aux);
    for (std::size_t k = 1; k <= n; ++k) {
        const double p = sample_p(cfg.env.p_law, to_open_unit(hash_words({cfg.seed, replica, domain, copy, k, 0})));
        s.alphas.push_back(1.0 / rho(p));
        s.ms.push_back(cookie_quantile(cfg.env.cookie_law,
                                       to_open_unit(hash_words({cfg.seed, replica, domain, copy, k, 1}))));
    }
    return s;
}

EnsembleReport run_rde(const ExperimentConfig& cfg)
{
    const std::size_t n = cfg.effective_k_max();
    auto pairs = parallel_map(cfg.replicas, cfg.workers, [&](std::size_t r) {
        // Independent environment sequences for the two samples.
        const RdeSequences a = draw_rde_sequences(cfg, r, 0, n);
        const RdeSequences b = draw_rde_sequences(cfg, r, 1, n);
        const double x = simulate_rde(a.alphas, a.ms, n).x_values.back();
        const double w = simulate_W(b.alphas, b.ms, n);
        return std::pair{x, w};
    });

    EnsembleReport report;
    report.columns = {"x_n", "w_n"};
    std::vector<double> xs, ws;
    for (const auto& [x, w] : pairs) {
        ReportRow row;
        row.cells = {x, w};
        report.rows.push_back(std::move(row));
        xs.push_back(x);
        ws.push_back(w);
    }
    const KsResult ks = two_sample_test(xs, ws, cfg.level);
    report.aggregate = {
        {"samples", cfg.replicas}, {"n", n},
        {"ks_statistic", ks.statistic}, {"ks_critical", ks.critical},
        {"level", cfg.level}, {"reject", ks.reject},
        {"median_x", median(xs)}, {"median_w", median(ws)},
    };
    return report;
}

// ---- hitprob ----------------------------------------------------------------

EnsembleReport run_hitprob(const ExperimentConfig& cfg)
{
    Environment::Window window;
    if (!cfg.window_path.empty()) {
        std::ifstream in(cfg.window_path);
        if (!in) {
            throw IoError("cannot read window file '" + cfg.window_path + "'");
        }
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            window = window_from_json(ss.str());
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }
    // Hitting formulas are for the cookie-free walk.
    EnvironmentSpec bare = cfg.env;
    bare.cookie_law = NoCookies{};
    for (auto& [z, s] : window) {
        s.m = 0;
    }
    const Environment env(bare, cfg.seed, window);
    const std::int64_t z = cfg.z;
    const auto k_max = static_cast<std::int64_t>(cfg.effective_k_max());
    const std::uint64_t horizon = cfg.effective_horizon();

    EnsembleReport report;
    report.columns = {"z", "k", "closed", "oracle", "abs_diff", "mc", "mc_lo", "mc_hi", "mc_agrees"};
    double max_diff = 0.0;
    std::uint64_t cases = 0, agree = 0, mismatches = 0;
    for (std::int64_t k = std::max<std::int64_t>(1, 1 - z); k <= k_max; ++k) {
        const double closed = hit_prob_closed(env, z, k);
        const double oracle = hit_prob_oracle(env, z, k);
        const double diff = std::abs(closed - oracle);
        max_diff = std::max(max_diff, diff);
        mismatches += !(diff < 1e-10);

        auto hits = parallel_map(cfg.replicas, cfg.workers, [&](std::size_t t) {
            RunOptions options;
            options.horizon = horizon;
            options.stop_targets = {-k - 1, z};
            const CoinSource coins(cfg.seed, (static_cast<std::uint64_t>(k) << 40) + t);
            const WalkSummary s = run_walk(-k, env, coins, options);
            return static_cast<std::uint64_t>(s.hit_times.at(-k - 1).has_value());
        });
        std::uint64_t successes = 0;
        for (auto h : hits) {
            successes += h;
        }
        const Interval iv = binomial_interval(successes, cfg.replicas, kIntervalSigmas);
        const bool agrees = closed >= iv.lo && closed <= iv.hi;
        agree += agrees;
        ++cases;

        ReportRow row;
        row.cells = {z, k, closed, oracle, diff, iv.estimate, iv.lo, iv.hi,
                     static_cast<std::uint64_t>(agrees)};
        report.rows.push_back(std::move(row));
    }
    report.violations = mismatches;
    report.aggregate = {
        {"cases", cases},
        {"max_abs_diff", max_diff},
        {"oracle_mismatches", mismatches},
        {"mc_trials", cfg.replicas},
        {"mc_agreement", interval_json(agree, std::max<std::uint64_t>(cases, 1))},
    };
    return report;
}

// ---- phase ------------------------------------------------------------------

struct PhaseReplica {
    double final_short = 0.0;
    double final_long = 0.0;
    double returns_short = 0.0;
    double returns_long = 0.0;
};

EnsembleReport run_phase(const ExperimentConfig& cfg)
{
    const std::uint64_t horizon = cfg.effective_horizon();
    const std::uint64_t short_horizon = std::max<std::uint64_t>(1, horizon / 10);
    const double mlr = mean_log_rho(cfg.env);

    EnsembleReport report;
    report.columns = {"lambda",        "beta",          "predicted",         "horizon_short",
                      "horizon_long",  "median_final_short", "median_final_long", "frac_positive_long",
                      "median_returns_short", "median_returns_long", "frac_more_returns"};
    json grid = json::array();
    for (double lambda : cfg.lambdas) {
        for (double beta : cfg.betas) {
            EnvironmentSpec spec = cfg.env;
            spec.cookie_law = ExampleLaw{lambda, beta};
            spec.validate();
            auto reps = parallel_map(cfg.replicas, cfg.workers, [&](std::size_t r) {
                const Environment env(spec, replica_seed(cfg.seed, r));
                const CoinSource coins(cfg.seed, r);
                RunOptions options;
                options.horizon = horizon;
                const WalkSummary lng = run_walk(0, env, coins, options);
                options.horizon = short_horizon;
                const WalkSummary shrt = run_walk(0, env, coins, options);
                return PhaseReplica{static_cast<double>(shrt.final_position),
                                    static_cast<double>(lng.final_position),
                                    static_cast<double>(shrt.returns_to_origin),
                                    static_cast<double>(lng.returns_to_origin)};
            });
            std::vector<double> fs, fl, rs, rl;
            std::uint64_t positive = 0, more = 0;
            for (const auto& p : reps) {
                fs.push_back(p.final_short);
                fl.push_back(p.final_long);
                rs.push_back(p.returns_short);
                rl.push_back(p.returns_long);
                positive += p.final_long > 0;
                more += p.returns_long > p.returns_short;
            }
            const std::string predicted = to_string(predict_regime(spec));
            const double n = static_cast<double>(cfg.replicas);
            ReportRow row;
            row.cells = {lambda, beta, predicted, short_horizon, horizon, median(fs), median(fl),
                         static_cast<double>(positive) / n, median(rs), median(rl),
                         static_cast<double>(more) / n};
            report.rows.push_back(std::move(row));
            grid.push_back({{"lambda", lambda}, {"beta", beta}, {"predicted", predicted}});
        }
    }
    report.aggregate = {{"mean_log_rho", mlr}, {"replicas", cfg.replicas}, {"grid", grid}};
    return report;
}

json config_echo(const ExperimentConfig& cfg)
{
    return {
        {"subcommand", to_string(cfg.subcommand)},
        {"env", spec_json(cfg.env)},
        {"seed", cfg.seed},
        {"replicas", cfg.replicas},
        {"horizon", cfg.effective_horizon()},
        {"kmax", cfg.effective_k_max()},
        {"lambda", cfg.lambdas},
        {"beta", cfg.betas},
        {"z", cfg.z},
        {"window", cfg.window_path},
        {"level", cfg.level},
    };
}

} // namespace

// ---- config -----------------------------------------------------------------

std::string to_string(Subcommand s)
{
    switch (s) {
    case Subcommand::Walk: return "walk";
    case Subcommand::Excursion: return "excursion";
    case Subcommand::Couple: return "couple";
    case Subcommand::Bpre: return "bpre";
    case Subcommand::Rde: return "rde";
    case Subcommand::Hitprob: return "hitprob";
    case Subcommand::Phase: return "phase";
    }
    return "?";
}

Subcommand parse_subcommand(const std::string& text)
{
    for (auto s : {Subcommand::Walk, Subcommand::Excursion, Subcommand::Couple, Subcommand::Bpre,
                   Subcommand::Rde, Subcommand::Hitprob, Subcommand::Phase}) {
        if (to_string(s) == text) {
            return s;
        }
    }
    throw UsageError("unknown subcommand '" + text + "'");
}

std::uint64_t ExperimentConfig::effective_horizon() const
{
    if (horizon != 0) {
        return horizon;
    }
    switch (subcommand) {
    case Subcommand::Bpre: return 10'000;
    case Subcommand::Hitprob: return 1'000'000;
    default: return 100'000;
    }
}

std::uint64_t ExperimentConfig::effective_k_max() const
{
    if (k_max != 0) {
        return k_max;
    }
    switch (subcommand) {
    case Subcommand::Bpre: return 100;
    case Subcommand::Rde: return 10;
    case Subcommand::Hitprob: return 5;
    default: return 1;
    }
}

KeyValues parse_key_value_text(const std::string& text)
{
    KeyValues kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw UsageError("config line " + std::to_string(lineno) + ": empty key");
        }
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValues read_key_value_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_value_text(ss.str());
}

ExperimentConfig config_from_key_values(Subcommand subcommand, const KeyValues& input)
{
    for (const auto& [key, value] : input) {
        if (kKnownKeys.count(key) == 0) {
            throw UsageError("unknown key '" + key + "'");
        }
    }
    KeyValues kv = input;
    ExperimentConfig cfg;
    cfg.subcommand = subcommand;

    const bool has_lambda = kv.count("lambda") != 0;
    const bool has_beta = kv.count("beta") != 0;
    if (subcommand == Subcommand::Phase) {
        cfg.lambdas = has_lambda ? parse_list("lambda", kv["lambda"]) : std::vector<double>{0.5, 1.0, 2.0};
        cfg.betas = has_beta ? parse_list("beta", kv["beta"]) : std::vector<double>{1.0, 3.0};
        if (kv.count("cookie_law") != 0 && kv["cookie_law"] != "example") {
            throw UsageError("phase sweeps the example cookie law; cookie_law must be 'example'");
        }
        kv["cookie_law"] = "example";
        kv["lambda"] = std::to_string(cfg.lambdas.front());
        kv["beta"] = std::to_string(cfg.betas.front());
    } else if (has_lambda || has_beta) {
        if (kv.count("cookie_law") == 0) {
            kv["cookie_law"] = "example";
        } else if (kv["cookie_law"] != "example") {
            throw UsageError("lambda/beta only apply to cookie_law=example");
        }
        if (!has_lambda || !has_beta) {
            throw UsageError("cookie_law=example needs both lambda and beta");
        }
        cfg.lambdas = {parse_double("lambda", kv["lambda"])};
        cfg.betas = {parse_double("beta", kv["beta"])};
    } else if (kv.count("cookie_law") != 0 && kv["cookie_law"] == "example") {
        throw UsageError("cookie_law=example needs both lambda and beta");
    }
    if (kv.count("p_law") == 0 && kv.count("p") == 0) {
        kv["p"] = "0.33333333333333331";
    }

    try {
        KeyValues env_kv;
        for (const char* key : {"p_law", "p", "p_a", "p_b", "w", "cookie_law", "lambda", "beta", "m",
                                "m_max", "mask"}) {
            if (auto it = kv.find(key); it != kv.end()) {
                env_kv[key] = it->second;
            }
        }
        cfg.env = spec_from_key_values(env_kv);
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(std::string("environment: ") + e.what());
    }

    auto get = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (auto v = get("seed")) cfg.seed = parse_u64("seed", *v);
    if (auto v = get("replicas")) cfg.replicas = parse_u64("replicas", *v);
    if (auto v = get("horizon")) {
        cfg.horizon = parse_u64("horizon", *v);
        if (cfg.horizon == 0) throw UsageError("horizon must be at least 1");
    }
    if (auto v = get("kmax")) {
        cfg.k_max = parse_u64("kmax", *v);
        if (cfg.k_max == 0) throw UsageError("kmax must be at least 1");
    }
    if (auto v = get("format")) {
        if (*v == "csv") cfg.format = OutFormat::Csv;
        else if (*v == "json") cfg.format = OutFormat::Json;
        else throw UsageError("format must be csv or json");
    }
    if (auto v = get("out")) cfg.out_path = *v;
    if (auto v = get("workers")) {
        const std::uint64_t w = parse_u64("workers", *v);
        if (w == 0 || w > 1024) throw UsageError("workers must be in 1..1024");
        cfg.workers = static_cast<unsigned>(w);
    }
    if (auto v = get("z")) {
        const double z = parse_double("z", *v);
        if (z != std::floor(z)) throw UsageError("z must be an integer");
        cfg.z = static_cast<std::int64_t>(z);
    }
    if (auto v = get("window")) cfg.window_path = *v;
    if (auto v = get("level")) {
        cfg.level = parse_double("level", *v);
        if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw UsageError("level must lie in (0,1)");
    }
    if (cfg.replicas == 0) {
        throw UsageError("replicas must be at least 1");
    }
    if (subcommand == Subcommand::Hitprob &&
        static_cast<std::int64_t>(cfg.effective_k_max()) <= -cfg.z) {
        throw UsageError("hitprob needs kmax > -z");
    }
    return cfg;
}

// ---- run / emit -------------------------------------------------------------

EnsembleReport run_experiment(const ExperimentConfig& cfg)
{
    EnsembleReport report;
    switch (cfg.subcommand) {
    case Subcommand::Walk: report = run_walks(cfg, false); break;
    case Subcommand::Excursion: report = run_walks(cfg, true); break;
    case Subcommand::Couple: report = run_couple(cfg); break;
    case Subcommand::Bpre: report = run_bpre(cfg); break;
    case Subcommand::Rde: report = run_rde(cfg); break;
    case Subcommand::Hitprob: report = run_hitprob(cfg); break;
    case Subcommand::Phase: report = run_phase(cfg); break;
    }
    report.subcommand = cfg.subcommand;
    report.config = config_echo(cfg);
    return report;
}

std::string render_csv(const EnsembleReport& report)
{
    std::string out;
    for (std::size_t i = 0; i < report.columns.size(); ++i) {
        out += (i ? "," : "") + report.columns[i];
    }
    out += '\n';
    for (const auto& row : report.rows) {
        for (std::size_t i = 0; i < row.cells.size(); ++i) {
            if (i) out += ',';
            out += cell_text(row.cells[i]);
        }
        out += '\n';
    }
    return out;
}

std::string render_json(const EnsembleReport& report)
{
    json rows = json::array();
    for (const auto& row : report.rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < row.cells.size(); ++i) {
            obj[report.columns[i]] = cell_json(row.cells[i]);
        }
        if (row.extra.is_object()) {
            for (const auto& [k, v] : row.extra.items()) {
                obj[k] = v;
            }
        }
        rows.push_back(std::move(obj));
    }
    json doc = {
        {"subcommand", to_string(report.subcommand)},
        {"config", report.config},
        {"columns", report.columns},
        {"rows", rows},
        {"aggregate", report.aggregate},
        {"violations", report.violations},
    };
    return doc.dump(2) + "\n";
}

void emit_report(const EnsembleReport& report, OutFormat format, const std::string& path)
{
    const std::string text = format == OutFormat::Csv ? render_csv(report) : render_json(report);
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        if (!std::cout) {
            throw IoError("failed writing to standard output");
        }
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << text;
    out.close();
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

} // namespace erwre
