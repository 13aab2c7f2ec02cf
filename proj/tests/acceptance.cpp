// Acceptance run: one [PASS]/[FAIL] line per criterion. Exit status is the
// number of failed criteria. Pass criterion numbers to run a subset.

#include "erwre/analysis.hpp"
#include "erwre/branching.hpp"
#include "erwre/counter_rng.hpp"
#include "erwre/experiment.hpp"
#include "erwre/stats.hpp"
#include "erwre/walk.hpp"

#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include <unistd.h>

using namespace erwre;

namespace {

// Fixed before any run; never tuned against outcomes.
constexpr std::uint64_t kSeed = 1;

// Tolerances.
constexpr std::uint64_t kCouplePaths = 10000;
constexpr std::uint64_t kCoupleHorizon = 1'000'000;
constexpr double kCoupleSeconds = 60.0;

constexpr int kHitEnvironments = 20;
constexpr double kHitExactTol = 1e-10;
constexpr std::uint64_t kHitTrials = 100000;
constexpr double kHitSigmas = 4.0;
constexpr double kHitAgreeFraction = 0.95;
constexpr double kHitSeconds = 120.0;

constexpr std::uint64_t kLawSamples = 10000;
constexpr int kLawRepetitions = 10;
constexpr int kLawMinAccepts = 9;
constexpr double kLawLevel = 0.01;
constexpr double kRdeSeconds = 30.0;
constexpr double kDecompSeconds = 60.0;

constexpr std::uint64_t kPhaseReplicas = 200;
constexpr std::uint64_t kPhaseHorizon = 100'000;
constexpr double kPhaseDepth = 1000.0;
constexpr double kPhaseEscapeFraction = 0.95;
constexpr double kPhaseReturnFraction = 0.80;
constexpr double kPhaseSeconds = 600.0;

constexpr std::uint64_t kBprePaths = 1000;
constexpr std::size_t kBpreGenerations = 10000;
constexpr double kBpreHitFraction = 0.99;
constexpr double kBpreSurviveFraction = 0.05;
constexpr double kBpreSeconds = 300.0;

constexpr double kDeterminismSeconds = 60.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));

std::string fmt(const char* format, ...)
{
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

const EnvironmentSpec kThirdExample21{FixedP{1.0 / 3.0}, ExampleLaw{2.0, 1.0}, Mask::Everywhere};

// ---- 1 ----------------------------------------------------------------------

Outcome coupling()
{
    const auto start = Clock::now();
    const ExperimentConfig cfg = config_from_key_values(
        Subcommand::Couple, {{"p", "0.33333333333333331"}, {"lambda", "2"}, {"beta", "1"}, {"mask", "positive"},
                             {"replicas", std::to_string(kCouplePaths)},
                             {"horizon", std::to_string(kCoupleHorizon)}, {"seed", std::to_string(kSeed)}});
    const EnsembleReport report = run_experiment(cfg);
    const double secs = seconds_since(start);
    const auto violations = report.aggregate["violations"].get<std::uint64_t>();
    const auto bookkeeping = report.aggregate["bookkeeping_errors"].get<std::uint64_t>();
    const auto timeouts = report.aggregate["timeouts"].get<std::uint64_t>();
    const bool ok = violations == 0 && bookkeeping == 0;
    return {ok && secs <= kCoupleSeconds,
            fmt("%llu paths, %llu timeouts, %llu violations, %llu bookkeeping errors, %.1fs (limit %.0fs)",
                static_cast<unsigned long long>(kCouplePaths), static_cast<unsigned long long>(timeouts),
                static_cast<unsigned long long>(violations), static_cast<unsigned long long>(bookkeeping), secs,
                kCoupleSeconds)};
}

// ---- 2 ----------------------------------------------------------------------

Outcome hitting_formula()
{
    const auto start = Clock::now();
    const EnvironmentSpec plain{FixedP{0.5}, NoCookies{}, Mask::Everywhere};
    int cases = 0, exact = 0, agree = 0;
    double worst = 0.0;
    for (int e = 0; e < kHitEnvironments; ++e) {
        Environment::Window window;
        for (std::int64_t z = -6; z <= 2; ++z) {
            const double u = to_open_unit(hash_words({kSeed, 2, static_cast<std::uint64_t>(e),
                                                      static_cast<std::uint64_t>(z + 10)}));
            window[z] = Site{0.2 + 0.6 * u, 0};
        }
        const Environment env(plain, kSeed, window);
        for (std::int64_t z : {1, 2}) {
            for (std::int64_t k = 1; k <= 5; ++k) {
                ++cases;
                const double closed = hit_prob_closed(env, z, k);
                const double diff = std::abs(closed - hit_prob_oracle(env, z, k));
                worst = std::max(worst, diff);
                exact += diff < kHitExactTol;

                RunOptions options;
                options.horizon = 100'000'000;
                options.stop_targets = {-k - 1, z};
                const std::uint64_t tag = (static_cast<std::uint64_t>(e) << 32) | static_cast<std::uint64_t>(cases) << 20;
                std::uint64_t hits = 0;
                for (std::uint64_t t = 0; t < kHitTrials; ++t) {
                    hits += run_walk(-k, env, CoinSource(kSeed, tag + t), options).final_position == -k - 1;
                }
                const double se = std::sqrt(closed * (1.0 - closed) / static_cast<double>(kHitTrials));
                const double mc = static_cast<double>(hits) / static_cast<double>(kHitTrials);
                agree += std::abs(mc - closed) <= kHitSigmas * se;
            }
        }
    }
    const double secs = seconds_since(start);
    const double frac = static_cast<double>(agree) / cases;
    return {exact == cases && frac >= kHitAgreeFraction && secs <= kHitSeconds,
            fmt("%d/%d exact (max diff %.2e < %.0e), Monte Carlo within %.0f SE in %d/%d (%.3f >= %.2f), %.1fs",
                exact, cases, worst, kHitExactTol, kHitSigmas, agree, cases, frac, kHitAgreeFraction, secs)};
}

// ---- 3 ----------------------------------------------------------------------

Outcome rde_law()
{
    const auto start = Clock::now();
    int accepts = 0;
    std::string stats;
    for (int rep = 0; rep < kLawRepetitions; ++rep) {
        const ExperimentConfig cfg = config_from_key_values(
            Subcommand::Rde, {{"p_law", "two_point"}, {"p_a", "0.25"}, {"p_b", "0.33333333333333331"},
                              {"w", "0.5"}, {"lambda", "2"}, {"beta", "1"}, {"kmax", "10"},
                              {"replicas", std::to_string(kLawSamples)},
                              {"seed", std::to_string(kSeed * 1000 + static_cast<std::uint64_t>(rep))},
                              {"level", "0.01"}});
        const EnsembleReport report = run_experiment(cfg);
        const bool reject = report.aggregate["reject"].get<bool>();
        accepts += !reject;
        stats += fmt("%s%.4f", rep ? " " : "", report.aggregate["ks_statistic"].get<double>());
    }
    const double secs = seconds_since(start);
    return {accepts >= kLawMinAccepts && secs <= kRdeSeconds,
            fmt("KS accepted %d/%d at level %.2f (D = %s), %.1fs", accepts, kLawRepetitions, kLawLevel,
                stats.c_str(), secs)};
}

// ---- 4 ----------------------------------------------------------------------

Outcome decomposition()
{
    const auto start = Clock::now();
    const std::size_t n = 8;
    int accepts = 0;
    for (int rep = 0; rep < kLawRepetitions; ++rep) {
        const std::uint64_t seed = kSeed * 2000 + static_cast<std::uint64_t>(rep);
        std::vector<double> direct, decomposed;
        BpreOptions options;
        options.generations = n;
        for (std::uint64_t t = 0; t < kLawSamples; ++t) {
            direct.push_back(simulate_bpre(kThirdExample21, seed, t, options).values[n]);

            std::vector<double> p(n, 1.0 / 3.0);
            std::vector<Population> m(n);
            for (std::size_t j = 0; j < n; ++j) {
                m[j] = cookie_quantile(kThirdExample21.cookie_law,
                                       to_open_unit(hash_words({seed, t, static_cast<std::uint64_t>(Domain::Immigration), j})));
            }
            CounterStream rng(seed, t, Domain::Aux);
            decomposed.push_back(simulate_Z_decomposed(p, m, n, rng));
        }
        accepts += !two_sample_test(direct, decomposed, kLawLevel).reject;
    }
    const double secs = seconds_since(start);
    return {accepts >= kLawMinAccepts && secs <= kDecompSeconds,
            fmt("KS accepted %d/%d at level %.2f, %.1fs", accepts, kLawRepetitions, kLawLevel, secs)};
}

// ---- 5 ----------------------------------------------------------------------

struct PhaseRun {
    std::vector<double> finals;
    std::vector<double> returns;
};

PhaseRun phase_ensemble(double lambda, double beta, std::uint64_t horizon)
{
    const EnvironmentSpec spec{FixedP{1.0 / 3.0}, ExampleLaw{lambda, beta}, Mask::Everywhere};
    PhaseRun run;
    for (std::uint64_t r = 0; r < kPhaseReplicas; ++r) {
        const Environment env(spec, replica_seed(kSeed, r));
        RunOptions options;
        options.horizon = horizon;
        const WalkSummary s = run_walk(0, env, CoinSource(kSeed, r), options);
        run.finals.push_back(static_cast<double>(s.final_position));
        run.returns.push_back(static_cast<double>(s.returns_to_origin));
    }
    return run;
}

RegimeLabel predicted(double lambda, double beta)
{
    return predict_regime({FixedP{1.0 / 3.0}, ExampleLaw{lambda, beta}, Mask::Everywhere});
}

Outcome phase()
{
    const auto start = Clock::now();
    std::string detail;
    bool ok = true;

    {
        const RegimeLabel label = predicted(2.0, 1.0);
        const double med = median(phase_ensemble(2.0, 1.0, kPhaseHorizon).finals);
        const bool pass = label == RegimeLabel::LeftTransient && med < -kPhaseDepth;
        ok = ok && pass;
        detail += fmt("(a) %s, median final %.1f (need < %.0f) %s; ", to_string(label), med,
                      -kPhaseDepth, pass ? "ok" : "FAIL");
    }
    {
        const RegimeLabel label = predicted(0.5, 1.0);
        const PhaseRun run = phase_ensemble(0.5, 1.0, kPhaseHorizon);
        double above = 0;
        for (double f : run.finals) above += f > kPhaseDepth;
        const double frac = above / static_cast<double>(kPhaseReplicas);
        const bool pass = label == RegimeLabel::RightTransient && frac >= kPhaseEscapeFraction;
        ok = ok && pass;
        detail += fmt("(b) %s, %.3f above +%.0f (need >= %.2f) %s; ", to_string(label), frac,
                      kPhaseDepth, kPhaseEscapeFraction, pass ? "ok" : "FAIL");
    }
    {
        const RegimeLabel label = predicted(1.0, 1.0);
        const double med_long = median(phase_ensemble(1.0, 1.0, kPhaseHorizon).finals);
        const double med_short = median(phase_ensemble(1.0, 1.0, kPhaseHorizon / 10).finals);
        const bool pass = label == RegimeLabel::RightTransient && med_long > 0 && med_long > med_short;
        ok = ok && pass;
        detail += fmt("(c) %s, median final %.1f at 1e5 vs %.1f at 1e4 %s; ", to_string(label),
                      med_long, med_short, pass ? "ok" : "FAIL");
    }
    {
        const RegimeLabel label = predicted(1.0, 3.0);
        const PhaseRun lng = phase_ensemble(1.0, 3.0, kPhaseHorizon * 10);
        const PhaseRun shrt = phase_ensemble(1.0, 3.0, kPhaseHorizon);
        double more = 0;
        for (std::uint64_t r = 0; r < kPhaseReplicas; ++r) more += lng.returns[r] > shrt.returns[r];
        const double frac = more / static_cast<double>(kPhaseReplicas);
        const double med_long = median(lng.returns);
        const double med_short = median(shrt.returns);
        const bool pass = label == RegimeLabel::Recurrent && med_long > med_short && frac >= kPhaseReturnFraction;
        ok = ok && pass;
        detail += fmt("(d) %s, median returns %.1f at 1e6 vs %.1f at 1e5, %.3f of replicas gain (need >= %.2f) %s; ",
                      to_string(label), med_long, med_short, frac, kPhaseReturnFraction,
                      pass ? "ok" : "FAIL");
    }
    const double secs = seconds_since(start);
    detail += fmt("%.1fs", secs);
    return {ok && secs <= kPhaseSeconds, detail};
}

// ---- 6 ----------------------------------------------------------------------

Outcome bpre_trends()
{
    const auto start = Clock::now();
    BpreOptions options;
    options.generations = kBpreGenerations;

    const EnvironmentSpec recurrent{FixedP{1.0 / 3.0}, ExampleLaw{1.0, 3.0}, Mask::Everywhere};
    std::uint64_t hit = 0;
    for (std::uint64_t r = 0; r < kBprePaths; ++r) {
        hit += simulate_bpre(recurrent, kSeed, r, options).first_zero.has_value();
    }

    const EnvironmentSpec transient{FixedP{1.0 / 3.0}, ExampleLaw{1.0, 1.0}, Mask::Everywhere};
    std::uint64_t survive = 0;
    for (std::uint64_t r = 0; r < kBprePaths; ++r) {
        const BranchingPath path = simulate_bpre(transient, kSeed, r, options);
        bool ok = !path.first_zero;
        for (std::size_t n = 10; ok && n <= 100; ++n) {
            ok = path.values[n] >= static_cast<double>(n * n);
        }
        survive += ok;
    }
    const double secs = seconds_since(start);
    const double hit_frac = static_cast<double>(hit) / kBprePaths;
    const double survive_frac = static_cast<double>(survive) / kBprePaths;
    return {hit_frac >= kBpreHitFraction && survive_frac >= kBpreSurviveFraction && secs <= kBpreSeconds,
            fmt("recurrent case hits 0 in %.3f (need >= %.2f), transient case survives above n^2 in %.3f "
                "(need >= %.2f), %.1fs",
                hit_frac, kBpreHitFraction, survive_frac, kBpreSurviveFraction, secs)};
}

// ---- 7 ----------------------------------------------------------------------

Outcome classifier_table()
{
    const double ln2 = std::log(2.0);
    struct Row {
        double lambda, beta;
        RegimeLabel want;
    };
    const Row rows[] = {
        {0.5, 1.0, RegimeLabel::RightTransient}, {0.5, 3.0, RegimeLabel::RightTransient},
        {1.0, 1.0, RegimeLabel::RightTransient}, {1.0, 3.0, RegimeLabel::Recurrent},
        {2.0, 1.0, RegimeLabel::LeftTransient},  {2.0, 3.0, RegimeLabel::LeftTransient},
    };
    int right = 0;
    std::string got;
    for (const Row& row : rows) {
        const RegimeLabel label = classify_regime_thm1(example_tail_descriptor(row.lambda, row.beta), ln2);
        right += label == row.want;
        got += fmt("%s(%g,%g)=%s", got.empty() ? "" : " ", row.lambda, row.beta, to_string(label));
    }
    return {right == 6, fmt("%d/6 grid cells match: %s", right, got.c_str())};
}

// ---- 8 ----------------------------------------------------------------------

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism()
{
    const auto start = Clock::now();
    const auto dir = std::filesystem::temp_directory_path() / ("erwre_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    const KeyValues base{{"lambda", "1"}, {"beta", "1"}, {"replicas", "200"}, {"horizon", "20000"},
                         {"seed", std::to_string(kSeed)}};
    int identical = 0, total = 0;
    std::string differing;
    for (Subcommand sub : {Subcommand::Walk, Subcommand::Excursion, Subcommand::Couple, Subcommand::Bpre,
                           Subcommand::Rde, Subcommand::Hitprob, Subcommand::Phase}) {
        for (OutFormat format : {OutFormat::Csv, OutFormat::Json}) {
            std::vector<std::string> texts;
            for (const char* workers : {"1", "1", "8", "8"}) {
                KeyValues kv = base;
                kv["workers"] = workers;
                if (sub == Subcommand::Phase) {
                    kv["replicas"] = "20";
                    kv.erase("lambda");
                    kv.erase("beta");
                }
                const auto path = dir / (to_string(sub) + "_" + std::to_string(texts.size()));
                emit_report(run_experiment(config_from_key_values(sub, kv)), format, path.string());
                texts.push_back(slurp(path));
            }
            ++total;
            const bool same = texts[0] == texts[1] && texts[0] == texts[2] && texts[0] == texts[3];
            identical += same;
            if (!same) differing += " " + to_string(sub);
        }
    }
    std::filesystem::remove_all(dir);
    const double secs = seconds_since(start);
    return {identical == total && secs <= kDeterminismSeconds,
            fmt("%d/%d subcommand/format pairs byte-identical across 2 runs x {1, 8} workers%s, %.1fs", identical,
                total, differing.empty() ? "" : (" (differ:" + differing + ")").c_str(), secs)};
}

} // namespace

int main(int argc, char** argv)
{
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"coupling exactness", coupling},
        {"hitting formula vs oracle and Monte Carlo", hitting_formula},
        {"X_n and W_n share a law", rde_law},
        {"immigrant-family decomposition", decomposition},
        {"phase trends", phase},
        {"branching recurrence/transience trends", bpre_trends},
        {"classifier table", classifier_table},
        {"determinism", determinism},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        selected.insert(std::atoi(argv[i]));
    }
    int failed = 0;
    for (int i = 0; i < 8; ++i) {
        if (!selected.empty() && selected.count(i + 1) == 0) {
            continue;
        }
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        failed += !out.pass;
        std::printf("[%s] %d %s: %s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, out.detail.c_str());
        std::fflush(stdout);
    }
    return failed;
}
