// Seeded replica ensembles behind the command-line tool.

#ifndef ERWRE_EXPERIMENT_HPP
#define ERWRE_EXPERIMENT_HPP

#include "erwre/environment.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace erwre {

enum class Subcommand { Walk, Excursion, Couple, Bpre, Rde, Hitprob, Phase };
enum class OutFormat { Csv, Json };

std::string to_string(Subcommand s);
Subcommand parse_subcommand(const std::string& text);

struct ExperimentConfig {
    Subcommand subcommand = Subcommand::Walk;
    EnvironmentSpec env;
    std::uint64_t seed = 1;
    std::uint64_t replicas = 100;
    std::uint64_t horizon = 0; // 0: subcommand default
    std::uint64_t k_max = 0;   // 0: subcommand default
    // Phase grid; a single value elsewhere mirrors the example cookie law.
    std::vector<double> lambdas;
    std::vector<double> betas;
    OutFormat format = OutFormat::Csv;
    std::string out_path; // empty or "-": standard output
    unsigned workers = 1;
    // hitprob: right barrier z and an optional JSON window of fixture sites.
    std::int64_t z = 1;
    std::string window_path;
    // Significance level of the rde two-sample test.
    double level = 0.01;

    std::uint64_t effective_horizon() const;
    std::uint64_t effective_k_max() const;
};

// Flat key=value text; '#' starts a comment, blank lines are ignored.
// Throws UsageError on malformed lines.
KeyValues parse_key_value_text(const std::string& text);
KeyValues read_key_value_file(const std::string& path);

// Builds and validates a config from merged key-values. Recognized keys are
// the environment keys plus seed, replicas, horizon, kmax, format, out,
// workers, z, window, level. Throws UsageError.
ExperimentConfig config_from_key_values(Subcommand subcommand, const KeyValues& kv);

using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string>;

struct ReportRow {
    std::vector<Cell> cells;
    // Extra per-row fields that only appear in JSON (e.g. upcrossing tables).
    nlohmann::json extra;
};

struct EnsembleReport {
    Subcommand subcommand = Subcommand::Walk;
    nlohmann::json config;    // echo of every setting that affects the result
    std::vector<std::string> columns;
    std::vector<ReportRow> rows;
    nlohmann::json aggregate;
    // Failed pathwise assertions (coupling violations, oracle mismatches).
    std::uint64_t violations = 0;
};

// Pure function of the config; the worker count only changes wall time.
EnsembleReport run_experiment(const ExperimentConfig& config);

std::string render_csv(const EnsembleReport& report);
std::string render_json(const EnsembleReport& report);

// Writes to `path` (standard output for "" or "-"). Throws IoError.
void emit_report(const EnsembleReport& report, OutFormat format, const std::string& path);

} // namespace erwre

#endif // ERWRE_EXPERIMENT_HPP
