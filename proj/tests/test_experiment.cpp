#include "erwre/experiment.hpp"

#include "erwre/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace erwre;

namespace {

ExperimentConfig make(Subcommand sub, KeyValues kv)
{
    return config_from_key_values(sub, kv);
}

std::string header(const std::string& csv)
{
    return csv.substr(0, csv.find('\n'));
}

std::size_t line_count(const std::string& text)
{
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

} // namespace

TEST_CASE("config parsing")
{
    const KeyValues kv = parse_key_value_text("# comment\nseed = 9\n\nlambda=2 # trailing\nbeta=1\n");
    CHECK(kv.at("seed") == "9");
    CHECK(kv.at("lambda") == "2");
    CHECK_THROWS_AS(parse_key_value_text("novalue\n"), UsageError);

    const ExperimentConfig cfg = make(Subcommand::Walk, kv);
    CHECK(cfg.seed == 9);
    CHECK(cfg.env.cookie_law == CookieLaw{ExampleLaw{2.0, 1.0}});
    CHECK(cfg.env.p_law == PLaw{FixedP{1.0 / 3.0}});
    CHECK(cfg.effective_horizon() == 100000);
    CHECK(make(Subcommand::Bpre, {}).effective_horizon() == 10000);
    CHECK(make(Subcommand::Walk, {{"horizon", "1e6"}}).horizon == 1000000);

    const ExperimentConfig phase = make(Subcommand::Phase, {});
    CHECK(phase.lambdas == std::vector<double>{0.5, 1.0, 2.0});
    CHECK(phase.betas == std::vector<double>{1.0, 3.0});
}

TEST_CASE("config errors")
{
    CHECK_THROWS_AS(make(Subcommand::Walk, {{"replicas", "0"}}), UsageError);
    CHECK_THROWS_AS(make(Subcommand::Walk, {{"horizon", "0"}}), UsageError);
    CHECK_THROWS_AS(make(Subcommand::Walk, {{"horizon", "-5"}}), UsageError);
    CHECK_THROWS_AS(make(Subcommand::Walk, {{"lambda", "2"}}), UsageError);
    CHECK_THROWS_AS(make(Subcommand::Walk, {{"cookie_law", "example"}}), UsageError);
    CHECK_THROWS_AS(make(Subcommand::Walk, {{"cookie_law", "fixed"}, {"m", "2"}, {"lambda", "1"}, {"beta", "1"}}),
                    UsageError);
    CHECK_THROWS_AS(make(Subcommand::Walk, {{"p", "1.2"}}), UsageError);
    CHECK_THROWS_AS(make(Subcommand::Walk, {{"colour", "blue"}}), UsageError);
    CHECK_THROWS_AS(make(Subcommand::Walk, {{"format", "xml"}}), UsageError);
    CHECK_THROWS_AS(make(Subcommand::Walk, {{"workers", "0"}}), UsageError);
    CHECK_THROWS_AS(make(Subcommand::Hitprob, {{"z", "-5"}, {"kmax", "3"}}), UsageError);
    CHECK_THROWS_AS(parse_subcommand("stroll"), UsageError);
    CHECK_THROWS_AS(read_key_value_file("/nonexistent/erwre.cfg"), IoError);
}

TEST_CASE("CSV schemas")
{
    const KeyValues small{{"replicas", "4"}, {"horizon", "2000"}, {"lambda", "2"}, {"beta", "1"},
                          {"mask", "positive"}};
    for (Subcommand sub : {Subcommand::Walk, Subcommand::Excursion, Subcommand::Couple, Subcommand::Bpre,
                           Subcommand::Rde, Subcommand::Hitprob, Subcommand::Phase}) {
        std::ifstream fixture(std::string(ERWRE_FIXTURES) + "/" + to_string(sub) + ".columns");
        REQUIRE(fixture);
        std::string want;
        std::getline(fixture, want);
        CAPTURE(to_string(sub));
        KeyValues kv = small;
        if (sub == Subcommand::Phase) {
            kv.erase("mask");
        }
        const EnsembleReport report = run_experiment(make(sub, kv));
        const std::string csv = render_csv(report);
        CHECK(header(csv) == want);
        CHECK(csv.back() == '\n');
        CHECK(line_count(csv) == report.rows.size() + 1);
        CHECK(report.rows.size() > 0);
        CHECK(report.violations == 0);
    }
}

TEST_CASE("walk aggregate is recomputable from rows")
{
    const EnsembleReport report =
        run_experiment(make(Subcommand::Walk, {{"replicas", "30"}, {"horizon", "5000"}}));
    std::vector<double> finals;
    std::uint64_t negative = 0;
    for (const auto& row : report.rows) {
        const auto final_pos = std::get<std::int64_t>(row.cells[4]);
        finals.push_back(static_cast<double>(final_pos));
        negative += final_pos < 0;
    }
    std::sort(finals.begin(), finals.end());
    CHECK(report.aggregate["median_final"].get<double>() == (finals[14] + finals[15]) / 2.0);
    CHECK(report.aggregate["final_negative"]["count"].get<std::uint64_t>() == negative);
    CHECK(report.aggregate["predicted"] == "LeftTransient");
}

TEST_CASE("JSON round trip keeps the aggregate")
{
    const EnsembleReport report = run_experiment(
        make(Subcommand::Rde, {{"replicas", "200"}, {"p_law", "two_point"}, {"p_a", "0.25"},
                               {"p_b", "0.3333333333333333"}, {"w", "0.5"}, {"lambda", "2"}, {"beta", "1"}}));
    const auto doc = nlohmann::json::parse(render_json(report));
    CHECK(doc["aggregate"] == report.aggregate);
    CHECK(doc["config"] == report.config);
    CHECK(doc["rows"].size() == 200);
    CHECK(doc["subcommand"] == "rde");
    CHECK(doc["columns"][0] == "x_n");
}

TEST_CASE("excursion JSON carries upcrossings")
{
    const EnsembleReport report = run_experiment(make(
        Subcommand::Excursion, {{"replicas", "5"}, {"lambda", "2"}, {"beta", "1"}, {"mask", "positive"}}));
    const auto doc = nlohmann::json::parse(render_json(report));
    for (const auto& row : doc["rows"]) {
        CHECK(row["upcrossings"][0] == 1);
        CHECK(row["start"] == 1);
    }
}

TEST_CASE("worker count does not change output")
{
    for (Subcommand sub : {Subcommand::Walk, Subcommand::Couple, Subcommand::Bpre, Subcommand::Rde,
                           Subcommand::Hitprob}) {
        CAPTURE(to_string(sub));
        KeyValues kv{{"replicas", "40"}, {"horizon", "3000"}, {"lambda", "1"}, {"beta", "1"}};
        const std::string one = render_json(run_experiment(make(sub, kv)));
        kv["workers"] = "8";
        const std::string eight = render_json(run_experiment(make(sub, kv)));
        CHECK(one == eight);
    }
}

TEST_CASE("replica rows do not depend on the ensemble size")
{
    const KeyValues kv{{"horizon", "3000"}, {"lambda", "1"}, {"beta", "1"}};
    KeyValues few = kv, many = kv;
    few["replicas"] = "5";
    many["replicas"] = "12";
    const std::string a = render_csv(run_experiment(make(Subcommand::Walk, few)));
    const std::string b = render_csv(run_experiment(make(Subcommand::Walk, many)));
    CHECK(b.substr(0, a.size()) == a);
}

TEST_CASE("emit_report")
{
    const EnsembleReport report = run_experiment(make(Subcommand::Walk, {{"replicas", "2"}, {"horizon", "10"}}));
    const std::string path = "erwre_emit_test.csv";
    emit_report(report, OutFormat::Csv, path);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == render_csv(report));
    std::remove(path.c_str());
    CHECK_THROWS_AS(emit_report(report, OutFormat::Json, "/nonexistent/dir/out.json"), IoError);
}
