// erwre: seeded ensembles for cookie walks in random environments.
//
//   erwre <walk|excursion|couple|bpre|rde|hitprob|phase> [flags]
//
// Exit status: 0 ok, 1 usage error, 2 failed pathwise assertion, 3 I/O error.

#include "erwre/errors.hpp"
#include "erwre/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAssertion = 2;
constexpr int kExitIo = 3;

const char* const kSubcommands[] = {"walk", "excursion", "couple", "bpre", "rde", "hitprob", "phase"};

struct Flags {
    std::string config;
    std::map<std::string, std::string> values;
    std::vector<std::string> sets;
};

void add_flags(CLI::App& sub, Flags& flags)
{
    sub.add_option("--config", flags.config, "key=value config file (flags override it)");
    const std::pair<const char*, const char*> keyed[] = {
        {"seed", "master seed"},
        {"replicas", "number of replicas (Monte Carlo trials for hitprob)"},
        {"horizon", "step cap per walk, or generations for bpre"},
        {"kmax", "largest site k / generation index reported"},
        {"lambda", "example cookie law lambda (comma list for phase)"},
        {"beta", "example cookie law beta (comma list for phase)"},
        {"p", "fixed right-step probability"},
        {"mask", "cookie sites: everywhere, positive or negative"},
        {"out", "output file, '-' for standard output"},
        {"format", "csv or json"},
        {"workers", "worker threads"},
        {"z", "hitprob right barrier"},
        {"window", "hitprob JSON window of fixture sites"},
        {"level", "rde test level"},
    };
    for (const auto& [key, help] : keyed) {
        sub.add_option(std::string("--") + key, flags.values[key], help);
    }
    sub.add_option("--set", flags.sets, "extra key=value, e.g. --set p_law=two_point");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cookie walks in random environments: seeded replica ensembles."};
    app.require_subcommand(1);
    Flags flags;
    for (const char* name : kSubcommands) {
        add_flags(*app.add_subcommand(name), flags);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        CLI::App* chosen = app.get_subcommands().front();
        const erwre::Subcommand subcommand = erwre::parse_subcommand(chosen->get_name());

        erwre::KeyValues kv;
        if (!flags.config.empty()) {
            kv = erwre::read_key_value_file(flags.config);
        }
        for (const auto& [key, value] : flags.values) {
            if (chosen->count(std::string("--") + key) > 0) {
                kv[key] = value;
            }
        }
        for (const auto& item : flags.sets) {
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw erwre::UsageError("--set expects key=value, got '" + item + "'");
            }
            kv[item.substr(0, eq)] = item.substr(eq + 1);
        }

        const erwre::ExperimentConfig config = erwre::config_from_key_values(subcommand, kv);
        const erwre::EnsembleReport report = erwre::run_experiment(config);
        erwre::emit_report(report, config.format, config.out_path);
        if (report.violations > 0) {
            std::cerr << "erwre: " << report.violations << " pathwise assertion(s) failed\n";
            return kExitAssertion;
        }
        return kExitOk;
    } catch (const erwre::UsageError& e) {
        std::cerr << "erwre: " << e.what() << '\n';
        return kExitUsage;
    } catch (const erwre::IoError& e) {
        std::cerr << "erwre: " << e.what() << '\n';
        return kExitIo;
    } catch (const erwre::AssertionFailure& e) {
        std::cerr << "erwre: " << e.what() << '\n';
        return kExitAssertion;
    } catch (const std::exception& e) {
        std::cerr << "erwre: " << e.what() << '\n';
        return kExitUsage;
    }
}
