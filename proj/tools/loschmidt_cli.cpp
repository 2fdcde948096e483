// loschmidt: run and sweep configured decoherence experiments.
//
// Exit codes: 0 success, 1 config error, 2 numerical-invariant violation,
// 3 I/O error.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "loschmidt/harness/config.hpp"
#include "loschmidt/harness/experiment.hpp"

namespace lh = loschmidt::harness;

namespace {

std::string rate_text(double rate) { return std::isnan(rate) ? "n/a" : fmt::format("{:.6g}", rate); }

lh::RawConfig load(const std::string& path, const std::optional<std::uint64_t>& seed) {
    lh::RawConfig raw = lh::load_config(path);
    if (seed) raw = lh::with_seed(std::move(raw), *seed);
    return raw;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decoherence as a Loschmidt echo: run configured experiments and write CSV time series"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    std::string axis;
    std::vector<double> values;

    CLI::App* run = app.add_subcommand("run", "run one experiment and write its CSV");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--out", out, "output CSV (overrides the config)");
    run->add_option("--seed", seed, "random seed (overrides the config)");
    run->add_flag("--quiet", quiet, "suppress the summary line");

    CLI::App* sweep = app.add_subcommand("sweep", "run one experiment per value of a parameter");
    sweep->add_option("--config", config_path, "experiment config file")->required();
    sweep->add_option("--axis", axis, "parameter to sweep (key or key[i] in the model section)")->required();
    sweep->add_option("--values", values, "comma-separated values")->delimiter(',')->required();
    sweep->add_option("--out", out, "output directory")->required();
    sweep->add_option("--seed", seed, "random seed (overrides the config)");
    sweep->add_flag("--quiet", quiet, "suppress the summary table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            lh::ExperimentConfig cfg = lh::build_config(load(config_path, seed));
            if (!out.empty()) cfg.output = out;
            const lh::RunSummary s = lh::run(cfg);
            if (!quiet)
                fmt::print("kind={} points={} max_residual={:.3e} fitted_rate={} output={}\n", lh::kind_name(cfg.kind),
                           s.records.size(), s.max_residual, rate_text(s.fitted_rate), cfg.output);
        } else {
            const auto points = lh::sweep(load(config_path, seed), axis, values, out);
            if (!quiet) {
                fmt::print("{:>14} {:>14} {:>14}\n", axis, "fitted_rate", "max_residual");
                for (const auto& p : points)
                    fmt::print("{:>14.6g} {:>14} {:>14.3e}\n", p.value, rate_text(p.summary.fitted_rate),
                               p.summary.max_residual);
            }
        }
    } catch (const lh::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const lh::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 3;
    } catch (const loschmidt::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    } catch (const loschmidt::Error& e) {
        // Dimension caps and domain checks raised while building the model.
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
