// Command-line front end: simulate one scenario, sweep cases, or check a config.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dzctl/config.hpp"
#include "dzctl/simulation.hpp"

namespace {

dzctl::ScenarioConfig load(const std::string& path) {
    return path.empty() ? dzctl::ConfigParser::parse("") : dzctl::ConfigParser::load(path);
}

void print_summary(const dzctl::ScenarioResult& res) {
    const auto& m = res.metrics;
    std::printf("%s: rms_tail=(%.3e, %.3e) max_abs_tail=(%.3e, %.3e) t_conv=%.3f max_v0=%.3f converged=%s\n",
                res.name.c_str(), m.rms_tail[0], m.rms_tail[1], m.max_abs_tail[0], m.max_abs_tail[1], m.t_conv,
                m.max_v0, m.converged ? "yes" : "no");
    if (!res.lyapunov.empty()) {
        std::printf("%s: lyapunov decrease violations %zu / %zu checked steps (%.2f%%)\n", res.name.c_str(),
                    res.decrease.violations, res.decrease.checked, 100.0 * res.decrease.fraction());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive control of a delayed 2-DOF arm with dead-zone inputs"};
    app.require_subcommand(1);

    std::string config_path;
    std::string scenario;
    std::string out_dir;
    std::string cases;

    auto* simulate = app.add_subcommand("simulate", "Run one scenario and write CSV outputs");
    simulate->add_option("--config", config_path, "Config file (empty file = benchmark defaults)")->required();
    simulate->add_option("--scenario", scenario, "Scenario name used in output file names");
    simulate->add_option("--out", out_dir, "Output directory (overrides output.dir)");

    auto* sweep = app.add_subcommand("sweep", "Run several cases and write a comparison table");
    sweep->add_option("--config", config_path, "Base config file")->required();
    sweep->add_option("--cases", cases, "Cases, e.g. \"10,5;5,2.5;2.5,1.25\" or \"adaptive;pd\"")->required();
    sweep->add_option("--out", out_dir, "Output directory")->required();

    auto* check = app.add_subcommand("check", "Validate a config without running it");
    check->add_option("--config", config_path, "Config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*check) {
            const auto cfg = load(config_path);
            std::printf("config ok: scenario '%s', %s controller, horizon %g s, step %g s\n", cfg.name.c_str(),
                        cfg.controller == dzctl::ControllerKind::adaptive ? "adaptive" : "pd", cfg.horizon, cfg.step);
            return 0;
        }

        if (*simulate) {
            auto cfg = load(config_path);
            if (!scenario.empty()) cfg.name = scenario;
            const std::filesystem::path dir = out_dir.empty() ? cfg.output_dir : out_dir;
            const auto res = dzctl::run_scenario(cfg);
            dzctl::write_outputs(res, cfg, dir);
            print_summary(res);
            return 0;
        }

        if (*sweep) {
            const auto cfg = load(config_path);
            const auto rows = dzctl::sweep(cfg, dzctl::parse_cases(cases));
            const std::filesystem::path dir = out_dir;
            std::filesystem::create_directories(dir);
            int failures = 0;
            for (const auto& row : rows) {
                if (row.result) {
                    dzctl::write_outputs(*row.result, row.config, dir);
                    print_summary(*row.result);
                } else {
                    ++failures;
                    std::fprintf(stderr, "%s failed: %s\n", row.spec.name.c_str(), row.error.c_str());
                }
            }
            std::ofstream summary(dir / "sweep_summary.csv");
            if (!summary) throw std::runtime_error("cannot write sweep_summary.csv");
            dzctl::write_sweep_summary(summary, rows);
            return failures == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
