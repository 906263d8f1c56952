#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "casimir/output.hpp"
#include "casimir/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Casimir-coupled resonator simulator"};
    std::string target;
    std::string out;
    int workers = 1;
    double dt = 0.0, duration = 0.0;
    bool no_plots = false;
    std::string names;
    for (const auto& n : casimir::builtin_names()) names += (names.empty() ? "" : ", ") + n;
    app.add_option("scenario", target, "built-in scenario (" + names + ") or config file")->required();
    app.add_option("--out", out, "output directory (default $SIM_OUT_DIR/<name> or ./out/<name>)");
    app.add_option("--workers", workers, "parallel sweep points")->check(CLI::PositiveNumber);
    app.add_option("--dt", dt, "integrator step override (s)")->check(CLI::PositiveNumber);
    app.add_option("--duration", duration, "run duration override (s)")->check(CLI::PositiveNumber);
    app.add_flag("--no-plots", no_plots, "skip SVG output");
    CLI11_PARSE(app, argc, argv);

    try {
        casimir::ScenarioSpec spec = casimir::is_builtin(target)
                                         ? casimir::builtin_scenario(target)
                                         : casimir::parse_config(casimir::read_file(target));
        if (dt > 0) spec.base.dt = dt;
        if (duration > 0) spec.base.duration = duration;
        spec.validate();

        if (out.empty()) {
            const char* env = std::getenv("SIM_OUT_DIR");
            out = (std::filesystem::path(env && *env ? env : "out") / spec.name).string();
        }
        casimir::RunOptions opts{out, workers, !no_plots};
        const auto m = casimir::run_scenario(spec, opts);
        std::cout << spec.name << ": " << m.files.size() << " files in " << out << " ("
                  << m.wall_clock << " s)";
        if (m.outcome == casimir::Outcome::pull_in) {
            std::cout << ", pull-in outcome\n";
            return 2;
        }
        std::cout << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "sim: " << e.what() << "\n";
        return 1;
    }
}
