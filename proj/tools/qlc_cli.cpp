// qlc: calibrate, mark, price and report quanto / composite contracts.
//
// Exit codes: 0 ok, 1 I/O, 2 calibration or configuration, 3 numerical.
// QLC_WORKERS sets the worker count; results do not depend on it.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qlc/app/run.hpp"

namespace {

int exit_code(const std::exception& e) {
    if (dynamic_cast<const qlc::LoadError*>(&e)) return 1;
    if (dynamic_cast<const qlc::ConfigError*>(&e) || dynamic_cast<const qlc::CalibrationFailure*>(&e) ||
        dynamic_cast<const qlc::InvalidInput*>(&e) || dynamic_cast<const qlc::NoSolution*>(&e)) {
        return 2;
    }
    if (dynamic_cast<const qlc::NumericalFailure*>(&e) || dynamic_cast<const qlc::DegenerateEstimate*>(&e) ||
        dynamic_cast<const qlc::BandwidthTooSmall*>(&e)) {
        return 3;
    }
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quanto and composite equity-FX local-correlation pricer"};
    app.require_subcommand(1);

    std::string config, manifest, out, strategy, sim_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    bool joint = false;

    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config, "Run config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("-m,--manifest", manifest, "Market snapshot manifest (overrides the config)");
        sub->add_option("--sim", sim_file, "Simulation config (JSON, overrides the config's block)");
        sub->add_option("-o,--out", out, "Output directory");
        sub->add_option("--seed", seed, "RNG seed");
        sub->add_option("--paths", paths, "Monte Carlo paths");
        sub->add_option("-s,--strategy", strategy,
                        "Strategy or comma-separated list: BS, LV, LC, LV2, LC2, LV3, LV4, CONST");
    };
    auto* calibrate = app.add_subcommand("calibrate", "Calibrate local-vol surfaces and the quanto mark");
    auto* mark = app.add_subcommand("mark-quanto", "Build the quanto correlation mark only");
    auto* price = app.add_subcommand("price", "Quanto package prices and implied correlations per pillar");
    auto* report = app.add_subcommand("report", "Implied-vol spread reports for quanto and composite vanillas");
    auto* simulate = app.add_subcommand("simulate", "Simulate and export paths (debugging)");
    for (auto* sub : {calibrate, mark, price, report, simulate}) common(sub);
    simulate->add_flag("--joint", joint, "Experimental joint quanto/composite correlation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        qlc::app::RunConfig run;
        if (!config.empty()) run = qlc::app::load_run_config(config);
        if (!sim_file.empty()) qlc::app::apply_sim_json(qlc::app::detail::read_json(sim_file), run);
        if (!manifest.empty()) run.manifest = manifest;
        if (!out.empty()) run.out = out;
        if (seed) run.sim.seed = *seed;
        if (paths) run.sim.n_paths = *paths;
        if (!strategy.empty()) {
            run.strategies.clear();
            std::size_t start = 0;
            while (start <= strategy.size()) {
                const auto comma = strategy.find(',', start);
                const auto name = strategy.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
                run.strategies.push_back(qlc::mc::parse_strategy(name));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        }
        run.joint = joint;
        if (run.manifest.empty()) throw qlc::ConfigError("no market snapshot: pass --manifest or a config with 'manifest'");
        run.sim.validate();

        if (calibrate->parsed()) qlc::app::cmd_calibrate(run);
        if (mark->parsed()) qlc::app::cmd_mark_quanto(run);
        if (price->parsed()) qlc::app::cmd_price(run);
        if (report->parsed()) qlc::app::cmd_report(run);
        if (simulate->parsed()) qlc::app::cmd_simulate(run);
    } catch (const qlc::ConfigError& e) {
        std::cerr << "qlc: " << e.what() << "\n(run with --help for usage)\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "qlc: " << e.what() << '\n';
        return exit_code(e);
    }
    return 0;
}
