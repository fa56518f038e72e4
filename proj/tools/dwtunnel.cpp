// dwtunnel: command-line driver for the double-well tunneling models.
//
//   dwtunnel potential-report [--a A --b B --c C]
//   dwtunnel thresholds       [--a A --b B --c C]
//   dwtunnel stability-scan   [--e-min 8 --e-max 17.5 --step 0.01] [--csv FILE] [--report FILE]
//   dwtunnel moments|tdse|compare [--config FILE] [--energy E] [--x0 X] [--t-end T] [--dt DT]
//                                 [--branch small|large] [--model M] [--out DIR] [--emit-svg]
//                                 [--emit-snapshots]

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dwtunnel/config.hpp"
#include "dwtunnel/harness.hpp"
#include "dwtunnel/io.hpp"

namespace {

using namespace dwtunnel;

struct PotentialFlags {
    PotentialParams params;

    void attach(CLI::App* cmd) {
        cmd->add_option("--a", params.a, "quadratic coefficient")->capture_default_str();
        cmd->add_option("--b", params.b, "cubic coefficient")->capture_default_str();
        cmd->add_option("--c", params.c, "quartic coefficient")->capture_default_str();
    }
};

struct RunFlags {
    std::string config_path;
    std::optional<double> energy, x0, t_end, dt;
    std::optional<std::string> branch, model, out;
    bool emit_svg = false;
    bool emit_snapshots = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON run configuration");
        cmd->add_option("--energy", energy, "total energy (replaces any v0 in the config)");
        cmd->add_option("--x0", x0, "initial mean position");
        cmd->add_option("--t-end", t_end, "time horizon");
        cmd->add_option("--dt", dt, "time step of the selected model");
        cmd->add_option("--branch", branch, "variance root branch: small | large");
        cmd->add_option("--model", model, "moments | tdse | both");
        cmd->add_option("--out", out, "output directory");
        cmd->add_flag("--emit-svg", emit_svg, "write SVG plots");
        cmd->add_flag("--emit-snapshots", emit_snapshots, "write |psi|^2 snapshots (tdse)");
    }

    RunConfig resolve(Model subcommand_model) const {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_run_config(config_path);
        cfg.model = subcommand_model;
        ConfigOverrides o;
        if (model) o.model = parse_model(*model);
        o.energy = energy;
        o.x0 = x0;
        o.t_end = t_end;
        o.dt = dt;
        if (branch) o.branch = parse_branch(*branch);
        o.out = out;
        o.emit_svg = emit_svg;
        o.emit_snapshots = emit_snapshots;
        apply_overrides(cfg, o);
        return cfg;
    }
};

int report_outcome(const RunOutcome& o) {
    std::cout << io::dump_json(summary_json(o));
    for (const auto& w : o.warnings) std::cerr << "warning: " << w << "\n";
    return o.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tunneling in an asymmetric quartic double well: moment dynamics, stability thresholds, "
                 "and Crank-Nicolson reference dynamics"};
    app.require_subcommand(1);

    PotentialFlags pot_report, pot_thresholds, pot_scan;
    auto* cmd_report = app.add_subcommand("potential-report", "stationary points, couplings and regime as JSON");
    pot_report.attach(cmd_report);

    auto* cmd_thr = app.add_subcommand("thresholds", "existence/stability thresholds of the barrier fixed point");
    pot_thresholds.attach(cmd_thr);

    auto* cmd_scan = app.add_subcommand("stability-scan", "E-grid scan of the barrier fixed point as CSV");
    pot_scan.attach(cmd_scan);
    double e_min = 8.0, e_max = 17.5, e_step = 0.01;
    std::string scan_csv_path, scan_report_path;
    cmd_scan->add_option("--e-min", e_min)->capture_default_str();
    cmd_scan->add_option("--e-max", e_max)->capture_default_str();
    cmd_scan->add_option("--step", e_step)->capture_default_str();
    cmd_scan->add_option("--csv", scan_csv_path, "write CSV here instead of stdout");
    cmd_scan->add_option("--report", scan_report_path, "also write the threshold report JSON here");

    RunFlags moments_flags, tdse_flags, compare_flags;
    auto* cmd_moments = app.add_subcommand("moments", "integrate the reduced moment system");
    moments_flags.attach(cmd_moments);
    auto* cmd_tdse = app.add_subcommand("tdse", "Crank-Nicolson Schroedinger propagation");
    tdse_flags.attach(cmd_tdse);
    auto* cmd_compare = app.add_subcommand("compare", "run both models and compare");
    compare_flags.attach(cmd_compare);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (cmd_report->parsed()) {
            std::cout << io::dump_json(io::to_json(landscape(pot_report.params)));
            return EXIT_SUCCESS;
        }
        if (cmd_thr->parsed()) {
            std::cout << io::dump_json(io::to_json(thresholds(pot_thresholds.params)));
            return EXIT_SUCCESS;
        }
        if (cmd_scan->parsed()) {
            const ScanOutcome s = scan(pot_scan.params, e_min, e_max, e_step);
            const std::string csv = io::scan_csv(s.rows);
            if (scan_csv_path.empty()) std::cout << csv;
            else io::write_text(scan_csv_path, csv);
            if (!scan_report_path.empty()) io::write_text(scan_report_path, io::dump_json(io::to_json(s.report)));
            return EXIT_SUCCESS;
        }
        if (cmd_moments->parsed()) return report_outcome(run(moments_flags.resolve(Model::Moments)));
        if (cmd_tdse->parsed()) return report_outcome(run(tdse_flags.resolve(Model::Tdse)));
        if (cmd_compare->parsed()) return report_outcome(run(compare_flags.resolve(Model::Both)));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return EXIT_SUCCESS;
}
