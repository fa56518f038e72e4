#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dwtunnel/config.hpp"
#include "dwtunnel/error.hpp"
#include "dwtunnel/fixed_points.hpp"
#include "dwtunnel/gaussian_packet.hpp"
#include "dwtunnel/io.hpp"
#include "dwtunnel/moment_dynamics.hpp"
#include "dwtunnel/potential.hpp"
#include "dwtunnel/tdse.hpp"
#include "dwtunnel/tunneling.hpp"

namespace dwtunnel {

struct MomentRun {
    double energy = 0.0;
    double v0 = 0.0;
    double skewness = 0.0;
    std::optional<EnergyRegime> regime;
    MomentSeries series;
    TunnelingReport tunneling;
    std::optional<ErrorCode> failure;        // VarianceCollapse / NonFiniteState
    std::optional<double> failure_time;
};

struct TdseRun {
    double energy = 0.0;  // discrete energy of the sampled packet
    double v0 = 0.0;
    std::optional<EnergyRegime> regime;
    ObservableSeries series;
    TunnelingReport tunneling;
    std::optional<ErrorCode> failure;  // DriftBudgetExceeded
};

struct RunOutcome {
    RunConfig config;
    PotentialReport landscape;
    double target_energy = 0.0;  // requested energy after any offset; NaN when v0 was given
    std::optional<MomentRun> moments;
    std::optional<TdseRun> tdse;
    std::optional<ComparisonReport> comparison;
    std::vector<std::string> warnings;
    std::vector<std::filesystem::path> artifacts;
    int exit_code = 0;
};

inline Trajectory trajectory_of(const MomentSeries& s) {
    Trajectory t{s.times, {}, {}};
    for (const auto& st : s.states) {
        t.mean_x.push_back(st.mean_x);
        t.variance.push_back(st.variance);
    }
    return t;
}

inline Trajectory trajectory_of(const ObservableSeries& s) {
    Trajectory t{s.times, {}, {}};
    for (const auto& o : s.samples) {
        t.mean_x.push_back(o.mean_x);
        t.variance.push_back(o.variance);
    }
    return t;
}

namespace detail {

inline std::optional<EnergyRegime> try_regime(const std::optional<ThresholdReport>& t, double e) {
    if (!t) return std::nullopt;
    return regime_of(*t, e);
}

inline std::vector<io::ReferenceLine> reference_lines(const PotentialReport& r) {
    std::vector<io::ReferenceLine> refs{{0.0, "gray"}};
    if (r.beta_minus) refs.push_back({*r.beta_minus, "red"});
    if (r.beta_plus) refs.push_back({*r.beta_plus, "gray"});
    return refs;
}

} // namespace detail

/// Moment-model run. Closure breakdown is recorded in the result (with the samples taken
/// before it) rather than thrown, so callers can still report a verdict.
inline MomentRun run_moments(const RunConfig& cfg, const PotentialReport& land,
                             const std::optional<ThresholdReport>& thr, std::vector<std::string>& warnings) {
    MomentRun r;
    const auto& init = cfg.init;
    if (init.energy) {
        r.energy = *init.energy + (init.energy_offset == EnergyOffset::PlusDelta ? land.delta.value_or(0.0) : 0.0);
        r.v0 = variance_for_energy(cfg.potential, init.x0, init.k0, r.energy, init.branch, init.energy_formula);
    } else {
        r.v0 = *init.v0;
        r.energy = packet_energy(cfg.potential, {init.x0, r.v0, init.k0}, init.energy_formula);
    }
    r.regime = detail::try_regime(thr, r.energy);

    if (cfg.skewness_policy == SkewnessPolicy::FixedPoint) {
        std::optional<FixedPointSolution> fp;
        if (thr) fp = fixed_point(cfg.potential, thr->barrier_x, r.energy, RootBranch::Plus);
        if (fp) {
            r.skewness = fp->skewness;
        } else {
            r.skewness = 0.0;
            warnings.push_back("no barrier fixed point at E=" + io::format_number(r.energy) + "; skewness set to 0");
        }
    }

    const MomentSystemParams sys{cfg.potential, r.energy, r.skewness};
    const MomentState start{init.x0, init.k0, r.v0, 0.0};
    IntegrateOptions opt{cfg.numerics.moments.dt, cfg.numerics.t_end, cfg.numerics.moments.stride,
                         cfg.numerics.moments.variance_guard};
    try {
        r.series = integrate(start, sys, opt);
    } catch (const IntegrationError& e) {
        r.series = e.partial();
        r.failure = e.code();
        r.failure_time = e.time();
        warnings.push_back(std::string("moment integration stopped: ") + e.message());
    }
    const double barrier = land.beta_minus.value_or(0.0);
    const Trajectory tr = trajectory_of(r.series);
    r.tunneling = detect_tunneling(tr.times, tr.mean_x, barrier);
    return r;
}

inline TdseRun run_tdse(const RunConfig& cfg, const PotentialReport& land, const std::optional<ThresholdReport>& thr,
                        std::vector<std::string>& warnings, const std::filesystem::path& out_dir) {
    TdseRun r;
    const auto& init = cfg.init;
    const Grid& grid = cfg.numerics.tdse.grid;
    if (init.energy) {
        const double target =
            *init.energy + (init.energy_offset == EnergyOffset::PlusDelta ? land.delta.value_or(0.0) : 0.0);
        r.v0 = tune_variance_for_energy(cfg.potential, grid, init.x0, init.k0, target, init.branch);
    } else {
        r.v0 = *init.v0;
    }
    const WaveField psi0 = sample_on_grid({init.x0, r.v0, init.k0}, grid);

    EvolveOptions opt;
    opt.dt = cfg.numerics.tdse.dt;
    opt.t_end = cfg.numerics.t_end;
    opt.stride = cfg.numerics.tdse.stride;
    opt.drift_budget = cfg.numerics.tdse.drift_budget;
    if (cfg.outputs.emit_snapshots) {
        opt.snapshot_stride = std::max<std::size_t>(1, step_count(cfg.numerics.tdse.snapshot_interval, opt.dt));
        opt.on_snapshot = [&](double t, const WaveField& psi) {
            const auto path = out_dir / "snapshots" / ("psi_" + io::format_number(t) + ".csv");
            io::write_text(path, io::snapshot_csv(psi));
        };
    }
    try {
        r.series = evolve(psi0, cfg.potential, opt);
    } catch (const DriftBudgetExceeded& e) {
        r.series = e.series();
        r.failure = e.code();
        warnings.push_back(e.message());
    }
    if (r.series.drift_warning && !r.failure) {
        warnings.push_back("tdse drift above 1e-10 (norm " + io::format_number(r.series.drift.max_norm_drift) +
                           ", energy " + io::format_number(r.series.drift.max_energy_drift) + ")");
    }
    r.energy = r.series.samples.front().energy;
    r.regime = detail::try_regime(thr, r.energy);
    const Trajectory tr = trajectory_of(r.series);
    r.tunneling = detect_tunneling(tr.times, tr.mean_x, land.beta_minus.value_or(0.0));
    return r;
}

inline nlohmann::json summary_json(const RunOutcome& o) {
    using nlohmann::json;
    const auto& c = o.config;
    json j;
    j["model"] = to_string(c.model);
    j["potential"] = io::to_json(c.potential);
    j["init"] = {{"x0", c.init.x0},
                 {"k0", c.init.k0},
                 {"energy", io::opt_json(c.init.energy)},
                 {"v0", io::opt_json(c.init.v0)},
                 {"branch", to_string(c.init.branch)},
                 {"energy_offset", to_string(c.init.energy_offset)},
                 {"energy_formula", to_string(c.init.energy_formula)}};
    j["skewness_policy"] = to_string(c.skewness_policy);
    j["barrier_x"] = io::opt_json(o.landscape.beta_minus);
    j["delta"] = io::opt_json(o.landscape.delta);
    if (o.moments) {
        const auto& m = *o.moments;
        j["moments"] = {{"energy", m.energy},
                        {"v0", m.v0},
                        {"skewness", m.skewness},
                        {"dt", c.numerics.moments.dt},
                        {"t_end", c.numerics.t_end},
                        {"variance_guard", to_string(c.numerics.moments.variance_guard)},
                        {"regime", m.regime ? json(to_string(*m.regime)) : json(nullptr)},
                        {"tunneling", io::to_json(m.tunneling)},
                        {"failure", m.failure ? json(to_string(*m.failure)) : json(nullptr)},
                        {"failure_time", io::opt_json(m.failure_time)}};
    }
    if (o.tdse) {
        const auto& t = *o.tdse;
        j["tdse"] = {{"energy", t.energy},
                     {"v0", t.v0},
                     {"dt", c.numerics.tdse.dt},
                     {"t_end", c.numerics.t_end},
                     {"grid", {{"x_min", c.numerics.tdse.grid.x_min},
                               {"x_max", c.numerics.tdse.grid.x_max},
                               {"n", c.numerics.tdse.grid.n},
                               {"dx", c.numerics.tdse.grid.dx}}},
                     {"regime", t.regime ? json(to_string(*t.regime)) : json(nullptr)},
                     {"max_norm_drift", t.series.drift.max_norm_drift},
                     {"max_energy_drift", t.series.drift.max_energy_drift},
                     {"tunneling", io::to_json(t.tunneling)},
                     {"failure", t.failure ? json(to_string(*t.failure)) : json(nullptr)}};
    }
    if (o.comparison) j["comparison"] = io::to_json(*o.comparison);
    j["warnings"] = o.warnings;
    j["exit_code"] = o.exit_code;
    return j;
}

/// Runs the configured model(s) and writes every artifact into outputs.directory:
/// moments.csv / tdse.csv series, *_tunneling.json verdicts, comparison.json, run.json,
/// and optionally SVG plots and psi_<t>.csv snapshots. Module failures that still leave
/// a usable series are written out and reflected in exit_code.
inline RunOutcome run(const RunConfig& cfg) {
    cfg.validate();
    RunOutcome o;
    o.config = cfg;
    o.landscape = landscape(cfg.potential);
    std::optional<ThresholdReport> thr;
    if (has_barrier(o.landscape.regime)) thr = thresholds(cfg.potential);
    o.target_energy = cfg.init.energy
                          ? *cfg.init.energy + (cfg.init.energy_offset == EnergyOffset::PlusDelta
                                                    ? o.landscape.delta.value_or(0.0)
                                                    : 0.0)
                          : std::numeric_limits<double>::quiet_NaN();

    const std::filesystem::path dir(cfg.outputs.directory);
    std::filesystem::create_directories(dir);
    auto emit = [&](const std::string& name, const std::string& text) {
        io::write_text(dir / name, text);
        o.artifacts.push_back(dir / name);
    };
    const auto refs = detail::reference_lines(o.landscape);

    if (cfg.model != Model::Tdse) {
        o.moments = run_moments(cfg, o.landscape, thr, o.warnings);
        emit("moments.csv", io::moment_csv(o.moments->series));
        emit("moments_tunneling.json", io::dump_json(io::to_json(o.moments->tunneling)));
        if (cfg.outputs.emit_svg) {
            const Trajectory t = trajectory_of(o.moments->series);
            emit("moments.svg", io::trajectory_svg("moment dynamics, E=" + io::format_number(o.moments->energy),
                                                   t.times, t.mean_x, t.variance, refs));
        }
        if (o.moments->failure && o.exit_code == 0) o.exit_code = static_cast<int>(*o.moments->failure);
    }
    if (cfg.model != Model::Moments) {
        o.tdse = run_tdse(cfg, o.landscape, thr, o.warnings, dir);
        emit("tdse.csv", io::observable_csv(o.tdse->series));
        emit("tdse_tunneling.json", io::dump_json(io::to_json(o.tdse->tunneling)));
        if (cfg.outputs.emit_svg) {
            const Trajectory t = trajectory_of(o.tdse->series);
            emit("tdse.svg", io::trajectory_svg("Schroedinger, E=" + io::format_number(o.tdse->energy), t.times,
                                                t.mean_x, t.variance, refs));
        }
        if (o.tdse->failure && o.exit_code == 0) o.exit_code = static_cast<int>(*o.tdse->failure);
    }
    if (o.moments && o.tdse) {
        o.comparison = compare(trajectory_of(o.moments->series), trajectory_of(o.tdse->series),
                               o.landscape.beta_minus.value_or(0.0));
        emit("comparison.json", io::dump_json(io::to_json(*o.comparison)));
    }
    emit("run.json", io::dump_json(summary_json(o)));
    return o;
}

struct ScanOutcome {
    std::vector<ScanRow> rows;
    ThresholdReport report;
};

inline ScanOutcome scan(const PotentialParams& p, double e_min, double e_max, double step) {
    return {stability_scan(p, e_min, e_max, step), thresholds(p)};
}

} // namespace dwtunnel
