#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "dwtunnel/error.hpp"
#include "dwtunnel/gaussian_packet.hpp"
#include "dwtunnel/grid.hpp"
#include "dwtunnel/moment_dynamics.hpp"
#include "dwtunnel/potential.hpp"

namespace dwtunnel {

enum class Model { Moments, Tdse, Both };
enum class EnergyOffset { None, PlusDelta };
enum class SkewnessPolicy { FixedPoint, Zero };

inline const char* to_string(Model m) {
    switch (m) {
    case Model::Moments: return "moments";
    case Model::Tdse: return "tdse";
    case Model::Both: return "both";
    }
    return "?";
}
inline const char* to_string(EnergyOffset o) { return o == EnergyOffset::None ? "none" : "plus-delta"; }
inline const char* to_string(SkewnessPolicy s) { return s == SkewnessPolicy::FixedPoint ? "fixed-point" : "zero"; }

struct InitConfig {
    double x0 = 0.5;
    double k0 = 0.0;
    std::optional<double> energy;
    std::optional<double> v0;
    VarianceBranch branch = VarianceBranch::Large;
    EnergyOffset energy_offset = EnergyOffset::None;
    EnergyFormula energy_formula = EnergyFormula::OriginCentered;  // moment model only
};

struct MomentNumerics {
    double dt = 1e-3;
    std::size_t stride = 10;
    VarianceGuard variance_guard = VarianceGuard::Halt;
};

struct TdseNumerics {
    double dt = 0.01;
    std::size_t stride = 10;
    Grid grid = build_grid(-100.0, 100.0, 100000);
    double drift_budget = 1e-9;
    double snapshot_interval = 1.0;
};

struct Numerics {
    double t_end = 100.0;
    MomentNumerics moments;
    TdseNumerics tdse;
};

struct Outputs {
    std::string directory = "out";
    bool emit_svg = false;
    bool emit_snapshots = false;
};

struct RunConfig {
    Model model = Model::Moments;
    PotentialParams potential;
    InitConfig init;
    Numerics numerics;
    Outputs outputs;
    SkewnessPolicy skewness_policy = SkewnessPolicy::FixedPoint;

    void validate() const {
        potential.validate();
        if (init.energy.has_value() == init.v0.has_value()) {
            throw Error(ErrorCode::ConfigError, "init: exactly one of 'energy' or 'v0' must be given");
        }
        if (init.v0 && !(*init.v0 > 0.0)) throw Error(ErrorCode::ConfigError, "init.v0: must be > 0");
        if (!(numerics.t_end > 0.0)) throw Error(ErrorCode::ConfigError, "numerics.t_end: must be > 0");
        if (!(numerics.moments.dt > 0.0)) throw Error(ErrorCode::ConfigError, "numerics.moments.dt: must be > 0");
        if (!(numerics.tdse.dt > 0.0)) throw Error(ErrorCode::ConfigError, "numerics.tdse.dt: must be > 0");
        if (numerics.moments.stride == 0 || numerics.tdse.stride == 0) {
            throw Error(ErrorCode::ConfigError, "numerics.*.stride: must be >= 1");
        }
    }
};

/// Command-line overrides; set fields win over the config file.
struct ConfigOverrides {
    std::optional<Model> model;
    std::optional<double> energy;
    std::optional<double> x0;
    std::optional<double> t_end;
    std::optional<double> dt;
    std::optional<VarianceBranch> branch;
    std::optional<std::string> out;
    bool emit_svg = false;
    bool emit_snapshots = false;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void field_error(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::ConfigError, path + ": " + what);
}

inline double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) field_error(path, "expected a number");
    return j.get<double>();
}

inline std::size_t get_count(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() || j.get<std::size_t>() == 0) field_error(path, "expected a positive integer");
    return j.get<std::size_t>();
}

inline bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) field_error(path, "expected true or false");
    return j.get<bool>();
}

inline std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) field_error(path, "expected a string");
    return j.get<std::string>();
}

template <typename Enum, std::size_t N>
Enum get_enum(const json& j, const std::string& path, const std::pair<const char*, Enum> (&choices)[N]) {
    const std::string s = get_string(j, path);
    std::string allowed;
    for (const auto& [name, value] : choices) {
        if (s == name) return value;
        allowed += (allowed.empty() ? "" : " | ") + std::string(name);
    }
    field_error(path, "'" + s + "' is not one of " + allowed);
}

inline void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> known) {
    if (!j.is_object()) field_error(path.empty() ? "<root>" : path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) field_error(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
    }
}

inline const std::pair<const char*, VarianceBranch> kBranches[] = {{"small", VarianceBranch::Small},
                                                                   {"large", VarianceBranch::Large}};
inline const std::pair<const char*, Model> kModels[] = {
    {"moments", Model::Moments}, {"tdse", Model::Tdse}, {"both", Model::Both}};

} // namespace detail

inline VarianceBranch parse_branch(const std::string& s) {
    return detail::get_enum(nlohmann::json(s), "branch", detail::kBranches);
}

inline Model parse_model(const std::string& s) { return detail::get_enum(nlohmann::json(s), "model", detail::kModels); }

/// Builds a RunConfig from JSON text. Unknown fields and type mismatches are reported with their path;
/// syntax errors with line and column.
inline RunConfig parse_run_config(const std::string& text) {
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports "line L, column C" inside its message
        throw Error(ErrorCode::ConfigError, std::string("syntax error: ") + e.what());
    }
    RunConfig c;
    detail::check_keys(j, "", {"model", "potential", "init", "numerics", "outputs", "skewness_policy"});
    if (j.contains("model")) c.model = detail::get_enum(j["model"], "model", detail::kModels);
    if (j.contains("potential")) {
        const json& p = j["potential"];
        detail::check_keys(p, "potential", {"a", "b", "c"});
        if (p.contains("a")) c.potential.a = detail::get_number(p["a"], "potential.a");
        if (p.contains("b")) c.potential.b = detail::get_number(p["b"], "potential.b");
        if (p.contains("c")) c.potential.c = detail::get_number(p["c"], "potential.c");
    }
    if (j.contains("init")) {
        const json& i = j["init"];
        detail::check_keys(i, "init", {"x0", "k0", "energy", "v0", "branch", "energy_offset", "energy_formula"});
        if (i.contains("x0")) c.init.x0 = detail::get_number(i["x0"], "init.x0");
        if (i.contains("k0")) c.init.k0 = detail::get_number(i["k0"], "init.k0");
        if (i.contains("energy")) c.init.energy = detail::get_number(i["energy"], "init.energy");
        if (i.contains("v0")) c.init.v0 = detail::get_number(i["v0"], "init.v0");
        if (i.contains("branch")) c.init.branch = detail::get_enum(i["branch"], "init.branch", detail::kBranches);
        if (i.contains("energy_offset")) {
            static const std::pair<const char*, EnergyOffset> offsets[] = {{"none", EnergyOffset::None},
                                                                           {"plus-delta", EnergyOffset::PlusDelta}};
            c.init.energy_offset = detail::get_enum(i["energy_offset"], "init.energy_offset", offsets);
        }
        if (i.contains("energy_formula")) {
            static const std::pair<const char*, EnergyFormula> formulas[] = {
                {"eq9", EnergyFormula::OriginCentered}, {"general", EnergyFormula::General}};
            c.init.energy_formula = detail::get_enum(i["energy_formula"], "init.energy_formula", formulas);
        }
    }
    if (j.contains("numerics")) {
        const json& n = j["numerics"];
        detail::check_keys(n, "numerics", {"t_end", "moments", "tdse"});
        if (n.contains("t_end")) c.numerics.t_end = detail::get_number(n["t_end"], "numerics.t_end");
        if (n.contains("moments")) {
            const json& m = n["moments"];
            detail::check_keys(m, "numerics.moments", {"dt", "stride", "variance_guard"});
            if (m.contains("dt")) c.numerics.moments.dt = detail::get_number(m["dt"], "numerics.moments.dt");
            if (m.contains("stride")) c.numerics.moments.stride = detail::get_count(m["stride"], "numerics.moments.stride");
            if (m.contains("variance_guard")) {
                static const std::pair<const char*, VarianceGuard> guards[] = {{"halt", VarianceGuard::Halt},
                                                                               {"continue", VarianceGuard::Continue}};
                c.numerics.moments.variance_guard =
                    detail::get_enum(m["variance_guard"], "numerics.moments.variance_guard", guards);
            }
        }
        if (n.contains("tdse")) {
            const json& t = n["tdse"];
            detail::check_keys(t, "numerics.tdse", {"dt", "stride", "grid", "drift_budget", "snapshot_interval"});
            if (t.contains("dt")) c.numerics.tdse.dt = detail::get_number(t["dt"], "numerics.tdse.dt");
            if (t.contains("stride")) c.numerics.tdse.stride = detail::get_count(t["stride"], "numerics.tdse.stride");
            if (t.contains("drift_budget")) {
                c.numerics.tdse.drift_budget = detail::get_number(t["drift_budget"], "numerics.tdse.drift_budget");
            }
            if (t.contains("snapshot_interval")) {
                c.numerics.tdse.snapshot_interval =
                    detail::get_number(t["snapshot_interval"], "numerics.tdse.snapshot_interval");
            }
            if (t.contains("grid")) {
                const json& g = t["grid"];
                detail::check_keys(g, "numerics.tdse.grid", {"x_min", "x_max", "n"});
                Grid grid = c.numerics.tdse.grid;
                const double lo = g.contains("x_min") ? detail::get_number(g["x_min"], "numerics.tdse.grid.x_min") : grid.x_min;
                const double hi = g.contains("x_max") ? detail::get_number(g["x_max"], "numerics.tdse.grid.x_max") : grid.x_max;
                const std::size_t n_pts = g.contains("n") ? detail::get_count(g["n"], "numerics.tdse.grid.n") : grid.n;
                try {
                    c.numerics.tdse.grid = build_grid(lo, hi, n_pts);
                } catch (const Error& e) {
                    detail::field_error("numerics.tdse.grid", e.message());
                }
            }
        }
    }
    if (j.contains("outputs")) {
        const json& o = j["outputs"];
        detail::check_keys(o, "outputs", {"directory", "emit_svg", "emit_snapshots"});
        if (o.contains("directory")) c.outputs.directory = detail::get_string(o["directory"], "outputs.directory");
        if (o.contains("emit_svg")) c.outputs.emit_svg = detail::get_bool(o["emit_svg"], "outputs.emit_svg");
        if (o.contains("emit_snapshots")) {
            c.outputs.emit_snapshots = detail::get_bool(o["emit_snapshots"], "outputs.emit_snapshots");
        }
    }
    if (j.contains("skewness_policy")) {
        static const std::pair<const char*, SkewnessPolicy> policies[] = {{"fixed-point", SkewnessPolicy::FixedPoint},
                                                                          {"zero", SkewnessPolicy::Zero}};
        c.skewness_policy = detail::get_enum(j["skewness_policy"], "skewness_policy", policies);
    }
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot read config " + path.string());
    std::stringstream buf;
    buf << f.rdbuf();
    try {
        return parse_run_config(buf.str());
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.message());
    }
}

inline void apply_overrides(RunConfig& c, const ConfigOverrides& o) {
    if (o.model) c.model = *o.model;
    if (o.energy) {
        c.init.energy = *o.energy;
        c.init.v0.reset();
    }
    if (o.x0) c.init.x0 = *o.x0;
    if (o.t_end) c.numerics.t_end = *o.t_end;
    if (o.dt) {
        if (c.model != Model::Tdse) c.numerics.moments.dt = *o.dt;
        if (c.model != Model::Moments) c.numerics.tdse.dt = *o.dt;
    }
    if (o.branch) c.init.branch = *o.branch;
    if (o.out) c.outputs.directory = *o.out;
    if (o.emit_svg) c.outputs.emit_svg = true;
    if (o.emit_snapshots) c.outputs.emit_snapshots = true;
}

} // namespace dwtunnel
