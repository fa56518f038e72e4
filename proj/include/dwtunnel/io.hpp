#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dwtunnel/error.hpp"
#include "dwtunnel/fixed_points.hpp"
#include "dwtunnel/moment_dynamics.hpp"
#include "dwtunnel/potential.hpp"
#include "dwtunnel/tdse.hpp"
#include "dwtunnel/tunneling.hpp"

namespace dwtunnel::io {

using nlohmann::json;

/// 17 significant digits, locale-independent, no trailing spaces.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

/// Serialises with floats at 17 significant digits (nlohmann's dump uses shortest round-trip).
inline void dump_json(const json& j, std::ostream& os, int indent = 2, int depth = 0) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) { os << "{}"; return; }
        os << "{\n";
        std::size_t i = 0;
        for (auto it = j.begin(); it != j.end(); ++it, ++i) {
            os << pad << json(it.key()).dump() << ": ";
            dump_json(it.value(), os, indent, depth + 1);
            os << (i + 1 < j.size() ? ",\n" : "\n");
        }
        os << close_pad << "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) { os << "[]"; return; }
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            os << pad;
            dump_json(j[i], os, indent, depth + 1);
            os << (i + 1 < j.size() ? ",\n" : "\n");
        }
        os << close_pad << "]";
        return;
    }
    case json::value_t::number_float: {
        const double v = j.get<double>();
        // JSON has no inf/nan literals
        os << (std::isfinite(v) ? format_number(v) : std::string("null"));
        return;
    }
    default:
        os << j.dump();
    }
}

inline std::string dump_json(const json& j) {
    std::ostringstream os;
    dump_json(j, os);
    os << "\n";
    return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const PotentialParams& p) { return {{"a", p.a}, {"b", p.b}, {"c", p.c}}; }

inline json to_json(const PotentialReport& r) {
    json pts = json::array();
    for (const auto& s : r.stationary_points) pts.push_back({{"x", s.x}, {"kind", to_string(s.kind)}});
    return {{"c0", r.c0},
            {"c0_prime", r.c0_prime},
            {"stationary_points", pts},
            {"beta_minus", opt_json(r.beta_minus)},
            {"beta_plus", opt_json(r.beta_plus)},
            {"alpha_minus", opt_json(r.alpha_minus)},
            {"alpha_plus", opt_json(r.alpha_plus)},
            {"barrier_height", opt_json(r.barrier_height)},
            {"delta", opt_json(r.delta)},
            {"regime", to_string(r.regime)},
            {"regime_name", describe(r.regime)}};
}

inline json to_json(const ThresholdReport& t) {
    json regimes = json::array();
    for (const auto& iv : t.regimes) {
        regimes.push_back({{"label", to_string(iv.regime)},
                           {"lower", std::isfinite(iv.lower) ? json(iv.lower) : json(nullptr)},
                           {"upper", std::isfinite(iv.upper) ? json(iv.upper) : json(nullptr)}});
    }
    return {{"barrier_x", t.barrier_x}, {"e_exist", t.e_exist},     {"e_stable", t.e_stable},
            {"v_stable", t.v_stable},   {"e_barrier", t.e_barrier}, {"regimes", regimes}};
}

inline json to_json(const TunnelingReport& r) {
    return {{"barrier_x", r.barrier_x},
            {"crossed", r.crossed},
            {"first_crossing_time", opt_json(r.first_crossing_time)},
            {"n_crossings", r.n_crossings},
            {"left_fraction", r.left_fraction},
            {"right_fraction", r.right_fraction}};
}

inline json to_json(const ComparisonReport& r) {
    return {{"rms_mean_x", r.rms_mean_x}, {"rms_variance", r.rms_variance}, {"t_begin", r.t_begin},
            {"t_end", r.t_end},           {"points", r.points},             {"crossed_moments", r.crossed_a},
            {"crossed_tdse", r.crossed_b}, {"verdict_agreement", r.verdict_agreement}};
}

inline std::string moment_csv(const MomentSeries& s) {
    std::string out = "t,mean_x,mean_p,variance,variance_rate,vp_diagnostic\n";
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        const auto& st = s.states[i];
        out += format_number(s.times[i]) + ',' + format_number(st.mean_x) + ',' + format_number(st.mean_p) + ',' +
               format_number(st.variance) + ',' + format_number(st.variance_rate) + ',' + format_number(s.vp[i]) + '\n';
    }
    return out;
}

inline std::string observable_csv(const ObservableSeries& s) {
    std::string out = "t,norm,mean_x,mean_p,variance,energy\n";
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        const auto& o = s.samples[i];
        out += format_number(s.times[i]) + ',' + format_number(o.norm) + ',' + format_number(o.mean_x) + ',' +
               format_number(o.mean_p) + ',' + format_number(o.variance) + ',' + format_number(o.energy) + '\n';
    }
    return out;
}

inline std::string scan_csv(const std::vector<ScanRow>& rows) {
    std::string out = "E,discriminant,vstar_minus,vstar_plus,skewness_plus,re_lambda1,re_lambda2,stable\n";
    for (const auto& r : rows) {
        out += format_number(r.energy) + ',' + format_number(r.discriminant) + ',' + format_optional(r.vstar_minus) +
               ',' + format_optional(r.vstar_plus) + ',' + format_optional(r.skewness_plus) + ',' +
               format_optional(r.re_lambda1) + ',' + format_optional(r.re_lambda2) + ',' +
               (r.stable ? (*r.stable ? "1" : "0") : "") + '\n';
    }
    return out;
}

inline std::string snapshot_csv(const WaveField& psi) {
    std::string out = "x,re,im,prob\n";
    for (std::size_t i = 0; i < psi.grid.n; ++i) {
        const Complex z = psi.amplitudes[i];
        out += format_number(psi.grid.x(i)) + ',' + format_number(z.real()) + ',' + format_number(z.imag()) + ',' +
               format_number(std::norm(z)) + '\n';
    }
    return out;
}

struct ReferenceLine {
    double y;
    std::string colour;
};

/// Two stacked line charts: mean position (with dashed reference lines) and variance.
inline std::string trajectory_svg(const std::string& title, const std::vector<double>& t,
                                  const std::vector<double>& mean_x, const std::vector<double>& variance,
                                  const std::vector<ReferenceLine>& refs) {
    constexpr double W = 800, H = 300, L = 70, R = 20, T = 30, B = 40;
    std::ostringstream s;
    s.precision(6);
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << 2 * H << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    auto panel = [&](double y_off, const std::vector<double>& y, const std::string& label, bool with_refs,
                     const std::string& colour) {
        if (t.empty()) return;
        double lo = y.front(), hi = y.front();
        for (double v : y) { lo = std::min(lo, v); hi = std::max(hi, v); }
        if (with_refs)
            for (const auto& r : refs) { lo = std::min(lo, r.y); hi = std::max(hi, r.y); }
        if (hi - lo < 1e-12) { lo -= 1.0; hi += 1.0; }
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
        const double t0 = t.front(), t1 = t.back() > t.front() ? t.back() : t.front() + 1.0;
        auto px = [&](double tv) { return L + (tv - t0) / (t1 - t0) * (W - L - R); };
        auto py = [&](double v) { return y_off + T + (hi - v) / (hi - lo) * (H - T - B); };
        s << "<rect x=\"" << L << "\" y=\"" << y_off + T << "\" width=\"" << W - L - R << "\" height=\""
          << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
        if (with_refs) {
            for (const auto& r : refs) {
                s << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << py(r.y) << "\" y2=\"" << py(r.y)
                  << "\" stroke=\"" << r.colour << "\" stroke-dasharray=\"6,4\"/>\n";
            }
        }
        s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < t.size(); ++i) s << px(t[i]) << ',' << py(y[i]) << ' ';
        s << "\"/>\n";
        s << "<text x=\"10\" y=\"" << y_off + T + (H - T - B) / 2 << "\" font-size=\"12\">" << label << "</text>\n";
        s << "<text x=\"" << L << "\" y=\"" << y_off + H - 10 << "\" font-size=\"11\">t=" << t0 << "</text>\n";
        s << "<text x=\"" << W - R - 80 << "\" y=\"" << y_off + H - 10 << "\" font-size=\"11\">t=" << t1 << "</text>\n";
        s << "<text x=\"" << L - 65 << "\" y=\"" << y_off + T + 10 << "\" font-size=\"11\">" << hi << "</text>\n";
        s << "<text x=\"" << L - 65 << "\" y=\"" << y_off + H - B << "\" font-size=\"11\">" << lo << "</text>\n";
    };
    s << "<text x=\"" << L << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
    panel(0.0, mean_x, "&lt;x&gt;", true, "green");
    panel(H, variance, "V", false, "blue");
    s << "</svg>\n";
    return s.str();
}

} // namespace dwtunnel::io
