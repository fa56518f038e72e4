#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dwtunnel/error.hpp"

namespace dwtunnel {

/// Coefficients of phi(x) = (a/2) x^2 - (b/3) x^3 + (c/4) x^4 in units hbar = m = 1.
struct PotentialParams {
    double a = 10.0;
    double b = 4.0;
    double c = 0.35;

    bool valid() const { return a > 0.0 && b > 0.0 && c > 0.0; }

    /// Throws InvalidParams unless all coefficients are strictly positive.
    void validate() const {
        if (!(a > 0.0 && b > 0.0 && c > 0.0)) {
            throw Error(ErrorCode::InvalidParams,
                        "potential coefficients must be positive (a=" + std::to_string(a) +
                            ", b=" + std::to_string(b) + ", c=" + std::to_string(c) + ")");
        }
    }
};

struct PotentialValue {
    double phi;
    double dphi;
    double d2phi;
};

inline double potential(const PotentialParams& p, double x) {
    const double x2 = x * x;
    return x2 * (0.5 * p.a - x * (p.b / 3.0 - 0.25 * p.c * x));
}

inline PotentialValue evaluate(const PotentialParams& p, double x) {
    const double x2 = x * x;
    return {potential(p, x), x * (p.a - p.b * x + p.c * x2), p.a - 2.0 * p.b * x + 3.0 * p.c * x2};
}

enum class StationaryKind { Minimum, Maximum, Inflection };

inline const char* to_string(StationaryKind k) {
    switch (k) {
    case StationaryKind::Minimum: return "minimum";
    case StationaryKind::Maximum: return "maximum";
    case StationaryKind::Inflection: return "inflection";
    }
    return "?";
}

/// Landscape shape as c decreases at fixed a, b:
/// A single well, B inflection, C shallow right well, D symmetric, E deep right well.
enum class LandscapeRegime { A, B, C, D, E };

inline const char* to_string(LandscapeRegime r) {
    switch (r) {
    case LandscapeRegime::A: return "A";
    case LandscapeRegime::B: return "B";
    case LandscapeRegime::C: return "C";
    case LandscapeRegime::D: return "D";
    case LandscapeRegime::E: return "E";
    }
    return "?";
}

inline const char* describe(LandscapeRegime r) {
    switch (r) {
    case LandscapeRegime::A: return "single-well";
    case LandscapeRegime::B: return "inflection";
    case LandscapeRegime::C: return "asymmetric-shallow-right";
    case LandscapeRegime::D: return "symmetric";
    case LandscapeRegime::E: return "asymmetric-deep-right";
    }
    return "?";
}

inline bool has_barrier(LandscapeRegime r) {
    return r == LandscapeRegime::C || r == LandscapeRegime::D || r == LandscapeRegime::E;
}

struct StationaryPoint {
    double x;
    StationaryKind kind;
};

struct PotentialReport {
    double c0 = 0.0;        // degenerate-minima coupling 2b^2/9a
    double c0_prime = 0.0;  // inflection coupling b^2/4a
    std::vector<StationaryPoint> stationary_points;
    std::optional<double> beta_minus;
    std::optional<double> beta_plus;
    std::optional<double> alpha_minus;
    std::optional<double> alpha_plus;
    std::optional<double> barrier_height;
    std::optional<double> delta;
    LandscapeRegime regime = LandscapeRegime::A;
};

inline constexpr double kRegimeRelTol = 1e-12;
inline constexpr double kInflectionRelTol = 1e-10;

inline double critical_coupling_symmetric(const PotentialParams& p) { return 2.0 * p.b * p.b / (9.0 * p.a); }
inline double critical_coupling_inflection(const PotentialParams& p) { return p.b * p.b / (4.0 * p.a); }

inline LandscapeRegime classify(const PotentialParams& p) {
    const double c0 = critical_coupling_symmetric(p);
    const double c0p = critical_coupling_inflection(p);
    if (std::abs(p.c - c0p) <= kRegimeRelTol * c0p) return LandscapeRegime::B;
    if (std::abs(p.c - c0) <= kRegimeRelTol * c0) return LandscapeRegime::D;
    if (p.c > c0p) return LandscapeRegime::A;
    if (p.c > c0) return LandscapeRegime::C;
    return LandscapeRegime::E;
}

inline StationaryKind stationary_kind(const PotentialParams& p, double x) {
    const double curv = evaluate(p, x).d2phi;
    if (std::abs(curv) < kInflectionRelTol * p.a) return StationaryKind::Inflection;
    return curv > 0.0 ? StationaryKind::Minimum : StationaryKind::Maximum;
}

/// Barrier (beta-) and right-well (beta+) abscissae; nullopt when phi' has only the root at 0.
inline std::optional<std::pair<double, double>> barrier_and_well(const PotentialParams& p) {
    const LandscapeRegime regime = classify(p);
    if (regime == LandscapeRegime::A) return std::nullopt;
    if (regime == LandscapeRegime::B) {
        const double beta = p.b / (2.0 * p.c);
        return std::pair{beta, beta};
    }
    const double root = std::sqrt(std::max(0.0, p.b * p.b - 4.0 * p.a * p.c));
    return std::pair{(p.b - root) / (2.0 * p.c), (p.b + root) / (2.0 * p.c)};
}

inline PotentialReport landscape(const PotentialParams& p) {
    p.validate();
    PotentialReport r;
    r.c0 = critical_coupling_symmetric(p);
    r.c0_prime = critical_coupling_inflection(p);
    r.regime = classify(p);

    r.stationary_points.push_back({0.0, stationary_kind(p, 0.0)});
    if (auto bw = barrier_and_well(p)) {
        r.beta_minus = bw->first;
        r.beta_plus = bw->second;
        if (r.regime == LandscapeRegime::B) {
            r.stationary_points.push_back({bw->first, StationaryKind::Inflection});
        } else {
            r.stationary_points.push_back({bw->first, stationary_kind(p, bw->first)});
            r.stationary_points.push_back({bw->second, stationary_kind(p, bw->second)});
        }
        r.barrier_height = potential(p, bw->first);
        r.delta = -potential(p, bw->second);
    }

    const double disc = p.b * p.b / 9.0 - 0.5 * p.a * p.c;
    if (disc >= 0.0 || r.regime == LandscapeRegime::D) {
        const double centre = 2.0 * p.b / (3.0 * p.c);
        const double half = (2.0 / p.c) * std::sqrt(std::max(0.0, disc));
        r.alpha_minus = centre - half;
        r.alpha_plus = centre + half;
    }
    return r;
}

} // namespace dwtunnel
