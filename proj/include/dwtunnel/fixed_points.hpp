#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dwtunnel/error.hpp"
#include "dwtunnel/potential.hpp"

namespace dwtunnel {

inline void require_quartic(const PotentialParams& p) {
    if (p.c == 0.0) throw Error(ErrorCode::DegenerateQuartic, "quartic coefficient c must be non-zero");
}

/// Skewness that makes the mean-position acceleration vanish at (x*, V*).
inline double skewness_at(const PotentialParams& p, double x_star, double v_star) {
    require_quartic(p);
    const double x = x_star;
    return -(p.a * x - p.b * v_star - p.b * x * x + 3.0 * p.c * v_star * x + p.c * x * x * x) / p.c;
}

/// q2 V*^2 + q1 V* + q0 = E after eliminating the skewness.
struct VStarQuadratic {
    double q2;
    double q1;
    double q0;

    double energy_at(double v) const { return (q2 * v + q1) * v + q0; }
    double discriminant(double energy) const { return q1 * q1 - 4.0 * q2 * (q0 - energy); }
    /// Smallest E with a real root.
    double vertex_energy() const { return q0 - q1 * q1 / (4.0 * q2); }
    double vertex_variance() const { return -q1 / (2.0 * q2); }
};

inline VStarQuadratic vstar_energy_coeffs(const PotentialParams& p, double x_star) {
    require_quartic(p);
    const auto& [a, b, c] = p;
    const double x = x_star, x2 = x * x;
    const double q2 = 2.25 * c;
    const double q1 = a - 5.0 * b * b / (6.0 * c) + 3.0 * b * x - 4.5 * c * x2;
    const double q0 = 5.0 * a * b * x / (6.0 * c) - 2.0 * a * x2 - 5.0 * b * b * x2 / (6.0 * c) +
                      3.0 * b * x2 * x - 2.25 * c * x2 * x2;
    return {q2, q1, q0};
}

enum class RootBranch { Minus, Plus };

inline const char* to_string(RootBranch b) { return b == RootBranch::Plus ? "plus" : "minus"; }

struct VStarRoot {
    double value;
    RootBranch branch;
};

struct VStarSolution {
    double discriminant = 0.0;
    std::vector<VStarRoot> roots;  // positive roots only, minus first
    int negative_roots_dropped = 0;

    std::optional<double> root(RootBranch b) const {
        for (const auto& r : roots)
            if (r.branch == b) return r.value;
        return std::nullopt;
    }
};

inline VStarSolution solve_vstar(const PotentialParams& p, double x_star, double energy) {
    const VStarQuadratic q = vstar_energy_coeffs(p, x_star);
    VStarSolution s;
    s.discriminant = q.discriminant(energy);
    // Round-off tolerance so an energy placed exactly on the vertex yields the double root.
    const double scale = std::max({q.q1 * q.q1, std::abs(4.0 * q.q2 * (q.q0 - energy)), 1.0});
    if (s.discriminant < -1e-14 * scale) return s;
    const double root = std::sqrt(std::max(0.0, s.discriminant));
    const std::array<VStarRoot, 2> both{{{(-q.q1 - root) / (2.0 * q.q2), RootBranch::Minus},
                                         {(-q.q1 + root) / (2.0 * q.q2), RootBranch::Plus}}};
    for (const auto& r : both) {
        if (r.value > 0.0) s.roots.push_back(r);
        else ++s.negative_roots_dropped;
    }
    return s;
}

/// Second-order linearisation d^2/dt^2 (dx, dV) = A (dx, dV) about (x*, V*).
struct StabilityMatrix {
    double a11, a12, a21, a22;

    double trace() const { return a11 + a22; }
    double determinant() const { return a11 * a22 - a12 * a21; }
};

inline StabilityMatrix stability_matrix(const PotentialParams& p, double x_star, double v_star, double skewness) {
    const auto& [a, b, c] = p;
    const double x = x_star, v = v_star, x2 = x * x;
    return {-a + 2.0 * b * x - 3.0 * c * x2 - 3.0 * c * v,
            b - 3.0 * c * x,
            -4.0 * a * x + 4.0 * b * x2 - 4.0 * c * x2 * x + 8.0 * b * v - 24.0 * c * x * v - 10.0 * c * skewness,
            -4.0 * a + 8.0 * b * x - 18.0 * c * v - 12.0 * c * x2};
}

/// Closed-form eigenvalues of a real 2x2 matrix, ordered by ascending real part.
inline std::array<std::complex<double>, 2> eigen2(const StabilityMatrix& m) {
    const double tr = m.trace();
    const double det = m.determinant();
    const std::complex<double> root = std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
    // Avoid cancellation: take the larger-magnitude root first, recover the other from det.
    const std::complex<double> big = 0.5 * (tr + (tr >= 0.0 ? root : -root));
    std::complex<double> small = big == 0.0 ? std::complex<double>(0.0) : det / big;
    if (root.imag() != 0.0) small = std::conj(big);
    std::array<std::complex<double>, 2> ev{big, small};
    if (ev[1].real() < ev[0].real() || (ev[1].real() == ev[0].real() && ev[1].imag() < ev[0].imag())) {
        std::swap(ev[0], ev[1]);
    }
    return ev;
}

inline constexpr double kStabilityMargin = 1e-9;

inline bool is_stable(const std::array<std::complex<double>, 2>& ev) {
    return ev[0].real() < -kStabilityMargin && ev[1].real() < -kStabilityMargin;
}

struct FixedPointSolution {
    double x_star = 0.0;
    double v_star = 0.0;
    double skewness = 0.0;
    double discriminant = 0.0;
    RootBranch branch = RootBranch::Plus;
    std::array<std::complex<double>, 2> eigenvalues{};
    bool stable = false;
};

/// Fixed point (x*, 0, V*, 0) on the given branch at energy E; nullopt if that root is absent.
inline std::optional<FixedPointSolution> fixed_point(const PotentialParams& p, double x_star, double energy,
                                                     RootBranch branch = RootBranch::Plus) {
    const VStarSolution sol = solve_vstar(p, x_star, energy);
    const auto v = sol.root(branch);
    if (!v) return std::nullopt;
    FixedPointSolution fp;
    fp.x_star = x_star;
    fp.v_star = *v;
    fp.skewness = skewness_at(p, x_star, *v);
    fp.discriminant = sol.discriminant;
    fp.branch = branch;
    fp.eigenvalues = eigen2(stability_matrix(p, x_star, *v, fp.skewness));
    fp.stable = is_stable(fp.eigenvalues);
    return fp;
}

enum class EnergyRegime { NoFixedPoint, ExistsUnstable, StableTunneling, AboveBarrier };

inline const char* to_string(EnergyRegime r) {
    switch (r) {
    case EnergyRegime::NoFixedPoint: return "no-fixed-point";
    case EnergyRegime::ExistsUnstable: return "exists-unstable";
    case EnergyRegime::StableTunneling: return "stable-tunneling";
    case EnergyRegime::AboveBarrier: return "above-barrier";
    }
    return "?";
}

struct EnergyInterval {
    EnergyRegime regime;
    double lower;
    double upper;  // half-open [lower, upper); infinity for the last interval
};

struct ThresholdReport {
    double barrier_x = 0.0;
    double e_exist = 0.0;
    double e_stable = 0.0;
    double v_stable = 0.0;
    double e_barrier = 0.0;
    std::array<EnergyInterval, 4> regimes{};
};

inline double barrier_position(const PotentialParams& p) {
    p.validate();
    const LandscapeRegime regime = classify(p);
    if (!has_barrier(regime)) {
        throw Error(ErrorCode::NoBarrier, std::string("landscape regime ") + to_string(regime) + " has no barrier");
    }
    return barrier_and_well(p)->first;
}

/// Existence and stability thresholds of the barrier fixed point on the plus branch.
/// e_stable is bracketed in E (through E -> V* -> S -> A -> eigenvalues) and bisected to 1e-6.
inline ThresholdReport thresholds(const PotentialParams& p) {
    ThresholdReport r;
    r.barrier_x = barrier_position(p);
    const VStarQuadratic q = vstar_energy_coeffs(p, r.barrier_x);
    r.e_exist = q.vertex_energy();
    r.e_barrier = potential(p, r.barrier_x);

    auto stable_at = [&](double e) {
        const auto fp = fixed_point(p, r.barrier_x, e, RootBranch::Plus);
        return fp && fp->stable;
    };
    double lo = r.e_exist;
    if (stable_at(lo)) {
        r.e_stable = lo;
    } else {
        // Grow the upper bracket geometrically past the barrier height if needed.
        double hi = std::max(r.e_barrier, lo + 1.0);
        for (int i = 0; i < 60 && !stable_at(hi); ++i) hi = lo + 2.0 * (hi - lo);
        if (!stable_at(hi)) throw Error(ErrorCode::NoBarrier, "barrier fixed point never stabilises");
        while (hi - lo > 1e-6) {
            const double mid = 0.5 * (lo + hi);
            (stable_at(mid) ? hi : lo) = mid;
        }
        r.e_stable = hi;
    }
    r.v_stable = *solve_vstar(p, r.barrier_x, r.e_stable).root(RootBranch::Plus);
    const double inf = std::numeric_limits<double>::infinity();
    r.regimes = {{{EnergyRegime::NoFixedPoint, -inf, r.e_exist},
                  {EnergyRegime::ExistsUnstable, r.e_exist, r.e_stable},
                  {EnergyRegime::StableTunneling, r.e_stable, r.e_barrier},
                  {EnergyRegime::AboveBarrier, r.e_barrier, inf}}};
    return r;
}

inline EnergyRegime regime_of(const ThresholdReport& t, double energy) {
    for (const auto& iv : t.regimes)
        if (energy >= iv.lower && energy < iv.upper) return iv.regime;
    return EnergyRegime::AboveBarrier;
}

inline EnergyRegime regime_of(const PotentialParams& p, double energy) { return regime_of(thresholds(p), energy); }

/// One row of the E-grid stability scan; absent roots stay empty.
struct ScanRow {
    double energy;
    double discriminant;
    std::optional<double> vstar_minus;
    std::optional<double> vstar_plus;
    std::optional<double> skewness_plus;
    std::optional<double> re_lambda1;
    std::optional<double> re_lambda2;
    std::optional<bool> stable;
};

inline std::vector<ScanRow> stability_scan(const PotentialParams& p, double e_min, double e_max, double step) {
    if (!(e_min < e_max) || !(step > 0.0)) {
        throw Error(ErrorCode::InvalidParams, "scan needs e_min < e_max and step > 0");
    }
    const double x = barrier_position(p);
    const auto rows = static_cast<std::size_t>(std::floor((e_max - e_min) / step + 1e-9)) + 1;
    std::vector<ScanRow> out;
    out.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const double e = e_min + static_cast<double>(i) * step;
        const VStarSolution sol = solve_vstar(p, x, e);
        ScanRow row{e, sol.discriminant, sol.root(RootBranch::Minus), sol.root(RootBranch::Plus), {}, {}, {}, {}};
        if (auto fp = fixed_point(p, x, e, RootBranch::Plus)) {
            row.skewness_plus = fp->skewness;
            row.re_lambda1 = fp->eigenvalues[0].real();
            row.re_lambda2 = fp->eigenvalues[1].real();
            row.stable = fp->stable;
        }
        out.push_back(row);
    }
    return out;
}

} // namespace dwtunnel
