#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "dwtunnel/error.hpp"
#include "dwtunnel/grid.hpp"
#include "dwtunnel/potential.hpp"

namespace dwtunnel {

/// Real-width Gaussian packet: centre x0, position variance v0, wave number k0.
/// Skewness is 0 and kurtosis 3 v0^2.
struct GaussianSpec {
    double x0 = 0.0;
    double v0 = 1.0;
    double k0 = 0.0;
};

/// Which closed form relates packet energy and variance.
///   General        - full <H> at arbitrary x0.
///   OriginCentered - the x0 = 0 form 1/(8v) + k^2/2 + (a/2)v + (3c/4)v^2, applied regardless of x0.
enum class EnergyFormula { General, OriginCentered };

inline const char* to_string(EnergyFormula f) {
    return f == EnergyFormula::General ? "general" : "eq9";
}

enum class VarianceBranch { Small, Large };

inline const char* to_string(VarianceBranch b) { return b == VarianceBranch::Small ? "small" : "large"; }

inline double packet_energy(const PotentialParams& p, const GaussianSpec& s,
                            EnergyFormula formula = EnergyFormula::General) {
    if (!(s.v0 > 0.0)) {
        throw Error(ErrorCode::NonPositiveVariance, "packet variance must be > 0 (got " + std::to_string(s.v0) + ")");
    }
    const double v = s.v0;
    const double kinetic = 1.0 / (8.0 * v) + 0.5 * s.k0 * s.k0;
    if (formula == EnergyFormula::OriginCentered) {
        return kinetic + 0.5 * p.a * v + 0.75 * p.c * v * v;
    }
    const double x = s.x0;
    const double x2 = x * x;
    return kinetic + 0.5 * p.a * (x2 + v) - (p.b / 3.0) * (x2 * x + 3.0 * x * v) +
           0.25 * p.c * (x2 * x2 + 6.0 * x2 * v + 3.0 * v * v);
}

namespace detail {

// d/dv of packet_energy; strictly increasing in v because the v-dependence is
// 1/(8v) + linear + (3c/4) v^2 with c >= 0.
inline double packet_energy_slope(const PotentialParams& p, double x0, double v, EnergyFormula formula) {
    double slope = -1.0 / (8.0 * v * v) + 0.5 * p.a + 1.5 * p.c * v;
    if (formula == EnergyFormula::General) slope += -p.b * x0 + 1.5 * p.c * x0 * x0;
    return slope;
}

// Bisect until the bracket cannot shrink any further in double precision.
template <typename Predicate>
double bisect(double lo, double hi, Predicate is_hi_side) {
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (is_hi_side(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Variance minimising packet_energy at fixed (x0, k0) and the energy there.
struct EnergyMinimum {
    double v0;
    double energy;
};

inline EnergyMinimum minimum_packet_energy(const PotentialParams& p, double x0, double k0,
                                           EnergyFormula formula = EnergyFormula::General) {
    double lo = 1e-8;
    while (detail::packet_energy_slope(p, x0, lo, formula) >= 0.0 && lo > 1e-300) lo *= 0.5;
    double hi = 1.0;
    while (detail::packet_energy_slope(p, x0, hi, formula) <= 0.0) hi *= 2.0;
    const double v = detail::bisect(lo, hi, [&](double m) { return detail::packet_energy_slope(p, x0, m, formula) > 0.0; });
    return {v, packet_energy(p, {x0, v, k0}, formula)};
}

/// Positive root of packet_energy(v0) = energy on the requested branch.
/// Throws EnergyTooLow (reporting the attainable minimum) when no root exists.
inline double variance_for_energy(const PotentialParams& p, double x0, double k0, double energy,
                                  VarianceBranch branch = VarianceBranch::Small,
                                  EnergyFormula formula = EnergyFormula::General) {
    const EnergyMinimum m = minimum_packet_energy(p, x0, k0, formula);
    const double tol = 1e-12 * std::max(1.0, std::abs(energy));
    if (energy < m.energy - tol || !std::isfinite(energy)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "energy " << energy << " below attainable minimum " << m.energy << " (at v0=" << m.v0 << ")";
        throw Error(ErrorCode::EnergyTooLow, msg.str());
    }
    if (energy <= m.energy + tol) return m.v0;

    auto excess = [&](double v) { return packet_energy(p, {x0, v, k0}, formula) - energy; };
    if (branch == VarianceBranch::Small) {
        double lo = 1e-8;
        while (excess(lo) <= 0.0) lo *= 0.5;
        return detail::bisect(lo, m.v0, [&](double v) { return excess(v) < 0.0; });
    }
    double hi = 2.0 * m.v0;
    while (excess(hi) <= 0.0) hi *= 2.0;
    return detail::bisect(m.v0, hi, [&](double v) { return excess(v) > 0.0; });
}

/// Packet sampled on the grid, end points pinned to 0 and rescaled to unit discrete norm.
inline WaveField sample_on_grid(const GaussianSpec& s, const Grid& grid) {
    if (!(s.v0 > 0.0)) {
        throw Error(ErrorCode::NonPositiveVariance, "packet variance must be > 0");
    }
    const double reach = 8.0 * std::sqrt(s.v0);
    if (s.x0 - reach < grid.x_min || s.x0 + reach > grid.x_max) {
        throw Error(ErrorCode::GridTooNarrow, "grid [" + std::to_string(grid.x_min) + ", " +
                                                  std::to_string(grid.x_max) + "] does not cover x0 +/- 8 sigma");
    }
    WaveField psi{grid, std::vector<Complex>(grid.n)};
    const double amplitude = std::pow(2.0 * std::numbers::pi * s.v0, -0.25);
    for (std::size_t i = 1; i + 1 < grid.n; ++i) {
        const double u = grid.x(i) - s.x0;
        psi.amplitudes[i] = amplitude * std::exp(Complex(-u * u / (4.0 * s.v0), s.k0 * u));
    }
    const double scale = 1.0 / std::sqrt(discrete_norm(psi));
    for (auto& z : psi.amplitudes) z *= scale;
    return psi;
}

} // namespace dwtunnel
