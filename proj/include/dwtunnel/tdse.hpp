#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <vector>

#include "dwtunnel/error.hpp"
#include "dwtunnel/gaussian_packet.hpp"
#include "dwtunnel/grid.hpp"
#include "dwtunnel/potential.hpp"

namespace dwtunnel {

struct Observables {
    double norm = 0.0;
    double mean_x = 0.0;
    double mean_p = 0.0;
    double variance = 0.0;
    double energy = 0.0;
};

/// Discrete Hamiltonian H = -(1/2) D2 + phi with the 3-point Laplacian:
/// diagonal 1/dx^2 + phi(x_i), off-diagonal -1/(2 dx^2). Dirichlet end nodes excluded.
struct DiscreteHamiltonian {
    Grid grid;
    std::vector<double> potential;  // phi at every node, end nodes included

    DiscreteHamiltonian(const Grid& g, const PotentialParams& p) : grid(g), potential(g.n) {
        for (std::size_t i = 0; i < g.n; ++i) potential[i] = dwtunnel::potential(p, g.x(i));
    }

    double diagonal(std::size_t i) const { return 1.0 / (grid.dx * grid.dx) + potential[i]; }
    double off_diagonal() const { return -0.5 / (grid.dx * grid.dx); }
};

/// Trapezoidal observables. Energy uses the propagator's own stencil, written as
/// (1/2dx^2) sum |psi_{i+1} - psi_i|^2 + sum phi_i |psi_i|^2, which equals <psi|H|psi>
/// for Dirichlet fields.
inline Observables measure(const WaveField& psi, const DiscreteHamiltonian& h) {
    const auto v = psi.values();
    const Grid& g = psi.grid;
    double norm = 0.0, m1 = 0.0, m2 = 0.0, flux = 0.0, kin = 0.0, pot = 0.0;
    for (std::size_t i = 1; i + 1 < g.n; ++i) {
        const double prob = std::norm(v[i]);
        const double x = g.x(i);
        norm += prob;
        m1 += x * prob;
        m2 += x * x * prob;
        pot += h.potential[i] * prob;
        flux += (std::conj(v[i]) * (v[i + 1] - v[i - 1])).imag();
    }
    for (std::size_t i = 0; i + 1 < g.n; ++i) kin += std::norm(v[i + 1] - v[i]);
    Observables o;
    o.norm = norm * g.dx;
    o.mean_x = m1 * g.dx;
    o.variance = m2 * g.dx - o.mean_x * o.mean_x;
    o.mean_p = 0.5 * flux;
    o.energy = 0.5 * kin / g.dx + pot * g.dx;
    return o;
}

inline Observables measure(const WaveField& psi, const PotentialParams& p) {
    return measure(psi, DiscreteHamiltonian(psi.grid, p));
}

/// Crank-Nicolson propagator (I + i dt/2 H) psi' = (I - i dt/2 H) psi.
///
/// The left-hand matrix is constant, so its Thomas elimination is factored once.
/// A step is carried out in the equivalent Cayley form psi' = 2 chi - psi with
/// (I + i dt/2 H) chi = psi, which avoids forming H psi explicitly.
class CrankNicolson {
public:
    CrankNicolson(const Grid& grid, const PotentialParams& params, double dt)
        : hamiltonian_(grid, params), dt_(dt) {
        if (!(dt > 0.0)) throw Error(ErrorCode::InvalidParams, "time step must be > 0");
        const std::size_t m = grid.n - 2;  // interior unknowns
        const Complex half_i_dt(0.0, 0.5 * dt);
        upper_ = half_i_dt * hamiltonian_.off_diagonal();
        inv_pivot_.resize(m);
        ratio_.resize(m);
        Complex prev_ratio(0.0);
        for (std::size_t k = 0; k < m; ++k) {
            const Complex diag = 1.0 + half_i_dt * hamiltonian_.diagonal(k + 1);
            const Complex pivot = k == 0 ? diag : diag - upper_ * prev_ratio;
            if (!(std::abs(pivot) > 1e-300)) {
                throw Error(ErrorCode::SingularPivot, "zero pivot at interior row " + std::to_string(k));
            }
            inv_pivot_[k] = 1.0 / pivot;
            ratio_[k] = upper_ * inv_pivot_[k];
            prev_ratio = ratio_[k];
        }
        work_.resize(m);
    }

    const DiscreteHamiltonian& hamiltonian() const { return hamiltonian_; }
    double dt() const { return dt_; }

    void step(WaveField& psi) {
        auto v = psi.values();
        const std::size_t m = work_.size();
        // forward elimination
        work_[0] = v[1] * inv_pivot_[0];
        for (std::size_t k = 1; k < m; ++k) work_[k] = (v[k + 1] - upper_ * work_[k - 1]) * inv_pivot_[k];
        // back substitution
        for (std::size_t k = m - 1; k-- > 0;) work_[k] -= ratio_[k] * work_[k + 1];
        for (std::size_t k = 0; k < m; ++k) v[k + 1] = 2.0 * work_[k] - v[k + 1];
        v.front() = 0.0;
        v.back() = 0.0;
    }

private:
    DiscreteHamiltonian hamiltonian_;
    double dt_;
    Complex upper_;
    std::vector<Complex> inv_pivot_;
    std::vector<Complex> ratio_;
    std::vector<Complex> work_;
};

/// Probability within `width` of either wall.
inline double edge_probability(const WaveField& psi, double width) {
    const Grid& g = psi.grid;
    double sum = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        if (x - g.x_min <= width || g.x_max - x <= width) sum += std::norm(psi.amplitudes[i]);
    }
    return sum * g.dx;
}

inline WaveField crank_nicolson_step(const WaveField& psi, const PotentialParams& params, double dt) {
    CrankNicolson cn(psi.grid, params, dt);
    WaveField out = psi;
    cn.step(out);
    return out;
}

struct DriftSummary {
    double max_norm_drift = 0.0;    // max |norm(t) - 1|
    double max_energy_drift = 0.0;  // max |E(t) - E(0)|
};

struct ObservableSeries {
    std::vector<double> times;
    std::vector<Observables> samples;
    DriftSummary drift;
    bool drift_warning = false;
    double max_edge_probability = 0.0;  // over samples, within EvolveOptions::edge_width of a wall
};

struct EvolveOptions {
    double dt = 0.01;
    double t_end = 100.0;
    std::size_t stride = 10;            // steps between samples
    double drift_budget = 1e-9;
    double drift_warn = 1e-10;
    double edge_width = 10.0;
    std::size_t snapshot_stride = 0;    // 0 disables snapshots
    std::function<void(double, const WaveField&)> on_snapshot;
};

class DriftBudgetExceeded : public Error {
public:
    DriftBudgetExceeded(const std::string& what, ObservableSeries series)
        : Error(ErrorCode::DriftBudgetExceeded, what), series_(std::move(series)) {}
    const ObservableSeries& series() const { return series_; }

private:
    ObservableSeries series_;
};

inline std::size_t step_count(double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end > 0.0)) throw Error(ErrorCode::InvalidParams, "dt and t_end must be > 0");
    return static_cast<std::size_t>(std::llround(t_end / dt));
}

/// Propagates psi0 to t_end sampling observables every `stride` steps (t = 0 and t_end included).
/// Throws DriftBudgetExceeded, carrying the full series, if either drift exceeds the budget.
inline ObservableSeries evolve(const WaveField& psi0, const PotentialParams& params, const EvolveOptions& opt = {}) {
    if (opt.stride == 0) throw Error(ErrorCode::InvalidParams, "stride must be >= 1");
    const std::size_t steps = step_count(opt.t_end, opt.dt);
    CrankNicolson cn(psi0.grid, params, opt.dt);
    WaveField psi = psi0;
    ObservableSeries out;
    auto record = [&](std::size_t k) {
        const double t = static_cast<double>(k) * opt.dt;
        const Observables o = measure(psi, cn.hamiltonian());
        out.times.push_back(t);
        out.samples.push_back(o);
        out.drift.max_norm_drift = std::max(out.drift.max_norm_drift, std::abs(o.norm - 1.0));
        out.drift.max_energy_drift =
            std::max(out.drift.max_energy_drift, std::abs(o.energy - out.samples.front().energy));
        out.max_edge_probability = std::max(out.max_edge_probability, edge_probability(psi, opt.edge_width));
    };
    record(0);
    if (opt.on_snapshot && opt.snapshot_stride > 0) opt.on_snapshot(0.0, psi);
    for (std::size_t k = 1; k <= steps; ++k) {
        cn.step(psi);
        if (k % opt.stride == 0 || k == steps) record(k);
        if (opt.on_snapshot && opt.snapshot_stride > 0 && k % opt.snapshot_stride == 0) {
            opt.on_snapshot(static_cast<double>(k) * opt.dt, psi);
        }
    }
    const double worst = std::max(out.drift.max_norm_drift, out.drift.max_energy_drift);
    out.drift_warning = worst > opt.drift_warn;
    if (worst > opt.drift_budget) {
        std::ostringstream msg;
        msg.precision(3);
        msg << "norm drift " << out.drift.max_norm_drift << ", energy drift " << out.drift.max_energy_drift
            << " exceed budget " << opt.drift_budget;
        throw DriftBudgetExceeded(msg.str(), std::move(out));
    }
    return out;
}

/// Variance of a grid-sampled packet whose discrete energy equals `energy`.
/// Brackets around the analytic root on the requested branch, then bisects on the
/// discrete energy.
inline double tune_variance_for_energy(const PotentialParams& params, const Grid& grid, double x0, double k0,
                                       double energy, VarianceBranch branch) {
    const double guess = variance_for_energy(params, x0, k0, energy, branch, EnergyFormula::General);
    const double v_min = minimum_packet_energy(params, x0, k0, EnergyFormula::General).v0;
    const DiscreteHamiltonian h(grid, params);
    auto excess = [&](double v) { return measure(sample_on_grid({x0, v, k0}, grid), h).energy - energy; };

    // Discrete and analytic energies differ at O(dx^2); widen around the guess until the sign flips.
    // On the small branch the excess decreases with v, on the large branch it increases.
    const double sign = branch == VarianceBranch::Small ? -1.0 : 1.0;
    double lo = guess, hi = guess;
    for (double w = 1e-6; w < 1.0; w *= 2.0) {
        lo = guess * (1.0 - w);
        hi = guess * (1.0 + w);
        if (branch == VarianceBranch::Small) hi = std::min(hi, v_min);
        else lo = std::max(lo, v_min);
        if (sign * excess(lo) <= 0.0 && sign * excess(hi) >= 0.0) break;
    }
    if (!(sign * excess(lo) <= 0.0 && sign * excess(hi) >= 0.0)) {
        throw Error(ErrorCode::EnergyTooLow, "could not bracket discrete energy " + std::to_string(energy));
    }
    return detail::bisect(lo, hi, [&](double v) { return sign * excess(v) >= 0.0; });
}

} // namespace dwtunnel
