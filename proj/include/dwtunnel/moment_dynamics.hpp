#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "dwtunnel/error.hpp"
#include "dwtunnel/potential.hpp"

namespace dwtunnel {

/// Phase point of the reduced mean/variance system.
struct MomentState {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double variance = 1.0;
    double variance_rate = 0.0;

    std::array<double, 4> as_array() const { return {mean_x, mean_p, variance, variance_rate}; }
    static MomentState from_array(const std::array<double, 4>& y) { return {y[0], y[1], y[2], y[3]}; }
};

/// Control parameters of a run. The fourth central moment is closed by the
/// Gaussian rule K = 3 V^2; the third (skewness) is held fixed.
struct MomentSystemParams {
    PotentialParams potential;
    double energy = 0.0;
    double skewness = 0.0;
};

struct MomentDerivative {
    double d_mean_x;
    double d_mean_p;
    double d_variance;
    double d_variance_rate;
};

inline MomentDerivative rhs(const MomentState& s, const MomentSystemParams& sys) {
    const auto& [a, b, c] = sys.potential;
    const double x = s.mean_x, p = s.mean_p, v = s.variance, S = sys.skewness;
    const double x2 = x * x;
    const double accel = -a * x + b * (v + x2) - c * (S + 3.0 * v * x + x2 * x);
    const double var_accel = 4.0 * sys.energy - 2.0 * p * p - a * (4.0 * v + 2.0 * x2) +
                             b * ((10.0 / 3.0) * S + 8.0 * v * x + (4.0 / 3.0) * x2 * x) -
                             c * (9.0 * v * v + 10.0 * S * x + 12.0 * v * x2 + x2 * x2);
    return {p, accel, s.variance_rate, var_accel};
}

/// Momentum variance implied by energy conservation, 2E - 2<phi> - <p>^2, with
/// <phi> expanded through the closure. Diagnostic; may come out negative.
inline double momentum_variance(const MomentState& s, const MomentSystemParams& sys) {
    const auto& [a, b, c] = sys.potential;
    const double x = s.mean_x, v = s.variance, S = sys.skewness;
    const double x2 = x * x;
    const double mean_phi = 0.5 * a * (v + x2) - (b / 3.0) * (x2 * x + 3.0 * x * v + S) +
                            0.25 * c * (x2 * x2 + 6.0 * x2 * v + 4.0 * S * x + 3.0 * v * v);
    return 2.0 * sys.energy - 2.0 * mean_phi - s.mean_p * s.mean_p;
}

/// One classical fourth-order Runge-Kutta step for any fixed-size state.
template <std::size_t N, typename F>
std::array<double, N> rk4_step(const std::array<double, N>& y, double dt, F&& f) {
    auto axpy = [](const std::array<double, N>& base, double h, const std::array<double, N>& k) {
        std::array<double, N> out;
        for (std::size_t i = 0; i < N; ++i) out[i] = base[i] + h * k[i];
        return out;
    };
    const auto k1 = f(y);
    const auto k2 = f(axpy(y, 0.5 * dt, k1));
    const auto k3 = f(axpy(y, 0.5 * dt, k2));
    const auto k4 = f(axpy(y, dt, k3));
    std::array<double, N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

struct MomentSeries {
    std::vector<double> times;
    std::vector<MomentState> states;
    std::vector<double> vp;  // momentum variance diagnostic per sample
};

/// Halt: stop with VarianceCollapse once V <= 1e-12 (closure breakdown).
/// Continue: integrate through non-positive V; only non-finite states stop the run.
enum class VarianceGuard { Halt, Continue };

inline const char* to_string(VarianceGuard g) { return g == VarianceGuard::Halt ? "halt" : "continue"; }

inline constexpr double kVarianceFloor = 1e-12;

/// Integration failure. Carries the samples recorded before the failure and the
/// time of the offending step.
class IntegrationError : public Error {
public:
    IntegrationError(ErrorCode code, double time, MomentSeries partial)
        : Error(code, describe(code, time)), time_(time), partial_(std::move(partial)) {}

    double time() const { return time_; }
    const MomentSeries& partial() const { return partial_; }

private:
    static std::string describe(ErrorCode code, double t) {
        std::ostringstream s;
        s.precision(17);
        s << (code == ErrorCode::VarianceCollapse ? "variance fell to <= 1e-12" : "non-finite state") << " at t=" << t;
        return s.str();
    }

    double time_;
    MomentSeries partial_;
};

struct IntegrateOptions {
    double dt = 1e-3;
    double t_end = 100.0;
    std::size_t stride = 10;  // steps between samples
    VarianceGuard guard = VarianceGuard::Halt;
};

inline MomentSeries integrate(const MomentState& init, const MomentSystemParams& sys, const IntegrateOptions& opt = {}) {
    if (!(opt.dt > 0.0) || !(opt.t_end > 0.0) || opt.stride == 0) {
        throw Error(ErrorCode::InvalidParams, "need dt > 0, t_end > 0, stride >= 1");
    }
    if (!(init.variance > 0.0)) throw Error(ErrorCode::NonPositiveVariance, "initial variance must be > 0");

    const auto steps = static_cast<std::size_t>(std::llround(opt.t_end / opt.dt));
    auto f = [&](const std::array<double, 4>& y) {
        const MomentDerivative d = rhs(MomentState::from_array(y), sys);
        return std::array<double, 4>{d.d_mean_x, d.d_mean_p, d.d_variance, d.d_variance_rate};
    };

    MomentSeries out;
    const std::size_t samples = steps / opt.stride + 2;
    out.times.reserve(samples);
    out.states.reserve(samples);
    out.vp.reserve(samples);
    auto record = [&](double t, const MomentState& s) {
        out.times.push_back(t);
        out.states.push_back(s);
        out.vp.push_back(momentum_variance(s, sys));
    };

    std::array<double, 4> y = init.as_array();
    record(0.0, init);
    for (std::size_t k = 1; k <= steps; ++k) {
        y = rk4_step(y, opt.dt, f);
        const double t = static_cast<double>(k) * opt.dt;
        if (!(std::isfinite(y[0]) && std::isfinite(y[1]) && std::isfinite(y[2]) && std::isfinite(y[3]))) {
            throw IntegrationError(ErrorCode::NonFiniteState, t, std::move(out));
        }
        if (opt.guard == VarianceGuard::Halt && y[2] <= kVarianceFloor) {
            throw IntegrationError(ErrorCode::VarianceCollapse, t, std::move(out));
        }
        if (k % opt.stride == 0 || k == steps) record(t, MomentState::from_array(y));
    }
    return out;
}

} // namespace dwtunnel
