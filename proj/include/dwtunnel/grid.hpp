#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dwtunnel/error.hpp"

namespace dwtunnel {

/// Uniform grid with both end points included.
struct Grid {
    double x_min = -100.0;
    double x_max = 100.0;
    std::size_t n = 100000;
    double dx = 200.0 / 99999.0;

    double x(std::size_t i) const {
        return i + 1 == n ? x_max : x_min + static_cast<double>(i) * dx;
    }
};

inline Grid build_grid(double x_min, double x_max, std::size_t n) {
    if (n < 3 || !(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
        throw Error(ErrorCode::InvalidGrid, "need n >= 3 and x_min < x_max (got n=" + std::to_string(n) +
                                                ", [" + std::to_string(x_min) + ", " +
                                                std::to_string(x_max) + "])");
    }
    return Grid{x_min, x_max, n, (x_max - x_min) / static_cast<double>(n - 1)};
}

using Complex = std::complex<double>;

/// Complex amplitudes on a grid; the first and last samples are Dirichlet nodes and stay 0.
struct WaveField {
    Grid grid;
    std::vector<Complex> amplitudes;

    std::span<Complex> values() { return amplitudes; }
    std::span<const Complex> values() const { return amplitudes; }
};

/// Trapezoidal integral of samples f_i spaced dx apart.
template <typename T>
T trapezoid(std::span<const T> f, double dx) {
    if (f.size() < 2) return T{};
    T sum{};
    for (std::size_t i = 1; i + 1 < f.size(); ++i) sum += f[i];
    sum += 0.5 * (f.front() + f.back());
    return sum * dx;
}

inline double discrete_norm(const WaveField& psi) {
    const auto v = psi.values();
    double sum = 0.0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) sum += std::norm(v[i]);
    sum += 0.5 * (std::norm(v.front()) + std::norm(v.back()));
    return sum * psi.grid.dx;
}

} // namespace dwtunnel
