#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dwtunnel/error.hpp"

namespace dwtunnel {

struct TunnelingReport {
    double barrier_x = 0.0;
    bool crossed = false;
    std::optional<double> first_crossing_time;
    std::size_t n_crossings = 0;
    double left_fraction = 0.0;
    double right_fraction = 0.0;
};

/// Crossings are sign changes of (mean_x - barrier_x) between consecutive samples.
/// A sample sitting exactly on the barrier counts as left.
inline TunnelingReport detect_tunneling(std::span<const double> times, std::span<const double> mean_x,
                                        double barrier_x) {
    if (mean_x.empty() || times.size() != mean_x.size()) {
        throw Error(ErrorCode::EmptySeries, "tunneling detection needs a non-empty series with matching times");
    }
    TunnelingReport r;
    r.barrier_x = barrier_x;
    std::size_t right = 0;
    for (std::size_t i = 0; i < mean_x.size(); ++i) {
        const bool is_right = mean_x[i] > barrier_x;
        if (is_right) ++right;
        if (i == 0) continue;
        const bool was_right = mean_x[i - 1] > barrier_x;
        if (is_right == was_right) continue;
        ++r.n_crossings;
        if (!r.first_crossing_time) {
            const double d0 = mean_x[i - 1] - barrier_x;
            const double d1 = mean_x[i] - barrier_x;
            const double w = d0 / (d0 - d1);
            r.first_crossing_time = times[i - 1] + w * (times[i] - times[i - 1]);
        }
    }
    r.crossed = r.n_crossings > 0;
    r.right_fraction = static_cast<double>(right) / static_cast<double>(mean_x.size());
    r.left_fraction = 1.0 - r.right_fraction;
    return r;
}

/// Minimal view of a sampled trajectory used for cross-model comparison.
struct Trajectory {
    std::vector<double> times;
    std::vector<double> mean_x;
    std::vector<double> variance;
};

struct ComparisonReport {
    double rms_mean_x = 0.0;
    double rms_variance = 0.0;
    double t_begin = 0.0;
    double t_end = 0.0;
    std::size_t points = 0;
    bool crossed_a = false;
    bool crossed_b = false;
    bool verdict_agreement = false;
};

namespace detail {

inline double interpolate(std::span<const double> t, std::span<const double> y, double at) {
    const auto it = std::lower_bound(t.begin(), t.end(), at);
    if (it == t.begin()) return y.front();
    if (it == t.end()) return y.back();
    const auto i = static_cast<std::size_t>(it - t.begin());
    if (t[i] == at) return y[i];
    const double w = (at - t[i - 1]) / (t[i] - t[i - 1]);
    return y[i - 1] + w * (y[i] - y[i - 1]);
}

inline double mean_stride(const std::vector<double>& t) {
    return t.size() < 2 ? 0.0 : (t.back() - t.front()) / static_cast<double>(t.size() - 1);
}

} // namespace detail

/// RMS differences over the overlapping window, evaluated on the coarser series' own
/// sample times (the finer one is linearly interpolated). Verdicts use each series in full.
inline ComparisonReport compare(const Trajectory& a, const Trajectory& b, double barrier_x) {
    if (a.times.empty() || b.times.empty()) throw Error(ErrorCode::EmptySeries, "comparison needs non-empty series");
    const double t0 = std::max(a.times.front(), b.times.front());
    const double t1 = std::min(a.times.back(), b.times.back());
    if (t0 > t1) throw Error(ErrorCode::DisjointWindows, "series time windows do not overlap");

    const bool a_coarser = detail::mean_stride(a.times) >= detail::mean_stride(b.times);
    const Trajectory& coarse = a_coarser ? a : b;
    const Trajectory& fine = a_coarser ? b : a;

    ComparisonReport r;
    r.t_begin = t0;
    r.t_end = t1;
    double sx = 0.0, sv = 0.0;
    const double eps = 1e-12 * std::max(1.0, std::abs(t1));
    for (std::size_t i = 0; i < coarse.times.size(); ++i) {
        const double t = coarse.times[i];
        if (t < t0 - eps || t > t1 + eps) continue;
        const double dx = coarse.mean_x[i] - detail::interpolate(fine.times, fine.mean_x, t);
        const double dv = coarse.variance[i] - detail::interpolate(fine.times, fine.variance, t);
        sx += dx * dx;
        sv += dv * dv;
        ++r.points;
    }
    if (r.points == 0) throw Error(ErrorCode::DisjointWindows, "no common samples in the overlapping window");
    r.rms_mean_x = std::sqrt(sx / static_cast<double>(r.points));
    r.rms_variance = std::sqrt(sv / static_cast<double>(r.points));
    r.crossed_a = detect_tunneling(a.times, a.mean_x, barrier_x).crossed;
    r.crossed_b = detect_tunneling(b.times, b.mean_x, barrier_x).crossed;
    r.verdict_agreement = r.crossed_a == r.crossed_b;
    return r;
}

} // namespace dwtunnel
