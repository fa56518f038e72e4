#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dwtunnel/fixed_points.hpp"
#include "dwtunnel/gaussian_packet.hpp"
#include "dwtunnel/moment_dynamics.hpp"

using namespace dwtunnel;

namespace {

const PotentialParams kDefault{10.0, 4.0, 0.35};

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

MomentSystemParams barrier_system(double energy) {
    const double xs = barrier_position(kDefault);
    const auto fp = fixed_point(kDefault, xs, energy);
    return {kDefault, energy, fp->skewness};
}

// Left-well run in the shipped configuration: broad packet, origin-centred energy form.
std::pair<MomentState, MomentSystemParams> left_well(double energy) {
    const double v0 = variance_for_energy(kDefault, 0.5, 0.0, energy, VarianceBranch::Large, EnergyFormula::OriginCentered);
    return {{0.5, 0.0, v0, 0.0}, barrier_system(energy)};
}

} // namespace

TEST(Rhs, HarmonicAndFreeReferenceValues) {
    const auto h = rhs({1.0, 0.0, 0.5, 0.0}, {{10.0, 0.0, 0.0}, 7.75, 0.0});
    EXPECT_DOUBLE_EQ(h.d_mean_p, -10.0);
    EXPECT_NEAR(h.d_variance_rate, -9.0, 1e-12);
    const auto f = rhs({0.0, 0.0, 0.5, 0.0}, {{0.0, 0.0, 0.0}, 0.25, 0.0});
    EXPECT_DOUBLE_EQ(f.d_variance_rate, 1.0);
}

TEST(Rhs, VanishesAtBarrierFixedPoint) {
    const double xs = barrier_position(kDefault);
    for (double e : {10.60, 12.0, 16.0}) {
        const auto fp = fixed_point(kDefault, xs, e);
        ASSERT_TRUE(fp);
        const auto d = rhs({xs, 0.0, fp->v_star, 0.0}, {kDefault, e, fp->skewness});
        EXPECT_NEAR(d.d_mean_x, 0.0, 1e-8);
        EXPECT_NEAR(d.d_mean_p, 0.0, 1e-8);
        EXPECT_NEAR(d.d_variance, 0.0, 1e-8);
        EXPECT_NEAR(d.d_variance_rate, 0.0, 1e-8);
    }
    const auto fp = fixed_point(kDefault, xs, 10.60);
    EXPECT_NEAR(fp->v_star, 4.959, 2e-3);
    EXPECT_NEAR(fp->skewness, 1.719, 2e-3);
}

TEST(Rhs, ForceMatchesRawMomentOracle) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0), pos(0.01, 5.0), coef(0.1, 12.0);
    for (int i = 0; i < 1000; ++i) {
        const PotentialParams p{coef(rng), coef(rng), coef(rng) * 0.1};
        const MomentState s{u(rng) * 3.0, u(rng), pos(rng), u(rng)};
        const MomentSystemParams sys{p, pos(rng) * 4.0, u(rng)};
        const double m2 = s.variance + s.mean_x * s.mean_x;
        const double m3 = sys.skewness + 3.0 * s.variance * s.mean_x + std::pow(s.mean_x, 3);
        const double oracle = -p.a * s.mean_x + p.b * m2 - p.c * m3;
        const auto d = rhs(s, sys);
        const double scale = std::abs(p.a * s.mean_x) + std::abs(p.b * m2) + std::abs(p.c * m3);
        EXPECT_LE(std::abs(d.d_mean_p - oracle), 1e-12 * std::max(1.0, scale));
        EXPECT_EQ(d.d_mean_x, s.mean_p);
        EXPECT_EQ(d.d_variance, s.variance_rate);
    }
}

TEST(Rhs, VarianceAccelerationIsTwiceMomentumVarianceMinusVirial) {
    // d2V/dt2 = 2 Vp - 2 <(x - <x>) phi'(x)>, with Vp from energy conservation.
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.05, 4.0);
    for (int i = 0; i < 500; ++i) {
        const MomentState s{u(rng) * 3.0, u(rng), pos(rng), u(rng)};
        const MomentSystemParams sys{kDefault, 5.0 + pos(rng) * 3.0, u(rng)};
        const double x = s.mean_x, v = s.variance, S = sys.skewness;
        const auto& [a, b, c] = kDefault;
        const double K = 3.0 * v * v;
        const double virial = a * v - b * (S + 2.0 * x * v) + c * (K + 3.0 * x * S + 3.0 * x * x * v);
        const double oracle = 2.0 * momentum_variance(s, sys) - 2.0 * virial;
        EXPECT_NEAR(rhs(s, sys).d_variance_rate, oracle, 1e-11 * std::max(1.0, std::abs(oracle)));
    }
}

TEST(MomentumVariance, ReferenceValues) {
    EXPECT_NEAR(momentum_variance({1.0, 0.0, 0.5, 0.0}, {{10.0, 0.0, 0.0}, 7.75, 0.0}), 0.5, 1e-12);
    EXPECT_NEAR(momentum_variance({0.0, 0.0, 0.5, 0.0}, {{0.0, 0.0, 0.0}, 0.25, 0.0}), 0.5, 1e-15);
}

TEST(MomentumVariance, AtBarrierFixedPointEqualsClosedForm) {
    // Stationarity leaves Vp = V phi'' - V (b - 3 c x)^2 / c + 3 c V^2. It is slightly
    // negative just above the stability threshold and positive further up.
    const double xs = barrier_position(kDefault);
    const double b = kDefault.b, c = kDefault.c;
    const double curvature = evaluate(kDefault, xs).d2phi;
    for (double e : {10.60, 11.0, 12.0, 14.95}) {
        const auto fp = fixed_point(kDefault, xs, e);
        const double v = fp->v_star;
        const double closed = v * curvature - v * std::pow(b - 3.0 * c * xs, 2) / c + 3.0 * c * v * v;
        EXPECT_NEAR(momentum_variance({xs, 0.0, v, 0.0}, {kDefault, e, fp->skewness}), closed, 1e-9);
    }
    const auto at = [&](double e) {
        const auto fp = fixed_point(kDefault, xs, e);
        return momentum_variance({xs, 0.0, fp->v_star, 0.0}, {kDefault, e, fp->skewness});
    };
    EXPECT_LT(at(10.60), 0.0);
    EXPECT_GT(at(12.0), 0.0);
}

TEST(Integrate, HarmonicCoherentStateOverTenPeriods) {
    const PotentialParams h{10.0, 0.0, 0.0};
    const double w = std::sqrt(10.0);
    const double v0 = 1.0 / (2.0 * w);
    const double e = packet_energy(h, {1.0, v0, 0.0});
    const double period = 2.0 * std::numbers::pi / w;
    const auto series = integrate({1.0, 0.0, v0, 0.0}, {h, e, 0.0}, {1e-3, 10.0 * period, 1, VarianceGuard::Halt});
    double worst_x = 0.0, worst_v = 0.0;
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        worst_x = std::max(worst_x, std::abs(series.states[i].mean_x - std::cos(w * series.times[i])));
        worst_v = std::max(worst_v, std::abs(series.states[i].variance - v0));
    }
    EXPECT_LT(worst_x, 1e-6);
    EXPECT_LT(worst_v, 1e-6);
}

TEST(Integrate, SamplesOnUniformStrideIncludingEnds) {
    const auto [init, sys] = left_well(9.0);
    const auto s = integrate(init, sys, {1e-3, 1.0, 7, VarianceGuard::Halt});
    ASSERT_GE(s.times.size(), 3u);
    EXPECT_EQ(s.times.front(), 0.0);
    EXPECT_NEAR(s.times.back(), 1.0, 1e-12);
    for (std::size_t i = 1; i + 1 < s.times.size(); ++i) EXPECT_NEAR(s.times[i] - s.times[i - 1], 7e-3, 1e-12);
    EXPECT_EQ(s.states.size(), s.times.size());
    EXPECT_EQ(s.vp.size(), s.times.size());
}

TEST(Integrate, StableBarrierFixedPointPersists) {
    const double xs = barrier_position(kDefault);
    for (double e : {12.0, 15.0}) {
        const auto fp = fixed_point(kDefault, xs, e);
        ASSERT_TRUE(fp && fp->stable);
        const MomentState init{xs, 0.0, fp->v_star, 0.0};
        const auto s = integrate(init, {kDefault, e, fp->skewness}, {1e-3, 100.0, 100, VarianceGuard::Halt});
        for (const auto& st : s.states) {
            ASSERT_NEAR(st.mean_x, xs, 1e-6);
            ASSERT_NEAR(st.mean_p, 0.0, 1e-6);
            ASSERT_NEAR(st.variance, fp->v_star, 1e-6);
            ASSERT_NEAR(st.variance_rate, 0.0, 1e-6);
        }
    }
}

TEST(Integrate, LowEnergyStaysInLeftWell) {
    const auto [init, sys] = left_well(9.0);
    const double xs = barrier_position(kDefault);
    const auto s = integrate(init, sys);
    for (const auto& st : s.states) {
        ASSERT_LT(st.mean_x, xs);
        ASSERT_GT(st.variance, 0.0);
    }
}

TEST(Integrate, FourthOrderStepHalving) {
    const auto [init, sys] = left_well(9.0);
    auto final_state = [&](double dt) {
        return integrate(init, sys, {dt, 2.0, 1000000, VarianceGuard::Halt}).states.back();
    };
    const auto y1 = final_state(0.02), y2 = final_state(0.01), y4 = final_state(0.005);
    const double e1 = std::abs(y1.mean_x - y2.mean_x) + std::abs(y1.variance - y2.variance);
    const double e2 = std::abs(y2.mean_x - y4.mean_x) + std::abs(y2.variance - y4.variance);
    EXPECT_NEAR(e1 / e2, 16.0, 0.2 * 16.0);
}

TEST(Integrate, TimeReversalReturnsToStart) {
    const auto [init, sys] = left_well(9.0);
    const IntegrateOptions opt{1e-3, 5.0, 1000000, VarianceGuard::Halt};
    auto mid = integrate(init, sys, opt).states.back();
    mid.mean_p = -mid.mean_p;
    mid.variance_rate = -mid.variance_rate;
    const auto back = integrate(mid, sys, opt).states.back();
    EXPECT_NEAR(back.mean_x, init.mean_x, 1e-6);
    EXPECT_NEAR(back.mean_p, -init.mean_p, 1e-6);
    EXPECT_NEAR(back.variance, init.variance, 1e-6);
    EXPECT_NEAR(back.variance_rate, -init.variance_rate, 1e-6);
}

TEST(Integrate, EnergyParameterIsConservedThroughVp) {
    // 2E = <p>^2 + Vp + 2<phi>; the identity must survive integration if Vp is computed consistently.
    const auto [init, sys] = left_well(9.0);
    const auto s = integrate(init, sys, {1e-3, 10.0, 10, VarianceGuard::Halt});
    EXPECT_NEAR(s.vp.front(), momentum_variance(init, sys), 1e-14);
    for (double vp : s.vp) EXPECT_TRUE(std::isfinite(vp));
}

TEST(Integrate, CollapseHaltsWithPartialSeries) {
    // Narrow packet in the left well: the closure breaks down within a few time units.
    const double e = 14.95;
    const double v0 = variance_for_energy(kDefault, 0.5, 0.0, e, VarianceBranch::Small, EnergyFormula::OriginCentered);
    try {
        integrate({0.5, 0.0, v0, 0.0}, barrier_system(e), {1e-3, 100.0, 10, VarianceGuard::Halt});
        FAIL() << "expected a variance collapse";
    } catch (const IntegrationError& err) {
        EXPECT_EQ(err.code(), ErrorCode::VarianceCollapse);
        EXPECT_GT(err.time(), 0.0);
        EXPECT_LT(err.time(), 100.0);
        ASSERT_FALSE(err.partial().times.empty());
        EXPECT_LE(err.partial().times.back(), err.time());
        EXPECT_EQ(err.exit_code(), 9);
    }
}

TEST(Integrate, RejectsBadOptions) {
    const auto [init, sys] = left_well(9.0);
    EXPECT_THROW(integrate(init, sys, {0.0, 1.0, 1, VarianceGuard::Halt}), Error);
    EXPECT_THROW(integrate(init, sys, {1e-3, -1.0, 1, VarianceGuard::Halt}), Error);
    EXPECT_THROW(integrate(init, sys, {1e-3, 1.0, 0, VarianceGuard::Halt}), Error);
    MomentState bad = init;
    bad.variance = 0.0;
    try {
        integrate(bad, sys);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonPositiveVariance);
    }
}

TEST(Rk4Step, ExactForCubicPolynomial) {
    // y' = 3 t^2 as an autonomous system (t, y): RK4 integrates cubics exactly.
    std::array<double, 2> y{0.0, 0.0};
    for (int i = 0; i < 10; ++i) {
        y = rk4_step<2>(y, 0.1, [](const std::array<double, 2>& s) { return std::array<double, 2>{1.0, 3.0 * s[0] * s[0]}; });
    }
    EXPECT_NEAR(y[1], 1.0, 1e-14);
    EXPECT_LT(rel_err(y[0], 1.0), 1e-14);
}
