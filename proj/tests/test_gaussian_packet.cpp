#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dwtunnel/gaussian_packet.hpp"
#include "dwtunnel/tdse.hpp"

using namespace dwtunnel;

namespace {

const PotentialParams kDefault{10.0, 4.0, 0.35};

// <H> by composite Simpson over x0 +/- 14 sigma. The kinetic density uses the
// exact derivative |psi'|^2 = |psi|^2 (u^2 / (4 v^2) + k^2).
double quadrature_energy(const PotentialParams& p, const GaussianSpec& s) {
    const double sigma = std::sqrt(s.v0);
    const double lo = s.x0 - 14.0 * sigma, hi = s.x0 + 14.0 * sigma;
    const int n = 20000;
    const double h = (hi - lo) / n;
    auto density = [&](double x) {
        const double u = x - s.x0;
        const double rho = std::exp(-u * u / (2.0 * s.v0)) / std::sqrt(2.0 * std::numbers::pi * s.v0);
        const double kinetic = 0.5 * (u * u / (4.0 * s.v0 * s.v0) + s.k0 * s.k0);
        return rho * (kinetic + potential(p, x));
    };
    double sum = density(lo) + density(hi);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * density(lo + i * h);
    return sum * h / 3.0;
}

// Roots of the x0 = 0, k0 = 0 energy equation multiplied by 8v:
// 6c v^3 + 4a v^2 - 8E v + 1 = 0, polished by Newton from a seed.
double cubic_root(const PotentialParams& p, double energy, double seed) {
    double v = seed;
    for (int i = 0; i < 100; ++i) {
        const double f = ((6.0 * p.c * v + 4.0 * p.a) * v - 8.0 * energy) * v + 1.0;
        const double df = (18.0 * p.c * v + 8.0 * p.a) * v - 8.0 * energy;
        const double step = f / df;
        v -= step;
        if (std::abs(step) < 1e-16 * v) break;
    }
    return v;
}

} // namespace

TEST(PacketEnergy, MatchesQuadratureOracle) {
    for (const GaussianSpec s : {GaussianSpec{0.0, 0.5, 0.0}, GaussianSpec{0.0, 1.0, 1.0}, GaussianSpec{0.5, 0.3, 0.0},
                                 GaussianSpec{5.5, 2.0, 0.7}, GaussianSpec{-1.0, 0.05, -2.0}}) {
        const double e = packet_energy(kDefault, s);
        EXPECT_NEAR(e, quadrature_energy(kDefault, s), 1e-8 * std::abs(e)) << "x0=" << s.x0 << " v0=" << s.v0;
    }
}

TEST(PacketEnergy, ReferenceValues) {
    EXPECT_NEAR(packet_energy(kDefault, {0.0, 0.5, 0.0}), 2.815625, 1e-12);
    EXPECT_NEAR(packet_energy(kDefault, {0.0, 1.0, 1.0}), 5.8875, 1e-12);
    EXPECT_NEAR(packet_energy({10.0, 0.0, 0.0}, {1.0, 0.5, 0.0}), 7.75, 1e-12);
}

TEST(PacketEnergy, FormulasCoincideAtOrigin) {
    for (double v : {0.01, 0.3, 1.7, 6.0}) {
        const GaussianSpec s{0.0, v, 0.4};
        EXPECT_DOUBLE_EQ(packet_energy(kDefault, s, EnergyFormula::General),
                         packet_energy(kDefault, s, EnergyFormula::OriginCentered));
    }
}

TEST(PacketEnergy, OriginFormulaIgnoresCentre) {
    EXPECT_DOUBLE_EQ(packet_energy(kDefault, {0.5, 1.2, 0.0}, EnergyFormula::OriginCentered),
                     packet_energy(kDefault, {5.5, 1.2, 0.0}, EnergyFormula::OriginCentered));
}

TEST(PacketEnergy, RejectsNonPositiveVariance) {
    for (double v : {0.0, -1.0, std::nan("")}) {
        try {
            packet_energy(kDefault, {0.0, v, 0.0});
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::NonPositiveVariance);
        }
    }
}

TEST(VarianceForEnergy, OriginRootsMatchCubicOracle) {
    const double small = variance_for_energy(kDefault, 0.0, 0.0, 9.0, VarianceBranch::Small);
    const double large = variance_for_energy(kDefault, 0.0, 0.0, 9.0, VarianceBranch::Large);
    EXPECT_NEAR(small, 0.0140, 5e-5);
    EXPECT_NEAR(large, 1.64, 5e-3);
    EXPECT_NEAR(small, cubic_root(kDefault, 9.0, 0.0), 1e-13);
    EXPECT_NEAR(large, cubic_root(kDefault, 9.0, 3.0), 1e-12);
    EXPECT_NEAR(packet_energy(kDefault, {0.0, small, 0.0}), 9.0, 1e-10);
    EXPECT_NEAR(packet_energy(kDefault, {0.0, large, 0.0}), 9.0, 1e-10);
}

TEST(VarianceForEnergy, HarmonicDoubleRootAtGroundWidth) {
    const PotentialParams h{10.0, 0.0, 0.0};
    const auto m = minimum_packet_energy(h, 0.0, 0.0);
    EXPECT_NEAR(m.v0, 1.0 / (2.0 * std::sqrt(10.0)), 1e-12);
    EXPECT_NEAR(m.energy, 0.5 * std::sqrt(10.0), 1e-12);
    for (auto branch : {VarianceBranch::Small, VarianceBranch::Large}) {
        EXPECT_NEAR(variance_for_energy(h, 0.0, 0.0, m.energy, branch), 1.0 / (2.0 * std::sqrt(10.0)), 1e-9);
    }
}

TEST(VarianceForEnergy, BelowMinimumReportsAttainableEnergy) {
    try {
        variance_for_energy(kDefault, 0.0, 0.0, 0.5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EnergyTooLow);
        EXPECT_NE(e.message().find("attainable minimum"), std::string::npos);
    }
}

TEST(VarianceForEnergy, RoundTripOnOwnBranch) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> left(-1.0, 1.5), right(6.0, 9.5), uv(0.005, 6.0), uk(-2.0, 2.0);
    std::bernoulli_distribution pick_right(0.5);
    for (int i = 0; i < 400; ++i) {
        const GaussianSpec s{pick_right(rng) ? right(rng) : left(rng), uv(rng), uk(rng)};
        for (auto formula : {EnergyFormula::General, EnergyFormula::OriginCentered}) {
            const auto m = minimum_packet_energy(kDefault, s.x0, s.k0, formula);
            if (std::abs(s.v0 - m.v0) < 1e-3 * m.v0) continue;
            const auto branch = s.v0 < m.v0 ? VarianceBranch::Small : VarianceBranch::Large;
            const double e = packet_energy(kDefault, s, formula);
            const double back = variance_for_energy(kDefault, s.x0, s.k0, e, branch, formula);
            EXPECT_NEAR(back, s.v0, 1e-9 * s.v0) << "x0=" << s.x0 << " v0=" << s.v0;
            EXPECT_NEAR(packet_energy(kDefault, {s.x0, back, s.k0}, formula), e, 1e-10 * std::max(1.0, e));
        }
    }
}

TEST(VarianceForEnergy, EnergyIsConvexInVariance) {
    for (double x0 : {-0.5, 0.0, 0.5, 6.0, 7.7, 9.0}) {
        int sign_changes = 0;
        double prev_slope = 0.0;
        for (int i = 0; i < 2000; ++i) {
            const double v = 1e-3 * std::pow(1.005, i);
            const double h = 1e-4 * v;
            const double e0 = packet_energy(kDefault, {x0, v - h, 0.0});
            const double e1 = packet_energy(kDefault, {x0, v, 0.0});
            const double e2 = packet_energy(kDefault, {x0, v + h, 0.0});
            EXPECT_GT(e0 - 2.0 * e1 + e2, -1e-12 * std::abs(e1)) << "x0=" << x0 << " v=" << v;
            const double slope = e2 - e0;
            if (i > 0 && (slope > 0.0) != (prev_slope > 0.0)) ++sign_changes;
            prev_slope = slope;
        }
        EXPECT_LE(sign_changes, 1);
    }
}

TEST(SampleOnGrid, NormalizedWithExactMoments) {
    const Grid g = build_grid(-100.0, 100.0, 100000);
    const WaveField psi = sample_on_grid({0.0, 0.5, 0.0}, g);
    EXPECT_NEAR(discrete_norm(psi), 1.0, 1e-14);
    EXPECT_EQ(psi.amplitudes.front(), Complex(0.0));
    EXPECT_EQ(psi.amplitudes.back(), Complex(0.0));
    const Observables o = measure(psi, kDefault);
    EXPECT_NEAR(o.mean_x, 0.0, 1e-10);
    EXPECT_NEAR(o.variance, 0.5, 1e-6);
}

TEST(SampleOnGrid, DiscreteEnergyTracksAnalyticEnergy) {
    const Grid g = build_grid(-100.0, 100.0, 100000);
    for (const GaussianSpec s : {GaussianSpec{0.5, 0.5, 0.0}, GaussianSpec{0.5, 3.4, 0.0}, GaussianSpec{5.5, 1.0, 0.0}}) {
        const double e = packet_energy(kDefault, s);
        EXPECT_NEAR(measure(sample_on_grid(s, g), kDefault).energy, e, 1e-6 * std::abs(e));
    }
}

TEST(SampleOnGrid, RejectsNarrowGrid) {
    const Grid g = build_grid(-5.0, 5.0, 1001);
    try {
        sample_on_grid({4.0, 1.0, 0.0}, g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::GridTooNarrow);
    }
}
