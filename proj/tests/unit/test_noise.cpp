#include "skdv/noise.hpp"

#include "oracle_values.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace skdv;
namespace fz = oracle::frozen;

TEST(Kernel, CorrelationMatchesQuadrature) {
    Grid g(100.0, 1024);
    Kernel k = Kernel::gaussian(1.0, 1.0);
    EXPECT_NEAR(correlation(k, g, 0.0), fz::corr_l1_z0, 1e-8);
    EXPECT_NEAR(correlation(k, g, 1.0), fz::corr_l1_z1, 1e-8);
    EXPECT_NEAR(correlation(k, g, 2.0), fz::corr_l1_z2, 1e-8);
    EXPECT_NEAR(correlation(Kernel::gaussian(1.0, 2.0), g, 0.0), fz::corr_l2_z0, 1e-8);
}

TEST(Kernel, Norms) {
    Grid g(100.0, 1024);
    auto n = Kernel::gaussian(1.0, 2.0).norms(g);
    EXPECT_NEAR(n.l2 * n.l2, fz::corr_l2_z0, 1e-10);
    EXPECT_NEAR(n.l1, 2.0 * std::sqrt(2.0 * M_PI), 1e-10);
    // |k'|^2 = sqrt(pi) / (2 l) for A = 1
    EXPECT_NEAR(n.h1 * n.h1, fz::corr_l2_z0 + std::sqrt(M_PI) / 4.0, 1e-10);
    EXPECT_LT(n.edge, 1e-10);
}

TEST(Kernel, ParsevalDensityIsConstant) {
    Grid g(100.0, 512);
    Kernel k = Kernel::gaussian(1.0, 2.0);
    Field d = parseval_density(k, g);
    const double k2 = std::pow(k.norms(g).l2, 2);
    for (double v : d.values()) EXPECT_NEAR(v, k2, 1e-10 * k2);
}

TEST(Kernel, AdjointCommutesWithDerivative) {
    Grid g(100.0, 512);
    Kernel k = Kernel::sech(0.8, 1.5);
    Field f = Field::sample(g, [](double x) { return std::exp(-x * x / 5.0) * (1.0 + x); });
    Field a = smoother_adjoint(k, derivative(f, 1));
    Field b = derivative(smoother_adjoint(k, f), 1);
    EXPECT_LT((a - b).max_abs(), 1e-10);
}

TEST(Kernel, AdjointPairing) {
    Grid g(80.0, 256);
    // an asymmetric tabulated kernel exercises the reflection
    Kernel k = Kernel::tabulated(Field::sample(g, [](double x) { return std::exp(-(x - 0.7) * (x - 0.7)); }));
    Field f = Field::sample(g, [](double x) { return std::exp(-x * x / 9.0); });
    Field h = Field::sample(g, [](double x) { return std::sin(x) * std::exp(-x * x / 20.0); });
    EXPECT_NEAR(inner(smoother(k, f), h), inner(f, smoother_adjoint(k, h)), 1e-12);
}

TEST(NoiseState, ReproducibleAndPathDependent) {
    Grid g(100.0, 256);
    Kernel k = Kernel::gaussian(1.0, 2.0);
    NoiseState a(k, g, 42, 3), b(k, g, 42, 3), c(k, g, 42, 4);
    Field wa = a.sample_increment(1e-2), wb = b.sample_increment(1e-2), wc = c.sample_increment(1e-2);
    EXPECT_EQ(wa.storage(), wb.storage());
    EXPECT_NE(wa.storage(), wc.storage());
    EXPECT_DOUBLE_EQ(a.time(), 1e-2);
}

TEST(NoiseState, CoarseIncrementIsSumOfFine) {
    Grid g(100.0, 256);
    Kernel k = Kernel::gaussian(1.0, 2.0);
    NoiseState fine(k, g, 9, 0), coarse(k, g, 9, 0);
    Field w1 = fine.sample_increment(1e-3);
    Field w2 = fine.sample_increment(1e-3);
    Field w = coarse.sample_increment(2e-3, 0.0, 2);
    EXPECT_LT((w1 + w2 - w).max_abs(), 1e-14);
    EXPECT_EQ(fine.block_index(), coarse.block_index());
}

TEST(NoiseState, AdvanceSkipsBlocks) {
    Grid g(100.0, 256);
    Kernel k = Kernel::gaussian(1.0, 2.0);
    NoiseState a(k, g, 1, 0), b(k, g, 1, 0);
    a.sample_increment(1e-3);
    b.advance(1e-3);
    EXPECT_EQ(a.sample_increment(1e-3).storage(), b.sample_increment(1e-3).storage());
}

TEST(NoiseState, ShiftTranslatesIncrement) {
    Grid g(100.0, 256);
    Kernel k = Kernel::gaussian(1.0, 2.0);
    NoiseState a(k, g, 5, 1), b(k, g, 5, 1);
    Field w = a.sample_increment(1e-2, 0.0);
    Field ws = b.sample_increment(1e-2, 3.3);
    EXPECT_LT((translate(w, 3.3) - ws).max_abs(), 1e-12);
}

TEST(NoiseState, RejectsKernelWiderThanBox) {
    Grid g(10.0, 128);
    EXPECT_THROW(NoiseState(Kernel::gaussian(1.0, 2.0), g, 1, 0), std::invalid_argument);
}

TEST(NoiseState, IncrementVarianceAtLags) {
    Grid g(50.0, 128);
    Kernel k = Kernel::gaussian(1.0, 2.0);
    NoiseState ns(k, g, 77, 0);
    const double dt = 0.01;
    const int draws = 20000;
    const int lags = 6;
    std::vector<double> acc(lags, 0.0), acc2(lags, 0.0);
    for (int n = 0; n < draws; ++n) {
        Field w = ns.sample_increment(dt);
        for (int l = 0; l < lags; ++l) {
            double p = w[10] * w[10 + 4 * l];
            acc[l] += p;
            acc2[l] += p * p;
        }
    }
    Field cf = correlation_field(k, g);
    for (int l = 0; l < lags; ++l) {
        double mean = acc[l] / draws;
        double se = std::sqrt((acc2[l] / draws - mean * mean) / draws);
        double expected = dt * correlation(k, g, 4 * l * g.dx());
        EXPECT_NEAR(mean, expected, 4.0 * se) << "lag " << l;
    }
    EXPECT_NEAR(cf[g.size() / 2], ns.variance_rate(), 1e-12);
}
