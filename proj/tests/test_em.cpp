#include <gtest/gtest.h>

#include <cmath>

#include "roughdrift/euler_maruyama.hpp"

using namespace roughdrift;

namespace {

SchemeParams params_for(std::size_t m, double T = 1.0, double x0 = 0.0) {
    return SchemeParams::make(0.25, 1e-6, m, T, x0, 0.5);
}

} // namespace

TEST(BrownianIncrements, ShapeAndDeterminism) {
    const auto a = brownian_increments(2.0, 512, RandomSource{3, 7});
    const auto b = brownian_increments(2.0, 512, RandomSource{3, 7});
    const auto c = brownian_increments(2.0, 512, RandomSource{3, 8});
    ASSERT_EQ(a.steps(), 512u);
    EXPECT_EQ(a.increments, b.increments);
    EXPECT_NE(a.increments, c.increments);
    EXPECT_THROW(brownian_increments(0.0, 10, {}), ParameterError);
    EXPECT_THROW(brownian_increments(1.0, 0, {}), ParameterError);
}

TEST(BrownianIncrements, VarianceMatchesStepSize) {
    const std::size_t m = 200000;
    const auto g = brownian_increments(1.0, m, RandomSource{1, 1});
    double ss = 0.0;
    for (double dw : g.increments) ss += dw * dw;
    const double dt = 1.0 / m;
    EXPECT_NEAR(ss / m, dt, 5 * dt * std::sqrt(2.0 / m));
}

TEST(Coarsen, FactorOneIsIdentity) {
    const auto g = brownian_increments(1.0, 64, RandomSource{5, 0});
    EXPECT_EQ(coarsen(g, 1).increments, g.increments);
}

TEST(Coarsen, PreservesTheTotalExactly) {
    const auto g = brownian_increments(1.0, 8192, RandomSource{5, 1});
    double fine = 0.0;
    for (double dw : g.increments) fine += dw;
    for (std::size_t f : {2u, 4u, 64u, 8192u}) {
        double coarse = 0.0;
        for (double dw : coarsen(g, f).increments) coarse += dw;
        EXPECT_EQ(coarse, fine) << "factor " << f;
    }
    const auto all = coarsen(g, 8192);
    ASSERT_EQ(all.steps(), 1u);
    EXPECT_EQ(all.increments[0], fine);
}

TEST(Coarsen, ComposesExactly) {
    const auto g = brownian_increments(1.0, 4096, RandomSource{9, 2});
    EXPECT_EQ(coarsen(coarsen(g, 4), 8).increments, coarsen(g, 32).increments);
    EXPECT_EQ(coarsen(coarsen(g, 16), 2).increments, coarsen(coarsen(g, 2), 16).increments);
}

TEST(Coarsen, RejectsNonDividingFactor) {
    const auto g = brownian_increments(1.0, 100, RandomSource{});
    EXPECT_THROW(coarsen(g, 3), ParameterError);
    EXPECT_THROW(coarsen(g, 0), ParameterError);
}

TEST(Simulate, ZeroDriftReproducesBrownianMotion) {
    const auto drift = DriftGrid::constant(5.0, 50, 0.0);
    for (std::size_t m : {1u, 16u, 1024u}) {
        const auto noise = brownian_increments(1.0, m, RandomSource{4, m});
        const auto path = simulate(drift, params_for(m, 1.0, 0.25), noise);
        ASSERT_EQ(path.values.size(), m + 1);
        double w = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            w += noise.increments[k];
            EXPECT_EQ(path.values[k + 1], 0.25 + w);
        }
        EXPECT_EQ(path.terminal, 0.25 + w);
    }
}

TEST(Simulate, ConstantDriftAddsLinearTrend) {
    // dyadic drift and step so that b*T accumulates without rounding
    const double b = 0.75;
    const auto drift = DriftGrid::constant(50.0, 10, b);
    const std::size_t m = 256;
    const auto noise = brownian_increments(1.0, m, RandomSource{6, 0});
    const auto path = simulate(drift, params_for(m), noise);
    double w = 0.0;
    for (double dw : noise.increments) w += dw;
    EXPECT_NEAR(path.terminal, b + w, 1e-14);
}

TEST(Simulate, LinearDriftFollowsRecursion) {
    // b(x) = -x on a grid fine enough that linear interpolation is exact
    const double L = 8.0;
    const std::size_t M = 64;
    DriftGrid drift = DriftGrid::constant(L, M, 0.0);
    for (std::size_t k = 0; k < drift.size(); ++k) drift.values[k] = -drift.node(k);
    const std::size_t m = 500;
    const double dt = 2.0 / m;
    const auto noise = brownian_increments(2.0, m, RandomSource{10, 0});
    const auto path = simulate(drift, params_for(m, 2.0, 0.3), noise);
    double x = 0.3;
    for (std::size_t k = 0; k < m; ++k) {
        x = x * (1 - dt) + noise.increments[k];
        ASSERT_NEAR(path.values[k + 1], x, 1e-12) << "step " << k;
    }
}

TEST(Simulate, TerminalMatchesFullPath) {
    const auto drift = DriftGrid::constant(1.0, 10, 0.4);
    const auto noise = brownian_increments(1.0, 300, RandomSource{2, 2});
    const auto params = params_for(300);
    const auto path = simulate(drift, params, noise);
    const auto out = simulate_terminal(drift, params, noise);
    EXPECT_EQ(out.terminal, path.terminal);
    double mx = 0.0;
    for (double v : path.values) mx = std::max(mx, std::abs(v));
    EXPECT_EQ(out.max_abs, mx);
}

TEST(Simulate, RejectsMismatchedNoise) {
    const auto drift = DriftGrid::constant(5.0, 10, 0.0);
    EXPECT_THROW(simulate(drift, params_for(128), brownian_increments(1.0, 64, {})), ParameterError);
    EXPECT_THROW(simulate(drift, params_for(64, 2.0), brownian_increments(1.0, 64, {})), ParameterError);
}
