#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "roughdrift/fbm.hpp"

using namespace roughdrift;

namespace {

double exact_increment_cov(double hurst, double mesh, int lag) {
    const double k = std::abs(lag);
    const double h2 = 2 * hurst;
    return 0.5 * std::pow(mesh, h2) * (std::pow(k + 1, h2) + std::pow(std::abs(k - 1), h2) - 2 * std::pow(k, h2));
}

struct Moment {
    double mean;
    double std_error;
};

// Sample mean of inc[i]*inc[i+lag] across paths, with its standard error.
Moment increment_moment(double hurst, std::size_t n_points, double mesh, FbmMethod method, std::size_t paths,
                        std::size_t i, std::size_t lag, std::uint64_t seed) {
    std::vector<double> prods;
    prods.reserve(paths);
    for (std::size_t p = 0; p < paths; ++p) {
        const auto path = sample_fbm(hurst, n_points, mesh, RandomSource{seed, p}, method);
        const double a = path.values[i + 1] - path.values[i];
        const double b = path.values[i + lag + 1] - path.values[i + lag];
        prods.push_back(a * b);
    }
    double m = 0.0;
    for (double v : prods) m += v;
    m /= static_cast<double>(paths);
    double ss = 0.0;
    for (double v : prods) ss += (v - m) * (v - m);
    return {m, std::sqrt(ss / static_cast<double>(paths - 1) / static_cast<double>(paths))};
}

} // namespace

TEST(SampleFbm, StartsAtZeroWithRequestedShape) {
    const auto p = sample_fbm(0.7, 101, 0.1, RandomSource{1, 2});
    ASSERT_EQ(p.values.size(), 101u);
    EXPECT_EQ(p.values[0], 0.0);
    EXPECT_DOUBLE_EQ(p.length(), 10.0);
    EXPECT_EQ(p.generator, FbmMethod::circulant);
}

TEST(SampleFbm, DeterministicPerStream) {
    const auto a = sample_fbm(0.8, 257, 0.05, RandomSource{42, 3});
    const auto b = sample_fbm(0.8, 257, 0.05, RandomSource{42, 3});
    const auto c = sample_fbm(0.8, 257, 0.05, RandomSource{42, 4});
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, c.values);
}

TEST(SampleFbm, RejectsInvalidArguments) {
    EXPECT_THROW(sample_fbm(0.0, 10, 0.1, {}), ParameterError);
    EXPECT_THROW(sample_fbm(1.0, 10, 0.1, {}), ParameterError);
    EXPECT_THROW(sample_fbm(0.5, 1, 0.1, {}), ParameterError);
    EXPECT_THROW(sample_fbm(0.5, 10, 0.0, {}), ParameterError);
}

TEST(SampleFbm, CirculantEmbeddingIsNonNegative) {
    for (double h : {0.1, 0.3, 0.5, 0.75, 0.9, 0.999}) {
        for (std::size_t n : {4u, 50u, 333u, 1024u}) {
            const auto eig = circulant_eigenvalues(h, n);
            const double top = *std::max_element(eig.begin(), eig.end());
            EXPECT_GE(*std::min_element(eig.begin(), eig.end()), -1e-12 * top) << "H=" << h << " n=" << n;
        }
    }
}

TEST(SampleFbm, BrownianIncrementsAreUncorrelated) {
    const std::size_t P = 100000;
    const double mesh = 0.25;
    double s_ab = 0.0, s_aa = 0.0, s_bb = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
        const auto path = sample_fbm(0.5, 5, mesh, RandomSource{11, p});
        const double a = path.values[2] - path.values[1];
        const double b = path.values[3] - path.values[2];
        s_ab += a * b;
        s_aa += a * a;
        s_bb += b * b;
    }
    const double corr = s_ab / std::sqrt(s_aa * s_bb);
    EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(static_cast<double>(P)));
    EXPECT_NEAR(s_aa / P, mesh, 5 * mesh * std::sqrt(2.0 / P));
}

TEST(SampleFbm, TerminalVarianceMatchesCovariance) {
    const std::size_t P = 100000;
    std::vector<double> sq(P);
    for (std::size_t p = 0; p < P; ++p) {
        const auto path = sample_fbm(0.75, 9, 0.125, RandomSource{5, p});
        sq[p] = path.values.back() * path.values.back();
    }
    double m = 0.0;
    for (double v : sq) m += v;
    m /= P;
    double ss = 0.0;
    for (double v : sq) ss += (v - m) * (v - m);
    const double se = std::sqrt(ss / (P - 1) / P);
    EXPECT_LT(std::abs(m - 1.0), 5 * se);
}

// The exact Toeplitz factorization is the oracle for the spectral generator.
TEST(SampleFbm, SpectralMomentsMatchExactFactorization) {
    const double hurst = 0.7, mesh = 0.1;
    const std::size_t n_points = 17, paths = 20000;
    for (std::size_t lag : {0u, 1u, 2u, 5u}) {
        const auto spec = increment_moment(hurst, n_points, mesh, FbmMethod::circulant, paths, 3, lag, 100);
        const auto chol = increment_moment(hurst, n_points, mesh, FbmMethod::cholesky, paths, 3, lag, 200);
        const double tol = 5 * std::hypot(spec.std_error, chol.std_error);
        EXPECT_LT(std::abs(spec.mean - chol.mean), tol) << "lag " << lag;
        const double exact = exact_increment_cov(hurst, mesh, static_cast<int>(lag));
        EXPECT_LT(std::abs(spec.mean - exact), 5 * spec.std_error) << "lag " << lag;
        EXPECT_LT(std::abs(chol.mean - exact), 5 * chol.std_error) << "lag " << lag;
    }
}

TEST(SampleFbm, CholeskyMethodIsReported) {
    const auto p = sample_fbm(0.6, 20, 0.1, RandomSource{1, 1}, FbmMethod::cholesky);
    EXPECT_EQ(p.generator, FbmMethod::cholesky);
    EXPECT_EQ(p.values[0], 0.0);
}

TEST(SampleFbm, BrownianIncrementsPassKolmogorovSmirnov) {
    const std::size_t n = 10000;
    const double mesh = 0.01;
    const auto path = sample_fbm(0.5, n + 1, mesh, RandomSource{77, 0});
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (path.values[i + 1] - path.values[i]) / std::sqrt(mesh);
    std::sort(z.begin(), z.end());
    const boost::math::normal_distribution<double> normal;
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = boost::math::cdf(normal, z[i]);
        d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
    }
    // asymptotic critical value at significance 1e-3
    EXPECT_LT(d, 1.9495 / std::sqrt(static_cast<double>(n)));
}

TEST(Subsample, KeepsEveryFactorthNode) {
    const auto fine = sample_fbm(0.8, 41, 0.25, RandomSource{3, 0});
    const auto coarse = subsample(fine, 4);
    ASSERT_EQ(coarse.values.size(), 11u);
    EXPECT_DOUBLE_EQ(coarse.mesh, 1.0);
    for (std::size_t i = 0; i < coarse.values.size(); ++i) EXPECT_EQ(coarse.values[i], fine.values[4 * i]);
    EXPECT_THROW(subsample(fine, 3), ParameterError);
}

TEST(HurstForRoughness, StaysInsideOpenInterval) {
    EXPECT_DOUBLE_EQ(hurst_for_roughness(0.25, 1e-3), 0.751);
    EXPECT_DOUBLE_EQ(hurst_for_roughness(0.125, 1e-3), 0.876);
    EXPECT_LT(hurst_for_roughness(1e-6, 1e-3), 1.0);
    EXPECT_GT(hurst_for_roughness(0.499999, 1e-3), 0.5);
    EXPECT_THROW(hurst_for_roughness(0.5, 1e-3), ParameterError);
}

TEST(MakeBridge, EndpointsVanishExactly) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto path = sample_fbm(0.75, 2 * 37 + 1, 5.0 / 37, RandomSource{seed, 9});
        const auto h = make_bridge(path, 5.0);
        EXPECT_EQ(h.values.front(), 0.0);
        EXPECT_EQ(h.values.back(), 0.0);
        EXPECT_EQ(h.node(0), -5.0);
        EXPECT_EQ(h.node(h.values.size() - 1), 5.0);
    }
}

TEST(MakeBridge, LinearPathIsRemoved) {
    FbmPath path{0.7, 0.1, std::vector<double>(101)};
    for (std::size_t i = 0; i < path.values.size(); ++i) path.values[i] = 2.5 * 0.1 * static_cast<double>(i);
    const auto h = make_bridge(path, 5.0);
    for (double v : h.values) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(MakeBridge, MidpointValue) {
    const auto path = sample_fbm(0.6, 41, 0.25, RandomSource{8, 8});
    const auto h = make_bridge(path, 5.0);
    EXPECT_DOUBLE_EQ(h.values[20], path.values[20] - path.values[40] / 2);
}

TEST(MakeBridge, LinearInThePath) {
    const auto p1 = sample_fbm(0.8, 61, 1.0 / 6, RandomSource{1, 0});
    const auto p2 = sample_fbm(0.8, 61, 1.0 / 6, RandomSource{2, 0});
    const double alpha = -1.7;
    FbmPath mix = p1;
    for (std::size_t i = 0; i < mix.values.size(); ++i) mix.values[i] = alpha * p1.values[i] + p2.values[i];
    const auto h1 = make_bridge(p1, 5.0), h2 = make_bridge(p2, 5.0), hm = make_bridge(mix, 5.0);
    for (std::size_t i = 0; i < hm.values.size(); ++i)
        EXPECT_NEAR(hm.values[i], alpha * h1.values[i] + h2.values[i], 1e-12);
}

TEST(MakeBridge, RejectsMeshThatDoesNotDivide) {
    const auto path = sample_fbm(0.7, 41, 0.3, RandomSource{1, 1});
    EXPECT_THROW(make_bridge(path, 5.0), ParameterError);
    const auto short_path = sample_fbm(0.7, 21, 0.25, RandomSource{1, 1});
    EXPECT_THROW(make_bridge(short_path, 5.0), ParameterError);
}
