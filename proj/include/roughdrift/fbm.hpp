#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "roughdrift/detail/fft.hpp"
#include "roughdrift/detail/text.hpp"
#include "roughdrift/errors.hpp"
#include "roughdrift/random_source.hpp"

namespace roughdrift {

enum class FbmMethod {
    circulant, ///< spectral circulant embedding, falls back to cholesky if the embedding is not PSD
    cholesky,  ///< exact covariance factorization, O(n^3)
};

/// Fractional Brownian motion sampled at 0, mesh, 2*mesh, ...
struct FbmPath {
    double hurst = 0.5;
    double mesh = 1.0;
    std::vector<double> values;
    FbmMethod generator = FbmMethod::circulant;

    double length() const { return mesh * static_cast<double>(values.size() - 1); }
};

/**
 * Rough potential h on [-L, L]: an fBm path pinned to zero at both ends and
 * shifted from [0, 2L]. Node i sits at -L + i*mesh; h vanishes outside.
 */
struct BridgePotential {
    double half_width = 1.0;
    double mesh = 1.0;
    std::vector<double> values;
    double hurst = 0.5;

    std::size_t half_count() const { return (values.size() - 1) / 2; }
    double node(std::size_t i) const {
        if (i == 0) return -half_width;
        if (i + 1 == values.size()) return half_width;
        return (static_cast<double>(i) - static_cast<double>(half_count())) * mesh;
    }
};

/// Autocovariance of unit-mesh fractional Gaussian noise at integer lag k.
inline double fgn_autocovariance(double hurst, std::size_t k) {
    const double two_h = 2.0 * hurst;
    const double kk = static_cast<double>(k);
    if (k == 0) return 1.0;
    return 0.5 * (std::pow(kk + 1.0, two_h) - 2.0 * std::pow(kk, two_h) + std::pow(kk - 1.0, two_h));
}

/// Eigenvalues of the minimal circulant embedding (size 2n) of n fGn increments.
inline std::vector<double> circulant_eigenvalues(double hurst, std::size_t n) {
    const std::size_t size = 2 * n;
    std::vector<std::complex<double>> row(size);
    for (std::size_t j = 0; j <= n; ++j) row[j] = fgn_autocovariance(hurst, j);
    for (std::size_t j = 1; j < n; ++j) row[size - j] = row[j];
    detail::ComplexFft fft(size);
    fft.forward(row);
    std::vector<double> eig(size);
    std::transform(row.begin(), row.end(), eig.begin(), [](auto c) { return c.real(); });
    return eig;
}

namespace detail {

inline void validate_fbm_args(double hurst, std::size_t n_points, double mesh) {
    require(hurst > 0.0 && hurst < 1.0, "hurst must lie in (0, 1), got " + std::to_string(hurst));
    require(n_points >= 2, "fBm needs at least 2 points");
    require(mesh > 0.0 && std::isfinite(mesh), "fBm mesh must be positive");
}

inline std::vector<double> cumulate(const std::vector<double>& increments, double scale) {
    std::vector<double> values(increments.size() + 1, 0.0);
    for (std::size_t i = 0; i < increments.size(); ++i) values[i + 1] = values[i] + scale * increments[i];
    return values;
}

// Unit-mesh fGn via exact lower-triangular factor of the Toeplitz covariance.
inline std::vector<double> fgn_cholesky(double hurst, std::size_t n, GaussianStream& gauss) {
    std::vector<double> chol(n * n, 0.0);
    auto cov = [&](std::size_t i, std::size_t j) {
        return fgn_autocovariance(hurst, i > j ? i - j : j - i);
    };
    for (std::size_t j = 0; j < n; ++j) {
        double diag = cov(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= chol[j * n + k] * chol[j * n + k];
        if (diag <= 0.0) throw ParameterError("fGn covariance is not positive definite");
        const double d = std::sqrt(diag);
        chol[j * n + j] = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = cov(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= chol[i * n + k] * chol[j * n + k];
            chol[i * n + j] = s / d;
        }
    }
    std::vector<double> z(n);
    for (auto& v : z) v = gauss();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k <= i; ++k) s += chol[i * n + k] * z[k];
        out[i] = s;
    }
    return out;
}

// Unit-mesh fGn by circulant embedding; empty result when the embedding is not PSD.
inline std::vector<double> fgn_circulant(double hurst, std::size_t n, GaussianStream& gauss) {
    const auto eig = circulant_eigenvalues(hurst, n);
    const double largest = *std::max_element(eig.begin(), eig.end());
    const double tolerance = 1e-12 * largest;
    const std::size_t size = eig.size();
    std::vector<std::complex<double>> w(size);
    for (std::size_t k = 0; k < size; ++k) {
        if (eig[k] < -tolerance) return {};
        const double amplitude = std::sqrt(std::max(eig[k], 0.0) / static_cast<double>(size));
        const double re = gauss();
        const double im = gauss();
        w[k] = {amplitude * re, amplitude * im};
    }
    detail::ComplexFft fft(size);
    fft.forward(w);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = w[i].real();
    return out;
}

} // namespace detail

/**
 * Samples B^H at n_points nodes 0, mesh, ..., (n_points-1)*mesh.
 *
 * Increments are unit-mesh fractional Gaussian noise scaled by mesh^H, so
 * Cov(B_x, B_y) = (|x|^{2H} + |y|^{2H} - |x-y|^{2H}) / 2. The circulant route
 * falls back to the exact factorization when an eigenvalue is negative.
 */
inline FbmPath sample_fbm(double hurst, std::size_t n_points, double mesh, const RandomSource& source,
                          FbmMethod method = FbmMethod::circulant) {
    detail::validate_fbm_args(hurst, n_points, mesh);
    const std::size_t n = n_points - 1;
    GaussianStream gauss(source);
    std::vector<double> fgn;
    FbmMethod used = method;
    if (method == FbmMethod::circulant) fgn = detail::fgn_circulant(hurst, n, gauss);
    if (fgn.empty()) {
        used = FbmMethod::cholesky;
        fgn = detail::fgn_cholesky(hurst, n, gauss);
    }
    return FbmPath{hurst, mesh, detail::cumulate(fgn, std::pow(mesh, hurst)), used};
}

/// Keeps every factor-th node; exact in distribution for fBm.
inline FbmPath subsample(const FbmPath& path, std::size_t factor) {
    detail::require(factor >= 1 && (path.values.size() - 1) % factor == 0,
                    "subsample factor must divide the number of intervals");
    FbmPath out{path.hurst, path.mesh * static_cast<double>(factor), {}, path.generator};
    for (std::size_t i = 0; i < path.values.size(); i += factor) out.values.push_back(path.values[i]);
    return out;
}

/// Hurst index for a drift of regularity -beta_hat, kept strictly inside (1/2, 1).
inline double hurst_for_roughness(double beta_hat, double eps_hurst = 1e-3) {
    detail::require(beta_hat > 0.0 && beta_hat < 0.5, "beta_hat must lie in (0, 1/2)");
    detail::require(eps_hurst > 0.0 && eps_hurst < 0.25, "eps_hurst must lie in (0, 1/4)");
    return std::min(1.0 - beta_hat + eps_hurst, 1.0 - eps_hurst);
}

/**
 * h(x) = B_{x+L} - B_{2L} (x+L) / (2L) on [-L, L].
 *
 * The linear term uses the exact node fraction i/n so both endpoints are
 * exactly zero.
 */
inline BridgePotential make_bridge(const FbmPath& path, double half_width) {
    detail::require(half_width > 0.0, "half width must be positive");
    detail::require(path.values.size() >= 3, "bridge needs at least 3 nodes");
    const double intervals = 2.0 * half_width / path.mesh;
    const double rounded = std::round(intervals);
    detail::require(std::abs(intervals - rounded) <= 1e-9 * rounded,
                    "fBm mesh does not evenly divide 2L");
    detail::require(static_cast<std::size_t>(rounded) == path.values.size() - 1,
                    "fBm path must cover exactly [0, 2L]");
    detail::require(path.values.size() % 2 == 1, "bridge grid needs an odd number of nodes");

    // Paths start at zero; measuring from values[0] keeps h(-L) = 0 for any input.
    const std::size_t n = path.values.size() - 1;
    const double origin = path.values.front();
    const double rise = path.values.back() - origin;
    BridgePotential h{half_width, path.mesh, std::vector<double>(n + 1), path.hurst};
    for (std::size_t i = 0; i <= n; ++i) {
        const double fraction = static_cast<double>(i) / static_cast<double>(n);
        h.values[i] = (path.values[i] - origin) - rise * fraction;
    }
    return h;
}

/// Two-column CSV dump (x, h) for inspection and plotting.
inline void write_potential_csv(const std::string& path, const BridgePotential& h) {
    auto out = detail::open_for_write(path);
    out << "x,h\n";
    for (std::size_t i = 0; i < h.values.size(); ++i)
        out << detail::format_real(h.node(i)) << ',' << detail::format_real(h.values[i]) << '\n';
    detail::finish_write(out, path);
}

} // namespace roughdrift
