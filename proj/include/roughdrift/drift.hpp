#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "roughdrift/detail/fft.hpp"
#include "roughdrift/detail/text.hpp"
#include "roughdrift/errors.hpp"
#include "roughdrift/fbm.hpp"
#include "roughdrift/heat_kernel.hpp"

namespace roughdrift {

/// Smoothed drift b^N sampled at x_i = i*mesh, i = -M..M, with mesh = L/M.
struct DriftGrid {
    double half_width = 1.0;
    double mesh = 1.0;
    std::size_t half_count = 1; ///< M
    double smoothing = 1.0;     ///< N; the kernel variance is 1/N
    std::vector<double> values; ///< index i + M holds b^N(x_i)

    std::size_t size() const { return values.size(); }

    /// Position of the node stored at index k (0..2M).
    double node(std::size_t k) const {
        if (k == 0) return -half_width;
        if (k == 2 * half_count) return half_width;
        return (static_cast<double>(k) - static_cast<double>(half_count)) * mesh;
    }

    /// Grid carrying one value everywhere; handy for exactness checks.
    static DriftGrid constant(double half_width, std::size_t half_count, double value, double smoothing = 1.0) {
        detail::require(half_width > 0.0 && half_count >= 1, "invalid constant drift grid");
        return DriftGrid{half_width, half_width / static_cast<double>(half_count), half_count, smoothing,
                         std::vector<double>(2 * half_count + 1, value)};
    }
};

/**
 * Smallest M whose grid of 2M+1 points over [-L, L] exceeds 2L*sqrt(N) points,
 * i.e. roughly one node per kernel standard deviation sqrt(1/N).
 */
inline std::size_t min_grid_points(double half_width, double smoothing) {
    detail::require(half_width > 0.0 && std::isfinite(half_width), "L must be positive");
    detail::require(smoothing >= 1.0 && std::isfinite(smoothing), "N must be at least 1");
    const double bound = 2.0 * half_width * std::sqrt(smoothing);
    const auto m = static_cast<std::size_t>(std::floor((bound - 1.0) / 2.0)) + 1;
    return m < 1 ? 1 : m;
}

enum class ConvolutionMethod { direct, fft };

/**
 * b^N(x_i) = -sum_j h(x_j) I(x_i - x_j), the heat-kernel derivative applied to
 * the piecewise-constant extension of h.
 *
 * The potential must already live on the mesh L/M; regenerate the fBm on a
 * finer mesh rather than interpolating it.
 */
inline DriftGrid smooth_drift(const BridgePotential& potential, double smoothing, std::size_t half_count,
                              ConvolutionMethod method = ConvolutionMethod::direct) {
    const double L = potential.half_width;
    const std::size_t M = half_count;
    detail::require(smoothing > 0.0 && std::isfinite(smoothing), "N must be positive");
    detail::require(M >= 1, "M must be at least 1");
    detail::require(M >= min_grid_points(L, smoothing),
                    "grid too coarse for N=" + detail::format_real(smoothing) + ": need M >= " +
                        std::to_string(min_grid_points(L, smoothing)));
    const double mesh = L / static_cast<double>(M);
    detail::require(potential.values.size() == 2 * M + 1 && std::abs(potential.mesh - mesh) <= 1e-12 * mesh,
                    "potential mesh does not match the requested drift grid");

    const auto weights = kernel_weights(2 * M, KernelParams{1.0 / smoothing, mesh});
    const std::size_t n = 2 * M + 1;
    std::vector<double> b(n, 0.0);

    if (method == ConvolutionMethod::direct) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += potential.values[j] * weights[i + 2 * M - j];
            b[i] = -acc;
        }
    } else {
        std::size_t size = 1;
        while (size < n + weights.size() - 1) size <<= 1;
        std::vector<std::complex<double>> hf(size), wf(size);
        for (std::size_t j = 0; j < n; ++j) hf[j] = potential.values[j];
        for (std::size_t k = 0; k < weights.size(); ++k) wf[k] = weights[k];
        detail::ComplexFft fft(size);
        fft.forward(hf);
        fft.forward(wf);
        for (std::size_t k = 0; k < size; ++k) hf[k] *= wf[k];
        fft.backward(hf);
        for (std::size_t i = 0; i < n; ++i) b[i] = -hf[i + 2 * M].real() / static_cast<double>(size);
    }
    return DriftGrid{L, mesh, M, smoothing, std::move(b)};
}

/// Piecewise-linear interpolation on [-L, L]; zero outside.
inline double eval_drift(const DriftGrid& grid, double x) {
    if (!(std::abs(x) <= grid.half_width)) return 0.0;
    const std::size_t last = grid.values.size() - 1;
    auto k = static_cast<std::size_t>(std::floor((x + grid.half_width) / grid.mesh));
    if (k >= last) k = last - 1;
    // nudge against rounding in the index estimate so nodes hit exactly
    if (k > 0 && x < grid.node(k)) --k;
    if (k + 1 < last && x >= grid.node(k + 1)) ++k;
    if (x == grid.half_width) return grid.values[last];
    const double left = grid.node(k);
    const double frac = (x - left) / grid.mesh;
    return grid.values[k] + frac * (grid.values[k + 1] - grid.values[k]);
}

/// Provenance stamped on drift CSV files.
struct DriftMetadata {
    double hurst = 0.0;
    std::uint64_t seed = 0;
};

/**
 * Writes "# L=..,M=..,N=..,hurst=..,seed=.." then "x,b" and one row per node.
 */
inline void write_drift_csv(const std::string& path, const DriftGrid& grid, const DriftMetadata& meta) {
    auto out = detail::open_for_write(path);
    out << "# L=" << detail::format_real(grid.half_width) << ",M=" << grid.half_count
        << ",N=" << detail::format_real(grid.smoothing) << ",hurst=" << detail::format_real(meta.hurst)
        << ",seed=" << meta.seed << '\n';
    out << "x,b\n";
    for (std::size_t k = 0; k < grid.size(); ++k)
        out << detail::format_real(grid.node(k)) << ',' << detail::format_real(grid.values[k]) << '\n';
    detail::finish_write(out, path);
}

/// Reads a file written by write_drift_csv back into a grid.
inline DriftGrid read_drift_csv(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.size() < 4 || lines[0].rfind("# ", 0) != 0 || lines[1] != "x,b")
        throw IoError("not a drift CSV", path);
    DriftGrid grid;
    for (const auto& field : detail::split(lines[0].substr(2), ',')) {
        const auto kv = detail::split(field, '=');
        if (kv.size() != 2) throw IoError("malformed drift header", path);
        if (kv[0] == "L") grid.half_width = detail::parse_real(kv[1]);
        if (kv[0] == "M") grid.half_count = std::stoul(kv[1]);
        if (kv[0] == "N") grid.smoothing = detail::parse_real(kv[1]);
    }
    grid.mesh = grid.half_width / static_cast<double>(grid.half_count);
    for (std::size_t i = 2; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto cols = detail::split(lines[i], ',');
        if (cols.size() != 2) throw IoError("malformed drift row", path);
        grid.values.push_back(detail::parse_real(cols[1]));
    }
    if (grid.values.size() != 2 * grid.half_count + 1) throw IoError("drift row count does not match M", path);
    return grid;
}

} // namespace roughdrift
