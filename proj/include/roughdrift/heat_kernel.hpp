#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "roughdrift/errors.hpp"

namespace roughdrift {

/// Heat kernel variance t (the smoothing level 1/N) and the mesh cell width.
struct KernelParams {
    double variance = 1.0;
    double cell_width = 1.0;

    void validate() const {
        detail::require(variance > 0.0 && std::isfinite(variance), "kernel variance must be positive");
        detail::require(cell_width > 0.0 && std::isfinite(cell_width), "cell width must be positive");
    }
};

/// Weights with magnitude below this are stored as exact zeros.
inline constexpr double kWeightCutoff = 1e-15;

/// Gaussian density with variance t, p_t(x) = exp(-x^2 / 2t) / sqrt(2 pi t).
inline double heat_density(double t, double x) {
    detail::require(t > 0.0, "heat kernel variance must be positive");
    return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

/**
 * Cell integral of -p_t' over one mesh cell centred at offset y:
 *
 *   I(y) = int_{-d/2}^{d/2} (y - z)/t * p_t(y - z) dz = p_t(y - d/2) - p_t(y + d/2).
 *
 * The integrand is the exact z-derivative of p_t(y - z), so no quadrature is
 * needed. Odd in y, bit-exactly.
 */
inline double kernel_weight(double y, const KernelParams& params) {
    params.validate();
    const double half = 0.5 * params.cell_width;
    return heat_density(params.variance, y - half) - heat_density(params.variance, y + half);
}

/// Weights I(k*d) for k = -span..span, index k + span; tiny values zeroed.
inline std::vector<double> kernel_weights(std::size_t span, const KernelParams& params) {
    params.validate();
    std::vector<double> w(2 * span + 1, 0.0);
    for (std::size_t k = 1; k <= span; ++k) {
        double v = kernel_weight(static_cast<double>(k) * params.cell_width, params);
        if (std::abs(v) < kWeightCutoff) v = 0.0;
        w[span + k] = v;
        w[span - k] = -v;
    }
    return w;
}

} // namespace roughdrift
