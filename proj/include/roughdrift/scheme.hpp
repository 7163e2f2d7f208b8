#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>

#include "roughdrift/errors.hpp"

namespace roughdrift {

/// Default regularity slack epsilon; also the offset used for the endpoint roughness values.
inline constexpr double kDefaultEpsilon = 1e-6;

/**
 * Coupling exponent eta in N(m) = m^eta,
 *
 *   eta = 1 / (eps + beta_hat + 1 + 2 (1/2 - beta_hat - eps)^2),
 *
 * which equates the Euler error exponent with the smoothing error exponent.
 */
inline double eta_of(double beta_hat, double epsilon) {
    detail::require(beta_hat > 0.0 && beta_hat < 0.5, "beta_hat must lie in (0, 1/2)");
    detail::require(epsilon > 0.0 && epsilon < 0.5 - beta_hat, "epsilon must lie in (0, 1/2 - beta_hat)");
    const double gap = 0.5 - beta_hat - epsilon;
    return 1.0 / (epsilon + beta_hat + 1.0 + 2.0 * gap * gap);
}

/**
 * Epsilon clipped to half the admissible gap 1/2 - beta_hat. Near the upper
 * endpoint (beta_hat = 1/2 - 1e-6) the default 1e-6 is no longer admissible.
 */
inline double admissible_epsilon(double beta_hat, double epsilon) {
    detail::require(beta_hat > 0.0 && beta_hat < 0.5, "beta_hat must lie in (0, 1/2)");
    detail::require(epsilon > 0.0, "epsilon must be positive");
    return std::min(epsilon, 0.5 * (0.5 - beta_hat));
}

/// N(m) = m^eta.
inline double smoothing_of(std::size_t steps, double eta) {
    detail::require(steps >= 1, "step count must be at least 1");
    detail::require(eta >= 0.0, "eta must be non-negative");
    return std::pow(static_cast<double>(steps), eta);
}

/// Proven rate bound (1/2 - b)^2 / (2 (1/2 - b)^2 + b + 1); endpoints give 1/6 and 0.
inline double theoretical_rate(double beta_hat) {
    detail::require(beta_hat >= 0.0 && beta_hat <= 0.5, "beta_hat must lie in [0, 1/2]");
    const double gap = 0.5 - beta_hat;
    return gap * gap / (2.0 * gap * gap + beta_hat + 1.0);
}

/// Empirically observed rate 1/2 - beta_hat/2.
inline double conjectured_rate(double beta_hat) {
    detail::require(beta_hat >= 0.0 && beta_hat <= 0.5, "beta_hat must lie in [0, 1/2]");
    return 0.5 - 0.5 * beta_hat;
}

/// Parameters of one Euler-Maruyama resolution with its coupled smoothing level.
struct SchemeParams {
    double beta_hat = 0.25;
    double epsilon = kDefaultEpsilon;
    double eta = 0.0;
    std::size_t steps_m = 1;
    double smoothing_N = 1.0;
    double horizon_T = 1.0;
    double x0 = 0.0;

    double step_size() const { return horizon_T / static_cast<double>(steps_m); }

    /// eta defaults to eta_of(beta_hat, epsilon); N is always m^eta.
    static SchemeParams make(double beta_hat, double epsilon, std::size_t steps, double horizon, double x0,
                             std::optional<double> eta_override = std::nullopt) {
        detail::require(horizon > 0.0 && std::isfinite(horizon), "horizon T must be positive");
        const double eta = eta_override ? *eta_override : eta_of(beta_hat, epsilon);
        if (eta_override) {
            detail::require(beta_hat > 0.0 && beta_hat < 0.5, "beta_hat must lie in (0, 1/2)");
            detail::require(eta > 0.0 && eta < 1.0 / (epsilon + beta_hat + 1.0),
                            "eta override must satisfy 0 < eta < 1/(eps + beta_hat + 1)");
        }
        return SchemeParams{beta_hat, epsilon, eta, steps, smoothing_of(steps, eta), horizon, x0};
    }
};

} // namespace roughdrift
