#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "roughdrift/drift.hpp"
#include "roughdrift/errors.hpp"
#include "roughdrift/random_source.hpp"
#include "roughdrift/scheme.hpp"

namespace roughdrift {

/**
 * Brownian increments on a uniform partition of [0, T].
 *
 * Increments are rounded to a dyadic quantum (2^-30 of their standard
 * deviation), so every partial sum is exact and block sums do not depend on
 * summation order. That is what makes coarsened grids agree bit-for-bit.
 */
struct BrownianGrid {
    double horizon_T = 1.0;
    std::vector<double> increments;
    RandomSource source;

    std::size_t steps() const { return increments.size(); }
};

inline BrownianGrid brownian_increments(double horizon, std::size_t steps, const RandomSource& source) {
    detail::require(horizon > 0.0 && std::isfinite(horizon), "horizon T must be positive");
    detail::require(steps >= 1, "step count must be at least 1");
    const double sd = std::sqrt(horizon / static_cast<double>(steps));
    const int exponent = std::ilogb(sd) - 30;
    GaussianStream gauss(source);
    BrownianGrid grid{horizon, std::vector<double>(steps), source};
    for (auto& dw : grid.increments) dw = std::ldexp(std::nearbyint(std::ldexp(sd * gauss(), -exponent)), exponent);
    return grid;
}

/// Aggregates blocks of `factor` consecutive increments, left to right.
inline BrownianGrid coarsen(const BrownianGrid& fine, std::size_t factor) {
    detail::require(factor >= 1 && fine.steps() % factor == 0, "coarsening factor must divide the step count");
    BrownianGrid coarse{fine.horizon_T, std::vector<double>(fine.steps() / factor, 0.0), fine.source};
    for (std::size_t k = 0; k < coarse.steps(); ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < factor; ++j) s += fine.increments[k * factor + j];
        coarse.increments[k] = s;
    }
    return coarse;
}

struct EmPath {
    std::size_t steps = 0;
    std::vector<double> values; ///< X at t_0..t_m
    double terminal = 0.0;
};

/// Terminal value and the largest |X| visited.
struct EmOutcome {
    double terminal = 0.0;
    double max_abs = 0.0;
};

namespace detail {

// X_{k+1} = X_k + b(X_k) dt + dW_k, carried as the displacement Y = X - x0 so a
// zero drift reproduces x0 + W exactly.
template <typename Visit>
double euler_maruyama(const DriftGrid& drift, double x0, double dt, const std::vector<double>& increments,
                      Visit&& visit) {
    double y = 0.0;
    for (double dw : increments) {
        y += eval_drift(drift, x0 + y) * dt + dw;
        visit(x0 + y);
    }
    return x0 + y;
}

inline void check_noise(const SchemeParams& params, const BrownianGrid& noise) {
    require(noise.steps() == params.steps_m, "noise has " + std::to_string(noise.steps()) +
                                                 " steps but the scheme expects " + std::to_string(params.steps_m));
    require(noise.horizon_T == params.horizon_T, "noise horizon differs from the scheme horizon");
}

} // namespace detail

/// Explicit left-point Euler-Maruyama path for dX = b^N(X) dt + dW.
inline EmPath simulate(const DriftGrid& drift, const SchemeParams& params, const BrownianGrid& noise) {
    detail::check_noise(params, noise);
    EmPath path{params.steps_m, {}, 0.0};
    path.values.reserve(params.steps_m + 1);
    path.values.push_back(params.x0);
    path.terminal = detail::euler_maruyama(drift, params.x0, params.step_size(), noise.increments,
                                           [&](double x) { path.values.push_back(x); });
    return path;
}

/// Same recursion as simulate without storing the path.
inline EmOutcome simulate_terminal(const DriftGrid& drift, const SchemeParams& params, const BrownianGrid& noise) {
    detail::check_noise(params, noise);
    EmOutcome out{0.0, std::abs(params.x0)};
    out.terminal = detail::euler_maruyama(drift, params.x0, params.step_size(), noise.increments,
                                          [&](double x) { out.max_abs = std::max(out.max_abs, std::abs(x)); });
    return out;
}

} // namespace roughdrift
