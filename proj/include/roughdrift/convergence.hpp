#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "roughdrift/drift.hpp"
#include "roughdrift/errors.hpp"
#include "roughdrift/euler_maruyama.hpp"
#include "roughdrift/fbm.hpp"
#include "roughdrift/scheme.hpp"

namespace roughdrift {

/// Which drift the study integrates. Only `fbm` is a real experiment; the others are exactness hooks.
enum class DriftMode { fbm, zero, constant };

/// How spatial grids are chosen across resolutions.
enum class MeshPolicy {
    shared, ///< one grid, sized for the proxy's N, used by every resolution
    nested, ///< per resolution, the coarsest power-of-two subsample of the proxy grid that is fine enough
};

/// Fraction of paths leaving [-L, L] above which a report is flagged.
inline constexpr double kExitWarningFraction = 0.01;

struct StudyConfig {
    double beta_hat = 0.25;
    double epsilon = kDefaultEpsilon;
    double eps_hurst = 1e-3;
    double half_width = 5.0;
    double horizon = 1.0;
    double x0 = 0.0;
    std::size_t paths = 1000;
    std::size_t proxy_steps = 1u << 13;
    std::vector<std::size_t> coarse_steps{1u << 7, 1u << 8, 1u << 9, 1u << 10, 1u << 11};
    std::uint64_t fbm_seed = 1;
    std::uint64_t noise_seed = 2;
    std::optional<double> eta_override;
    MeshPolicy mesh_policy = MeshPolicy::shared;
    DriftMode drift_mode = DriftMode::fbm;
    double drift_constant = 0.0;
    unsigned workers = 1;
    bool keep_terminals = false;

    void validate() const {
        detail::require(beta_hat > 0.0 && beta_hat < 0.5, "beta_hat must lie in (0, 1/2)");
        detail::require(epsilon > 0.0, "epsilon must be positive");
        detail::require(half_width > 0.0, "L must be positive");
        detail::require(horizon > 0.0, "T must be positive");
        detail::require(paths >= 1, "Q must be at least 1");
        detail::require(proxy_steps >= 1, "proxy m must be at least 1");
        detail::require(!coarse_steps.empty(), "at least one coarse m is required");
        for (std::size_t i = 0; i < coarse_steps.size(); ++i) {
            const auto m = coarse_steps[i];
            detail::require(m >= 1 && proxy_steps % m == 0,
                            "coarse m=" + std::to_string(m) + " does not divide proxy m=" + std::to_string(proxy_steps));
            detail::require(m < proxy_steps, "coarse m must be smaller than the proxy m");
            detail::require(i == 0 || m > coarse_steps[i - 1], "coarse m values must be strictly increasing");
        }
    }

    double effective_epsilon() const { return admissible_epsilon(beta_hat, epsilon); }

    double eta() const { return eta_override ? *eta_override : eta_of(beta_hat, effective_epsilon()); }

    SchemeParams scheme(std::size_t steps) const {
        return SchemeParams::make(beta_hat, effective_epsilon(), steps, horizon, x0, eta_override);
    }
};

struct RateFit {
    double rate = 0.0;
    double intercept = 0.0;
};

struct ErrorRow {
    std::size_t steps = 0;
    double dt = 0.0;
    double smoothing = 0.0;
    std::size_t grid_half_count = 0;
    double strong_error = 0.0;
    double mc_std_error = 0.0;
};

struct ConvergenceReport {
    StudyConfig config;
    double eta = 0.0;
    double hurst = 0.0;
    FbmMethod fbm_generator = FbmMethod::circulant;
    double proxy_smoothing = 0.0;
    std::size_t proxy_grid_half_count = 0;
    std::vector<ErrorRow> rows;
    std::optional<RateFit> fit; ///< absent when some error is zero
    double theoretical_rate = 0.0;
    double conjectured_rate = 0.0;
    double exit_fraction = 0.0;
    bool exit_warning = false;
    /// Per path: proxy terminal followed by each coarse terminal (only with keep_terminals).
    std::vector<std::vector<double>> terminals;
};

/**
 * Least squares line through (log10 dt_i, log10 err_i); the slope is the
 * empirical strong rate.
 */
inline RateFit fit_rate(std::span<const double> dts, std::span<const double> errors) {
    if (dts.size() != errors.size()) throw ParameterError("fit_rate: dts and errors differ in length");
    if (dts.size() < 2) throw DegenerateInputError("fit_rate needs at least two points");
    const std::size_t n = dts.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(errors[i] > 0.0)) throw DegenerateInputError("fit_rate: strong error is zero or negative");
        if (!(dts[i] > 0.0)) throw ParameterError("fit_rate: step sizes must be positive");
        xs[i] = std::log10(dts[i]);
        ys[i] = std::log10(errors[i]);
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw DegenerateInputError("fit_rate: all step sizes are equal");
    const double slope = sxy / sxx;
    return RateFit{slope, my - slope * mx};
}

namespace detail {

// Runs body(q) for q in [0, count) on `workers` threads with contiguous chunks.
// Each q writes only its own slots, so results do not depend on the split.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
    const std::size_t w = std::clamp<std::size_t>(workers == 0 ? 1 : workers, 1, std::max<std::size_t>(count, 1));
    if (w == 1) {
        for (std::size_t q = 0; q < count; ++q) body(q);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(w);
    const std::size_t chunk = (count + w - 1) / w;
    for (std::size_t t = 0; t < w; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] {
            for (std::size_t q = begin; q < end; ++q) body(q);
        });
    }
}

inline double sample_mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_std(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

} // namespace detail

/**
 * Strong L1 error of the coupled scheme at each coarse resolution against the
 * proxy resolution, for one rough drift.
 *
 * Every resolution m uses N(m) = m^eta and smooths the same fBm bridge; every
 * path q draws its Brownian increments once at the proxy resolution (stream
 * q of noise_seed) and coarsens them. Errors are measured at time T.
 */
inline ConvergenceReport strong_error_study(const StudyConfig& config) {
    config.validate();
    ConvergenceReport report;
    report.config = config;
    report.eta = config.eta();
    report.theoretical_rate = theoretical_rate(config.beta_hat);
    report.conjectured_rate = conjectured_rate(config.beta_hat);

    const double L = config.half_width;
    const auto proxy = config.scheme(config.proxy_steps);
    report.proxy_smoothing = proxy.smoothing_N;
    const std::size_t proxy_M = min_grid_points(L, std::max(1.0, proxy.smoothing_N));
    report.proxy_grid_half_count = proxy_M;

    std::vector<SchemeParams> schemes{proxy};
    for (auto m : config.coarse_steps) schemes.push_back(config.scheme(m));

    // Grid sizes per resolution; index 0 is the proxy.
    std::vector<std::size_t> grid_M(schemes.size(), proxy_M);
    if (config.mesh_policy == MeshPolicy::nested) {
        for (std::size_t r = 1; r < schemes.size(); ++r) {
            const std::size_t need = min_grid_points(L, std::max(1.0, schemes[r].smoothing_N));
            std::size_t M = proxy_M;
            while (M % 2 == 0 && M / 2 >= need) M /= 2;
            grid_M[r] = M;
        }
    }

    std::vector<DriftGrid> drifts;
    drifts.reserve(schemes.size());
    if (config.drift_mode == DriftMode::fbm) {
        report.hurst = hurst_for_roughness(config.beta_hat, config.eps_hurst);
        const double mesh = L / static_cast<double>(proxy_M);
        const auto fbm = sample_fbm(report.hurst, 2 * proxy_M + 1, mesh, RandomSource{config.fbm_seed, 0});
        report.fbm_generator = fbm.generator;
        for (std::size_t r = 0; r < schemes.size(); ++r) {
            const auto h = make_bridge(subsample(fbm, proxy_M / grid_M[r]), L);
            drifts.push_back(smooth_drift(h, schemes[r].smoothing_N, grid_M[r]));
        }
    } else {
        const double c = config.drift_mode == DriftMode::zero ? 0.0 : config.drift_constant;
        for (std::size_t r = 0; r < schemes.size(); ++r)
            drifts.push_back(DriftGrid::constant(L, grid_M[r], c, schemes[r].smoothing_N));
    }

    const std::size_t Q = config.paths;
    const std::size_t R = config.coarse_steps.size();
    std::vector<double> diffs(R * Q, 0.0);
    std::vector<unsigned char> exited(Q, 0);
    if (config.keep_terminals) report.terminals.assign(Q, std::vector<double>(R + 1, 0.0));

    detail::parallel_for(Q, config.workers, [&](std::size_t q) {
        const auto fine = brownian_increments(config.horizon, config.proxy_steps, RandomSource{config.noise_seed, q});
        const auto ref = simulate_terminal(drifts[0], schemes[0], fine);
        bool left = ref.max_abs > L;
        if (config.keep_terminals) report.terminals[q][0] = ref.terminal;
        for (std::size_t i = 0; i < R; ++i) {
            const auto noise = coarsen(fine, config.proxy_steps / config.coarse_steps[i]);
            const auto approx = simulate_terminal(drifts[i + 1], schemes[i + 1], noise);
            left = left || approx.max_abs > L;
            diffs[i * Q + q] = std::abs(ref.terminal - approx.terminal);
            if (config.keep_terminals) report.terminals[q][i + 1] = approx.terminal;
        }
        exited[q] = left ? 1 : 0;
    });

    for (std::size_t i = 0; i < R; ++i) {
        std::span<const double> d(diffs.data() + i * Q, Q);
        const double mean = detail::sample_mean(d);
        report.rows.push_back(ErrorRow{schemes[i + 1].steps_m, schemes[i + 1].step_size(), schemes[i + 1].smoothing_N,
                                       grid_M[i + 1], mean,
                                       detail::sample_std(d, mean) / std::sqrt(static_cast<double>(Q))});
    }
    report.exit_fraction =
        static_cast<double>(std::count(exited.begin(), exited.end(), 1)) / static_cast<double>(Q);
    report.exit_warning = report.exit_fraction > kExitWarningFraction;

    const bool all_positive =
        std::all_of(report.rows.begin(), report.rows.end(), [](const ErrorRow& r) { return r.strong_error > 0.0; });
    if (all_positive && R >= 2) {
        std::vector<double> dts, errs;
        for (const auto& r : report.rows) {
            dts.push_back(r.dt);
            errs.push_back(r.strong_error);
        }
        report.fit = fit_rate(dts, errs);
    }
    return report;
}

struct SeedPair {
    std::uint64_t fbm_seed = 0;
    std::uint64_t noise_seed = 0;
};

struct RateSummary {
    double beta_hat = 0.0;
    std::size_t runs = 0;
    double mean_rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::vector<double> rates;
    std::vector<SeedPair> seeds;
    double theoretical_rate = 0.0;
    double conjectured_rate = 0.0;
    double max_exit_fraction = 0.0;
};

/// Mean with a two-sided 95% Student-t interval (runs - 1 degrees of freedom).
inline RateSummary summarize_rates(double beta_hat, std::vector<double> rates) {
    detail::require(!rates.empty(), "at least one run is required");
    RateSummary s;
    s.beta_hat = beta_hat;
    s.runs = rates.size();
    s.mean_rate = detail::sample_mean(rates);
    s.ci_low = s.ci_high = s.mean_rate;
    if (rates.size() >= 2) {
        const boost::math::students_t_distribution<double> t(static_cast<double>(rates.size() - 1));
        const double quantile = boost::math::quantile(boost::math::complement(t, 0.025));
        const double half = quantile * detail::sample_std(rates, s.mean_rate) / std::sqrt(static_cast<double>(rates.size()));
        s.ci_low = s.mean_rate - half;
        s.ci_high = s.mean_rate + half;
    }
    s.rates = std::move(rates);
    s.theoretical_rate = theoretical_rate(beta_hat);
    s.conjectured_rate = conjectured_rate(beta_hat);
    return s;
}

/// Repeats the study once per seed pair and aggregates the fitted rates.
inline RateSummary multi_seed_rates(const StudyConfig& config, std::span<const SeedPair> seeds) {
    detail::require(!seeds.empty(), "runs must be at least 1");
    std::vector<double> rates;
    double max_exit = 0.0;
    for (const auto& seed : seeds) {
        auto run = config;
        run.fbm_seed = seed.fbm_seed;
        run.noise_seed = seed.noise_seed;
        const auto report = strong_error_study(run);
        if (!report.fit)
            throw DegenerateInputError("run with fbm seed " + std::to_string(seed.fbm_seed) + " has a zero strong error");
        rates.push_back(report.fit->rate);
        max_exit = std::max(max_exit, report.exit_fraction);
    }
    auto summary = summarize_rates(config.beta_hat, std::move(rates));
    summary.seeds.assign(seeds.begin(), seeds.end());
    summary.max_exit_fraction = max_exit;
    return summary;
}

/// Seeds for run r are derived from the config's seeds with mix_seed(seed, r).
inline std::vector<SeedPair> derive_seeds(const StudyConfig& config, std::size_t runs) {
    std::vector<SeedPair> seeds;
    for (std::size_t r = 0; r < runs; ++r)
        seeds.push_back(SeedPair{mix_seed(config.fbm_seed, r), mix_seed(config.noise_seed, r)});
    return seeds;
}

inline RateSummary multi_seed_rates(const StudyConfig& config, std::size_t runs) {
    detail::require(runs >= 1, "runs must be at least 1");
    const auto seeds = derive_seeds(config, runs);
    return multi_seed_rates(config, std::span<const SeedPair>(seeds));
}

} // namespace roughdrift
