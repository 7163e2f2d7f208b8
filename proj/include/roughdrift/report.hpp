#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roughdrift/convergence.hpp"
#include "roughdrift/detail/text.hpp"
#include "roughdrift/errors.hpp"

// Output schemas are documented in docs/formats.md. Reals are written with 17
// significant digits so every number parses back bit-exactly.

namespace roughdrift {

inline constexpr const char* kReportCsvHeader = "m,dt,N,M,strong_error,mc_std_error";
inline constexpr const char* kSummaryCsvHeader = "run,fbm_seed,noise_seed,rate";
inline constexpr const char* kTerminalsCsvHeader = "stream_id,m,terminal";

inline const char* to_string(FbmMethod m) { return m == FbmMethod::circulant ? "circulant" : "cholesky"; }

inline const char* to_string(DriftMode m) {
    switch (m) {
    case DriftMode::fbm: return "fbm";
    case DriftMode::zero: return "zero";
    case DriftMode::constant: return "constant";
    }
    return "fbm";
}

inline const char* to_string(MeshPolicy p) { return p == MeshPolicy::shared ? "shared" : "nested"; }

inline void write_report_csv(const std::string& path, const ConvergenceReport& report) {
    auto out = detail::open_for_write(path);
    out << kReportCsvHeader << '\n';
    for (const auto& r : report.rows) {
        out << r.steps << ',' << detail::format_real(r.dt) << ',' << detail::format_real(r.smoothing) << ','
            << r.grid_half_count << ',' << detail::format_real(r.strong_error) << ','
            << detail::format_real(r.mc_std_error) << '\n';
    }
    detail::finish_write(out, path);
}

inline std::vector<ErrorRow> read_report_csv(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty() || lines[0] != kReportCsvHeader) throw IoError("unexpected report CSV header", path);
    std::vector<ErrorRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto c = detail::split(lines[i], ',');
        if (c.size() != 6) throw IoError("malformed report row " + std::to_string(i), path);
        rows.push_back(ErrorRow{std::stoul(c[0]), detail::parse_real(c[1]), detail::parse_real(c[2]), std::stoul(c[3]),
                                detail::parse_real(c[4]), detail::parse_real(c[5])});
    }
    return rows;
}

inline nlohmann::json config_to_json(const StudyConfig& c) {
    nlohmann::json j;
    j["beta_hat"] = c.beta_hat;
    j["epsilon"] = c.epsilon;
    j["eps_hurst"] = c.eps_hurst;
    j["L"] = c.half_width;
    j["T"] = c.horizon;
    j["x0"] = c.x0;
    j["Q"] = c.paths;
    j["proxy_m"] = c.proxy_steps;
    j["coarse_m"] = c.coarse_steps;
    j["fbm_seed"] = c.fbm_seed;
    j["noise_seed"] = c.noise_seed;
    j["eta_override"] = c.eta_override ? nlohmann::json(*c.eta_override) : nlohmann::json(nullptr);
    j["mesh_policy"] = to_string(c.mesh_policy);
    j["drift_mode"] = to_string(c.drift_mode);
    if (c.drift_mode == DriftMode::constant) j["drift_constant"] = c.drift_constant;
    return j;
}

inline nlohmann::json report_to_json(const ConvergenceReport& report) {
    nlohmann::json j;
    j["schema"] = "roughdrift.convergence/1";
    j["beta_hat"] = report.config.beta_hat;
    j["rate"] = report.fit ? nlohmann::json(report.fit->rate) : nlohmann::json(nullptr);
    j["intercept"] = report.fit ? nlohmann::json(report.fit->intercept) : nlohmann::json(nullptr);
    j["theoretical_rate"] = report.theoretical_rate;
    j["conjectured_rate"] = report.conjectured_rate;
    j["exit_fraction"] = report.exit_fraction;
    j["exit_warning"] = report.exit_warning;
    j["eta"] = report.eta;
    j["hurst"] = report.hurst;
    j["fbm_generator"] = to_string(report.fbm_generator);
    j["proxy_N"] = report.proxy_smoothing;
    j["proxy_M"] = report.proxy_grid_half_count;
    auto rows = nlohmann::json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"m", r.steps}, {"dt", r.dt}, {"N", r.smoothing}, {"M", r.grid_half_count},
                        {"strong_error", r.strong_error}, {"mc_std_error", r.mc_std_error}});
    j["rows"] = rows;
    j["config"] = config_to_json(report.config);
    return j;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    auto out = detail::open_for_write(path);
    out << j.dump(2) << '\n';
    detail::finish_write(out, path);
}

inline nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading", path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("invalid JSON (") + e.what() + ")", path);
    }
}

/// Writes `<stem>.csv` and `<stem>.json`.
inline void emit_report(const ConvergenceReport& report, const std::string& stem) {
    write_report_csv(stem + ".csv", report);
    write_json(stem + ".json", report_to_json(report));
}

/// Per-path terminal values; requires a report built with keep_terminals.
inline void write_terminals_csv(const std::string& path, const ConvergenceReport& report) {
    auto out = detail::open_for_write(path);
    out << kTerminalsCsvHeader << '\n';
    for (std::size_t q = 0; q < report.terminals.size(); ++q) {
        out << q << ',' << report.config.proxy_steps << ',' << detail::format_real(report.terminals[q][0]) << '\n';
        for (std::size_t i = 0; i < report.config.coarse_steps.size(); ++i)
            out << q << ',' << report.config.coarse_steps[i] << ',' << detail::format_real(report.terminals[q][i + 1])
                << '\n';
    }
    detail::finish_write(out, path);
}

inline nlohmann::json summary_to_json(const RateSummary& s) {
    nlohmann::json j;
    j["schema"] = "roughdrift.rates/1";
    j["beta_hat"] = s.beta_hat;
    j["runs"] = s.runs;
    j["mean_rate"] = s.mean_rate;
    j["ci_low"] = s.ci_low;
    j["ci_high"] = s.ci_high;
    j["rates"] = s.rates;
    j["theoretical_rate"] = s.theoretical_rate;
    j["conjectured_rate"] = s.conjectured_rate;
    j["max_exit_fraction"] = s.max_exit_fraction;
    auto seeds = nlohmann::json::array();
    for (const auto& p : s.seeds) seeds.push_back({{"fbm_seed", p.fbm_seed}, {"noise_seed", p.noise_seed}});
    j["seeds"] = seeds;
    return j;
}

/// One row per run; `<stem>.csv` plus `<stem>.json` with the interval.
inline void emit_summary(const RateSummary& s, const std::string& stem) {
    const std::string csv = stem + ".csv";
    auto out = detail::open_for_write(csv);
    out << kSummaryCsvHeader << '\n';
    for (std::size_t r = 0; r < s.rates.size(); ++r) {
        const SeedPair seed = r < s.seeds.size() ? s.seeds[r] : SeedPair{};
        out << r << ',' << seed.fbm_seed << ',' << seed.noise_seed << ',' << detail::format_real(s.rates[r]) << '\n';
    }
    detail::finish_write(out, csv);
    write_json(stem + ".json", summary_to_json(s));
}

/**
 * Rate table with one column per beta_hat and rows
 * empirical_mean, ci_low, ci_high, conjectured, theoretical. Summaries without
 * runs leave the empirical rows empty.
 */
inline void write_rates_table_csv(const std::string& path, std::span<const RateSummary> summaries) {
    auto out = detail::open_for_write(path);
    out << "quantity";
    for (const auto& s : summaries) out << ',' << detail::format_real(s.beta_hat);
    out << '\n';
    auto row = [&](const char* name, auto field, bool empirical) {
        out << name;
        for (const auto& s : summaries) {
            out << ',';
            if (!empirical || s.runs > 0) out << detail::format_real(field(s));
        }
        out << '\n';
    };
    row("empirical_mean", [](const RateSummary& s) { return s.mean_rate; }, true);
    row("ci_low", [](const RateSummary& s) { return s.ci_low; }, true);
    row("ci_high", [](const RateSummary& s) { return s.ci_high; }, true);
    row("conjectured", [](const RateSummary& s) { return s.conjectured_rate; }, false);
    row("theoretical", [](const RateSummary& s) { return s.theoretical_rate; }, false);
    detail::finish_write(out, path);
}

} // namespace roughdrift
