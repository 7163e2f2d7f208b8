// roughdrift: drift construction, Euler-Maruyama simulation and strong
// convergence studies for SDEs with rough distributional drift.
//
// Exit codes: 0 success, 2 usage or configuration error, 1 runtime error.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "roughdrift/roughdrift.hpp"

namespace fs = std::filesystem;
using namespace roughdrift;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Common {
    std::string out_dir = ".";
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
};

struct DriftOptions {
    double beta_hat = 0.0;
    double epsilon = kDefaultEpsilon;
    double eps_hurst = 1e-3;
    double half_width = 5.0;
    std::size_t steps = 4096;
    std::optional<double> eta;
    std::optional<double> inverse_n;
    std::uint64_t seed = 1;
    std::string output = "drift.csv";
    std::string potential_output;
};

struct SimulateOptions {
    double beta_hat = 0.0;
    double epsilon = kDefaultEpsilon;
    double eps_hurst = 1e-3;
    double half_width = 5.0;
    double horizon = 1.0;
    double x0 = 0.0;
    std::size_t steps = 4096;
    std::optional<double> eta;
    std::uint64_t fbm_seed = 1;
    std::uint64_t noise_seed = 2;
    std::uint64_t stream = 0;
    std::string output = "path.csv";
};

struct StudyOptions {
    std::vector<double> beta_hats;
    double epsilon = kDefaultEpsilon;
    double eps_hurst = 1e-3;
    double half_width = 5.0;
    double horizon = 1.0;
    double x0 = 0.0;
    std::size_t paths = 1000;
    std::size_t proxy_m = 1u << 13;
    std::vector<std::size_t> coarse_m{1u << 7, 1u << 8, 1u << 9, 1u << 10, 1u << 11};
    std::uint64_t fbm_seed = 1;
    std::uint64_t noise_seed = 2;
    std::optional<double> eta;
    std::string mesh = "shared";
    std::size_t runs = 8;
    bool dry_run = false;
    bool dump_paths = false;
    std::string stem;
};

struct TableOptions {
    std::string kind = "rates";
    std::vector<double> beta_hats{1e-6, 0.0625, 0.125, 0.25, 0.375, 0.4375, 0.499999};
    std::vector<double> inverse_n{0.001288, 0.001398, 0.001489, 0.001768, 0.003906};
    bool inverse_n_given = false;
    double half_width = 5.0;
    std::optional<double> cell_width;
    std::string output;
};

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

// Root options plus the options of `command`, all defaults materialized;
// unset optional values are left out so the file parses back.
std::string resolved_config(const CLI::App& app, const std::string& command) {
    auto keep = [](const std::string& text, std::ostringstream& out) {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line.front() == '[') break;
            const auto dot = line.find('.');
            if (line.ends_with("=\"\"") || (dot != std::string::npos && dot < line.find('='))) continue;
            out << line << '\n';
        }
    };
    std::ostringstream out;
    keep(app.config_to_str(true, false), out);
    out << "\n[" << command << "]\n";
    keep(app.get_subcommand(command)->config_to_str(true, false), out);
    return out.str();
}

class Manifest {
public:
    Manifest(std::string command, const CLI::App& app)
        : command_(command), config_(resolved_config(app, command)), started_(utc_now()),
          clock_(std::chrono::steady_clock::now()) {}

    void add_artifact(const fs::path& p) { artifacts_.push_back(p.string()); }

    // The resolved configuration is also written as an INI file that reruns
    // the command via --config.
    void write(const fs::path& dir, const std::string& stem, std::uint64_t master_seed) const {
        const auto ini = dir / (stem + ".run.ini");
        {
            auto out = detail::open_for_write(ini.string());
            out << config_;
            detail::finish_write(out, ini.string());
        }
        nlohmann::json j;
        j["tool"] = "roughdrift";
        j["version"] = kVersion;
        j["command"] = command_;
        j["master_seed"] = master_seed;
        j["config"] = config_;
        j["config_file"] = ini.string();
        j["artifacts"] = artifacts_;
        j["started_utc"] = started_;
        j["wall_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_).count();
        write_json((dir / (stem + ".manifest.json")).string(), j);
    }

private:
    std::string command_;
    std::string config_;
    std::string started_;
    std::chrono::steady_clock::time_point clock_;
    std::vector<std::string> artifacts_;
};

fs::path output_dir(const Common& common) {
    fs::path dir(common.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory (" + ec.message() + ")", dir.string());
    return dir;
}

MeshPolicy parse_mesh(const std::string& s) {
    if (s == "shared") return MeshPolicy::shared;
    if (s == "nested") return MeshPolicy::nested;
    throw ParameterError("mesh must be 'shared' or 'nested', got '" + s + "'");
}

struct BuiltDrift {
    DriftGrid grid;
    BridgePotential potential;
    double hurst = 0.0;
};

BuiltDrift build_drift(double beta_hat, double epsilon, double eps_hurst, double L, std::size_t steps,
                       std::optional<double> eta, std::optional<double> inverse_n, std::uint64_t seed) {
    double N = 0.0;
    if (inverse_n) {
        detail::require(*inverse_n > 0.0 && *inverse_n <= 1.0, "inverse-n must lie in (0, 1]");
        N = 1.0 / *inverse_n;
    } else {
        N = SchemeParams::make(beta_hat, admissible_epsilon(beta_hat, epsilon), steps, 1.0, 0.0, eta).smoothing_N;
    }
    const std::size_t M = min_grid_points(L, N);
    const double hurst = hurst_for_roughness(beta_hat, eps_hurst);
    const auto fbm = sample_fbm(hurst, 2 * M + 1, L / static_cast<double>(M), RandomSource{seed, 0});
    auto h = make_bridge(fbm, L);
    auto grid = smooth_drift(h, N, M);
    return BuiltDrift{std::move(grid), std::move(h), hurst};
}

StudyConfig make_study(const StudyOptions& o, double beta_hat, unsigned workers) {
    StudyConfig c;
    c.beta_hat = beta_hat;
    c.epsilon = o.epsilon;
    c.eps_hurst = o.eps_hurst;
    c.half_width = o.half_width;
    c.horizon = o.horizon;
    c.x0 = o.x0;
    c.paths = o.paths;
    c.proxy_steps = o.proxy_m;
    c.coarse_steps = o.coarse_m;
    c.fbm_seed = o.fbm_seed;
    c.noise_seed = o.noise_seed;
    c.eta_override = o.eta;
    c.mesh_policy = parse_mesh(o.mesh);
    c.workers = workers;
    c.keep_terminals = o.dump_paths;
    c.validate();
    return c;
}

std::string beta_tag(double beta_hat) {
    std::ostringstream os;
    os << "beta_" << std::setprecision(8) << beta_hat;
    return os.str();
}

int run_drift(const DriftOptions& o, const Common& common, const CLI::App& app) {
    Manifest manifest("drift", app);
    const auto dir = output_dir(common);
    const auto built = build_drift(o.beta_hat, o.epsilon, o.eps_hurst, o.half_width, o.steps, o.eta, o.inverse_n, o.seed);
    const auto csv = dir / o.output;
    write_drift_csv(csv.string(), built.grid, DriftMetadata{built.hurst, o.seed});
    manifest.add_artifact(csv);
    if (!o.potential_output.empty()) {
        const auto pot = dir / o.potential_output;
        write_potential_csv(pot.string(), built.potential);
        manifest.add_artifact(pot);
    }
    manifest.write(dir, csv.stem().string(), o.seed);
    std::cout << "nodes=" << built.grid.size() << " M=" << built.grid.half_count
              << " N=" << detail::format_real(built.grid.smoothing) << " hurst=" << detail::format_real(built.hurst)
              << " -> " << csv.string() << '\n';
    return 0;
}

int run_simulate(const SimulateOptions& o, const Common& common, const CLI::App& app) {
    Manifest manifest("simulate", app);
    const auto dir = output_dir(common);
    const auto params =
        SchemeParams::make(o.beta_hat, admissible_epsilon(o.beta_hat, o.epsilon), o.steps, o.horizon, o.x0, o.eta);
    const auto built =
        build_drift(o.beta_hat, o.epsilon, o.eps_hurst, o.half_width, o.steps, o.eta, std::nullopt, o.fbm_seed);
    const auto noise = brownian_increments(o.horizon, o.steps, RandomSource{o.noise_seed, o.stream});
    const auto path = simulate(built.grid, params, noise);

    const auto csv = dir / o.output;
    auto out = detail::open_for_write(csv.string());
    out << "t,x\n";
    for (std::size_t k = 0; k < path.values.size(); ++k)
        out << detail::format_real(static_cast<double>(k) * params.step_size()) << ','
            << detail::format_real(path.values[k]) << '\n';
    detail::finish_write(out, csv.string());
    manifest.add_artifact(csv);
    manifest.write(dir, csv.stem().string(), o.noise_seed);
    std::cout << "X_T=" << detail::format_real(path.terminal) << " -> " << csv.string() << '\n';
    return 0;
}

void print_plan(const StudyConfig& c) {
    const auto eta = c.eta();
    const auto proxy = c.scheme(c.proxy_steps);
    std::cout << "eta=" << detail::format_real(eta) << " hurst=" << detail::format_real(hurst_for_roughness(c.beta_hat, c.eps_hurst))
              << " M=" << min_grid_points(c.half_width, proxy.smoothing_N) << '\n';
    std::cout << "role,m,dt,N\n";
    std::cout << "proxy," << c.proxy_steps << ',' << detail::format_real(proxy.step_size()) << ','
              << detail::format_real(proxy.smoothing_N) << '\n';
    for (auto m : c.coarse_steps) {
        const auto s = c.scheme(m);
        std::cout << "coarse," << m << ',' << detail::format_real(s.step_size()) << ',' << detail::format_real(s.smoothing_N)
                  << '\n';
    }
}

int run_converge(const StudyOptions& o, const Common& common, const CLI::App& app) {
    const auto config = make_study(o, o.beta_hats.front(), common.workers);
    if (o.dry_run) {
        print_plan(config);
        return 0;
    }
    Manifest manifest("converge", app);
    const auto dir = output_dir(common);
    const auto report = strong_error_study(config);
    const std::string stem = o.stem.empty() ? "report" : o.stem;
    emit_report(report, (dir / stem).string());
    manifest.add_artifact(dir / (stem + ".csv"));
    manifest.add_artifact(dir / (stem + ".json"));
    if (o.dump_paths) {
        const auto p = dir / (stem + ".terminals.csv");
        write_terminals_csv(p.string(), report);
        manifest.add_artifact(p);
    }
    manifest.write(dir, stem, config.noise_seed);

    for (const auto& r : report.rows)
        std::cout << "m=" << r.steps << " err=" << detail::format_real(r.strong_error)
                  << " se=" << detail::format_real(r.mc_std_error) << '\n';
    if (report.fit) std::cout << "rate=" << detail::format_real(report.fit->rate) << '\n';
    if (report.exit_warning)
        std::cerr << "warning: " << report.exit_fraction * 100.0 << "% of paths left [-L, L]\n";
    return 0;
}

int run_rates(const StudyOptions& o, const Common& common, const CLI::App& app) {
    std::vector<StudyConfig> configs;
    for (double b : o.beta_hats) configs.push_back(make_study(o, b, common.workers));
    if (o.dry_run) {
        for (const auto& c : configs) print_plan(c);
        return 0;
    }
    Manifest manifest("rates", app);
    const auto dir = output_dir(common);
    const std::string stem = o.stem.empty() ? "rates" : o.stem;
    std::vector<RateSummary> summaries;
    for (const auto& c : configs) {
        summaries.push_back(multi_seed_rates(c, o.runs));
        const auto per = dir / (stem + "_" + beta_tag(c.beta_hat));
        emit_summary(summaries.back(), per.string());
        manifest.add_artifact(per.string() + ".csv");
        manifest.add_artifact(per.string() + ".json");
        const auto& s = summaries.back();
        std::cout << "beta_hat=" << detail::format_real(s.beta_hat) << " mean=" << detail::format_real(s.mean_rate)
                  << " ci=[" << detail::format_real(s.ci_low) << ", " << detail::format_real(s.ci_high) << "]\n";
    }
    const auto table = dir / (stem + ".csv");
    write_rates_table_csv(table.string(), summaries);
    manifest.add_artifact(table);
    manifest.write(dir, stem, o.noise_seed);
    return 0;
}

std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Five decimals, truncated.
std::string truncated5(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5f", std::floor(v * 1e5 + 1e-7) / 1e5);
    return buf;
}

int run_table(const TableOptions& o) {
    std::ostringstream os;
    if (o.kind == "rates") {
        std::vector<RateSummary> rows;
        for (double b : o.beta_hats) {
            RateSummary s;
            s.beta_hat = b;
            s.theoretical_rate = theoretical_rate(b);
            s.conjectured_rate = conjectured_rate(b);
            rows.push_back(s);
        }
        if (!o.output.empty()) write_rates_table_csv(o.output, rows);
        os << "quantity";
        for (double b : o.beta_hats) os << ',' << shortest(b);
        os << "\nconjectured";
        for (const auto& s : rows) os << ',' << truncated5(s.conjectured_rate);
        os << "\ntheoretical";
        for (const auto& s : rows) os << ',' << truncated5(s.theoretical_rate);
        os << '\n';
    } else if (o.kind == "grid") {
        os << "inverse_N,M,points\n";
        for (double inv : o.inverse_n) {
            detail::require(inv > 0.0 && inv <= 1.0, "inverse-n values must lie in (0, 1]");
            const auto M = min_grid_points(o.half_width, 1.0 / inv);
            os << shortest(inv) << ',' << M << ',' << 2 * M + 1 << '\n';
        }
    } else if (o.kind == "weights") {
        const std::vector<double> inverse_n = o.inverse_n_given ? o.inverse_n : std::vector<double>{0.199494, 0.068111};
        os << "inverse_N,y,weight\n";
        for (double inv : inverse_n) {
            detail::require(inv > 0.0 && inv <= 1.0, "inverse-n values must lie in (0, 1]");
            const double delta = o.cell_width.value_or(o.half_width / min_grid_points(o.half_width, 1.0 / inv));
            const auto span = static_cast<std::size_t>(std::floor(o.half_width / delta + 1e-9));
            const auto w = kernel_weights(span, {inv, delta});
            for (std::size_t k = 0; k < w.size(); ++k) {
                const double y = (static_cast<double>(k) - static_cast<double>(span)) * delta;
                os << shortest(inv) << ',' << detail::format_real(y) << ',' << detail::format_real(w[k] + 0.0) << '\n';
            }
        }
    } else {
        throw ParameterError("table kind must be 'rates', 'grid' or 'weights'");
    }
    if (!o.output.empty() && o.kind != "rates") {
        auto out = detail::open_for_write(o.output);
        out << os.str();
        detail::finish_write(out, o.output);
    }
    std::cout << os.str();
    return 0;
}

void add_study_options(CLI::App* cmd, StudyOptions& o, bool many_betas) {
    if (many_betas) {
        cmd->add_option("--beta-hat", o.beta_hats, "Roughness values beta_hat in (0, 1/2)")->required()->expected(1, -1);
        cmd->add_option("--runs", o.runs, "fBm seeds per beta_hat")->capture_default_str();
    } else {
        cmd->add_option("--beta-hat", o.beta_hats, "Roughness beta_hat in (0, 1/2)")->required()->expected(1);
        cmd->add_flag("--dump-paths", o.dump_paths, "Write per-path terminal values");
    }
    cmd->add_option("--epsilon", o.epsilon, "Regularity slack in eta")->capture_default_str();
    cmd->add_option("--eps-hurst", o.eps_hurst, "Hurst offset H = 1 - beta_hat + eps")->capture_default_str();
    cmd->add_option("--L", o.half_width, "Half width of the drift support")->capture_default_str();
    cmd->add_option("--T", o.horizon, "Terminal time")->capture_default_str();
    cmd->add_option("--x0", o.x0, "Initial value")->capture_default_str();
    cmd->add_option("--paths", o.paths, "Monte Carlo paths Q")->capture_default_str();
    cmd->add_option("--proxy-m", o.proxy_m, "Steps of the proxy solution")->capture_default_str();
    cmd->add_option("--coarse-m", o.coarse_m, "Coarse step counts, each dividing proxy-m")->capture_default_str();
    cmd->add_option("--fbm-seed", o.fbm_seed, "Seed of the rough potential")->capture_default_str();
    cmd->add_option("--noise-seed", o.noise_seed, "Master seed of the Brownian paths")->capture_default_str();
    cmd->add_option("--eta", o.eta, "Override the coupling exponent eta");
    cmd->add_option("--mesh", o.mesh, "Spatial grid policy: shared | nested")->capture_default_str();
    cmd->add_option("--stem", o.stem, "Output file stem");
    cmd->add_flag("--dry-run", o.dry_run, "Print N(m), M and eta without simulating");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Euler-Maruyama lab for SDEs with rough distributional drift"};
    app.set_config("--config", "", "INI/TOML configuration file; command-line flags take precedence");
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Common common;
    app.add_option("--out-dir", common.out_dir, "Output directory")->envname("ROUGHDRIFT_OUT_DIR")->capture_default_str();
    app.add_option("--workers", common.workers, "Worker threads (results do not depend on this)")->capture_default_str();

    DriftOptions drift_opts;
    auto* drift = app.add_subcommand("drift", "Build the smoothed drift b^N on its grid");
    drift->add_option("--beta-hat", drift_opts.beta_hat, "Roughness beta_hat in (0, 1/2)")->required();
    drift->add_option("--epsilon", drift_opts.epsilon)->capture_default_str();
    drift->add_option("--eps-hurst", drift_opts.eps_hurst)->capture_default_str();
    drift->add_option("--L", drift_opts.half_width)->capture_default_str();
    drift->add_option("--steps", drift_opts.steps, "Euler steps m; N = m^eta")->capture_default_str();
    drift->add_option("--eta", drift_opts.eta, "Override eta");
    drift->add_option("--inverse-n", drift_opts.inverse_n, "Pin the kernel variance 1/N");
    drift->add_option("--seed", drift_opts.seed, "fBm seed")->capture_default_str();
    drift->add_option("--output", drift_opts.output)->capture_default_str();
    drift->add_option("--potential-output", drift_opts.potential_output, "Also write the bridge potential (x, h)");

    SimulateOptions sim_opts;
    auto* sim = app.add_subcommand("simulate", "Run one Euler-Maruyama path");
    sim->add_option("--beta-hat", sim_opts.beta_hat)->required();
    sim->add_option("--epsilon", sim_opts.epsilon)->capture_default_str();
    sim->add_option("--eps-hurst", sim_opts.eps_hurst)->capture_default_str();
    sim->add_option("--L", sim_opts.half_width)->capture_default_str();
    sim->add_option("--T", sim_opts.horizon)->capture_default_str();
    sim->add_option("--x0", sim_opts.x0)->capture_default_str();
    sim->add_option("--steps", sim_opts.steps)->capture_default_str();
    sim->add_option("--eta", sim_opts.eta);
    sim->add_option("--fbm-seed", sim_opts.fbm_seed)->capture_default_str();
    sim->add_option("--noise-seed", sim_opts.noise_seed)->capture_default_str();
    sim->add_option("--stream", sim_opts.stream, "Brownian stream id")->capture_default_str();
    sim->add_option("--output", sim_opts.output)->capture_default_str();

    StudyOptions conv_opts;
    auto* conv = app.add_subcommand("converge", "Strong error study for one rough drift");
    add_study_options(conv, conv_opts, false);

    StudyOptions rate_opts;
    auto* rates = app.add_subcommand("rates", "Seed-averaged empirical rates over a beta_hat list");
    add_study_options(rates, rate_opts, true);

    TableOptions table_opts;
    auto* table = app.add_subcommand("table", "Theoretical rate table or grid-size table");
    table->add_option("--kind", table_opts.kind, "rates | grid | weights")->capture_default_str();
    table->add_option("--beta-hat", table_opts.beta_hats)->capture_default_str();
    table->add_option("--inverse-n", table_opts.inverse_n, "Kernel variances 1/N")->capture_default_str();
    table->add_option("--cell-width", table_opts.cell_width, "Grid spacing delta for the weights table");
    table->add_option("--L", table_opts.half_width)->capture_default_str();
    table->add_option("--output", table_opts.output);

    for (auto* sub : {drift, sim, conv, rates, table}) sub->configurable();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*drift) return run_drift(drift_opts, common, app);
        if (*sim) return run_simulate(sim_opts, common, app);
        if (*conv) return run_converge(conv_opts, common, app);
        if (*rates) return run_rates(rate_opts, common, app);
        if (*table) {
            table_opts.inverse_n_given = table->count("--inverse-n") > 0;
            return run_table(table_opts);
        }
    } catch (const ParameterError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
