// vcprobe: VC-dimension estimation and generalization bounds from the command line.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vcprobe/bounds.hpp"
#include "vcprobe/error.hpp"
#include "vcprobe/estimator.hpp"
#include "vcprobe/report.hpp"
#include "vcprobe/simulation.hpp"

namespace fs = std::filesystem;
using namespace vcprobe;

namespace {

struct RunOptions {
    std::string config_path;
    std::optional<int> m;
    std::vector<std::int64_t> grid;
    std::optional<double> M;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<double> delta_factor;
    std::string out_dir;
    std::string format = "json";
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
    cmd->add_option("--config", o.config_path, "Run configuration (JSON)")->required();
    cmd->add_option("--m", o.m, "Repetitions per design point");
    cmd->add_option("--grid", o.grid, "Design points n1,n2,...")->delimiter(',');
    cmd->add_option("--M", o.M, "Dimension cap");
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--workers", o.workers, "Worker threads (fallback: VCPROBE_WORKERS)");
    cmd->add_option("--delta-factor", o.delta_factor, "delta as a multiple of its admissible threshold");
    cmd->add_option("--out", o.out_dir, "Output directory");
    cmd->add_option("--format", o.format, "Stdout format")->check(CLI::IsMember({"json", "csv"}));
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("'" + path + "' is not valid JSON: " + e.what());
    }
}

RunConfig load_config(const RunOptions& o) {
    Json j = read_json_file(o.config_path);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (o.m) j["m"] = *o.m;
    if (!o.grid.empty()) j["grid"] = o.grid;
    if (o.M) j["M"] = *o.M;
    if (o.seed) j["master_seed"] = *o.seed;
    if (o.delta_factor) j["delta_factor"] = *o.delta_factor;
    RunConfig cfg = parse_run_config(j);
    if (o.workers) {
        cfg.workers = *o.workers;
    } else if (const char* env = std::getenv("VCPROBE_WORKERS")) {
        try {
            cfg.workers = std::stoi(env);
        } catch (const std::exception&) {
            throw ConfigError(std::string("VCPROBE_WORKERS is not an integer: ") + env);
        }
    }
    if (cfg.workers < 0) throw ConfigError("workers must be >= 0");
    return cfg;
}

ExecConfig exec_for(const RunConfig& cfg) { return {Exec::Parallel, cfg.workers}; }

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string samples_csv(const XiSamples& s) {
    std::ostringstream out;
    write_xi_csv(out, s);
    return out.str();
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int cmd_estimate(const RunOptions& o) {
    Stopwatch clock;
    const RunConfig cfg = load_config(o);
    const auto outcome = run_estimate(cfg, exec_for(cfg));
    const std::string report = dump(outcome.report);
    const std::string csv = samples_csv(outcome.samples);
    if (!o.out_dir.empty()) {
        fs::create_directories(o.out_dir);
        write_file(fs::path(o.out_dir) / "report.json", report);
        write_file(fs::path(o.out_dir) / "xi_samples.csv", csv);
        write_file(fs::path(o.out_dir) / "plot.csv", plot_csv(outcome.fit, outcome.samples));
    }
    std::cout << (o.format == "csv" ? csv : report);
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << '\n';
    std::cerr << "wall-clock: " << clock.seconds() << " s\n";
    return 0;
}

int cmd_simulate(const RunOptions& o) {
    Stopwatch clock;
    const RunConfig cfg = load_config(o);
    SimulationPlan plan;
    plan.grid = DesignGrid(cfg.grid);
    plan.m = cfg.m;
    plan.master_seed = cfg.master_seed;
    plan.data_spec = cfg.data_spec;
    plan.p = cfg.p;
    plan.family = make_family(cfg.family);
    const auto samples = simulate_xi(plan, exec_for(cfg));
    const std::string csv = samples_csv(samples);
    Json summary;
    summary["config"] = config_to_json(cfg);
    summary["xi"] = xi_summary_json(samples);
    summary["version"] = kToolVersion;
    if (!o.out_dir.empty()) {
        fs::create_directories(o.out_dir);
        write_file(fs::path(o.out_dir) / "xi_samples.csv", csv);
    }
    std::cout << (o.format == "json" ? dump(summary) : csv);
    std::cerr << "wall-clock: " << clock.seconds() << " s\n";
    return 0;
}

struct FitOptions {
    std::string samples_path;
    std::optional<double> M;
    double coarse_step = 0.25;
    double tol = 1e-4;
};

int cmd_fit(const FitOptions& o) {
    std::ifstream in(o.samples_path);
    if (!in) throw ConfigError("cannot open '" + o.samples_path + "'");
    const auto samples = read_xi_csv(in);
    const FitConfig cfg{o.M.value_or(static_cast<double>(samples.grid().max())), o.coarse_step, o.tol};
    const auto fit = fit_h(samples, cfg);
    Json j;
    j["xi"] = xi_summary_json(samples);
    j["fit"] = fit_json(fit, &samples, cfg.tol);
    j["version"] = kToolVersion;
    std::cout << dump(j);
    return 0;
}

struct ConstantsOptions {
    std::vector<std::int64_t> grid;
    std::optional<double> M;
    double h_lo = kDefaultHLo;
    std::optional<int> workers;
};

int cmd_constants(const ConstantsOptions& o) {
    const DesignGrid grid(o.grid);
    const double M = o.M.value_or(static_cast<double>(grid.max()));
    const auto bundle = compute_constants(grid, M, o.h_lo, {Exec::Parallel, o.workers.value_or(0)});
    Json j = constants_json(bundle);
    j["version"] = kToolVersion;
    std::cout << dump(j);
    if (!(bundle.c1.discrepancy <= 1e-6))
        std::cerr << "warning: closed-form c1 = " << bundle.c1.closed_form << " differs from quadrature c1 = "
                  << bundle.c1.quadrature << " (discrepancy " << bundle.c1.discrepancy
                  << "); the quadrature value governs\n";
    return 0;
}

struct BoundOptions {
    std::string report_path;
    std::optional<double> h_hat, delta, phi, n, rho, target, true_h;
};

double report_number(const Json& j, const std::vector<std::string>& path) {
    const Json* node = &j;
    std::string where;
    for (const auto& key : path) {
        where += (where.empty() ? "" : ".") + key;
        if (!node->is_object() || !node->contains(key)) throw ParseError("report is missing '" + where + "'");
        node = &(*node)[key];
    }
    if (!node->is_number()) throw ParseError("report field '" + where + "' is not a number");
    return node->get<double>();
}

int cmd_bound(BoundOptions o) {
    if (!o.report_path.empty()) {
        const Json report = read_json_file(o.report_path);
        if (!o.h_hat) o.h_hat = report_number(report, {"fit", "h_hat"});
        if (!o.delta) o.delta = report_number(report, {"deviation", "delta"});
        if (!o.phi) o.phi = report_number(report, {"varphi"});
    }
    if (!o.h_hat || !o.delta || !o.phi || !o.n)
        throw ConfigError("bound needs --h-hat, --delta, --varphi and --n (or --report)");
    if (!o.rho && !o.target) throw ConfigError("bound needs --rho or --target");

    Json j;
    double rho = 0.0;
    if (o.target) {
        rho = invert_rho(*o.h_hat + *o.delta, *o.n, *o.target, *o.phi);
        j["target"] = *o.target;
    } else {
        rho = *o.rho;
    }
    const auto est = estimated_risk_bound(*o.h_hat, *o.delta, *o.n, rho, *o.phi);
    j["estimated"] = generalization_json(est);
    j["estimated"]["h_hat"] = *o.h_hat;
    j["estimated"]["delta"] = *o.delta;
    if (o.true_h) {
        j["classical"] = {{"h", *o.true_h},
                          {"n", *o.n},
                          {"rho", rho},
                          {"bound", classical_risk_bound(*o.true_h, *o.n, rho)}};
    }
    j["version"] = kToolVersion;
    std::cout << dump(j);
    if (est.bound >= 1.0) std::cerr << "note: the bound is vacuous (>= 1)\n";
    return 0;
}

int cmd_sweep(const RunOptions& o, int repeats) {
    Stopwatch clock;
    const RunConfig cfg = load_config(o);
    const auto sweep = run_sweep(cfg, repeats, exec_for(cfg));
    const std::string report = dump(sweep.report);
    if (!o.out_dir.empty()) {
        fs::create_directories(o.out_dir);
        write_file(fs::path(o.out_dir) / "sweep.json", report);
    }
    std::cout << report;
    std::cerr << "wall-clock: " << clock.seconds() << " s\n";
    return sweep.within_bound ? 0 : static_cast<int>(ExitCode::Runtime);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vcprobe: estimate VC dimension by simulation and evaluate risk bounds"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    RunOptions estimate_opts;
    auto* estimate = app.add_subcommand("estimate", "Simulate, fit h_hat and report constants and deviation bounds");
    add_run_options(estimate, estimate_opts);

    RunOptions simulate_opts;
    simulate_opts.format = "csv";
    auto* simulate = app.add_subcommand("simulate", "Run the flipped-label simulation only");
    add_run_options(simulate, simulate_opts);

    FitOptions fit_opts;
    auto* fit = app.add_subcommand("fit", "Fit h_hat to a sample CSV");
    fit->add_option("--samples", fit_opts.samples_path, "Sample CSV (n,rep,xi,train_risk)")->required();
    fit->add_option("--M", fit_opts.M, "Dimension cap (default: largest n)");
    fit->add_option("--coarse-step", fit_opts.coarse_step, "Coarse scan step");
    fit->add_option("--tol", fit_opts.tol, "Refinement tolerance");

    ConstantsOptions const_opts;
    auto* constants = app.add_subcommand("constants", "Print the constants bundle for a design grid");
    constants->add_option("--grid", const_opts.grid, "Design points n1,n2,...")->delimiter(',')->required();
    constants->add_option("--M", const_opts.M, "Dimension cap (default: largest n)");
    constants->add_option("--h-lo", const_opts.h_lo, "Lower end of the slope scan");
    constants->add_option("--workers", const_opts.workers, "Worker threads");

    BoundOptions bound_opts;
    auto* bound = app.add_subcommand("bound", "Evaluate the risk bound with an estimated dimension");
    bound->add_option("--report", bound_opts.report_path, "Read h_hat, delta and varphi from an estimate report");
    bound->add_option("--h-hat", bound_opts.h_hat, "Estimated VC dimension");
    bound->add_option("--delta", bound_opts.delta, "Deviation allowance on h_hat");
    bound->add_option("--varphi", bound_opts.phi, "Probability that h_hat misses by more than delta");
    bound->add_option("--n", bound_opts.n, "Training sample size");
    bound->add_option("--rho", bound_opts.rho, "Risk deviation level");
    bound->add_option("--target", bound_opts.target, "Solve for the rho reaching this bound");
    bound->add_option("--true-h", bound_opts.true_h, "Also print the classical bound at this dimension");

    RunOptions sweep_opts;
    int repeats = 30;
    auto* sweep = app.add_subcommand("sweep", "Repeat estimate and compare the spread of h_hat with its bound");
    add_run_options(sweep, sweep_opts);
    sweep->add_option("--repeats", repeats, "Number of repeated estimates")->check(CLI::Range(2, 1'000'000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::Config);
    }

    try {
        if (*estimate) return cmd_estimate(estimate_opts);
        if (*simulate) return cmd_simulate(simulate_opts);
        if (*fit) return cmd_fit(fit_opts);
        if (*constants) return cmd_constants(const_opts);
        if (*bound) return cmd_bound(bound_opts);
        if (*sweep) return cmd_sweep(sweep_opts, repeats);
    } catch (const AdapterError& e) {
        std::cerr << "error: " << e.what() << '\n' << e.diagnostics() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Runtime);
    }
    return static_cast<int>(ExitCode::Config);
}
