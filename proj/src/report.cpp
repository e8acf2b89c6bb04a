#include "vcprobe/report.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "vcprobe/error.hpp"
#include "vcprobe/rng.hpp"

namespace vcprobe {

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& what) {
    throw ConfigError("config key '" + key + "': " + what);
}

void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) bad_key(prefix + key, "unknown key");
}

std::int64_t get_int(const Json& obj, const std::string& key, const std::string& prefix, std::int64_t min) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) bad_key(prefix + key, "expected an integer");
    const auto value = v.get<std::int64_t>();
    if (value < min) bad_key(prefix + key, "must be >= " + std::to_string(min));
    return value;
}

double get_positive(const Json& obj, const std::string& key, const std::string& prefix) {
    const auto& v = obj.at(key);
    if (!v.is_number()) bad_key(prefix + key, "expected a number");
    const auto value = v.get<double>();
    if (!(value > 0.0) || !std::isfinite(value)) bad_key(prefix + key, "must be positive");
    return value;
}

FamilySpec parse_family(const Json& j) {
    const std::string prefix = "family.";
    if (!j.is_object()) bad_key("family", "expected an object");
    if (!j.contains("name") || !j["name"].is_string()) bad_key("family.name", "required string");
    FamilySpec f;
    f.name = j["name"].get<std::string>();
    if (f.name == "shatter" || f.name == "constant0" || f.name == "constant1") {
        reject_unknown(j, {"name"}, prefix);
    } else if (f.name == "interval1d") {
        reject_unknown(j, {"name", "complement"}, prefix);
        if (j.contains("complement")) {
            if (!j["complement"].is_boolean()) bad_key("family.complement", "expected a boolean");
            f.complement = j["complement"].get<bool>();
        }
    } else if (f.name == "linear") {
        reject_unknown(j, {"name", "restarts", "epochs"}, prefix);
        if (j.contains("restarts")) f.budget.restarts = static_cast<int>(get_int(j, "restarts", prefix, 1));
        if (j.contains("epochs")) f.budget.epochs = static_cast<int>(get_int(j, "epochs", prefix, 1));
    } else if (f.name == "external") {
        reject_unknown(j, {"name", "command", "timeout_ms"}, prefix);
        if (!j.contains("command") || !j["command"].is_array() || j["command"].empty())
            bad_key("family.command", "required nonempty array of strings");
        for (const auto& a : j["command"]) {
            if (!a.is_string()) bad_key("family.command", "expected an array of strings");
            f.command.push_back(a.get<std::string>());
        }
        if (j.contains("timeout_ms")) f.timeout_ms = get_int(j, "timeout_ms", prefix, 1);
    } else {
        bad_key("family.name", "unknown family '" + f.name + "'");
    }
    return f;
}

Json family_to_json(const FamilySpec& f) {
    Json j;
    j["name"] = f.name;
    if (f.name == "interval1d") j["complement"] = f.complement;
    if (f.name == "linear") {
        j["restarts"] = f.budget.restarts;
        j["epochs"] = f.budget.epochs;
    }
    if (f.name == "external") {
        j["command"] = f.command;
        j["timeout_ms"] = f.timeout_ms;
    }
    return j;
}

double sample_std(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

RunConfig parse_run_config(const Json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j,
                   {"family", "p", "data_spec", "grid", "h_guess", "k", "m", "M", "h_lo", "coarse_step", "tol",
                    "master_seed", "delta_factor", "workers"},
                   "");
    for (const char* required : {"family", "m"})
        if (!j.contains(required)) bad_key(required, "required key is missing");

    RunConfig cfg;
    cfg.family = parse_family(j["family"]);
    cfg.m = static_cast<int>(get_int(j, "m", "", 1));
    if (j.contains("p")) cfg.p = static_cast<std::size_t>(get_int(j, "p", "", 1));
    if (j.contains("data_spec")) {
        if (!j["data_spec"].is_string()) bad_key("data_spec", "expected a string");
        try {
            cfg.data_spec = DataSpec::parse(j["data_spec"].get<std::string>());
        } catch (const ConfigError& e) {
            bad_key("data_spec", e.what());
        }
    }
    if (j.contains("h_guess")) cfg.h_guess = get_positive(j, "h_guess", "");
    if (j.contains("k")) cfg.k = static_cast<std::size_t>(get_int(j, "k", "", 2));
    if (j.contains("grid")) {
        if (!j["grid"].is_array()) bad_key("grid", "expected an array of integers");
        for (const auto& v : j["grid"]) {
            if (!v.is_number_integer()) bad_key("grid", "expected an array of integers");
            cfg.grid.push_back(v.get<std::int64_t>());
        }
        try {
            static_cast<void>(DesignGrid(cfg.grid));
        } catch (const ConfigError& e) {
            bad_key("grid", e.what());
        }
        cfg.k = cfg.grid.size();
    } else {
        const auto g = DesignGrid::geometric(cfg.h_guess, cfg.k);
        cfg.grid.assign(g.points().begin(), g.points().end());
    }
    cfg.M = j.contains("M") ? get_positive(j, "M", "") : static_cast<double>(cfg.grid.back());
    if (j.contains("h_lo")) cfg.h_lo = get_positive(j, "h_lo", "");
    if (j.contains("coarse_step")) cfg.coarse_step = get_positive(j, "coarse_step", "");
    if (j.contains("tol")) cfg.tol = get_positive(j, "tol", "");
    if (j.contains("master_seed")) {
        const auto& s = j["master_seed"];
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
            bad_key("master_seed", "expected a nonnegative integer");
        cfg.master_seed = s.get<std::uint64_t>();
    }
    if (j.contains("delta_factor")) cfg.delta_factor = get_positive(j, "delta_factor", "");
    if (j.contains("workers")) cfg.workers = static_cast<int>(get_int(j, "workers", "", 0));

    if (!(cfg.h_lo < cfg.M)) bad_key("h_lo", "must be below M");
    try {
        FitConfig{cfg.M, cfg.coarse_step, cfg.tol}.validate();
    } catch (const ConfigError& e) {
        bad_key("coarse_step", e.what());
    }
    if (cfg.family.name == "interval1d" && cfg.p != 1) bad_key("p", "interval1d requires p = 1");
    return cfg;
}

Json config_to_json(const RunConfig& cfg) {
    Json j;
    j["family"] = family_to_json(cfg.family);
    j["p"] = cfg.p;
    j["data_spec"] = cfg.data_spec.name();
    j["grid"] = cfg.grid;
    j["h_guess"] = cfg.h_guess;
    j["k"] = cfg.k;
    j["m"] = cfg.m;
    j["M"] = cfg.M;
    j["h_lo"] = cfg.h_lo;
    j["coarse_step"] = cfg.coarse_step;
    j["tol"] = cfg.tol;
    j["master_seed"] = cfg.master_seed;
    j["delta_factor"] = cfg.delta_factor;
    return j;
}

std::shared_ptr<const ClassifierFamily> make_family(const FamilySpec& spec) {
    if (spec.name == "shatter") return std::make_shared<ShatterOracle>();
    if (spec.name == "interval1d") return std::make_shared<Interval1D>(spec.complement);
    if (spec.name == "linear") return std::make_shared<LinearHalfspace>(spec.budget);
    if (spec.name == "constant0") return std::make_shared<ConstantClassifier>(0);
    if (spec.name == "constant1") return std::make_shared<ConstantClassifier>(1);
    if (spec.name == "external")
        return std::make_shared<ExternalFamily>(
            AdapterCommand{spec.command, std::chrono::milliseconds(spec.timeout_ms)});
    throw ConfigError("unknown family '" + spec.name + "'");
}

Json xi_summary_json(const XiSamples& samples) {
    Json j;
    j["k"] = samples.k();
    j["m"] = samples.m();
    Json points = Json::array();
    for (std::size_t l = 0; l < samples.k(); ++l) {
        const auto row = samples.xi_row(l);
        const double mean = samples.means()[l];
        double risk = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) risk += samples.train_risk(l, i);
        Json p;
        p["n"] = samples.grid()[l];
        p["mean"] = mean;
        p["std"] = sample_std(row, mean);
        p["min"] = *std::ranges::min_element(row);
        p["max"] = *std::ranges::max_element(row);
        p["train_risk_mean"] = risk / static_cast<double>(row.size());
        points.push_back(p);
    }
    j["points"] = points;
    const auto trend = trend_diagnostic(samples);
    j["trend"] = {{"spearman_rho", trend.spearman_rho},
                  {"p_value_increasing", trend.p_value_increasing},
                  {"flagged", trend.flagged}};
    return j;
}

Json fit_json(const FitResult& fit, const XiSamples* samples, double tol) {
    Json j;
    j["h_hat"] = fit.h_hat;
    j["residual_norm"] = fit.residual_norm;
    j["boundary_flag"] = fit.boundary_flag;
    j["on_plateau"] = fit.on_plateau;
    j["M"] = fit.M;
    j["coarse_step"] = fit.coarse_step;
    j["tol"] = tol;
    Json curve = Json::array();
    std::vector<double> residuals;
    if (samples) residuals = residual_curve(fit, *samples);
    for (std::size_t l = 0; l < fit.points.size(); ++l) {
        Json c;
        c["n"] = fit.points[l];
        if (samples) c["xi_mean"] = samples->means()[l];
        c["phi_fit"] = fit.fitted_curve[l];
        if (samples) c["residual"] = residuals[l];
        curve.push_back(c);
    }
    j["curve"] = curve;
    return j;
}

Json constants_json(const ConstantsBundle& b) {
    Json j;
    j["points"] = b.points;
    j["M"] = b.M;
    j["h_lo"] = b.h_lo;
    j["L"] = b.L;
    j["c"] = b.c;
    Json lip = Json::array();
    for (const auto& e : b.lipschitz)
        lip.push_back({{"n", e.n},
                       {"h_hi", e.h_hi},
                       {"upper_raw", e.upper_raw},
                       {"lower_raw", e.lower_raw},
                       {"grid_resolution", e.grid_resolution}});
    j["lipschitz"] = lip;
    j["c_prime"] = b.c_prime;
    j["sqrt_c_prime"] = b.sqrt_c_prime;
    j["c1"] = {{"quadrature", b.c1.quadrature},
               {"closed_form", b.c1.closed_form},
               {"discrepancy", b.c1.discrepancy},
               {"governing", "quadrature"}};
    j["c2"] = b.c2;
    j["c3"] = b.c3;
    return j;
}

Json deviation_json(const DeviationReport& d, double delta_factor) {
    Json j;
    j["m"] = d.m;
    j["k"] = d.k;
    j["delta"] = d.delta;
    j["delta_min"] = d.delta_min;
    j["delta_factor"] = delta_factor;
    j["prob_raw"] = d.prob_raw;
    j["prob"] = d.prob;
    j["valid"] = d.valid;
    return j;
}

Json generalization_json(const GeneralizationReport& r) {
    Json j;
    j["n"] = r.n;
    j["rho"] = r.rho;
    j["h_eff"] = r.h_eff;
    j["varphi"] = r.varphi;
    j["log_first_term"] = r.log_first_term;
    j["bound_raw"] = r.bound_raw;
    j["bound"] = r.bound;
    j["vacuous"] = r.bound >= 1.0;
    return j;
}

std::string plot_csv(const FitResult& fit, const XiSamples& samples) {
    std::ostringstream out;
    out.precision(17);
    out << "n,xi_mean,phi_fit\n";
    for (std::size_t l = 0; l < fit.points.size(); ++l)
        out << fit.points[l] << ',' << samples.means()[l] << ',' << fit.fitted_curve[l] << '\n';
    return out.str();
}

EstimateOutcome run_estimate(const RunConfig& cfg, const ExecConfig& exec) {
    SimulationPlan plan;
    plan.grid = DesignGrid(cfg.grid);
    plan.m = cfg.m;
    plan.master_seed = cfg.master_seed;
    plan.data_spec = cfg.data_spec;
    plan.p = cfg.p;
    plan.family = make_family(cfg.family);

    XiSamples samples = simulate_xi(plan, exec);
    FitConfig fit_cfg{cfg.M, cfg.coarse_step, cfg.tol};
    FitResult fit = fit_h(samples, plan.grid, fit_cfg, exec);
    ConstantsBundle constants = compute_constants(plan.grid, cfg.M, cfg.h_lo, exec);

    const auto k = static_cast<std::int64_t>(plan.grid.size());
    const double delta = cfg.delta_factor * delta_threshold(cfg.m, k, constants.c1.quadrature);
    DeviationReport deviation = estimator_deviation_bound(delta, cfg.m, k, constants.c2, constants.c1.quadrature);
    const double phi_mass = varphi(cfg.m, k, constants.c2, delta);

    EstimateOutcome out{std::move(samples), std::move(fit), std::move(constants), deviation, phi_mass, {}, {}};

    Json fit_warnings = Json::array();
    if (out.fit.boundary_flag) {
        std::ostringstream w;
        w << "h_hat=" << out.fit.h_hat << " lies within coarse_step of the search boundary [0, " << cfg.M
          << "]; the assumption h* <= M may be violated";
        fit_warnings.push_back(w.str());
    }
    if (out.fit.on_plateau)
        fit_warnings.push_back("h_hat lies on the plateau where every design point satisfies n <= h/2; "
                               "the grid cannot resolve dimensions this large");
    Json xi_warnings = Json::array();
    if (trend_diagnostic(out.samples).flagged)
        xi_warnings.push_back("mean deviation increases with n at 95% confidence; check the generator and trainer");
    Json constant_warnings = Json::array();
    if (!(out.constants.c1.discrepancy <= 1e-6)) {
        std::ostringstream w;
        w.precision(17);
        w << "closed-form c1 = " << out.constants.c1.closed_form << " differs from the quadrature value "
          << out.constants.c1.quadrature << "; the quadrature value is used";
        constant_warnings.push_back(w.str());
    }
    Json deviation_warnings = Json::array();
    if (!deviation.valid) deviation_warnings.push_back("delta does not exceed the admissible threshold");
    if (deviation.prob >= 1.0)
        deviation_warnings.push_back("concentration bound is vacuous (probability clamped to 1) at this m and k");

    for (const auto* arr : {&fit_warnings, &xi_warnings, &constant_warnings, &deviation_warnings})
        for (const auto& w : *arr) out.warnings.push_back(w.get<std::string>());

    Json report;
    report["config"] = config_to_json(cfg);
    report["xi"] = xi_summary_json(out.samples);
    report["xi"]["generator"] = {{"features", cfg.data_spec.name()},
                                 {"label_probability", cfg.data_spec.label_probability}};
    report["xi"]["warnings"] = xi_warnings;
    report["fit"] = fit_json(out.fit, &out.samples, cfg.tol);
    report["fit"]["warnings"] = fit_warnings;
    report["constants"] = constants_json(out.constants);
    report["constants"]["warnings"] = constant_warnings;
    report["deviation"] = deviation_json(deviation, cfg.delta_factor);
    report["deviation"]["warnings"] = deviation_warnings;
    report["varphi"] = phi_mass;
    report["version"] = kToolVersion;
    out.report = std::move(report);
    return out;
}

SweepOutcome run_sweep(const RunConfig& cfg, int repeats, const ExecConfig& exec) {
    if (repeats < 2) throw ConfigError("sweep needs at least 2 repeats");
    SweepOutcome out;
    for (int r = 0; r < repeats; ++r) {
        RunConfig run = cfg;
        run.master_seed = substream(cfg.master_seed, static_cast<std::uint64_t>(r));
        auto est = run_estimate(run, exec);
        out.seeds.push_back(run.master_seed);
        out.h_hats.push_back(est.fit.h_hat);
        if (r == 0) {
            out.delta = est.deviation.delta;
            out.deviation = est.deviation;
        }
    }
    const auto R = static_cast<double>(repeats);
    out.mean = std::accumulate(out.h_hats.begin(), out.h_hats.end(), 0.0) / R;
    out.stddev = sample_std(out.h_hats, out.mean);
    out.exceed_count = static_cast<std::size_t>(
        std::ranges::count_if(out.h_hats, [&](double h) { return std::abs(h - out.mean) > out.delta; }));
    out.exceed_frequency = static_cast<double>(out.exceed_count) / R;
    out.within_bound = out.exceed_frequency <= out.deviation.prob;

    Json j;
    j["config"] = config_to_json(cfg);
    j["repeats"] = repeats;
    j["seeds"] = out.seeds;
    j["h_hats"] = out.h_hats;
    j["mean"] = out.mean;
    j["std"] = out.stddev;
    j["delta"] = out.delta;
    j["exceed_count"] = out.exceed_count;
    j["exceed_frequency"] = out.exceed_frequency;
    j["bound"] = deviation_json(out.deviation, cfg.delta_factor);
    j["within_bound"] = out.within_bound;
    j["vacuous"] = out.deviation.prob >= 1.0;
    j["note"] = out.deviation.prob >= 1.0
                    ? "bound is clamped to 1 at this m and k: the comparison is one-sided and cannot fail"
                    : "empirical exceedance frequency compared with the concentration bound";
    j["version"] = kToolVersion;
    out.report = std::move(j);
    return out;
}

}  // namespace vcprobe
