#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vcprobe/bounds.hpp"
#include "vcprobe/classifiers.hpp"
#include "vcprobe/estimator.hpp"
#include "vcprobe/external_adapter.hpp"
#include "vcprobe/simulation.hpp"

namespace vcprobe {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = VCPROBE_VERSION;

struct FamilySpec {
    std::string name;              // shatter | interval1d | linear | constant0 | constant1 | external
    bool complement = false;       // interval1d
    PocketBudget budget;           // linear
    std::vector<std::string> command;  // external
    std::int64_t timeout_ms = 60'000;  // external
};

// Fully resolved run configuration. `workers` is an execution setting and is
// never part of a report.
struct RunConfig {
    FamilySpec family;
    std::size_t p = 1;
    DataSpec data_spec;
    std::vector<std::int64_t> grid;  // resolved design points
    double h_guess = 10.0;
    std::size_t k = 10;
    int m = 0;
    double M = 0.0;
    double h_lo = kDefaultHLo;
    double coarse_step = 0.25;
    double tol = 1e-4;
    std::uint64_t master_seed = 0;
    double delta_factor = 1.05;
    int workers = 0;
};

// Validates `j` against the run-config schema and materializes defaults.
// Unknown or mistyped keys and a missing "m" raise ConfigError naming the key.
RunConfig parse_run_config(const Json& j);

// Canonical echo of a resolved config (no execution settings).
Json config_to_json(const RunConfig& cfg);

std::shared_ptr<const ClassifierFamily> make_family(const FamilySpec& spec);

struct EstimateOutcome {
    XiSamples samples;
    FitResult fit;
    ConstantsBundle constants;
    DeviationReport deviation;
    double varphi = 0.0;
    std::vector<std::string> warnings;
    Json report;
};

// Simulate, fit, compute constants and pick delta = delta_factor * threshold.
EstimateOutcome run_estimate(const RunConfig& cfg, const ExecConfig& exec = {});

Json xi_summary_json(const XiSamples& samples);
Json fit_json(const FitResult& fit, const XiSamples* samples, double tol);
Json constants_json(const ConstantsBundle& b);
Json deviation_json(const DeviationReport& d, double delta_factor);
Json generalization_json(const GeneralizationReport& r);

// Plot data: "n,xi_mean,phi_fit" rows.
std::string plot_csv(const FitResult& fit, const XiSamples& samples);

struct SweepOutcome {
    std::vector<std::uint64_t> seeds;
    std::vector<double> h_hats;
    double mean = 0.0;
    double stddev = 0.0;
    double delta = 0.0;
    std::size_t exceed_count = 0;
    double exceed_frequency = 0.0;
    DeviationReport deviation;
    bool within_bound = false;
    Json report;
};

// Repeats run_estimate with seeds substream(master_seed, r), r = 0..repeats-1,
// and compares the spread of h_hat with the concentration bound.
SweepOutcome run_sweep(const RunConfig& cfg, int repeats, const ExecConfig& exec = {});

}  // namespace vcprobe
