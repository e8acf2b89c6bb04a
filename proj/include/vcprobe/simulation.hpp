#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vcprobe/classifiers.hpp"
#include "vcprobe/dataset.hpp"
#include "vcprobe/parallel.hpp"

namespace vcprobe {

enum class FeatureDistribution { Uniform, Gaussian };

// Generating distribution for simulated samples: i.i.d. features from
// `features` (uniform on [0,1]^p or standard normal) and labels that are
// independent Bernoulli(label_probability) draws.
struct DataSpec {
    FeatureDistribution features = FeatureDistribution::Uniform;
    double label_probability = 0.5;

    std::string name() const;
    // Accepts "uniform" or "gaussian"; anything else is a ConfigError.
    static DataSpec parse(std::string_view name);
};

Dataset generate_dataset(const DataSpec& spec, std::size_t size, std::size_t p, std::uint64_t seed);

// Strictly increasing sample sizes n_1 < ... < n_k, k >= 2.
class DesignGrid {
public:
    explicit DesignGrid(std::vector<std::int64_t> points);

    // k points spaced geometrically over [max(1, h_guess / 2), 30 h_guess],
    // rounded to integers and bumped apart where rounding collides.
    static DesignGrid geometric(double h_guess, std::size_t k = 10);

    std::span<const std::int64_t> points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    std::int64_t operator[](std::size_t i) const noexcept { return points_[i]; }
    std::int64_t max() const noexcept { return points_.back(); }

    friend bool operator==(const DesignGrid&, const DesignGrid&) = default;

private:
    std::vector<std::int64_t> points_;
};

struct XiRun {
    double xi = 0.0;          // |R(f, W) - R(f, W')| with original labels
    double train_risk = 0.0;  // training risk on the flipped merge
};

// One flipped-label run at sample size n: draws 2n points, flips the labels of
// the second half, trains on the merge and measures the risk gap between the
// halves under their original labels.
XiRun xi_single_run(const ClassifierFamily& family, std::int64_t n, std::size_t p,
                    const DataSpec& spec, std::uint64_t seed);

struct SimulationPlan {
    DesignGrid grid{{1, 2}};
    int m = 1;
    std::uint64_t master_seed = 0;
    DataSpec data_spec;
    std::size_t p = 1;
    std::shared_ptr<const ClassifierFamily> family;
};

// k x m matrix of simulated deviations with per-point means.
class XiSamples {
public:
    XiSamples(DesignGrid grid, int m, std::vector<double> xi, std::vector<double> train_risk);

    const DesignGrid& grid() const noexcept { return grid_; }
    std::size_t k() const noexcept { return grid_.size(); }
    int m() const noexcept { return m_; }

    double xi(std::size_t point, std::size_t rep) const { return xi_[point * static_cast<std::size_t>(m_) + rep]; }
    double train_risk(std::size_t point, std::size_t rep) const {
        return train_risk_[point * static_cast<std::size_t>(m_) + rep];
    }
    std::span<const double> xi_row(std::size_t point) const {
        return {xi_.data() + point * static_cast<std::size_t>(m_), static_cast<std::size_t>(m_)};
    }
    std::span<const double> means() const noexcept { return means_; }

    friend bool operator==(const XiSamples&, const XiSamples&) = default;

private:
    DesignGrid grid_;
    int m_;
    std::vector<double> xi_;
    std::vector<double> train_risk_;
    std::vector<double> means_;
};

// Runs every (point, repetition) job with seed derive_seed(master, point, rep).
// Output is independent of the worker count. A failing job aborts the
// simulation with a SimulationError naming the lowest failing index.
XiSamples simulate_xi(const SimulationPlan& plan, const ExecConfig& exec = {});

// CSV with header "n,rep,xi,train_risk", one row per job in index order.
void write_xi_csv(std::ostream& out, const XiSamples& samples);

// Parses the CSV written above. Means are recomputed; when `expected_means`
// is non-empty they must agree within 1e-12 or a ParseError is thrown.
XiSamples read_xi_csv(std::istream& in, std::span<const double> expected_means = {});

struct TrendDiagnostic {
    double spearman_rho = 0.0;
    double p_value_increasing = 1.0;  // one-sided, H1: mean deviation increases with n
    bool flagged = false;             // positive correlation at 95% confidence
};

// Rank correlation between n and the mean deviation curve.
TrendDiagnostic trend_diagnostic(const XiSamples& samples);

}  // namespace vcprobe
