#include "vcprobe/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "vcprobe/error.hpp"
#include "vcprobe/rng.hpp"

namespace vcprobe {

std::string DataSpec::name() const {
    return features == FeatureDistribution::Uniform ? "uniform" : "gaussian";
}

DataSpec DataSpec::parse(std::string_view name) {
    if (name == "uniform") return {FeatureDistribution::Uniform, 0.5};
    if (name == "gaussian") return {FeatureDistribution::Gaussian, 0.5};
    throw ConfigError("unknown data spec '" + std::string(name) + "' (expected uniform or gaussian)");
}

Dataset generate_dataset(const DataSpec& spec, std::size_t size, std::size_t p, std::uint64_t seed) {
    if (size < 2) throw DomainError("generated datasets need at least 2 rows");
    if (!(spec.label_probability >= 0.0 && spec.label_probability <= 1.0))
        throw ConfigError("label probability must lie in [0, 1]");
    Engine eng(seed);
    Dataset data(p);
    data.reserve(size);
    std::vector<double> x(p);
    for (std::size_t i = 0; i < size; ++i) {
        if (spec.features == FeatureDistribution::Uniform) {
            for (double& v : x) v = uniform01(eng);
        } else {
            // Box-Muller, one normal per pair of uniforms.
            for (double& v : x) {
                const double u1 = uniform_open01(eng);
                const double u2 = uniform01(eng);
                v = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
            }
        }
        const std::uint8_t label = uniform01(eng) < spec.label_probability ? 1 : 0;
        data.add(x, label);
    }
    return data;
}

DesignGrid::DesignGrid(std::vector<std::int64_t> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw ConfigError("design grid needs at least 2 points");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (points_[i] < 1) throw ConfigError("design points must be >= 1");
        if (i > 0 && points_[i] <= points_[i - 1])
            throw ConfigError("design points must be strictly increasing");
    }
}

DesignGrid DesignGrid::geometric(double h_guess, std::size_t k) {
    if (!(h_guess > 0.0)) throw ConfigError("h_guess must be positive");
    if (k < 2) throw ConfigError("design grid needs at least 2 points");
    const double lo = std::max(1.0, 0.5 * h_guess);
    const double hi = 30.0 * h_guess;
    std::vector<std::int64_t> pts(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(k - 1);
        auto v = static_cast<std::int64_t>(std::llround(lo * std::pow(hi / lo, t)));
        if (j > 0) v = std::max(v, pts[j - 1] + 1);
        pts[j] = std::max<std::int64_t>(v, 1);
    }
    return DesignGrid(std::move(pts));
}

XiRun xi_single_run(const ClassifierFamily& family, std::int64_t n, std::size_t p,
                    const DataSpec& spec, std::uint64_t seed) {
    if (n < 1) throw DomainError("design point must be >= 1");
    const auto half = static_cast<std::size_t>(n);
    const Dataset original = generate_dataset(spec, 2 * half, p, substream(seed, 0));

    Dataset merged = original;
    for (std::size_t i = half; i < 2 * half; ++i) merged.set_label(i, 1 - original.label(i));

    const auto model = fit_erm(family, merged, substream(seed, 1));
    const auto predicted = model->predict_all(original);
    if (predicted.size() != original.size())
        throw Error("model returned " + std::to_string(predicted.size()) + " labels for " +
                    std::to_string(original.size()) + " rows");

    const std::span<const std::uint8_t> pred(predicted);
    const auto labels = original.labels();
    const double risk_w = empirical_risk(pred.first(half), labels.first(half));
    const double risk_w_prime = empirical_risk(pred.subspan(half), labels.subspan(half));
    return {std::abs(risk_w - risk_w_prime), empirical_risk(pred, merged.labels())};
}

XiSamples::XiSamples(DesignGrid grid, int m, std::vector<double> xi, std::vector<double> train_risk)
    : grid_(std::move(grid)), m_(m), xi_(std::move(xi)), train_risk_(std::move(train_risk)) {
    if (m_ < 1) throw DomainError("repetition count m must be >= 1");
    const std::size_t expected = grid_.size() * static_cast<std::size_t>(m_);
    if (xi_.size() != expected || train_risk_.size() != expected)
        throw DomainError("sample matrix does not have shape k x m");
    for (double v : xi_)
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("deviation samples must lie in [0, 1]");
    means_.resize(grid_.size());
    for (std::size_t l = 0; l < grid_.size(); ++l) {
        double sum = 0.0;
        for (double v : xi_row(l)) sum += v;
        means_[l] = sum / static_cast<double>(m_);
    }
}

namespace {

ExitCode classify(const std::exception_ptr& ep) {
    try {
        std::rethrow_exception(ep);
    } catch (const Error& e) {
        return e.exit_code();
    } catch (...) {
        return ExitCode::Runtime;
    }
}

std::string describe(const std::exception_ptr& ep) {
    try {
        std::rethrow_exception(ep);
    } catch (const AdapterError& e) {
        return e.diagnostics().empty() ? e.what() : std::string(e.what()) + "\n" + e.diagnostics();
    } catch (const std::exception& e) {
        return e.what();
    } catch (...) {
        return "unknown error";
    }
}

}  // namespace

XiSamples simulate_xi(const SimulationPlan& plan, const ExecConfig& exec) {
    if (!plan.family) throw ConfigError("simulation plan has no classifier family");
    if (plan.m < 1) throw ConfigError("repetition count m must be >= 1");
    if (!plan.family->supports_dimension(plan.p))
        throw ConfigError("family '" + plan.family->descriptor().name + "' does not support p=" +
                          std::to_string(plan.p));

    const std::size_t k = plan.grid.size();
    const auto m = static_cast<std::size_t>(plan.m);
    const auto jobs = static_cast<std::int64_t>(k * m);
    std::vector<double> xi(k * m);
    std::vector<double> risk(k * m);
    std::vector<std::exception_ptr> failures(k * m);

    auto run = [&](std::int64_t job) {
        const auto idx = static_cast<std::size_t>(job);
        const std::size_t l = idx / m;
        const std::size_t i = idx % m;
        try {
            const auto r = xi_single_run(*plan.family, plan.grid[l], plan.p, plan.data_spec,
                                         derive_seed(plan.master_seed, l, i));
            xi[idx] = r.xi;
            risk[idx] = r.train_risk;
        } catch (...) {
            failures[idx] = std::current_exception();
        }
    };

    if (exec.policy == Exec::Serial) {
        for (std::int64_t job = 0; job < jobs; ++job) run(job);
    } else {
        const int workers = resolve_workers(exec);
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
        for (std::int64_t job = 0; job < jobs; ++job) run(job);
    }

    for (std::size_t idx = 0; idx < failures.size(); ++idx) {
        if (!failures[idx]) continue;
        const std::size_t l = idx / m;
        const std::size_t i = idx % m;
        throw SimulationError("simulation run failed at design point " + std::to_string(l) + " (n=" +
                                  std::to_string(plan.grid[l]) + "), repetition " + std::to_string(i) +
                                  ": " + describe(failures[idx]),
                              l, i, classify(failures[idx]));
    }
    return XiSamples(plan.grid, plan.m, std::move(xi), std::move(risk));
}

// ---------------------------------------------------------------------------
// CSV persistence

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
T parse_field(std::string_view field, std::size_t line) {
    T value{};
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw ParseError("sample CSV line " + std::to_string(line) + ": malformed field '" +
                         std::string(field) + "'");
    return value;
}

}  // namespace

void write_xi_csv(std::ostream& out, const XiSamples& samples) {
    out << "n,rep,xi,train_risk\n";
    for (std::size_t l = 0; l < samples.k(); ++l)
        for (std::size_t i = 0; i < static_cast<std::size_t>(samples.m()); ++i)
            out << samples.grid()[l] << ',' << i << ',' << format_double(samples.xi(l, i)) << ','
                << format_double(samples.train_risk(l, i)) << '\n';
}

XiSamples read_xi_csv(std::istream& in, std::span<const double> expected_means) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("sample CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "n,rep,xi,train_risk") throw ParseError("sample CSV header must be 'n,rep,xi,train_risk'");

    std::map<std::int64_t, std::map<std::int64_t, std::pair<double, double>>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        for (;;) {
            const auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (fields.size() != 4)
            throw ParseError("sample CSV line " + std::to_string(line_no) + ": expected 4 fields");
        const auto n = parse_field<std::int64_t>(fields[0], line_no);
        const auto rep = parse_field<std::int64_t>(fields[1], line_no);
        const auto xi = parse_field<double>(fields[2], line_no);
        const auto risk = parse_field<double>(fields[3], line_no);
        if (!(xi >= 0.0 && xi <= 1.0))
            throw ParseError("sample CSV line " + std::to_string(line_no) + ": xi outside [0, 1]");
        if (!rows[n].emplace(rep, std::pair{xi, risk}).second)
            throw ParseError("sample CSV line " + std::to_string(line_no) + ": duplicate (n, rep)");
    }
    if (rows.size() < 2) throw ParseError("sample CSV must cover at least 2 design points");

    const auto m = rows.begin()->second.size();
    std::vector<std::int64_t> points;
    std::vector<double> xi;
    std::vector<double> risk;
    for (const auto& [n, reps] : rows) {
        if (reps.size() != m) throw ParseError("sample CSV has unequal repetitions per design point");
        std::int64_t expect = 0;
        for (const auto& [rep, vals] : reps) {
            if (rep != expect++) throw ParseError("sample CSV repetitions must be numbered 0..m-1");
            xi.push_back(vals.first);
            risk.push_back(vals.second);
        }
        points.push_back(n);
    }
    XiSamples samples(DesignGrid(std::move(points)), static_cast<int>(m), std::move(xi), std::move(risk));
    if (!expected_means.empty()) {
        if (expected_means.size() != samples.k())
            throw ParseError("expected means do not cover the sample grid");
        for (std::size_t l = 0; l < samples.k(); ++l)
            if (std::abs(samples.means()[l] - expected_means[l]) > 1e-12)
                throw ParseError("recomputed mean at n=" + std::to_string(samples.grid()[l]) +
                                 " disagrees with the recorded mean");
    }
    return samples;
}

// ---------------------------------------------------------------------------
// Trend diagnostic

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

TrendDiagnostic trend_diagnostic(const XiSamples& samples) {
    const std::size_t k = samples.k();
    std::vector<double> ns(k);
    for (std::size_t l = 0; l < k; ++l) ns[l] = static_cast<double>(samples.grid()[l]);
    const auto rx = average_ranks(ns);
    const auto ry = average_ranks(samples.means());

    double mx = 0.0, my = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
        mx += rx[l];
        my += ry[l];
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
        sxy += (rx[l] - mx) * (ry[l] - my);
        sxx += (rx[l] - mx) * (rx[l] - mx);
        syy += (ry[l] - my) * (ry[l] - my);
    }
    TrendDiagnostic d;
    if (sxx == 0.0 || syy == 0.0) return d;  // constant curve: no trend
    d.spearman_rho = sxy / std::sqrt(sxx * syy);
    if (k < 3) return d;
    const double df = static_cast<double>(k - 2);
    const double r = std::clamp(d.spearman_rho, -1.0 + 1e-15, 1.0 - 1e-15);
    const double t = r * std::sqrt(df / (1.0 - r * r));
    const boost::math::students_t dist(df);
    d.p_value_increasing = boost::math::cdf(boost::math::complement(dist, t));
    d.flagged = d.spearman_rho > 0.0 && d.p_value_increasing < 0.05;
    return d;
}

}  // namespace vcprobe
