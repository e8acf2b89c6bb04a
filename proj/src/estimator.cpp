#include "vcprobe/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vcprobe/error.hpp"
#include "vcprobe/phi_model.hpp"

namespace vcprobe {

double weighted_norm_k(std::span<const double> values) {
    if (values.empty()) throw DomainError("norm over zero design points is undefined");
    return std::sqrt(inner_product_k(values, values));
}

double inner_product_k(std::span<const double> u, std::span<const double> v) {
    if (u.empty()) throw DomainError("inner product over zero design points is undefined");
    if (u.size() != v.size())
        throw DomainError("inner product length mismatch: " + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) sum += u[i] * v[i];
    return sum / static_cast<double>(u.size());
}

void FitConfig::validate() const {
    if (!(tol > 0.0 && tol < coarse_step && coarse_step < M))
        throw ConfigError("fit configuration requires 0 < tol < coarse_step < M");
}

namespace {

double objective(std::span<const std::int64_t> points, std::span<const double> means, double h) {
    double sum = 0.0;
    for (std::size_t l = 0; l < points.size(); ++l) {
        const double r = means[l] - phi_value_extended(h, static_cast<double>(points[l]));
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(points.size()));
}

// Golden-section search on [a, b]; equal values move toward the left end.
double golden_section(std::span<const std::int64_t> points, std::span<const double> means, double a,
                      double b, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(points, means, c);
    double fd = objective(points, means, d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(points, means, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(points, means, d);
        }
    }
    return fc <= fd ? c : d;
}

}  // namespace

namespace kernels {

std::vector<double> objective_scan(std::span<const std::int64_t> points, std::span<const double> means,
                                   std::span<const double> hs, const ExecConfig& exec) {
    std::vector<double> out(hs.size());
    const auto count = static_cast<std::int64_t>(hs.size());
    if (exec.policy == Exec::Serial) {
        for (std::int64_t j = 0; j < count; ++j) out[j] = objective(points, means, hs[j]);
        return out;
    }
    const int workers = resolve_workers(exec);
#pragma omp parallel for num_threads(workers) schedule(static)
    for (std::int64_t j = 0; j < count; ++j) out[j] = objective(points, means, hs[j]);
    return out;
}

}  // namespace kernels

FitResult fit_h(std::span<const std::int64_t> raw_points, std::span<const double> raw_means,
                const FitConfig& cfg, const ExecConfig& exec) {
    cfg.validate();
    if (raw_points.empty() || raw_points.size() != raw_means.size())
        throw DomainError("deviation means must cover the design grid exactly");

    std::vector<std::size_t> order(raw_points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::sort(order, [&](std::size_t a, std::size_t b) { return raw_points[a] < raw_points[b]; });
    std::vector<std::int64_t> points;
    std::vector<double> means;
    for (std::size_t idx : order) {
        if (raw_points[idx] < 1) throw DomainError("design points must be >= 1");
        if (!points.empty() && points.back() == raw_points[idx]) throw DomainError("duplicate design point");
        points.push_back(raw_points[idx]);
        means.push_back(raw_means[idx]);
    }

    std::vector<double> hs;
    const auto cells = static_cast<std::int64_t>(std::floor(cfg.M / cfg.coarse_step));
    for (std::int64_t j = 0; j <= cells; ++j) hs.push_back(cfg.coarse_step * static_cast<double>(j));
    if (hs.back() < cfg.M) hs.push_back(cfg.M);
    const auto values = kernels::objective_scan(points, means, hs, exec);

    std::size_t best = 0;
    for (std::size_t j = 1; j < values.size(); ++j)
        if (values[j] < values[best]) best = j;

    double h_hat = hs[best];
    double f_hat = values[best];
    const double lo = hs[best == 0 ? 0 : best - 1];
    const double hi = hs[std::min(best + 1, hs.size() - 1)];
    if (hi > lo) {
        const double refined = golden_section(points, means, lo, hi, cfg.tol);
        const double f_ref = objective(points, means, refined);
        if (f_ref < f_hat || (f_ref == f_hat && refined < h_hat)) {
            h_hat = refined;
            f_hat = f_ref;
        }
    }

    FitResult fit;
    fit.h_hat = h_hat;
    fit.residual_norm = f_hat;
    fit.points = points;
    fit.M = cfg.M;
    fit.coarse_step = cfg.coarse_step;
    fit.boundary_flag = h_hat <= cfg.coarse_step || h_hat >= cfg.M - cfg.coarse_step;
    fit.on_plateau = h_hat > 0.0 && std::ranges::all_of(points, [&](std::int64_t n) {
                         return static_cast<double>(n) <= 0.5 * h_hat;
                     });
    fit.fitted_curve.reserve(points.size());
    for (std::int64_t n : points) fit.fitted_curve.push_back(phi_value_extended(h_hat, static_cast<double>(n)));
    return fit;
}

FitResult fit_h(const XiSamples& xi, const DesignGrid& grid, const FitConfig& cfg, const ExecConfig& exec) {
    if (!(xi.grid() == grid)) throw DomainError("deviation samples do not cover the requested design grid");
    return fit_h(xi, cfg, exec);
}

std::vector<double> residual_curve(const FitResult& fit, std::span<const double> means) {
    if (means.size() != fit.fitted_curve.size())
        throw DomainError("residual curve: sample count does not match the fit");
    std::vector<double> out(means.size());
    for (std::size_t l = 0; l < means.size(); ++l) out[l] = means[l] - fit.fitted_curve[l];
    return out;
}

}  // namespace vcprobe
