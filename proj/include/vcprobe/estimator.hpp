#pragma once

#include <span>
#include <vector>

#include "vcprobe/parallel.hpp"
#include "vcprobe/simulation.hpp"

namespace vcprobe {

// sqrt((1/k) sum v_l^2), the empirical norm over the design points.
double weighted_norm_k(std::span<const double> values);

// (1/k) sum u_l v_l.
double inner_product_k(std::span<const double> u, std::span<const double> v);

struct FitConfig {
    double M = 50.0;
    double coarse_step = 0.25;
    double tol = 1e-4;

    void validate() const;
};

struct FitResult {
    double h_hat = 0.0;
    double residual_norm = 0.0;
    std::vector<std::int64_t> points;   // design points, ascending
    std::vector<double> fitted_curve;   // Phi_{h_hat}(n_l)
    bool boundary_flag = false;         // h_hat within coarse_step of 0 or M
    bool on_plateau = false;            // every n_l <= h_hat / 2: the curve is saturated at 1
    double M = 0.0;
    double coarse_step = 0.0;
};

// Least-squares estimate argmin_{h in [0, M]} ||xi - Phi_h||_k.
//
// A coarse scan at cfg.coarse_step locates the global basin; golden-section
// search refines inside the bracketing cells to cfg.tol. Ties resolve to the
// smallest h. Points are paired with their means and sorted by n before any
// arithmetic, so storage order never changes the result.
FitResult fit_h(std::span<const std::int64_t> points, std::span<const double> means,
                const FitConfig& cfg, const ExecConfig& exec = {});

inline FitResult fit_h(const XiSamples& xi, const FitConfig& cfg, const ExecConfig& exec = {}) {
    return fit_h(xi.grid().points(), xi.means(), cfg, exec);
}

// Throws DomainError unless `grid` is exactly the grid of `xi`.
FitResult fit_h(const XiSamples& xi, const DesignGrid& grid, const FitConfig& cfg,
                const ExecConfig& exec = {});

// Per-point xi(n_l) - Phi_{h_hat}(n_l).
std::vector<double> residual_curve(const FitResult& fit, std::span<const double> means);
inline std::vector<double> residual_curve(const FitResult& fit, const XiSamples& xi) {
    return residual_curve(fit, xi.means());
}

namespace kernels {

// Objective ||means - Phi_h||_k at each h in `hs`.
std::vector<double> objective_scan(std::span<const std::int64_t> points, std::span<const double> means,
                                   std::span<const double> hs, const ExecConfig& exec);

}  // namespace kernels

}  // namespace vcprobe
