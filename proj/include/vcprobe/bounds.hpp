#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vcprobe/parallel.hpp"
#include "vcprobe/phi_model.hpp"
#include "vcprobe/simulation.hpp"

namespace vcprobe {

inline constexpr double kC3 = 2304.0;
// Shell radius sup ||g||_k of the centred curve class; fixes the 4 / sqrt(2mk)
// factor of the deviation threshold.
inline constexpr double kShellRadius = 4.0;

// (1/k) sum L(n_l)^2.
double compute_c_prime(std::span<const double> upper);

// (1/k) sum c(n_l, M)^2.
double compute_c2(std::span<const double> lower);

struct C1Value {
    double quadrature = 0.0;    // integral_0^1 sqrt(log(1 + 4 v / c')) dv; governs downstream use
    double closed_form = 0.0;   // (c' + 1/4) sqrt(log(4c' + 1)) - (sqrt(pi)/8) erfi(sqrt(4c' + 1))
    double discrepancy = 0.0;   // |quadrature - closed_form|; +inf when the closed form overflows
};

// Entropy-integral constant. Quadrature is adaptive Gauss-Kronrod to an
// absolute error of `abs_tol` (default 1e-8).
C1Value compute_c1(double c_prime, double abs_tol = 1e-8);

// Imaginary error function erfi(x) = (2 / sqrt(pi)) integral_0^x exp(t^2) dt.
double erfi(double x);

// Smallest admissible deviation level: (4 / sqrt(2mk)) max(24 c1, 29).
double delta_threshold(std::int64_t m, std::int64_t k, double c1);

struct DeviationReport {
    std::int64_t m = 0;
    std::int64_t k = 0;
    double delta = 0.0;
    double delta_min = 0.0;
    double prob_raw = 0.0;
    double prob = 0.0;
    bool valid = false;
};

// P(|h_hat - h*| > delta) <= 13 exp(-m k c2 delta^2 / (16 c3)), clamped to [0, 1].
// `valid` is false unless delta exceeds delta_threshold(m, k, c1).
DeviationReport estimator_deviation_bound(double delta, std::int64_t m, std::int64_t k, double c2,
                                          double c1);

// P(||Phi_h_hat - Phi_h*||_k > delta) <= 13 exp(-m k delta^2 / (16 c3)), clamped.
double phi_deviation_bound(double delta, std::int64_t m, std::int64_t k);

// Probability mass conceded to a VC estimate off by more than delta.
double varphi(std::int64_t m, std::int64_t k, double c2, double delta);

// Log of the growth-function bound: h (ln(n/h) + 1) for n >= h, n ln 2 below.
double log_growth_function(double h, double n);

// 4 GF(h, 2n) exp(-n rho^2), evaluated in log space and clamped to [0, 1].
double classical_risk_bound(double h, double n, double rho);

struct GeneralizationReport {
    double n = 0.0;
    double rho = 0.0;
    double h_eff = 0.0;
    double varphi = 0.0;
    double log_first_term = 0.0;  // ln 4 + log GF(h_eff, 2n) - n rho^2
    double bound_raw = 0.0;
    double bound = 0.0;
};

// 4 GF(h_hat + delta, 2n) exp(-n rho^2) (1 - varphi) + varphi, clamped to [0, 1].
GeneralizationReport estimated_risk_bound(double h_hat, double delta, double n, double rho,
                                          double varphi);

// Smallest rho (bisection to 1e-12 relative) with estimated_risk_bound(h_eff, 0, n, rho, varphi) <= target.
// Throws UnreachableTargetError when target <= varphi.
double invert_rho(double h_eff, double n, double target, double varphi);

struct ConstantsBundle {
    std::vector<std::int64_t> points;
    double M = 0.0;
    double h_lo = 0.0;
    std::vector<LipschitzEstimate> lipschitz;
    std::vector<double> L;
    std::vector<double> c;
    double c_prime = 0.0;
    double sqrt_c_prime = 0.0;
    C1Value c1;
    double c2 = 0.0;
    double c3 = kC3;
};

// Every constant for a design grid and dimension cap. Throws DegeneracyError
// naming the offending n when a slope floor collapses.
ConstantsBundle compute_constants(const DesignGrid& grid, double M, double h_lo = kDefaultHLo,
                                  const ExecConfig& exec = {});

}  // namespace vcprobe
