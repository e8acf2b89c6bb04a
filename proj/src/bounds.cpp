#include "vcprobe/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vcprobe/error.hpp"

namespace vcprobe {

namespace {

double mean_of_squares(std::span<const double> values, const char* what) {
    if (values.empty()) throw DomainError(std::string(what) + ": no design points");
    double sum = 0.0;
    for (double v : values) {
        if (!(v > 0.0)) throw DomainError(std::string(what) + ": slope constants must be positive");
        sum += v * v;
    }
    return sum / static_cast<double>(values.size());
}

void require_counts(std::int64_t m, std::int64_t k) {
    if (m < 1 || k < 1) throw DomainError("m and k must be >= 1");
}

double deviation_exponent(double delta, std::int64_t m, std::int64_t k, double scale) {
    return -static_cast<double>(m) * static_cast<double>(k) * scale * delta * delta / (16.0 * kC3);
}

}  // namespace

double compute_c_prime(std::span<const double> upper) { return mean_of_squares(upper, "c'"); }

double compute_c2(std::span<const double> lower) { return mean_of_squares(lower, "c2"); }

double erfi(double x) {
    if (x < 0.0) return -erfi(-x);
    if (x == 0.0) return 0.0;
    const double x2 = x * x;
    if (x2 > 705.0) return std::numeric_limits<double>::infinity();
    // Maclaurin series: every term is positive, so summation is stable.
    double power = x;  // x^(2j+1) / j!
    double sum = 0.0;
    for (int j = 0; j < 5000; ++j) {
        const double term = power / (2.0 * j + 1.0);
        sum += term;
        if (j > x2 && term < 1e-17 * sum) break;
        power *= x2 / (j + 1.0);
    }
    return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

C1Value compute_c1(double c_prime, double abs_tol) {
    if (!(c_prime > 0.0)) throw DomainError("c1 requires c' > 0");
    if (!(abs_tol > 0.0)) throw DomainError("quadrature tolerance must be positive");
    // v = t^2 removes the square-root cusp of the integrand at v = 0.
    auto integrand = [c_prime](double t) {
        return 2.0 * t * std::sqrt(std::log1p(4.0 * t * t / c_prime));
    };
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, 0.0, 1.0, 30, 0.1 * abs_tol, &error);
    if (!(error <= abs_tol))
        throw Error("c1 quadrature did not reach the requested tolerance (error estimate " +
                    std::to_string(error) + ")");

    C1Value out;
    out.quadrature = value;
    out.closed_form = (c_prime + 0.25) * std::sqrt(std::log(4.0 * c_prime + 1.0)) -
                      std::sqrt(std::numbers::pi) / 8.0 * erfi(std::sqrt(4.0 * c_prime + 1.0));
    out.discrepancy = std::isfinite(out.closed_form) ? std::abs(out.quadrature - out.closed_form)
                                                     : std::numeric_limits<double>::infinity();
    return out;
}

double delta_threshold(std::int64_t m, std::int64_t k, double c1) {
    require_counts(m, k);
    return kShellRadius / std::sqrt(2.0 * static_cast<double>(m) * static_cast<double>(k)) *
           std::max(24.0 * c1, 29.0);
}

DeviationReport estimator_deviation_bound(double delta, std::int64_t m, std::int64_t k, double c2,
                                          double c1) {
    if (!(delta > 0.0)) throw DomainError("deviation level delta must be positive");
    require_counts(m, k);
    DeviationReport r;
    r.m = m;
    r.k = k;
    r.delta = delta;
    r.delta_min = delta_threshold(m, k, c1);
    r.prob_raw = 13.0 * std::exp(deviation_exponent(delta, m, k, c2));
    r.prob = std::min(1.0, r.prob_raw);
    r.valid = delta > r.delta_min;
    return r;
}

double phi_deviation_bound(double delta, std::int64_t m, std::int64_t k) {
    if (!(delta > 0.0)) throw DomainError("deviation level delta must be positive");
    require_counts(m, k);
    return std::min(1.0, 13.0 * std::exp(deviation_exponent(delta, m, k, 1.0)));
}

double varphi(std::int64_t m, std::int64_t k, double c2, double delta) {
    if (!(delta > 0.0)) throw DomainError("deviation level delta must be positive");
    require_counts(m, k);
    return std::min(1.0, 13.0 * std::exp(deviation_exponent(delta, m, k, c2)));
}

double log_growth_function(double h, double n) {
    if (!(h > 0.0) || !(n > 0.0)) throw DomainError("growth function requires h > 0 and n > 0");
    if (n < h) return n * std::numbers::ln2;
    return h * (std::log(n / h) + 1.0);
}

double classical_risk_bound(double h, double n, double rho) {
    if (!(h > 0.0) || !(n > 0.0) || !(rho > 0.0))
        throw DomainError("classical bound requires h, n, rho > 0");
    const double log_term = std::log(4.0) + log_growth_function(h, 2.0 * n) - n * rho * rho;
    return log_term >= 0.0 ? 1.0 : std::exp(log_term);
}

GeneralizationReport estimated_risk_bound(double h_hat, double delta, double n, double rho,
                                          double varphi_value) {
    if (!(varphi_value >= 0.0 && varphi_value <= 1.0)) throw DomainError("varphi must lie in [0, 1]");
    if (!(h_hat >= 0.0) || !(delta >= 0.0) || !(h_hat + delta > 0.0))
        throw DomainError("effective dimension h_hat + delta must be positive");
    if (!(n > 0.0) || !(rho >= 0.0)) throw DomainError("risk bound requires n > 0 and rho >= 0");

    GeneralizationReport r;
    r.n = n;
    r.rho = rho;
    r.h_eff = h_hat + delta;
    r.varphi = varphi_value;
    r.log_first_term = std::log(4.0) + log_growth_function(r.h_eff, 2.0 * n) - n * rho * rho;
    // Clamping the first term at 1 keeps the result finite; it only matters where
    // the raw bound already exceeds 1.
    const double first = r.log_first_term >= 0.0 ? std::exp(std::min(r.log_first_term, 700.0))
                                                  : std::exp(r.log_first_term);
    r.bound_raw = first * (1.0 - varphi_value) + varphi_value;
    r.bound = std::min(1.0, r.bound_raw);
    return r;
}

double invert_rho(double h_eff, double n, double target, double varphi_value) {
    if (!(target > 0.0 && target < 1.0)) throw DomainError("target must lie in (0, 1)");
    if (!(target > varphi_value))
        throw UnreachableTargetError("target " + std::to_string(target) +
                                     " is not above the bound floor varphi=" + std::to_string(varphi_value));
    auto bound = [&](double rho) { return estimated_risk_bound(h_eff, 0.0, n, rho, varphi_value).bound; };

    double lo = 0.0;
    double hi = 1.0;
    while (bound(hi) > target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw UnreachableTargetError("no finite rho reaches the target");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (bound(mid) <= target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

ConstantsBundle compute_constants(const DesignGrid& grid, double M, double h_lo, const ExecConfig& exec) {
    ConstantsBundle b;
    b.points.assign(grid.points().begin(), grid.points().end());
    b.M = M;
    b.h_lo = h_lo;
    for (std::int64_t n : b.points) {
        try {
            b.lipschitz.push_back(lipschitz_envelope(n, h_lo, M, exec));
        } catch (const DegeneracyError& e) {
            throw DegeneracyError("degenerate slope floor at n=" + std::to_string(n) + ": " + e.what());
        }
        b.L.push_back(b.lipschitz.back().upper);
        b.c.push_back(b.lipschitz.back().lower);
    }
    b.c_prime = compute_c_prime(b.L);
    b.sqrt_c_prime = std::sqrt(b.c_prime);
    b.c1 = compute_c1(b.c_prime);
    b.c2 = compute_c2(b.c);
    return b;
}

}  // namespace vcprobe
