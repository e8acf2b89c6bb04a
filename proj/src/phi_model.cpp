#include "vcprobe/phi_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vcprobe/error.hpp"

namespace vcprobe {

namespace {

double fd_step(double h) { return std::min(std::max(1e-6, 1e-6 * h), 0.5 * h); }

// Largest h whose derivative stencil stays on the smooth branch for sample size n.
double smooth_stencil_end(double n) {
    const double two_n = 2.0 * n;
    const double end = std::min(two_n / (1.0 + 1e-6), two_n - 1e-6);
    return end * (1.0 - 1e-12);
}

double phi_smooth(double ratio) {
    using C = PhiConstants;
    const double log_term = std::log(2.0 * ratio) + 1.0;
    const double shifted = ratio - C::a_double_prime;
    const double value =
        C::a * log_term / shifted * (std::sqrt(1.0 + C::a_prime * shifted / log_term) + 1.0);
    return std::min(1.0, value);
}

void require_range(double h_lo, double M) {
    if (!(h_lo > 0.0) || !(h_lo < M))
        throw DomainError("Lipschitz range requires 0 < h_lo < M (h_lo=" + std::to_string(h_lo) +
                          ", M=" + std::to_string(M) + ")");
}

}  // namespace

double phi_value(double h, double n) {
    if (!(h > 0.0) || !(n > 0.0) || !std::isfinite(h) || !std::isfinite(n))
        throw DomainError("phi_value requires h > 0 and n > 0");
    if (n < 0.5 * h) return 1.0;
    return phi_smooth(n / h);
}

double phi_value_extended(double h, double n) {
    if (h == 0.0 && n > 0.0) return 0.0;
    return phi_value(h, n);
}

double phi_derivative_h(double h, double n) {
    if (!(h > 0.0) || !(n > 0.0)) throw DomainError("phi_derivative_h requires h > 0 and n > 0");
    const double s = fd_step(h);
    const double lo = h - s;
    const double hi = h + s;
    const double two_n = 2.0 * n;
    if (lo > two_n) return 0.0;
    if (hi > two_n)
        throw BranchBoundaryError("derivative stencil at h=" + std::to_string(h) +
                                  " straddles the branch point h=2n=" + std::to_string(two_n));
    return (phi_value(hi, n) - phi_value(lo, n)) / (hi - lo);
}

double entropy_bound(double eta, double tau, double c_prime) {
    if (!(eta > 0.0)) throw DomainError("entropy_bound requires eta > 0");
    if (!(tau >= 0.0)) throw DomainError("entropy_bound requires tau >= 0");
    if (!(c_prime > 0.0)) throw DomainError("entropy_bound requires c_prime > 0");
    return std::log1p(4.0 * tau / c_prime / eta);
}

namespace kernels {

SlopeRange derivative_range(double n, double lo, double hi, std::int64_t count,
                            const ExecConfig& exec) {
    const double step = (hi - lo) / static_cast<double>(count);
    double min_abs = std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    if (exec.policy == Exec::Serial) {
        for (std::int64_t j = 0; j <= count; ++j) {
            const double h = j == count ? hi : lo + step * static_cast<double>(j);
            const double d = std::abs(phi_derivative_h(h, n));
            min_abs = std::min(min_abs, d);
            max_abs = std::max(max_abs, d);
        }
        return {min_abs, max_abs};
    }
    const int workers = resolve_workers(exec);
#pragma omp parallel for num_threads(workers) schedule(static) reduction(min : min_abs) reduction(max : max_abs)
    for (std::int64_t j = 0; j <= count; ++j) {
        const double h = j == count ? hi : lo + step * static_cast<double>(j);
        const double d = std::abs(phi_derivative_h(h, n));
        min_abs = std::min(min_abs, d);
        max_abs = std::max(max_abs, d);
    }
    return {min_abs, max_abs};
}

}  // namespace kernels

LipschitzEstimate lipschitz_envelope(std::int64_t n, double h_lo, double M, const ExecConfig& exec) {
    require_range(h_lo, M);
    if (n <= 0) throw DomainError("Lipschitz constants require n >= 1");
    const double dn = static_cast<double>(n);
    const double h_hi = std::min(M, smooth_stencil_end(dn));
    if (!(h_hi > h_lo))
        throw DegeneracyError("bound curve is flat on [h_lo, M] for n=" + std::to_string(n) +
                              "; no positive slope floor exists");

    constexpr std::int64_t kInitialCount = 1024;
    constexpr std::int64_t kMaxCount = std::int64_t{1} << 22;
    constexpr double kStability = 1e-3;

    std::int64_t count = kInitialCount;
    auto range = kernels::derivative_range(dn, h_lo, h_hi, count, exec);
    while (count < kMaxCount) {
        const auto finer = kernels::derivative_range(dn, h_lo, h_hi, 2 * count, exec);
        count *= 2;
        const bool stable = std::abs(finer.max_abs - range.max_abs) < kStability &&
                            std::abs(finer.min_abs - range.min_abs) < kStability;
        range = finer;
        if (stable) break;
    }
    if (!(range.min_abs > 0.0))
        throw DegeneracyError("slope floor c(n, M) is not positive for n=" + std::to_string(n));

    LipschitzEstimate est;
    est.n = n;
    est.M = M;
    est.h_lo = h_lo;
    est.h_hi = h_hi;
    est.upper_raw = range.max_abs;
    est.lower_raw = range.min_abs;
    est.upper = range.max_abs * (1.0 + kLipschitzMargin);
    est.lower = range.min_abs * (1.0 - kLipschitzMargin);
    est.grid_resolution = (h_hi - h_lo) / static_cast<double>(count);
    return est;
}

double lipschitz_upper(std::int64_t n, double h_lo, double M) {
    return lipschitz_envelope(n, h_lo, M).upper;
}

double lipschitz_lower(std::int64_t n, double h_lo, double M) {
    return lipschitz_envelope(n, h_lo, M).lower;
}

}  // namespace vcprobe
