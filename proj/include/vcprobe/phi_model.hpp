#pragma once

#include <cstdint>

#include "vcprobe/parallel.hpp"

namespace vcprobe {

// Constants of the maximum-deviation bound curve. `a_double_prime` is the root
// of Phi(1/2) = 1 given `a` and `a_prime`.
struct PhiConstants {
    static constexpr double a = 0.16;
    static constexpr double a_prime = 1.2;
    static constexpr double a_double_prime = 0.14928;
};

// Bound curve Phi_h(n) on the expected maximum deviation between empirical
// risks on two samples of size n, for a class of VC dimension h. Natural log.
// Throws DomainError unless h > 0 and n > 0.
double phi_value(double h, double n);

// As phi_value, but extends continuously to h = 0 where the curve is 0.
double phi_value_extended(double h, double n);

// Central-difference estimate of d Phi_h(n) / dh with step max(1e-6, 1e-6 h).
// Throws BranchBoundaryError if the stencil crosses h = 2n.
double phi_derivative_h(double h, double n);

// Numeric slope envelope of h -> Phi_h(n).
//
// `upper` bounds |Phi_h(n) - Phi_h'(n)| / |h - h'| over [h_lo, M]; `lower` is
// the floor of the same ratio over the smooth part [h_lo, h_hi], where
// h_hi = min(M, 2n). Beyond 2n the curve is flat and no positive floor exists.
// The raw extrema come from a uniform derivative scan refined until doubling
// the density moves both by less than 1e-3; the published constants carry a
// 1% margin (upper inflated, lower deflated).
struct LipschitzEstimate {
    std::int64_t n = 0;
    double M = 0.0;
    double h_lo = 0.0;
    double h_hi = 0.0;
    double upper = 0.0;
    double lower = 0.0;
    double upper_raw = 0.0;
    double lower_raw = 0.0;
    double grid_resolution = 0.0;
};

inline constexpr double kDefaultHLo = 0.1;
inline constexpr double kLipschitzMargin = 0.01;

LipschitzEstimate lipschitz_envelope(std::int64_t n, double h_lo, double M,
                                     const ExecConfig& exec = {});

// L(n): upper slope constant. Throws DomainError if h_lo >= M.
double lipschitz_upper(std::int64_t n, double h_lo, double M);

// c(n, M): lower slope constant. Throws DomainError if h_lo >= M and
// DegeneracyError if the smooth branch does not reach into [h_lo, M].
double lipschitz_lower(std::int64_t n, double h_lo, double M);

// Entropy bound log((4 tau / c' + eta) / eta) for the shell of radius tau.
double entropy_bound(double eta, double tau, double c_prime);

namespace kernels {

struct SlopeRange {
    double min_abs = 0.0;
    double max_abs = 0.0;
};

// Min and max of |d Phi_h(n) / dh| over count + 1 uniform points of [lo, hi].
SlopeRange derivative_range(double n, double lo, double hi, std::int64_t count,
                            const ExecConfig& exec);

}  // namespace kernels

}  // namespace vcprobe
