#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "vcprobe/error.hpp"
#include "vcprobe/phi_model.hpp"

using namespace vcprobe;

namespace {

struct SecantExtremes {
    double max = 0.0;
    double min = INFINITY;
};

// Independent oracle: every pairwise secant slope of h -> Phi_h(n) on a uniform grid.
SecantExtremes pairwise_secants(double n, double lo, double hi, int points) {
    std::vector<double> hs(points), vals(points);
    for (int i = 0; i < points; ++i) {
        hs[i] = lo + (hi - lo) * i / (points - 1);
        vals[i] = phi_value(hs[i], n);
    }
    SecantExtremes out;
    for (int i = 0; i < points; ++i)
        for (int j = i + 1; j < points; ++j) {
            const double s = std::abs(vals[j] - vals[i]) / (hs[j] - hs[i]);
            out.max = std::max(out.max, s);
            out.min = std::min(out.min, s);
        }
    return out;
}

}  // namespace

TEST_CASE("phi_value: saturated branch and calibration") {
    CHECK(phi_value(1.0, 0.4) == 1.0);
    CHECK(phi_value(2.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
    for (double h : {0.3, 1.0, 2.0, 5.0, 10.0, 37.5, 1000.0})
        CHECK(std::abs(phi_value(h, h / 2) - 1.0) <= 1e-6);
}

TEST_CASE("phi_value: interior value") {
    // Hand evaluation with natural log: 0.16 * (ln 20 + 1) / (10 - a'') * (sqrt(1 + 1.2 (10 - a'') / (ln 20 + 1)) + 1)
    CHECK(phi_value(10.0, 100.0) == doctest::Approx(0.194024475136720).epsilon(1e-12));
    CHECK(std::abs(phi_value(10.0, 100.0) - 0.19402) <= 1e-4);
}

TEST_CASE("phi_value: domain errors and extension to h = 0") {
    CHECK_THROWS_AS(phi_value(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(phi_value(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(phi_value(-1.0, 1.0), DomainError);
    CHECK(phi_value_extended(0.0, 5.0) == 0.0);
    CHECK(phi_value_extended(1e-9, 5.0) < 1e-3);
}

TEST_CASE("phi_value: monotone in n and h, vanishing tail") {
    for (double h : {0.5, 2.0, 7.0, 40.0}) {
        double prev = 1.0;
        for (double n = h / 2; n < 1e7; n *= 1.3) {
            const double v = phi_value(h, n);
            CHECK(v <= prev + 1e-15);
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
            prev = v;
        }
        CHECK(phi_value(h, 1e9) < 1e-2);
    }
    for (double n : {3.0, 50.0, 400.0}) {
        double prev = 0.0;
        for (double h = 0.01; h <= 2 * n; h += n / 97.0) {
            const double v = phi_value(h, n);
            CHECK(v >= prev - 1e-15);
            prev = v;
        }
    }
}

TEST_CASE("phi_derivative_h: branches and secant agreement") {
    CHECK(phi_derivative_h(1.0, 0.3) == 0.0);
    CHECK_THROWS_AS(phi_derivative_h(20.0, 10.0), BranchBoundaryError);
    CHECK_THROWS_AS(phi_derivative_h(0.0, 10.0), DomainError);

    const double d = phi_derivative_h(10.0, 100.0);
    CHECK(d > 0.0);
    // Secant oracle on a 1e-4 h-grid around the point.
    const double secant = (phi_value(10.0 + 1e-4, 100.0) - phi_value(10.0 - 1e-4, 100.0)) / 2e-4;
    CHECK(std::abs(d - secant) <= 1e-4);
    for (double h : {0.2, 1.0, 3.3, 12.0}) {
        const double sec = (phi_value(h + 1e-4, 30.0) - phi_value(h - 1e-4, 30.0)) / 2e-4;
        CHECK(std::abs(phi_derivative_h(h, 30.0) - sec) <= 1e-4);
    }
}

TEST_CASE("lipschitz constants match the pairwise-secant oracle") {
    const auto est = lipschitz_envelope(100, 0.1, 20.0);
    const auto oracle = pairwise_secants(100.0, 0.1, 20.0, 10'000);
    CHECK(std::abs(est.upper_raw - oracle.max) <= 1e-3);
    CHECK(std::abs(est.lower_raw - oracle.min) <= 1e-3);
    CHECK(est.upper == doctest::Approx(est.upper_raw * 1.01));
    CHECK(est.lower == doctest::Approx(est.lower_raw * 0.99));
    CHECK(lipschitz_upper(100, 0.1, 20.0) == est.upper);
    CHECK(lipschitz_lower(100, 0.1, 20.0) == est.lower);
    CHECK(est.lower > 0.0);
    CHECK(est.lower <= est.upper);
}

TEST_CASE("lipschitz constants are stable under grid refinement") {
    const auto est = lipschitz_envelope(100, 0.1, 20.0);
    const auto count = static_cast<std::int64_t>(std::llround((est.h_hi - est.h_lo) / est.grid_resolution));
    const auto coarse = kernels::derivative_range(100.0, est.h_lo, est.h_hi, count, {Exec::Serial});
    const auto fine = kernels::derivative_range(100.0, est.h_lo, est.h_hi, 2 * count, {Exec::Serial});
    CHECK(std::abs(fine.max_abs - coarse.max_abs) < 1e-3);
    CHECK(std::abs(fine.min_abs - coarse.min_abs) < 1e-3);
}

TEST_CASE("lipschitz sandwich holds on random pairs") {
    std::mt19937_64 rng(17);
    for (std::int64_t n : {5, 30, 100, 400}) {
        const double M = 20.0;
        const auto est = lipschitz_envelope(n, 0.1, M);
        std::uniform_real_distribution<double> full(0.1, M);
        std::uniform_real_distribution<double> smooth(0.1, est.h_hi);
        for (int t = 0; t < 100; ++t) {
            const double h1 = full(rng), h2 = full(rng);
            CHECK(std::abs(phi_value(h1, n) - phi_value(h2, n)) <= est.upper * std::abs(h1 - h2) + 1e-15);
            const double s1 = smooth(rng), s2 = smooth(rng);
            CHECK(est.lower * std::abs(s1 - s2) <= std::abs(phi_value(s1, n) - phi_value(s2, n)) + 1e-15);
        }
    }
}

TEST_CASE("lipschitz domain and degeneracy errors") {
    CHECK_THROWS_AS(lipschitz_upper(10, 5.0, 5.0), DomainError);
    CHECK_THROWS_AS(lipschitz_lower(10, 6.0, 5.0), DomainError);
    // Curve is flat on [30, 50] for n = 10: no positive floor.
    CHECK_THROWS_AS(lipschitz_lower(10, 30.0, 50.0), DegeneracyError);
}

TEST_CASE("derivative kernel: parallel equals serial") {
    const auto a = kernels::derivative_range(50.0, 0.1, 40.0, 5000, {Exec::Serial});
    const auto b = kernels::derivative_range(50.0, 0.1, 40.0, 5000, {Exec::Parallel, 4});
    CHECK(a.min_abs == b.min_abs);
    CHECK(a.max_abs == b.max_abs);
}

TEST_CASE("entropy_bound") {
    CHECK(entropy_bound(0.7, 0.0, 3.0) == 0.0);
    CHECK(entropy_bound(2.5, 2.5, 4.0) == doctest::Approx(std::log(2.0)));
    CHECK(entropy_bound(0.5, 1.0, 4.0) == doctest::Approx(std::log(3.0)));
    CHECK(entropy_bound(0.1, 1.0, 1.0) > entropy_bound(0.2, 1.0, 1.0));
    CHECK(entropy_bound(0.1, 2.0, 1.0) > entropy_bound(0.1, 1.0, 1.0));
    CHECK_THROWS_AS(entropy_bound(0.0, 1.0, 1.0), DomainError);
}
