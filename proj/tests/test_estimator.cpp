#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "vcprobe/error.hpp"
#include "vcprobe/estimator.hpp"
#include "vcprobe/phi_model.hpp"

using namespace vcprobe;

namespace {

const std::vector<std::int64_t> kTens{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};

std::vector<double> phi_curve(double h, std::span<const std::int64_t> points) {
    std::vector<double> out;
    for (auto n : points) out.push_back(phi_value_extended(h, static_cast<double>(n)));
    return out;
}

// Independent oracle: plain loop over a fine h-grid, smallest h on ties.
struct ScanOracle {
    double h = 0.0;
    double objective = std::numeric_limits<double>::infinity();
};

ScanOracle exhaustive_scan(std::span<const std::int64_t> points, std::span<const double> means, double M,
                           double step) {
    ScanOracle best;
    const auto count = static_cast<long>(std::llround(M / step));
    for (long i = 0; i <= count; ++i) {
        const double h = std::min(M, static_cast<double>(i) * step);
        double sum = 0.0;
        for (std::size_t l = 0; l < points.size(); ++l) {
            const double r = means[l] - phi_value_extended(h, static_cast<double>(points[l]));
            sum += r * r;
        }
        const double obj = std::sqrt(sum / static_cast<double>(points.size()));
        if (obj < best.objective) best = {h, obj};
    }
    return best;
}

}  // namespace

TEST_CASE("empirical norm and inner product") {
    const std::vector<double> c(5, -0.3);
    CHECK(weighted_norm_k(c) == doctest::Approx(0.3));
    CHECK(weighted_norm_k(std::vector<double>(4, 0.0)) == 0.0);
    CHECK(weighted_norm_k(std::vector<double>{3, 4}) == doctest::Approx(std::sqrt(12.5)));
    CHECK_THROWS_AS(weighted_norm_k(std::vector<double>{}), DomainError);

    const std::vector<double> u{0.5, -1.5, 2.0};
    CHECK(inner_product_k(u, std::vector<double>(3, 0.0)) == 0.0);
    CHECK(inner_product_k(u, u) == doctest::Approx(weighted_norm_k(u) * weighted_norm_k(u)));
    CHECK(inner_product_k(std::vector<double>{1, 2}, std::vector<double>{3, 4}) == 5.5);
    CHECK_THROWS_AS(inner_product_k(u, std::vector<double>{1, 2}), DomainError);
}

TEST_CASE("fit config validation") {
    CHECK_NOTHROW(FitConfig{}.validate());
    CHECK_THROWS_AS((FitConfig{50, 0.25, 0.0}.validate()), ConfigError);
    CHECK_THROWS_AS((FitConfig{50, 0.25, 0.5}.validate()), ConfigError);
    CHECK_THROWS_AS((FitConfig{0.2, 0.25, 1e-4}.validate()), ConfigError);
}

TEST_CASE("zero-residual recovery of a noiseless curve") {
    const auto means = phi_curve(5.0, kTens);
    const auto fit = fit_h(kTens, means, FitConfig{});
    CHECK(std::abs(fit.h_hat - 5.0) <= 1e-3);
    CHECK(fit.residual_norm <= 1e-6);
    CHECK_FALSE(fit.boundary_flag);
    CHECK_FALSE(fit.on_plateau);
    REQUIRE(fit.fitted_curve.size() == kTens.size());
    for (double r : residual_curve(fit, means)) CHECK(std::abs(r) <= 1e-6);
}

TEST_CASE("saturated and vanishing curves hit the boundaries") {
    const std::vector<double> ones(kTens.size(), 1.0), zeros(kTens.size(), 0.0);
    const auto top = fit_h(kTens, ones, FitConfig{});
    const auto top_oracle = exhaustive_scan(kTens, ones, 50.0, 1e-3);
    CHECK(top.h_hat == 50.0);
    CHECK(top_oracle.h == doctest::Approx(50.0).epsilon(1e-9));
    CHECK(top.boundary_flag);

    const auto bottom = fit_h(kTens, zeros, FitConfig{});
    const auto bottom_oracle = exhaustive_scan(kTens, zeros, 50.0, 1e-3);
    CHECK(bottom.h_hat == 0.0);
    CHECK(bottom_oracle.h == 0.0);
    CHECK(bottom.boundary_flag);
    CHECK(bottom.residual_norm == 0.0);

    // M beyond twice the largest design point: the objective is flat there
    // and the smallest minimizer on the plateau is returned.
    const std::vector<std::int64_t> small{2, 3, 4};
    const auto plateau = fit_h(small, std::vector<double>(3, 1.0), FitConfig{50, 0.25, 1e-4});
    CHECK(plateau.on_plateau);
    CHECK(plateau.h_hat <= 8.0 + 1e-3);
    CHECK(plateau.h_hat >= 8.0 - 1e-3);
    CHECK(plateau.residual_norm <= 1e-6);
}

TEST_CASE("fit agrees with an exhaustive fine scan on noisy curves") {
    std::mt19937_64 eng(42);
    std::uniform_real_distribution<double> noise(-0.05, 0.05), h0(0.5, 40.0);
    for (int trial = 0; trial < 25; ++trial) {
        auto means = phi_curve(h0(eng), kTens);
        for (auto& v : means) v = std::clamp(v + noise(eng), 0.0, 1.0);
        const auto fit = fit_h(kTens, means, FitConfig{});
        const auto oracle = exhaustive_scan(kTens, means, 50.0, 1e-3);
        // The fit is never worse than the oracle grid minimum (up to rounding)...
        CHECK(fit.residual_norm <= oracle.objective + 1e-9);
        // ...and sits in the same basin.
        CHECK(std::abs(fit.h_hat - oracle.h) <= 2e-3);
        // Global-basin property against the coarse grid.
        for (double h = 0.0; h <= 50.0; h += 0.25) {
            double sum = 0.0;
            for (std::size_t l = 0; l < kTens.size(); ++l) {
                const double r = means[l] - phi_value_extended(h, static_cast<double>(kTens[l]));
                sum += r * r;
            }
            CHECK(fit.residual_norm <= std::sqrt(sum / 10.0) + 1e-12);
        }
        const auto residuals = residual_curve(fit, means);
        CHECK(weighted_norm_k(residuals) == doctest::Approx(fit.residual_norm).epsilon(1e-12));
    }
}

TEST_CASE("shifted fixture: refit absorbs part of the shift") {
    auto means = phi_curve(5.0, kTens);
    for (auto& v : means) v += 0.01;
    const auto fit = fit_h(kTens, means, FitConfig{});
    // Raising h lifts the whole curve, so the refit moves above 5 and every
    // residual stays at most the shift.
    CHECK(fit.h_hat > 5.0);
    CHECK(fit.residual_norm < 0.01);
    const auto residuals = residual_curve(fit, means);
    for (double r : residuals) CHECK(r <= 0.01);
    // Interior least-squares optimum: residuals are orthogonal to the slope
    // direction, which is positive at every point, so they change sign.
    std::vector<double> slope;
    for (auto n : kTens) slope.push_back(phi_derivative_h(fit.h_hat, static_cast<double>(n)));
    CHECK(std::abs(inner_product_k(residuals, slope)) <= 1e-6 * weighted_norm_k(slope));
    CHECK(*std::min_element(residuals.begin(), residuals.end()) < 0.0);
    CHECK(*std::max_element(residuals.begin(), residuals.end()) > 0.0);
}

TEST_CASE("parameter recovery sweep") {
    const FitConfig cfg;
    for (double h0 = cfg.coarse_step; h0 <= cfg.M - cfg.coarse_step + 1e-12; h0 += 0.37) {
        const auto fit = fit_h(kTens, phi_curve(h0, kTens), cfg);
        CHECK_MESSAGE(std::abs(fit.h_hat - h0) <= cfg.tol * 10, "h0 = " << h0);
    }
}

TEST_CASE("fit is invariant to storage order and worker count") {
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> noise(-0.03, 0.03);
    auto means = phi_curve(12.0, kTens);
    for (auto& v : means) v = std::clamp(v + noise(eng), 0.0, 1.0);
    const auto ref = fit_h(kTens, means, FitConfig{}, {Exec::Serial});

    std::vector<std::size_t> order(kTens.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(order.begin(), order.end(), eng);
        std::vector<std::int64_t> pts;
        std::vector<double> vals;
        for (auto i : order) {
            pts.push_back(kTens[i]);
            vals.push_back(means[i]);
        }
        const auto fit = fit_h(pts, vals, FitConfig{}, {Exec::Parallel, 3});
        CHECK(fit.h_hat == ref.h_hat);
        CHECK(fit.residual_norm == ref.residual_norm);
        CHECK(fit.points == ref.points);
    }

    std::vector<double> hs;
    for (double h = 0.0; h <= 50.0; h += 0.1) hs.push_back(h);
    CHECK(kernels::objective_scan(kTens, means, hs, {Exec::Serial}) ==
          kernels::objective_scan(kTens, means, hs, {Exec::Parallel, 8}));
}

TEST_CASE("fit against sample matrices checks the grid") {
    const DesignGrid grid({10, 20, 30});
    const XiSamples xi(grid, 2, {0.5, 0.4, 0.3, 0.2, 0.2, 0.1}, std::vector<double>(6, 0.0));
    CHECK_NOTHROW(fit_h(xi, grid, FitConfig{}));
    CHECK_THROWS_AS(fit_h(xi, DesignGrid({10, 20, 40}), FitConfig{}), DomainError);
    CHECK_THROWS_AS(fit_h(std::vector<std::int64_t>{10, 20}, std::vector<double>{0.1}, FitConfig{}),
                    DomainError);
}
