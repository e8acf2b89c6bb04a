#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "vcprobe/error.hpp"
#include "vcprobe/rng.hpp"
#include "vcprobe/simulation.hpp"

using namespace vcprobe;

namespace {

// Independent oracle for the interval family: the supremum over all closed
// intervals (and the empty one) of R(f, W') - R(f, W), by enumeration.
double interval_sup_deviation(const Dataset& data, std::size_t half) {
    std::set<double> values;
    for (std::size_t i = 0; i < data.size(); ++i) values.insert(data.features(i)[0]);
    const std::vector<double> xs(values.begin(), values.end());
    // contribution of a point to R(W') - R(W) when inside vs outside the interval
    std::vector<long> inside_gain(xs.size(), 0);
    long outside_total = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const long sign = i < half ? -1 : 1;
        const int y = data.label(i);
        const long err_out = y;       // predicted 0
        const long err_in = 1 - y;    // predicted 1
        outside_total += sign * err_out;
        const auto pos = std::lower_bound(xs.begin(), xs.end(), data.features(i)[0]) - xs.begin();
        inside_gain[static_cast<std::size_t>(pos)] += sign * (err_in - err_out);
    }
    long best = outside_total;
    for (std::size_t a = 0; a < xs.size(); ++a) {
        long acc = 0;
        for (std::size_t b = a; b < xs.size(); ++b) {
            acc += inside_gain[b];
            best = std::max(best, outside_total + acc);
        }
    }
    return static_cast<double>(best) / static_cast<double>(half);
}

// Exact P(|X - Y| < t n) for X, Y ~ Binomial(n, 1/2) independent:
// X - Y + n ~ Binomial(2n, 1/2).
double prob_abs_binomial_gap_below(int n, double t) {
    const int total = 2 * n;
    double prob = 0.0;
    double log_half = total * std::log(0.5);
    for (int s = 0; s <= total; ++s) {
        const int gap = std::abs(s - n);
        if (gap < t * n) {
            const double log_c = std::lgamma(total + 1.0) - std::lgamma(s + 1.0) - std::lgamma(total - s + 1.0);
            prob += std::exp(log_c + log_half);
        }
    }
    return prob;
}

// Fails when trained on exactly `bad_rows` rows; otherwise predicts 0.
class FailingFamily final : public ClassifierFamily {
public:
    explicit FailingFamily(std::size_t bad_rows) : bad_rows_(bad_rows) {}
    std::unique_ptr<TrainedModel> fit(const Dataset& data, std::uint64_t seed) const override {
        if (data.size() == bad_rows_) throw DegeneracyError("deliberate failure");
        return ConstantClassifier(0).fit(data, seed);
    }
    FamilyDescriptor descriptor() const override { return {"failing", {}}; }
    std::optional<double> known_vc_dimension(std::size_t) const override { return 0.0; }

private:
    std::size_t bad_rows_;
};

}  // namespace

TEST_CASE("generate_dataset: determinism, shape, label balance") {
    const DataSpec spec;
    const auto a = generate_dataset(spec, 20, 3, 99);
    const auto b = generate_dataset(spec, 20, 3, 99);
    CHECK(a == b);
    CHECK(a.size() == 20);
    CHECK(a.dimension() == 3);
    CHECK_FALSE(a == generate_dataset(spec, 20, 3, 100));
    for (double x : a.feature_data()) CHECK((x >= 0.0 && x < 1.0));

    const auto big = generate_dataset(spec, 10'000, 1, 5);
    double ones = 0;
    for (auto y : big.labels()) ones += y;
    CHECK(std::abs(ones / 10'000 - 0.5) <= 4 * std::sqrt(0.25 / 10'000));

    const auto g = generate_dataset(DataSpec::parse("gaussian"), 10'000, 1, 6);
    double mean = 0, sq = 0;
    for (double x : g.feature_data()) {
        mean += x;
        sq += x * x;
    }
    mean /= 10'000;
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(sq / 10'000 - 1.0) < 0.05);

    CHECK_THROWS_AS(DataSpec::parse("poisson"), ConfigError);
    CHECK_THROWS_AS(generate_dataset(spec, 1, 1, 0), DomainError);
}

TEST_CASE("design grid validation and geometric default") {
    CHECK_THROWS_AS(DesignGrid({5}), ConfigError);
    CHECK_THROWS_AS(DesignGrid({5, 5}), ConfigError);
    CHECK_THROWS_AS(DesignGrid({0, 5}), ConfigError);
    const auto g = DesignGrid::geometric(10.0);
    CHECK(g.size() == 10);
    CHECK(g[0] == 5);
    CHECK(g.max() == 300);
    const auto small = DesignGrid::geometric(1.0, 10);
    CHECK(small[0] == 1);
    CHECK(small.max() >= 30);
    for (std::size_t i = 1; i < small.size(); ++i) CHECK(small[i] > small[i - 1]);
}

TEST_CASE("seed derivation is index-only and avalanching") {
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
    CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
    // Frozen values pin the documented construction.
    CHECK(mix64(0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("xi_single_run: shatter oracle saturates") {
    for (std::int64_t n : {1, 7, 50}) {
        const auto r = xi_single_run(ShatterOracle(), n, 2, DataSpec{}, 11 + n);
        CHECK(r.xi == 1.0);
        CHECK(r.train_risk == 0.0);
    }
}

TEST_CASE("xi_single_run: interval family equals the enumerated supremum") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const std::int64_t n = 5 + static_cast<std::int64_t>(seed) * 7;
        const auto r = xi_single_run(Interval1D(), n, 1, DataSpec{}, seed);
        const auto data = generate_dataset(DataSpec{}, 2 * static_cast<std::size_t>(n), 1, substream(seed, 0));
        const double sup = interval_sup_deviation(data, static_cast<std::size_t>(n));
        CHECK(r.xi == doctest::Approx(std::abs(sup)).epsilon(1e-12));
    }
}

TEST_CASE("xi_single_run: constant classifier is a binomial gap") {
    const int n = 1000;
    int below = 0;
    const int runs = 400;
    for (int s = 0; s < runs; ++s) {
        const auto r = xi_single_run(ConstantClassifier(0), n, 1, DataSpec{}, 1000 + s);
        const auto data = generate_dataset(DataSpec{}, 2 * n, 1, substream(1000 + s, 0));
        double w = 0, wp = 0;
        for (int i = 0; i < n; ++i) {
            w += data.label(i);
            wp += data.label(n + i);
        }
        CHECK(r.xi == doctest::Approx(std::abs(w - wp) / n));
        below += r.xi < 0.05;
    }
    const double p = prob_abs_binomial_gap_below(n, 0.05);
    CHECK(p == doctest::Approx(0.9736).epsilon(2e-3));
    const double freq = static_cast<double>(below) / runs;
    CHECK(std::abs(freq - p) <= 4 * std::sqrt(p * (1 - p) / runs));
}

TEST_CASE("simulate_xi: shape, saturation, determinism across workers") {
    SimulationPlan plan;
    plan.grid = DesignGrid({2, 3, 5, 8, 13, 21, 34, 55, 89, 144});
    plan.m = 20;
    plan.master_seed = 77;
    plan.family = std::make_shared<ShatterOracle>();
    const auto shatter = simulate_xi(plan);
    CHECK(shatter.k() == 10);
    CHECK(shatter.m() == 20);
    for (double v : shatter.means()) CHECK(v == 1.0);

    plan.family = std::make_shared<Interval1D>();
    const auto serial = simulate_xi(plan, {Exec::Serial});
    const auto one = simulate_xi(plan, {Exec::Parallel, 1});
    const auto eight = simulate_xi(plan, {Exec::Parallel, 8});
    CHECK(serial == one);
    CHECK(serial == eight);
    for (std::size_t l = 0; l < serial.k(); ++l)
        for (int i = 0; i < serial.m(); ++i) CHECK((serial.xi(l, i) >= 0.0 && serial.xi(l, i) <= 1.0));

    plan.master_seed = 78;
    CHECK_FALSE(simulate_xi(plan) == serial);
}

TEST_CASE("simulate_xi: failures name the lowest failing job") {
    SimulationPlan plan;
    plan.grid = DesignGrid({3, 4});
    plan.m = 3;
    plan.p = 2;
    plan.family = std::make_shared<Interval1D>();
    CHECK_THROWS_AS(simulate_xi(plan), ConfigError);

    plan.p = 1;
    plan.grid = DesignGrid({2, 3, 5, 8});
    plan.family = std::make_shared<FailingFamily>(10);  // n = 5
    for (const ExecConfig exec : {ExecConfig{Exec::Serial}, ExecConfig{Exec::Parallel, 4}}) {
        try {
            simulate_xi(plan, exec);
            FAIL("expected a simulation error");
        } catch (const SimulationError& e) {
            CHECK(e.point_index() == 2);
            CHECK(e.repetition() == 0);
            CHECK(e.exit_code() == ExitCode::Runtime);
        }
    }
}

TEST_CASE("sample CSV round trip re-verifies means") {
    SimulationPlan plan;
    plan.grid = DesignGrid({4, 9, 16});
    plan.m = 5;
    plan.master_seed = 3;
    plan.family = std::make_shared<Interval1D>();
    const auto samples = simulate_xi(plan);

    std::stringstream buf;
    write_xi_csv(buf, samples);
    CHECK(buf.str().rfind("n,rep,xi,train_risk\n", 0) == 0);
    const auto back = read_xi_csv(buf, samples.means());
    CHECK(back == samples);

    std::vector<double> wrong(samples.means().begin(), samples.means().end());
    wrong[1] += 1e-9;
    std::stringstream again;
    write_xi_csv(again, samples);
    CHECK_THROWS_AS(read_xi_csv(again, wrong), ParseError);

    std::stringstream bad("n,rep,xi,train_risk\n4,0,1.5,0\n9,0,0.1,0\n");
    CHECK_THROWS_AS(read_xi_csv(bad), ParseError);
    std::stringstream uneven("n,rep,xi,train_risk\n4,0,0.5,0\n4,1,0.5,0\n9,0,0.1,0\n");
    CHECK_THROWS_AS(read_xi_csv(uneven), ParseError);
    std::stringstream header("n,xi\n");
    CHECK_THROWS_AS(read_xi_csv(header), ParseError);
}

TEST_CASE("trend diagnostic flags increasing curves") {
    const DesignGrid grid({1, 2, 3, 4, 5, 6, 7, 8});
    std::vector<double> up, down;
    for (int l = 0; l < 8; ++l) {
        up.push_back(0.1 * l);
        down.push_back(0.8 - 0.1 * l);
    }
    const XiSamples inc(grid, 1, up, std::vector<double>(8, 0.0));
    const XiSamples dec(grid, 1, down, std::vector<double>(8, 0.0));
    CHECK(trend_diagnostic(inc).flagged);
    CHECK(trend_diagnostic(inc).spearman_rho == doctest::Approx(1.0));
    CHECK_FALSE(trend_diagnostic(dec).flagged);
}
