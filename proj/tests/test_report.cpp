#include <doctest.h>

#include <algorithm>
#include <string>

#include "vcprobe/error.hpp"
#include "vcprobe/report.hpp"

using namespace vcprobe;

namespace {

Json interval_config() {
    return Json::parse(R"({"family": {"name": "interval1d"}, "m": 8, "grid": [4, 8, 16, 32, 64],
                           "master_seed": 2024})");
}

std::string config_error_message(const Json& j) {
    try {
        parse_run_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("config validation names the offending key") {
    auto j = interval_config();
    j.erase("m");
    const auto msg = config_error_message(j);
    CHECK(msg.find("'m'") != std::string::npos);
    CHECK(msg.find("missing") != std::string::npos);

    auto unknown = interval_config();
    unknown["mm"] = 3;
    CHECK(config_error_message(unknown).find("'mm'") != std::string::npos);

    auto typed = interval_config();
    typed["m"] = "eight";
    CHECK(config_error_message(typed).find("'m'") != std::string::npos);

    auto family = interval_config();
    family["family"]["name"] = "svm";
    CHECK(config_error_message(family).find("family.name") != std::string::npos);

    auto dim = interval_config();
    dim["p"] = 2;
    CHECK(config_error_message(dim).find("'p'") != std::string::npos);

    auto grid = interval_config();
    grid["grid"] = Json::array({5, 3});
    CHECK_FALSE(config_error_message(grid).empty());

    auto ext = interval_config();
    ext["family"] = Json::parse(R"({"name": "external"})");
    CHECK(config_error_message(ext).find("family.command") != std::string::npos);
}

TEST_CASE("defaults are materialized into the config echo") {
    const auto cfg = parse_run_config(Json::parse(R"({"family": {"name": "linear"}, "m": 3, "p": 2})"));
    CHECK(cfg.grid.size() == 10);
    CHECK(cfg.grid.front() == 5);
    CHECK(cfg.grid.back() == 300);
    CHECK(cfg.M == 300.0);
    const auto echo = config_to_json(cfg);
    for (const char* key : {"family", "p", "data_spec", "grid", "h_guess", "k", "m", "M", "h_lo", "coarse_step",
                            "tol", "master_seed", "delta_factor"})
        CHECK_MESSAGE(echo.contains(key), key);
    CHECK_FALSE(echo.contains("workers"));
    CHECK(echo["family"]["restarts"] == 32);
    CHECK(echo["family"]["epochs"] == 200);
    CHECK(echo["data_spec"] == "uniform");
    // Re-parsing the echo is a fixed point.
    CHECK(config_to_json(parse_run_config(echo)) == echo);
}

TEST_CASE("estimate reports are deterministic and independent of workers") {
    const auto cfg = parse_run_config(interval_config());
    const auto a = run_estimate(cfg, {Exec::Parallel, 1});
    const auto b = run_estimate(cfg, {Exec::Parallel, 8});
    const auto c = run_estimate(cfg, {Exec::Serial});
    CHECK(a.report.dump(2) == b.report.dump(2));
    CHECK(a.report.dump(2) == c.report.dump(2));
    CHECK(a.samples == b.samples);

    std::vector<std::string> keys;
    for (const auto& [key, value] : a.report.items()) keys.push_back(key);
    CHECK(keys == std::vector<std::string>{"config", "xi", "fit", "constants", "deviation", "varphi", "version"});
    CHECK(a.report["version"] == kToolVersion);
    CHECK(a.report["config"] == config_to_json(cfg));
    CHECK(a.report["constants"]["c3"] == 2304.0);

    // Re-running from the embedded config reproduces the report.
    const auto again = run_estimate(parse_run_config(a.report["config"]));
    CHECK(again.report.dump(2) == a.report.dump(2));

    const double delta = a.report["deviation"]["delta"].get<double>();
    CHECK(delta == doctest::Approx(1.05 * a.report["deviation"]["delta_min"].get<double>()));
    CHECK(a.report["deviation"]["valid"] == true);
}

TEST_CASE("shattering family saturates at M with a boundary warning") {
    auto j = interval_config();
    j["family"] = Json::parse(R"({"name": "shatter"})");
    j["M"] = 50;
    const auto out = run_estimate(parse_run_config(j));
    for (double v : out.samples.means()) CHECK(v == 1.0);
    CHECK(out.fit.h_hat == 50.0);
    CHECK(out.fit.boundary_flag);
    const auto& warnings = out.report["fit"]["warnings"];
    REQUIRE(!warnings.empty());
    CHECK(warnings[0].get<std::string>().find("boundary") != std::string::npos);
}

TEST_CASE("sweep records every repeat and compares with the bound") {
    auto j = interval_config();
    j["family"] = Json::parse(R"({"name": "shatter"})");
    j["M"] = 40;
    const auto shatter = run_sweep(parse_run_config(j), 5);
    CHECK(shatter.h_hats.size() == 5);
    CHECK(shatter.report["h_hats"].size() == 5);
    CHECK(shatter.stddev == 0.0);
    CHECK(shatter.exceed_count == 0);

    const auto iv = run_sweep(parse_run_config(interval_config()), 4);
    CHECK(iv.h_hats.size() == 4);
    CHECK(iv.exceed_frequency <= iv.deviation.prob);
    CHECK(iv.within_bound);
    CHECK(iv.report.dump() == run_sweep(parse_run_config(interval_config()), 4, {Exec::Parallel, 8}).report.dump());
    CHECK_THROWS_AS(run_sweep(parse_run_config(interval_config()), 1), ConfigError);
}

TEST_CASE("plot data lines up with the fit") {
    const auto out = run_estimate(parse_run_config(interval_config()));
    const auto csv = plot_csv(out.fit, out.samples);
    CHECK(csv.rfind("n,xi_mean,phi_fit\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}
