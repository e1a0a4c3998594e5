#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <string>

#include "coco/scenario.hpp"

using namespace coco;

namespace {

std::string base_json(const std::string& extra = "") {
    return std::string(R"({
  "model": {"m": 0.01, "sigma": 0.1, "r": 0.03},
  "observation": {"kappa": 0.5, "mu_eps": 0.0, "sigma_eps": 0.1},
  "firm": {"v0": 100.0, "p1": 50.0, "c1": 0.04, "alpha": 0.5, "v_b": 65.0, "v_c": 80.0},
  "coco": {"p2": 5.0, "c2": 0.07, "maturity": 5.5, "recovery": 0.0, "delta": 0.0,
           "trigger": "regulatory"},
  "history": {"times": [0.25, 0.5], "reports": [100.0, 100.0]},
  "valuation_time": 0.5,
  "chain": {"burn_in": 3000, "samples": 20000, "seed": 99})") +
           extra + "\n}";
}

} // namespace

TEST_CASE("base configuration round-trips the published parameter set", "[scenario]") {
    const auto cfg = parse_config(base_json());
    CHECK(cfg.model.drift.m == 0.01);
    CHECK(cfg.model.drift.sigma == 0.1);
    CHECK(cfg.model.r == 0.03);
    CHECK(cfg.model.obs.kappa == 0.5);
    CHECK(cfg.model.obs.sigma_eps == 0.1);
    CHECK(cfg.firm.v0 == 100.0);
    CHECK(cfg.firm.p1 == 50.0);
    CHECK(cfg.firm.c1 == 0.04);
    CHECK(cfg.firm.alpha == 0.5);
    CHECK(cfg.firm.z_b.level == Catch::Approx(std::log(65.0)));
    CHECK(cfg.firm.z_c.level == Catch::Approx(std::log(80.0)));
    CHECK(cfg.coco.p2 == 5.0);
    CHECK(cfg.coco.c2 == 0.07);
    CHECK(cfg.coco.maturity == 5.5);
    CHECK(cfg.history.size() == 2);
    CHECK(cfg.history.log_reports[0] == Catch::Approx(std::log(100.0)));
}

TEST_CASE("barrier ordering violation names both fields", "[scenario]") {
    std::string bad = base_json();
    const auto pos = bad.find("\"v_b\": 65.0");
    bad.replace(pos, 11, "\"v_b\": 85.0");
    try {
        (void)parse_config(bad);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("v_b") != std::string::npos);
        CHECK(msg.find("v_c") != std::string::npos);
    }
}

TEST_CASE("missing noise autocorrelation is an explicit error", "[scenario]") {
    std::string bad = base_json();
    const auto pos = bad.find("\"kappa\": 0.5, ");
    bad.erase(pos, std::string("\"kappa\": 0.5, ").size());
    try {
        (void)parse_config(bad);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("kappa") != std::string::npos);
    }
}

TEST_CASE("unknown keys are rejected", "[scenario]") {
    CHECK_THROWS_AS(parse_config(base_json(R"(, "volatility": 0.2)")), ConfigError);
    std::string bad = base_json();
    const auto pos = bad.find("\"sigma\": 0.1");
    bad.replace(pos, 12, "\"sgima\": 0.1");
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
}

TEST_CASE("sweep output is bit-identical across runs", "[scenario]") {
    const auto cfg = parse_config(
        base_json(R"(, "sweep": {"param": "sigma", "grid": [0.08, 0.1, 0.12]})"));
    const auto a = run_sweep(cfg);
    const auto b = run_sweep(cfg);
    CHECK(a == b);
    CHECK(a.rfind("sweep_param,sweep_value,price,stderr,leg_principal,leg_coupon,"
                  "leg_conversion,acceptance_rate,ess,seed\n",
                  0) == 0);
    CHECK(std::count(a.begin(), a.end(), '\n') == 4); // header + 3 rows
}

TEST_CASE("a one-point sweep reproduces the direct price call", "[scenario]") {
    const auto swept =
        parse_config(base_json(R"(, "sweep": {"param": "sigma", "grid": [0.1]})"));
    const auto csv = run_sweep(swept);
    const auto line = csv.substr(csv.find('\n') + 1);
    const auto p0 = line.find(',');
    const auto p1 = line.find(',', p0 + 1);
    const auto p2 = line.find(',', p1 + 1);
    const double swept_price = std::atof(line.substr(p1 + 1, p2 - p1 - 1).c_str());

    const auto direct = run_price(parse_config(base_json()));
    CHECK(swept_price == direct.value);
}

TEST_CASE("unsweepable parameter is rejected", "[scenario]") {
    const auto cfg =
        parse_config(base_json(R"(, "sweep": {"param": "coupon_rate", "grid": [0.1]})"));
    CHECK_THROWS_AS(run_sweep(cfg), ConfigError);
}

TEST_CASE("sweep errors become rows, the run continues", "[scenario]") {
    // second grid point makes v_b >= v_c and must fail in isolation
    const auto cfg = parse_config(
        base_json(R"(, "sweep": {"param": "v_c", "grid": [80.0, 60.0, 90.0]})"));
    const auto csv = run_sweep(cfg);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.find("nan") != std::string::npos);
}

TEST_CASE("accounting-shock case study produces coherent drops", "[scenario][mc]") {
    DbCaseConfig dc;
    dc.chain.burn_in = 4000;
    dc.chain.samples = 30000;
    dc.mda_cet1 = {0.10};
    const auto rows = run_db_case(dc);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.price_pre > 0.0);
        CHECK(r.price_post > 0.0);
        CHECK(r.price_pre > r.price_post); // bad news lowers the price
        CHECK(std::isfinite(r.drop_pct()));
    }
    // a binding coupon block deepens the drop
    CHECK(rows[1].drop_pct() > rows[0].drop_pct() - 1.0);
}

TEST_CASE("validation suite passes and fault injection fails", "[scenario][mc]") {
    ValidationOptions opt;
    opt.quick = true;
    const auto rows = run_validate(opt);
    for (const auto& r : rows) {
        INFO(r.name << ": " << r.lhs << " vs " << r.rhs << " band " << r.band);
        CHECK(r.pass());
    }
    ValidationOptions bad = opt;
    bad.fault_injection = true;
    const auto rows2 = run_validate(bad);
    bool any_fail = false;
    for (const auto& r : rows2) any_fail = any_fail || !r.pass();
    CHECK(any_fail);

    // robustness: a different master seed still passes throughout
    ValidationOptions reseeded = opt;
    reseeded.seed = 777777;
    for (const auto& r : run_validate(reseeded)) {
        INFO(r.name);
        CHECK(r.pass());
    }
}
