#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "coco/oracle.hpp"

using namespace coco;

namespace {
const ModelParams kMp{{0.01, 0.1}, {0.5, 0.0, 0.1}, 0.03};
const AccountingHistory kHist{{0.25, 0.5}, {std::log(100.0), std::log(100.0)}};
const double kZ0 = std::log(100.0);
const double kZc = std::log(80.0);

FirmSpec base_firm() {
    FirmSpec f;
    f.v0 = 100.0;
    f.p1 = 50.0;
    f.c1 = 0.04;
    f.alpha = 0.5;
    f.z_b.level = std::log(65.0);
    f.z_c.level = kZc;
    f.z_cc.level = std::log(92.0);
    return f;
}

CoCoSpec base_coco() {
    CoCoSpec c;
    c.p2 = 5.0;
    c.c2 = 0.07;
    c.maturity = 5.5;
    return c;
}
} // namespace

TEST_CASE("self-normalized unit functional is exactly one", "[oracle]") {
    oracle::SimConfig sc;
    sc.n_paths = 20000;
    sc.seed = 1;
    const auto est =
        oracle::is_expectation_f([](double) { return 1.0; }, 0.5, kHist, kZc, kMp, kZ0, sc);
    CHECK(est.value == Catch::Approx(1.0).margin(1e-14));
    CHECK(est.stderr_ == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("flat likelihood keeps the weights near uniform", "[oracle]") {
    ModelParams flat = kMp;
    flat.obs.sigma_eps = 100.0;
    oracle::SimConfig sc;
    sc.n_paths = 50000;
    sc.seed = 2;
    const auto est =
        oracle::is_expectation_f([](double x) { return x; }, 0.5, kHist, kZc, flat, kZ0, sc);
    CHECK(est.ess > 0.5 * sc.n_paths);
}

TEST_CASE("weight effective size is healthy at the working noise level", "[oracle]") {
    oracle::SimConfig sc;
    sc.n_paths = 100000;
    sc.seed = 3;
    const auto est =
        oracle::is_expectation_f([](double x) { return std::exp(x); }, 0.5, kHist, kZc, kMp, kZ0,
                                 sc);
    CHECK(est.ess > 0.01 * sc.n_paths);
    CHECK(est.value > 80.0);
    CHECK(est.value < 120.0);
}

TEST_CASE("degenerate importance weights raise a diagnostic error", "[oracle]") {
    // nearly noiseless reports far from the prior path concentrate all the
    // weight on a handful of draws
    ModelParams tight = kMp;
    tight.obs.sigma_eps = 1e-4;
    AccountingHistory off{{0.25, 0.5}, {std::log(90.0), std::log(90.0)}};
    oracle::SimConfig sc;
    sc.n_paths = 20000;
    sc.seed = 21;
    CHECK_THROWS_AS(
        oracle::is_expectation_f([](double x) { return x; }, 0.5, off, kZc, tight, kZ0, sc),
        std::runtime_error);
}

TEST_CASE("degenerate-volatility cashflow simulation is the riskless bond", "[oracle]") {
    ModelParams mp = kMp;
    mp.drift.sigma = 1e-8;
    mp.drift.m = 0.01;
    // reports pinned on the deterministic path so the weights stay healthy
    AccountingHistory hist{{0.25, 0.5},
                           {kZ0 + mp.drift.m * 0.25, kZ0 + mp.drift.m * 0.5}};
    oracle::SimConfig sc;
    sc.n_paths = 2000;
    sc.grid_step = 0.01;
    sc.seed = 4;
    const auto est = oracle::simulate_price(oracle::Product::pwd_reg, base_firm(), base_coco(),
                                            hist, 0.5, mp, sc);
    const double riskless = 5.0 * std::exp(-0.03 * 5.0) +
                            0.07 * 5.0 / 0.03 * (1.0 - std::exp(-0.03 * 5.0));
    CHECK(est.value == Catch::Approx(riskless).margin(1e-6));
}

TEST_CASE("grid refinement does not move the price", "[oracle][mc]") {
    oracle::SimConfig coarse;
    coarse.n_paths = 40000;
    coarse.grid_step = 0.01;
    coarse.seed = 5;
    oracle::SimConfig fine = coarse;
    fine.grid_step = 0.005;
    fine.seed = 6;
    const auto a = oracle::simulate_price(oracle::Product::pwd_reg, base_firm(), base_coco(),
                                          kHist, 0.5, kMp, coarse);
    const auto b = oracle::simulate_price(oracle::Product::pwd_reg, base_firm(), base_coco(),
                                          kHist, 0.5, kMp, fine);
    CHECK(std::abs(a.value - b.value) <
          2.0 * std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_) + 5e-3);
}

TEST_CASE("accounting product with an unreachable trigger is riskless", "[oracle]") {
    auto coco = base_coco();
    coco.trigger_kind = TriggerKind::accounting;
    coco.y_c = -1e30;
    coco.maturity = 1.5;
    oracle::SimConfig sc;
    sc.n_paths = 5000;
    sc.seed = 7;
    const auto est = oracle::simulate_price(oracle::Product::pwd_acc, base_firm(), coco, kHist,
                                            0.5, kMp, sc);
    const double riskless =
        5.0 * std::exp(-0.03 * 1.0) + 0.07 * 5.0 / 0.03 * (1.0 - std::exp(-0.03 * 1.0));
    CHECK(est.value == Catch::Approx(riskless).margin(1e-9));
}

TEST_CASE("plain rectangle oracle reductions", "[oracle]") {
    const auto proj = build_projection(1, kZ0, std::log(98.0), 0.25, kMp.drift, kMp.obs);
    const auto mc = oracle::mc_rectangle(proj, {std::log(80.0)}, 200000, 8);
    const double exact = norm_cdf((proj.mean[0] - std::log(80.0)) / std::sqrt(proj.cov_at(0, 0)));
    CHECK(std::abs(mc.value - exact) < 3.0 * mc.stderr_);
    const auto open = oracle::mc_rectangle(proj, {-1e30}, 1000, 9);
    CHECK(open.value == 1.0);
}

TEST_CASE("batched runs are independent of the thread count", "[oracle]") {
    const DriftParams p{0.01, 0.1};
    const auto a = oracle::fp_hit_prob_mc(1.0, 0.2, p, 40000, 8, 99, 64, 1);
    const auto b = oracle::fp_hit_prob_mc(1.0, 0.2, p, 40000, 8, 99, 64, 4);
    CHECK(a.value == b.value);
    CHECK(a.stderr_ == b.stderr_);
}
