#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "coco/first_passage.hpp"
#include "coco/oracle.hpp"
#include "coco/transforms.hpp"

using namespace coco;

namespace {
const DriftParams kBase{0.01, 0.1};
const Barrier kZc{std::log(80.0)};
const Barrier kZb{std::log(65.0)};
}

TEST_CASE("discounted hitting transform limits", "[transforms]") {
    const double x = std::log(100.0);
    CHECK(discounted_hitting_transform(x, kZc, 0.0, 0.03, kBase) == 0.0);
    // r = 0 telescopes to minus the hit probability
    for (double hz : {0.5, 2.0, 5.0}) {
        CHECK(discounted_hitting_transform(x, kZc, hz, 0.0, kBase) ==
              Catch::Approx(-hit_prob(hz, x - kZc.level, kBase)).margin(1e-12));
    }
    CHECK_THROWS_AS(discounted_hitting_transform(kZc.level - 0.1, kZc, 1.0, 0.03, kBase),
                    std::domain_error);
    // always in [-1, 0]
    for (double xx : {kZc.level + 0.01, kZc.level + 0.3, kZc.level + 2.0}) {
        const double v = discounted_hitting_transform(xx, kZc, 5.0, 0.03, kBase);
        CHECK(v <= 0.0);
        CHECK(v >= -1.0);
    }
}

TEST_CASE("discounted hitting transform equals naive formula in safe range", "[transforms]") {
    // direct evaluation of the two-term closed form, no overflow protection
    const auto naive = [&](double x, double b, double H, double r, const DriftParams& p) {
        const double sig2 = p.sigma * p.sigma;
        const double a = x - b;
        const double s = std::sqrt(p.m * p.m + 2.0 * r * sig2);
        const double sq = p.sigma * std::sqrt(H);
        return std::exp(-(p.m * a + a * s) / sig2) * (norm_cdf((a - s * H) / sq) - 1.0) +
               std::exp(-(p.m * a - a * s) / sig2) * (norm_cdf((a + s * H) / sq) - 1.0);
    };
    for (double x : {kZc.level + 0.05, kZc.level + 0.2, kZc.level + 0.5})
        for (double H : {0.5, 2.0, 5.0})
            CHECK(discounted_hitting_transform(x, kZc, H, 0.03, kBase) ==
                  Catch::Approx(naive(x, kZc.level, H, 0.03, kBase)).margin(1e-13));
}

TEST_CASE("discounted hitting transform far above the barrier stays finite", "[transforms]") {
    const double v = discounted_hitting_transform(kZc.level + 30.0, kZc, 5.0, 0.10,
                                                  DriftParams{0.0, 0.05});
    CHECK(std::isfinite(v));
    CHECK(v <= 0.0);
    CHECK(v > -1e-10);
}

TEST_CASE("discounted hitting transform against discounted hitting simulation",
          "[transforms][mc]") {
    const double x = std::log(100.0);
    const double exact = -discounted_hitting_transform(x, kZc, 5.0, 0.03, kBase);
    const auto mc = oracle::discounted_hit_mc(x, kZc.level, 5.0, 0.03, kBase, 200000,
                                              1e-3, 0.25, 31415);
    CHECK(std::abs(mc.value - exact) < 3.0 * mc.stderr_);
}

TEST_CASE("discounted survival annuity bounds and oracle", "[transforms][mc]") {
    const double x = std::log(100.0);
    CHECK(discounted_survival_annuity(x, kZc, 0.0, 0.03, kBase) == 0.0);
    CHECK_THROWS_AS(discounted_survival_annuity(x, kZc, 5.0, 0.0, kBase), std::domain_error);
    const double cap = -std::expm1(-0.03 * 5.0) / 0.03;
    const double far = discounted_survival_annuity(x, Barrier{-40.0}, 5.0, 0.03, kBase);
    CHECK(far == Catch::Approx(cap).epsilon(1e-9));
    const double v = discounted_survival_annuity(x, kZc, 5.0, 0.03, kBase);
    CHECK(v > 0.0);
    CHECK(v <= cap);
    const auto mc = oracle::survival_annuity_mc(x, kZc.level, 5.0, 0.03, kBase, 100000, 500, 271828);
    CHECK(std::abs(mc.value - v) < 3.0 * mc.stderr_ + 2e-4);
}

TEST_CASE("perpetual transforms", "[transforms]") {
    const double x = std::log(100.0);
    CHECK(perpetual_hit_transform(kZb.level + 1e-13, kZb, 0.03, kBase) ==
          Catch::Approx(-1.0).margin(1e-10));
    // zero-rate value with positive drift: probability of ever reaching the barrier
    CHECK(perpetual_hit_transform(x, kZb, 0.0, kBase) ==
          Catch::Approx(-std::exp(-2.0 * kBase.m * (x - kZb.level) /
                                  (kBase.sigma * kBase.sigma)))
              .epsilon(1e-12));
    CHECK(perpetual_hit_transform(x, kZb, 0.0, kBase) == Catch::Approx(-0.4225).epsilon(1e-12));

    CHECK(perpetual_survival_annuity(kZb.level + 1e-13, kZb, 0.03, kBase) ==
          Catch::Approx(0.0).margin(1e-9));
    CHECK(perpetual_survival_annuity(x, Barrier{-40.0}, 0.03, kBase) ==
          Catch::Approx(1.0 / 0.03).epsilon(1e-9));
    const double jb = perpetual_hit_transform(x, kZb, 0.03, kBase);
    CHECK(perpetual_survival_annuity(x, kZb, 0.03, kBase) ==
          Catch::Approx((1.0 + jb) / 0.03).margin(1e-14));
    CHECK_THROWS_AS(perpetual_survival_annuity(x, kZb, 0.0, kBase), std::domain_error);
}

TEST_CASE("perpetual hit transform against long-horizon simulation", "[transforms][mc]") {
    const double x = std::log(100.0);
    const double exact = -perpetual_hit_transform(x, kZb, 0.03, kBase);
    const double horizon = -std::log(1e-6) / 0.03;
    const auto mc = oracle::discounted_hit_mc(x, kZb.level, horizon, 0.03, kBase, 100000,
                                              2e-3, 2.0, 6171);
    CHECK(std::abs(mc.value - exact) < 3.0 * mc.stderr_ + 1e-5);
}
