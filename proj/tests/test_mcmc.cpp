#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <span>
#include <vector>

#include "coco/mcmc.hpp"

using namespace coco;

TEST_CASE("acceptance probability of an unchanged target is 1", "[mcmc]") {
    CHECK(mh_acceptance_prob(-3.7, -3.7) == 1.0);
    CHECK(mh_acceptance_prob(-1.0, -2.0) == Catch::Approx(std::exp(-1.0)));
    CHECK(mh_acceptance_prob(-1.0, kNegInf) == 0.0);
}

TEST_CASE("standard normal target moments", "[mcmc]") {
    const auto target = [](std::span<const double> x) { return -0.5 * x[0] * x[0]; };
    ChainConfig cfg;
    cfg.burn_in = 5000;
    cfg.samples = 100000;
    cfg.seed = 12;
    const std::vector<double> init{0.3};
    const auto res = rw_metropolis(target, 1, init, cfg);
    double s = 0.0, s2 = 0.0;
    for (long g = 0; g < res.retained; ++g) {
        s += res.at(g, 0);
        s2 += res.at(g, 0) * res.at(g, 0);
    }
    const double mean = s / res.retained;
    const double var = s2 / res.retained - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(res.ess[0]));
    CHECK(var == Catch::Approx(1.0).epsilon(0.10));
    CHECK(res.acceptance_rate > cfg.target_acceptance - 0.15);
    CHECK(res.acceptance_rate < cfg.target_acceptance + 0.15);
}

TEST_CASE("support is never violated", "[mcmc]") {
    const auto target = [](std::span<const double> x) {
        return x[0] > 0.0 ? -0.5 * x[0] * x[0] : kNegInf;
    };
    ChainConfig cfg;
    cfg.burn_in = 2000;
    cfg.samples = 50000;
    cfg.seed = 77;
    const std::vector<double> init{0.5};
    const auto res = rw_metropolis(target, 1, init, cfg);
    long below = 0;
    for (long g = 0; g < res.retained; ++g) below += res.at(g, 0) <= 0.0;
    CHECK(below == 0);
}

TEST_CASE("initialization outside the support is an error", "[mcmc]") {
    const auto target = [](std::span<const double> x) {
        return x[0] > 0.0 ? 0.0 : kNegInf;
    };
    ChainConfig cfg;
    const std::vector<double> init{-1.0};
    CHECK_THROWS_AS(rw_metropolis(target, 1, init, cfg), std::runtime_error);
}

TEST_CASE("identical seeds give identical chains", "[mcmc]") {
    const auto target = [](std::span<const double> x) {
        return -0.5 * (x[0] * x[0] + x[1] * x[1]);
    };
    ChainConfig cfg;
    cfg.burn_in = 1000;
    cfg.samples = 20000;
    cfg.seed = 31;
    const std::vector<double> init{0.1, -0.1};
    const auto a = rw_metropolis(target, 2, init, cfg);
    const auto b = rw_metropolis(target, 2, init, cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    CHECK(a.samples == b.samples);
    CHECK(a.acceptance_rate == b.acceptance_rate);
}

TEST_CASE("batch means on iid data reports near-full ess", "[mcmc]") {
    Rng rng(5);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = rng.normal();
    const auto st = batch_means(xs);
    CHECK(st.ess > 0.5 * xs.size());
    CHECK(st.stderr_ == Catch::Approx(1.0 / std::sqrt(static_cast<double>(xs.size()))).epsilon(0.3));
}
