#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "coco/estimators.hpp"
#include "coco/oracle.hpp"

using namespace coco;

namespace {
const DriftParams kP{0.01, 0.1};
const ObsParams kO{0.5, 0.0, 0.1};
const ModelParams kMp{kP, kO, 0.03};
const Barrier kZc{std::log(80.0)};
const double kZ0 = std::log(100.0);
const AccountingHistory kHist{{0.25, 0.5}, {std::log(100.0), std::log(100.0)}};

ChainConfig quick_chain(std::uint64_t seed, long g = 60000) {
    ChainConfig cfg;
    cfg.burn_in = 8000;
    cfg.samples = g;
    cfg.seed = seed;
    return cfg;
}
} // namespace

TEST_CASE("unit functional integrates to exactly one", "[estimators]") {
    const auto est = estimate_E_f([](double) { return 1.0; }, 0.5, kHist, kZc, kP, kO, kZ0,
                                  quick_chain(1, 20000));
    CHECK(est.value == 1.0);
    CHECK(est.stderr_ == 0.0);
}

TEST_CASE("support indicator integrates to one", "[estimators]") {
    const auto est = estimate_E_f([&](double x) { return x > kZc.level ? 1.0 : 0.0; }, 0.5,
                                  kHist, kZc, kP, kO, kZ0, quick_chain(2, 20000));
    CHECK(est.value == 1.0);
}

TEST_CASE("survival functional matches the importance-sampling oracle", "[estimators][mc]") {
    const double t = 0.5, s = 3.0;
    const auto h = [&](double x) { return no_hit_prob(s - t, x - kZc.level, kP); };
    const auto mcmc = estimate_E_f(h, t, kHist, kZc, kP, kO, kZ0, quick_chain(3, 120000));
    oracle::SimConfig sc;
    sc.n_paths = 300000;
    sc.seed = 303;
    const auto is = oracle::is_expectation_f(h, t, kHist, kZc.level, kMp, kZ0, sc);
    CHECK(std::abs(mcmc.value - is.value) <
          3.0 * std::sqrt(mcmc.stderr_ * mcmc.stderr_ + is.stderr_ * is.stderr_));
}

TEST_CASE("estimator works between report dates and with no reports", "[estimators]") {
    const auto one = estimate_E_f([](double) { return 1.0; }, 0.8, kHist, kZc, kP, kO, kZ0,
                                  quick_chain(4, 20000));
    CHECK(one.value == 1.0);
    const AccountingHistory empty;
    const auto est = estimate_E_f([](double x) { return x; }, 0.5, empty, kZc, kP, kO, kZ0,
                                  quick_chain(5, 40000));
    // no reports: the filtered mean is the survival-conditioned prior mean
    const double expect = integrate(
        [&](double x) { return x * pre_report_density(0.5, x, kZ0, kZc.level, kP); }, kZc.level,
        kZ0 + 1.0, 1e-10);
    CHECK(std::abs(est.value - expect) < 4.0 * est.stderr_);
}

TEST_CASE("bridged estimator marginalizes to the plain one", "[estimators][mc]") {
    const double t = 0.5, T = 5.5;
    const auto zero = estimate_E_f_bridge_many(
        std::vector<std::function<double(double)>>{[](double) { return 0.0; }}, t, T, kHist, kZc,
        kP, kO, kZ0, quick_chain(6, 20000));
    CHECK(zero.estimates[0].value == 0.0);

    const auto bridged = estimate_E_f_bridge_many(
        std::vector<std::function<double(double)>>{[](double) { return 1.0; }}, t, T, kHist, kZc,
        kP, kO, kZ0, quick_chain(7, 120000));
    const auto direct = estimate_E_f([&](double x) { return no_hit_prob(T - t, x - kZc.level, kP); },
                                     t, kHist, kZc, kP, kO, kZ0, quick_chain(8, 120000));
    CHECK(std::abs(bridged.estimates[0].value - direct.value) <
          3.0 * std::sqrt(bridged.estimates[0].stderr_ * bridged.estimates[0].stderr_ +
                          direct.stderr_ * direct.stderr_));
}

TEST_CASE("survival rectangles: open bounds give probability one", "[estimators]") {
    const auto est = estimate_survival_functionals(
        3, [](int i) { return std::vector<double>(i, -1e30); }, kHist, 0.25, kP, kO, kZ0,
        quick_chain(9, 20000));
    for (const auto& p : est.probs) CHECK(p.value == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("survival rectangles decrease with the horizon", "[estimators]") {
    const double y_c = std::log(80.0);
    const auto est = estimate_survival_functionals(
        4, [&](int i) { return std::vector<double>(i, y_c); }, kHist, 0.25, kP, kO, kZ0,
        quick_chain(10, 60000));
    for (int i = 1; i < 4; ++i) {
        CHECK(est.probs[i].value <= est.probs[i - 1].value +
                                        2.0 * (est.probs[i].stderr_ + est.probs[i - 1].stderr_));
    }
}

TEST_CASE("one-step survival matches forward simulation", "[estimators][mc]") {
    const double y_c = std::log(85.0);
    const auto est = estimate_survival_functionals(
        2, [&](int i) { return std::vector<double>(i, y_c); }, kHist, 0.25, kP, kO, kZ0,
        quick_chain(11, 120000));
    oracle::SimConfig sc;
    sc.n_paths = 300000;
    sc.seed = 11011;
    for (int i = 1; i <= 2; ++i) {
        const auto fwd = oracle::forward_survival_mc(std::vector<double>(i, y_c), kHist, 0.25,
                                                     kMp, kZ0, sc);
        CHECK(std::abs(est.probs[i - 1].value - fwd.value) <
              3.0 * std::sqrt(est.probs[i - 1].stderr_ * est.probs[i - 1].stderr_ +
                              fwd.stderr_ * fwd.stderr_));
    }
}

TEST_CASE("estimators are deterministic in the seed", "[estimators]") {
    const auto h = [&](double x) { return std::exp(x); };
    const auto a = estimate_E_f(h, 0.5, kHist, kZc, kP, kO, kZ0, quick_chain(12, 20000));
    const auto b = estimate_E_f(h, 0.5, kHist, kZc, kP, kO, kZ0, quick_chain(12, 20000));
    CHECK(a.value == b.value);
    CHECK(a.stderr_ == b.stderr_);
    const auto c = estimate_E_f(h, 0.5, kHist, kZc, kP, kO, kZ0, quick_chain(13, 20000));
    CHECK(a.value != c.value);
}

TEST_CASE("pooled parallel chains agree with one long chain", "[estimators][mc]") {
    const auto h = [&](double x) { return std::exp(x); };
    ChainConfig longc = quick_chain(14, 120000);
    const auto single = estimate_E_f(h, 0.5, kHist, kZc, kP, kO, kZ0, longc);
    ChainConfig pooled = quick_chain(14, 30000);
    pooled.chains = 4;
    const auto multi = estimate_E_f(h, 0.5, kHist, kZc, kP, kO, kZ0, pooled);
    CHECK(std::abs(single.value - multi.value) <
          3.0 * std::sqrt(single.stderr_ * single.stderr_ + multi.stderr_ * multi.stderr_));
}

TEST_CASE("flat reports pin the posterior to the noise-free values", "[estimators]") {
    // nearly noiseless uncorrelated reports concentrate each coordinate at y_i
    const ObsParams tight{0.0, 0.0, 1e-6};
    const auto target = [&](std::span<const double> z) {
        return log_b_n(z, kHist, kZc, kP, tight, kZ0);
    };
    ChainConfig cfg = quick_chain(15, 40000);
    std::vector<double> scales{1e-6, 1e-6};
    const std::vector<double> init{kHist.log_reports[0], kHist.log_reports[1]};
    const auto res = rw_metropolis(target, 2, init, cfg, scales);
    for (int j = 0; j < 2; ++j) {
        double s = 0.0, s2 = 0.0;
        for (long g = 0; g < res.retained; ++g) {
            s += res.at(g, j);
            s2 += res.at(g, j) * res.at(g, j);
        }
        const double mean = s / res.retained;
        const double sd = std::sqrt(std::max(s2 / res.retained - mean * mean, 0.0));
        CHECK(std::abs(mean - kHist.log_reports[j]) < 1e-4);
        CHECK(sd < 1e-4);
    }
}

TEST_CASE("huge accounting noise reduces to the survival-conditioned prior", "[estimators][mc]") {
    const ObsParams flat{0.0, 0.0, 100.0};
    const auto with_reports = estimate_E_f([](double x) { return x; }, 0.5, kHist, kZc, kP, flat,
                                           kZ0, quick_chain(16, 120000));
    // prior-only reference: survival-conditioned mean at t = 0.5 with no reports
    const double expect = integrate(
        [&](double x) { return x * pre_report_density(0.5, x, kZ0, kZc.level, kP); }, kZc.level,
        kZ0 + 1.0, 1e-10);
    CHECK(std::abs(with_reports.value - expect) < 3.0 * with_reports.stderr_ + 2e-4);
}
