#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "coco/mvn.hpp"
#include "coco/oracle.hpp"

using namespace coco;

namespace {
const DriftParams kP{0.01, 0.1};
const ObsParams kO{0.5, 0.0, 0.1};
const double kZn = std::log(100.0);
const double kYn = std::log(98.0);
const double kDt = 0.25;
}

TEST_CASE("one-step projection is the direct normal law", "[mvn]") {
    const auto proj = build_projection(1, kZn, kYn, kDt, kP, kO);
    CHECK(proj.mean[0] ==
          Catch::Approx(kZn + kP.m * kDt + kO.kappa * (kYn - kZn) + kO.mu_eps).margin(1e-14));
    CHECK(proj.cov_at(0, 0) ==
          Catch::Approx(kP.sigma * kP.sigma * kDt + kO.sigma_eps * kO.sigma_eps).margin(1e-14));
}

TEST_CASE("uncorrelated-noise two-step covariance", "[mvn]") {
    const ObsParams iid{0.0, 0.0, 0.1};
    const auto proj = build_projection(2, kZn, kYn, kDt, kP, iid);
    const double vz = kP.sigma * kP.sigma * kDt;
    const double ve = iid.sigma_eps * iid.sigma_eps;
    CHECK(proj.cov_at(0, 0) == Catch::Approx(vz + ve).margin(1e-14));
    CHECK(proj.cov_at(0, 1) == Catch::Approx(vz).margin(1e-14));
    CHECK(proj.cov_at(1, 0) == Catch::Approx(vz).margin(1e-14));
    CHECK(proj.cov_at(1, 1) == Catch::Approx(2.0 * vz + ve).margin(1e-14));
}

TEST_CASE("three-step projection matches forward simulation moments", "[mvn][mc]") {
    const int i = 3;
    const auto proj = build_projection(i, kZn, kYn, kDt, kP, kO);
    const long n = 300000;
    Rng rng(8675309);
    std::vector<double> sum(i, 0.0), sum2(i, 0.0), cross(i * i, 0.0);
    for (long d = 0; d < n; ++d) {
        double z = kZn, u = kYn - kZn;
        double y[3];
        for (int k = 0; k < i; ++k) {
            z += kP.m * kDt + kP.sigma * std::sqrt(kDt) * rng.normal();
            u = kO.kappa * u + kO.mu_eps + kO.sigma_eps * rng.normal();
            y[k] = z + u;
        }
        for (int a = 0; a < i; ++a) {
            sum[a] += y[a];
            sum2[a] += y[a] * y[a];
            for (int b = 0; b < i; ++b) cross[a * i + b] += y[a] * y[b];
        }
    }
    for (int a = 0; a < i; ++a) {
        const double mean = sum[a] / n;
        const double var = sum2[a] / n - mean * mean;
        const double se_mean = std::sqrt(var / n);
        CHECK(std::abs(mean - proj.mean[a]) < 4.0 * se_mean);
        const double se_var = var * std::sqrt(2.0 / n);
        CHECK(std::abs(var - proj.cov_at(a, a)) < 4.0 * se_var);
        for (int b = a + 1; b < i; ++b) {
            const double cv = cross[a * i + b] / n - mean * (sum[b] / n);
            const double se_cv =
                std::sqrt((proj.cov_at(a, a) * proj.cov_at(b, b) +
                           proj.cov_at(a, b) * proj.cov_at(a, b)) /
                          n);
            CHECK(std::abs(cv - proj.cov_at(a, b)) < 4.0 * se_cv);
        }
    }
}

TEST_CASE("rectangle probability reductions", "[mvn]") {
    const auto proj = build_projection(1, kZn, kYn, kDt, kP, kO);
    const std::vector<double> lower{std::log(80.0)};
    const auto rp = rectangle_prob(proj, lower);
    const double exact =
        norm_cdf((proj.mean[0] - lower[0]) / std::sqrt(proj.cov_at(0, 0)));
    CHECK(rp.prob == Catch::Approx(exact).margin(1e-12));
    CHECK(rp.stderr_ == 0.0);

    const auto proj3 = build_projection(3, kZn, kYn, kDt, kP, kO);
    const std::vector<double> open(3, -1e30);
    CHECK(rectangle_prob(proj3, open, 20000, 5).prob == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("rectangle probability vs plain Monte Carlo", "[mvn][mc]") {
    const auto proj = build_projection(3, kZn, kYn, kDt, kP, kO);
    const std::vector<double> lower(3, std::log(80.0));
    const auto a = rectangle_prob(proj, lower, 100000, 42);
    const auto b = oracle::mc_rectangle(proj, lower, 200000, 43);
    CHECK(std::abs(a.prob - b.value) <
          3.0 * std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_));
}

TEST_CASE("rectangle probability is monotone in each bound", "[mvn]") {
    const auto proj = build_projection(3, kZn, kYn, kDt, kP, kO);
    std::vector<double> lo(3, std::log(80.0));
    const auto base = rectangle_prob(proj, lo, 100000, 7);
    for (int k = 0; k < 3; ++k) {
        auto hi = lo;
        hi[k] = std::log(85.0);
        const auto tighter = rectangle_prob(proj, hi, 100000, 7);
        CHECK(tighter.prob <= base.prob + 2.0 * (base.stderr_ + tighter.stderr_));
    }
}

TEST_CASE("reversing the component order leaves the probability unchanged", "[mvn]") {
    const auto proj = build_projection(3, kZn, kYn, kDt, kP, kO);
    ReportProjection rev;
    rev.horizon = 3;
    rev.mean = {proj.mean[2], proj.mean[1], proj.mean[0]};
    rev.cov.resize(9);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            rev.cov[a * 3 + b] = proj.cov_at(2 - a, 2 - b);
    const std::vector<double> lo{std::log(80.0), std::log(82.0), std::log(84.0)};
    const std::vector<double> lo_rev{lo[2], lo[1], lo[0]};
    const auto a = rectangle_prob(proj, lo, 200000, 99);
    const auto b = rectangle_prob(rev, lo_rev, 200000, 98);
    CHECK(std::abs(a.prob - b.prob) <
          3.0 * std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_));
}

TEST_CASE("covariance stays positive definite out to 40 steps", "[mvn]") {
    const auto proj = build_projection(40, kZn, kYn, kDt, kP, kO);
    CHECK_NOTHROW(cholesky(proj.cov, 40));
}

TEST_CASE("non positive definite matrix is rejected", "[mvn]") {
    const std::vector<double> bad{1.0, 2.0, 2.0, 1.0};
    CHECK_THROWS_AS(cholesky(bad, 2), std::runtime_error);
}
