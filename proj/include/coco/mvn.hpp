#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "coco/math.hpp"
#include "coco/model.hpp"
#include "coco/rng.hpp"

namespace coco {

/// Conditional multivariate normal law of the next `horizon` reports given
/// the latest latent value z_n and report y_n. Ordering is chronological:
/// component k-1 is the (n+k)-th report.
struct ReportProjection {
    int horizon = 0;
    std::vector<double> mean;
    std::vector<double> cov; ///< row-major horizon x horizon

    [[nodiscard]] double cov_at(int a, int b) const noexcept {
        return cov[static_cast<std::size_t>(a) * horizon + b];
    }
};

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix
/// (row-major). Throws if the matrix is not positive definite.
[[nodiscard]] inline std::vector<double> cholesky(std::span<const double> a, int n) {
    std::vector<double> l(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[static_cast<std::size_t>(i) * n + j];
            for (int k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
            if (i == j) {
                if (!(s > 0.0))
                    throw std::runtime_error("cholesky: matrix is not positive definite");
                l[i * n + i] = std::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    return l;
}

/// Build the conditional law of the next i reports. The k-th future report is
///
///   Y_{n+k} = z_n + sum of k latent increments + kappa^k (y_n - z_n)
///             + sum_{j=1..k} kappa^{k-j} eps_{n+j},
///
/// so the mean is affine in z_n and the covariance is M Diag(...) M^T with M
/// mapping the 2i independent Gaussians (increments, innovations) to reports.
[[nodiscard]] inline ReportProjection build_projection(int i, double z_n, double y_n, double dt,
                                                       const DriftParams& p, const ObsParams& o) {
    if (i < 1) throw std::invalid_argument("build_projection: horizon must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("build_projection: dt must be > 0");
    ReportProjection proj;
    proj.horizon = i;
    proj.mean.resize(i);
    proj.cov.assign(static_cast<std::size_t>(i) * i, 0.0);

    std::vector<double> kpow(i + 1);
    kpow[0] = 1.0;
    for (int k = 1; k <= i; ++k) kpow[k] = kpow[k - 1] * o.kappa;

    for (int k = 1; k <= i; ++k) {
        double eps_mean = 0.0;
        for (int j = 1; j <= k; ++j) eps_mean += kpow[k - j];
        proj.mean[k - 1] = z_n * (1.0 - kpow[k]) + kpow[k] * y_n + k * p.m * dt +
                           o.mu_eps * eps_mean;
    }
    const double vz = p.sigma * p.sigma * dt;
    const double ve = o.sigma_eps * o.sigma_eps;
    for (int a = 1; a <= i; ++a) {
        for (int b = a; b <= i; ++b) {
            double c = vz * a; // shared latent increments
            for (int j = 1; j <= a; ++j) c += ve * kpow[a - j] * kpow[b - j];
            proj.cov[static_cast<std::size_t>(a - 1) * i + (b - 1)] = c;
            proj.cov[static_cast<std::size_t>(b - 1) * i + (a - 1)] = c;
        }
    }
    return proj;
}

struct RectangleProb {
    double prob = 0.0;
    double stderr_ = 0.0;
};

/// P(xi > lower componentwise) for xi ~ N(mean, cov). Exact univariate
/// reduction for horizon 1; Cholesky Monte Carlo with antithetic pairs
/// otherwise (stderr over pair means).
[[nodiscard]] inline RectangleProb rectangle_prob(const ReportProjection& proj,
                                                  std::span<const double> lower,
                                                  long n_draws = 100000,
                                                  std::uint64_t seed = 977001) {
    const int i = proj.horizon;
    if (static_cast<int>(lower.size()) != i)
        throw std::invalid_argument("rectangle_prob: bound count must match horizon");
    if (i == 1) {
        const double sd = std::sqrt(proj.cov_at(0, 0));
        return {norm_cdf((proj.mean[0] - lower[0]) / sd), 0.0};
    }
    const auto l = cholesky(proj.cov, i);
    Rng rng(seed);
    const long pairs = std::max<long>(1, n_draws / 2);
    double sum = 0.0, sumsq = 0.0;
    std::vector<double> u(i), v(i);
    for (long d = 0; d < pairs; ++d) {
        for (int k = 0; k < i; ++k) u[k] = rng.normal();
        int in_plus = 1, in_minus = 1;
        for (int a = 0; a < i; ++a) {
            double s = 0.0;
            for (int k = 0; k <= a; ++k) s += l[static_cast<std::size_t>(a) * i + k] * u[k];
            if (proj.mean[a] + s <= lower[a]) in_plus = 0;
            if (proj.mean[a] - s <= lower[a]) in_minus = 0;
            if (!in_plus && !in_minus) break;
        }
        const double pair = 0.5 * (in_plus + in_minus);
        sum += pair;
        sumsq += pair * pair;
    }
    const double mean = sum / pairs;
    const double var = pairs > 1 ? (sumsq - pairs * mean * mean) / (pairs - 1.0) : 0.0;
    return {mean, std::sqrt(std::max(var, 0.0) / pairs)};
}

} // namespace coco
