#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace coco {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794; // 1/sqrt(2*pi)
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178; // log(sqrt(2*pi))
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrtPi = 0.56418958354775628695; // 1/sqrt(pi)
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Standard normal density.
[[nodiscard]] inline double norm_pdf(double x) noexcept {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

/// log of the standard normal density.
[[nodiscard]] inline double log_norm_pdf(double x) noexcept {
    return -0.5 * x * x - kLogSqrt2Pi;
}

/// Standard normal CDF via erfc, accurate in both tails.
[[nodiscard]] inline double norm_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / kSqrt2);
}

/// Upper tail P(N(0,1) > x).
[[nodiscard]] inline double norm_cdf_c(double x) noexcept {
    return 0.5 * std::erfc(x / kSqrt2);
}

/// Scaled complementary error function exp(x^2) * erfc(x).
///
/// Direct product up to x = 26 (erfc is still normal there); Lentz-style
/// backward continued fraction beyond, where exp(x^2) would overflow.
[[nodiscard]] inline double erfcx(double x) noexcept {
    if (x < 0.0) {
        // erfcx(-x) = 2 exp(x^2) - erfcx(x); overflows to +inf for x < -26.6
        return 2.0 * std::exp(x * x) - erfcx(-x);
    }
    if (x <= 26.0) {
        return std::exp(x * x) * std::erfc(x);
    }
    // erfcx(x) = (1/sqrt(pi)) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    double f = 0.0;
    for (int k = 30; k >= 1; --k) {
        f = (0.5 * k) / (x + f);
    }
    return kInvSqrtPi / (x + f);
}

/// log(1 - exp(u)) for u <= 0, stable near both endpoints.
[[nodiscard]] inline double log1mexp(double u) noexcept {
    if (u >= 0.0) return kNegInf;
    constexpr double kLn2 = 0.6931471805599453;
    return u > -kLn2 ? std::log(-std::expm1(u)) : std::log1p(-std::exp(u));
}

/// Gaussian log-density with mean mu and variance var.
[[nodiscard]] inline double log_gauss(double x, double mu, double var) noexcept {
    const double d = x - mu;
    return -0.5 * d * d / var - 0.5 * std::log(var) - kLogSqrt2Pi;
}

namespace detail {

// 15-point Kronrod nodes/weights on [-1,1] with the embedded 7-point Gauss rule.
inline constexpr double kKronrodNodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,               0.207784955007898,
    0.405845151377397,  0.586087235467691, 0.741531185599394,
    0.864864423359769,  0.949107912342759, 0.991455371120813};
inline constexpr double kKronrodWeights[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double kGaussWeights[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870};

template <typename F>
inline std::pair<double, double> gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double kron = 0.0, gauss = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double v = f(c + h * kKronrodNodes[i]);
        kron += kKronrodWeights[i] * v;
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * v;
    }
    return {kron * h, std::abs(kron - gauss) * h};
}

template <typename F>
inline double gk_adaptive(const F& f, double a, double b, double tol, int depth) {
    auto [val, err] = gk15(f, a, b);
    if (err <= tol || depth >= 48) return val;
    const double c = 0.5 * (a + b);
    return gk_adaptive(f, a, c, 0.5 * tol, depth + 1) +
           gk_adaptive(f, c, b, 0.5 * tol, depth + 1);
}

} // namespace detail

/// Adaptive Gauss-Kronrod quadrature of f on [a,b] to absolute tolerance tol.
template <typename F>
[[nodiscard]] inline double integrate(const F& f, double a, double b, double tol = 1e-10) {
    if (!(b > a)) return 0.0;
    return detail::gk_adaptive(f, a, b, tol, 0);
}

/// Gauss-Legendre nodes and weights on [-1,1], computed by Newton iteration.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) : nodes(n), weights(n) {
        for (int i = 0; i < n; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

/// Mean and standard error of the mean of a sample.
struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

[[nodiscard]] inline MeanStderr mean_stderr(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n == 0) return {};
    double s = 0.0;
    for (double x : xs) s += x;
    const double m = s / static_cast<double>(n);
    if (n == 1) return {m, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / (static_cast<double>(n) * (n - 1.0)))};
}

} // namespace coco
