#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coco/math.hpp"
#include "coco/model.hpp"

namespace coco {

namespace detail {

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::domain_error(msg);
}

} // namespace detail

/// Probability that a Brownian motion with drift m and volatility sigma,
/// started at x > 0, hits 0 before time t:
///
///   pi(t,x) = 1 - Phi((x+mt)/(s*sqrt(t))) + exp(-2mx/s^2) Phi((-x+mt)/(s*sqrt(t)))
///
/// The reflected term is evaluated through erfcx so that large |m| x / s^2
/// never overflows.
[[nodiscard]] inline double hit_prob(double t, double x, const DriftParams& p) {
    detail::require(t > 0.0, "hit_prob: t must be > 0");
    detail::require(x > 0.0, "hit_prob: x must be > 0");
    const double st = p.sigma * std::sqrt(t);
    const double v = (x + p.m * t) / st;
    const double w = (-x + p.m * t) / st;
    double reflected;
    if (w <= 0.0) {
        // exp(-2mx/s^2) Phi(w) = erfcx(-w/sqrt2) * exp(-v^2/2) / 2
        reflected = 0.5 * erfcx(-w / kSqrt2) * std::exp(-0.5 * v * v);
    } else {
        // w > 0 forces m > 0, so the prefactor is below 1
        reflected = std::exp(-2.0 * p.m * x / (p.sigma * p.sigma)) * norm_cdf(w);
    }
    return std::clamp(norm_cdf_c(v) + reflected, 0.0, 1.0);
}

/// Survival probability 1 - pi(t,x), computed directly; near the barrier a
/// first-order expansion replaces the cancelling difference.
[[nodiscard]] inline double no_hit_prob(double t, double x, const DriftParams& p) {
    detail::require(t > 0.0, "no_hit_prob: t must be > 0");
    detail::require(x > 0.0, "no_hit_prob: x must be > 0");
    const double st = p.sigma * std::sqrt(t);
    const double v = (x + p.m * t) / st;
    const double w = (-x + p.m * t) / st;
    double reflected;
    if (w <= 0.0) {
        reflected = 0.5 * erfcx(-w / kSqrt2) * std::exp(-0.5 * v * v);
    } else {
        reflected = std::exp(-2.0 * p.m * x / (p.sigma * p.sigma)) * norm_cdf(w);
    }
    const double direct = norm_cdf(v) - reflected;
    if (direct > 1e-12) return std::min(direct, 1.0);
    // slope of the survival probability in x at the barrier
    const double a = p.m * std::sqrt(t) / p.sigma;
    const double slope = 2.0 * norm_pdf(a) / st + (2.0 * p.m / (p.sigma * p.sigma)) * norm_cdf(a);
    return std::max(direct, x * slope);
}

/// Probability that a Brownian bridge from z0 > 0 to x > 0 over scale^2 = s^2 t
/// stays above 0:  psi = 1 - exp(-2 z0 x / scale^2).
[[nodiscard]] inline double bridge_no_hit_prob(double z0, double x, double scale) {
    detail::require(z0 > 0.0, "bridge_no_hit_prob: z0 must be > 0");
    detail::require(x > 0.0, "bridge_no_hit_prob: x must be > 0");
    detail::require(scale > 0.0, "bridge_no_hit_prob: scale must be > 0");
    return -std::expm1(-2.0 * z0 * x / (scale * scale));
}

/// log of bridge_no_hit_prob; exactly -inf only when an endpoint touches 0.
[[nodiscard]] inline double log_bridge_no_hit_prob(double z0, double x, double scale) noexcept {
    if (!(z0 > 0.0) || !(x > 0.0)) return kNegInf;
    return log1mexp(-2.0 * z0 * x / (scale * scale));
}

/// Joint probability that the drifted path started at x > 0 stays above 0 on
/// [0,t] and ends above y:
///
///   pitilde(t,x,y) = Phi((x-y+mt)/(s sqrt t)) - exp(-2mx/s^2) Phi((-x-y+mt)/(s sqrt t))
///
/// For y <= 0 the end constraint is implied by survival and the value is
/// 1 - pi(t,x).
[[nodiscard]] inline double min_tail_joint(double t, double x, double y, const DriftParams& p) {
    detail::require(t > 0.0, "min_tail_joint: t must be > 0");
    detail::require(x > 0.0, "min_tail_joint: x must be > 0");
    if (y <= 0.0) return no_hit_prob(t, x, p);
    const double st = p.sigma * std::sqrt(t);
    const double v = (x - y + p.m * t) / st;
    const double w = (-x - y + p.m * t) / st;
    double reflected;
    if (w <= 0.0) {
        const double expo = -0.5 * w * w - 2.0 * p.m * x / (p.sigma * p.sigma);
        reflected = 0.5 * erfcx(-w / kSqrt2) * std::exp(expo);
    } else {
        reflected = std::exp(-2.0 * p.m * x / (p.sigma * p.sigma)) * norm_cdf(w);
    }
    return std::clamp(norm_cdf(v) - reflected, 0.0, 1.0);
}

/// Unnormalized barrier-killed transition density: the density in z of
/// {Z_t in dz, min_{[0,t]} Z > barrier} for a path started at x. Integrates
/// over (barrier, inf) to 1 - pi(t, x - barrier).
[[nodiscard]] inline double log_killed_density(double x, double barrier, double z, double t2,
                                               const DriftParams& p) {
    detail::require(t2 > 0.0, "killed_density: t2 must be > 0");
    detail::require(x > barrier, "killed_density: x must exceed the barrier");
    if (!(z > barrier)) return kNegInf;
    const double st = p.sigma * std::sqrt(t2);
    return log_bridge_no_hit_prob(x - barrier, z - barrier, st) +
           log_gauss(z, x + p.m * t2, p.sigma * p.sigma * t2);
}

[[nodiscard]] inline double killed_density(double x, double barrier, double z, double t2,
                                           const DriftParams& p) {
    detail::require(z > barrier, "killed_density: z must exceed the barrier");
    return std::exp(log_killed_density(x, barrier, z, t2, p));
}

/// Density of Z_t given survival above the barrier up to t, for a path
/// started at z0 (the normalized killed density).
[[nodiscard]] inline double log_pre_report_density(double t, double x, double z0, double barrier,
                                                   const DriftParams& p) {
    detail::require(t > 0.0, "pre_report_density: t must be > 0");
    detail::require(z0 > barrier, "pre_report_density: z0 must exceed the barrier");
    if (!(x > barrier)) return kNegInf;
    return log_killed_density(z0, barrier, x, t, p) -
           std::log(no_hit_prob(t, z0 - barrier, p));
}

[[nodiscard]] inline double pre_report_density(double t, double x, double z0, double barrier,
                                               const DriftParams& p) {
    detail::require(x > barrier, "pre_report_density: x must exceed the barrier");
    return std::exp(log_pre_report_density(t, x, z0, barrier, p));
}

/// Probability that the path started at x does not hit z before t1 but does
/// hit y before t2, for x > y > z. Two branches meeting continuously at
/// t1 == t2; the t1 > t2 branch integrates the killed density at t2.
[[nodiscard]] inline double joint_barrier_prob(double x, double y, double z, double t1, double t2,
                                               const DriftParams& p) {
    detail::require(x > y && y > z, "joint_barrier_prob: need x > y > z");
    detail::require(t1 > 0.0 && t2 > 0.0, "joint_barrier_prob: times must be > 0");
    if (t1 <= t2) {
        return hit_prob(t2, x - y, p) - hit_prob(t1, x - z, p);
    }
    const double upper = x + p.m * t2 + 14.0 * p.sigma * std::sqrt(t2);
    const double inner = integrate(
        [&](double zt) {
            const double f = killed_density(x, y, zt, t2, p);
            return f * no_hit_prob(t1 - t2, zt - z, p);
        },
        y, std::max(upper, y + 1e-8), 1e-11);
    return 1.0 - hit_prob(t1, x - z, p) - inner;
}

} // namespace coco
