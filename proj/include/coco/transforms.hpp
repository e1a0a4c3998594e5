#pragma once

#include <cmath>

#include "coco/first_passage.hpp"
#include "coco/math.hpp"
#include "coco/model.hpp"

namespace coco {

/// Discounted first-passage transform over a finite horizon H:
///
///   I(x) = int_0^H e^{-ru} d_u(1 - pi(u, x - barrier)) du = -E[e^{-r tau} 1{tau <= H}]
///
/// Closed form: with a = x - barrier and s = sqrt(m^2 + 2 r sigma^2),
///
///   I = -exp(-a(m+s)/sig^2) PhiC((a - sH)/(sig sqrt H))
///       -exp(-a(m-s)/sig^2) PhiC((a + sH)/(sig sqrt H)).
///
/// The second prefactor grows like exp(+a s / sig^2); both terms share the
/// exponent E0 = -(a^2 + s^2 H^2)/(2 sig^2 H) - a m / sig^2 once the Phi tail
/// is pulled out through erfcx, which is how the growing branch is evaluated.
[[nodiscard]] inline double discounted_hitting_transform(double x, Barrier barrier, double horizon,
                                                         double r, const DriftParams& p) {
    detail::require(x > barrier.level, "discounted_hitting_transform: x must exceed the barrier");
    detail::require(horizon >= 0.0, "discounted_hitting_transform: horizon must be >= 0");
    detail::require(r >= 0.0, "discounted_hitting_transform: r must be >= 0");
    if (horizon == 0.0) return 0.0;
    const double sig2 = p.sigma * p.sigma;
    const double a = x - barrier.level;
    const double s = std::sqrt(p.m * p.m + 2.0 * r * sig2);
    const double sqh = p.sigma * std::sqrt(horizon);
    const double d_minus = (a - s * horizon) / sqh;
    const double d_plus = (a + s * horizon) / sqh;
    const double term1 = -std::exp(-a * (p.m + s) / sig2) * norm_cdf_c(d_minus);
    const double e0 = -(a * a + s * s * horizon * horizon) / (2.0 * sig2 * horizon) - a * p.m / sig2;
    const double term2 = -0.5 * erfcx(d_plus / kSqrt2) * std::exp(e0);
    const double val = term1 + term2;
    return val < -1.0 ? -1.0 : (val > 0.0 ? 0.0 : val);
}

/// Discounted survival annuity over a finite horizon:
///
///   Itilde(x) = int_0^H e^{-ru} (1 - pi(u, x - barrier)) du
///             = -(1/r) e^{-rH} (1 - pi(H, x-barrier)) + 1/r + I(x)/r.
///
/// Requires r > 0; for r = 0 use the time-integral of the survival
/// probability directly.
[[nodiscard]] inline double discounted_survival_annuity(double x, Barrier barrier, double horizon,
                                                        double r, const DriftParams& p) {
    detail::require(r > 0.0, "discounted_survival_annuity: r must be > 0 (integrate survival directly for r = 0)");
    detail::require(x > barrier.level, "discounted_survival_annuity: x must exceed the barrier");
    detail::require(horizon >= 0.0, "discounted_survival_annuity: horizon must be >= 0");
    if (horizon == 0.0) return 0.0;
    const double surv = no_hit_prob(horizon, x - barrier.level, p);
    const double i_val = discounted_hitting_transform(x, barrier, horizon, r, p);
    const double val = (1.0 - std::exp(-r * horizon) * surv + i_val) / r;
    const double cap = -std::expm1(-r * horizon) / r;
    return val < 0.0 ? 0.0 : (val > cap ? cap : val);
}

/// Perpetual-horizon discounted first-passage transform:
///
///   J(x) = -exp(-(m (x-b) + (x-b) sqrt(m^2 + 2 r sig^2)) / sig^2) = -E[e^{-r tau}]
[[nodiscard]] inline double perpetual_hit_transform(double x, Barrier barrier, double r,
                                                    const DriftParams& p) {
    detail::require(x > barrier.level, "perpetual_hit_transform: x must exceed the barrier");
    detail::require(r >= 0.0, "perpetual_hit_transform: r must be >= 0");
    const double sig2 = p.sigma * p.sigma;
    const double a = x - barrier.level;
    const double s = std::sqrt(p.m * p.m + 2.0 * r * sig2);
    return -std::exp(-a * (p.m + s) / sig2);
}

/// Perpetual discounted survival annuity: Jtilde = 1/r + J/r, in [0, 1/r].
[[nodiscard]] inline double perpetual_survival_annuity(double x, Barrier barrier, double r,
                                                       const DriftParams& p) {
    detail::require(r > 0.0, "perpetual_survival_annuity: r must be > 0");
    return (1.0 + perpetual_hit_transform(x, barrier, r, p)) / r;
}

} // namespace coco
