#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>

#include "coco/first_passage.hpp"
#include "coco/math.hpp"
#include "coco/model.hpp"

namespace coco {

/// log density of Z_{t+dt} given Z_t: Gaussian with mean z_prev + m*dt and
/// variance sigma^2 dt.
[[nodiscard]] inline double log_transition_z(double z_next, double z_prev, double dt,
                                             const DriftParams& p) {
    detail::require(dt > 0.0, "log_transition_z: dt must be > 0");
    return log_gauss(z_next, z_prev + p.m * dt, p.sigma * p.sigma * dt);
}

/// log density of the AR(1) accounting noise step. With no previous noise
/// value (the first report) the mean is just mu_eps.
[[nodiscard]] inline double log_transition_u(double u_next, std::optional<double> u_prev,
                                             const ObsParams& o) noexcept {
    const double mean = u_prev ? o.kappa * *u_prev + o.mu_eps : o.mu_eps;
    return log_gauss(u_next, mean, o.sigma_eps * o.sigma_eps);
}

/// log of the unnormalized joint density of the latent log-asset values at
/// the report dates, jointly with survival above z_c through the last report:
///
///   b_n(z) = prod_i psi(z_{i-1}-z_c, z_i-z_c, sig sqrt dt_i)
///            * p_Z(z_i | z_{i-1}) * p_U(y_i - z_i | y_{i-1} - z_{i-1})
///
/// up to the report-only normalizer. Returns -inf when any coordinate is at
/// or below the barrier. z0 is the known initial log-asset value at time 0.
[[nodiscard]] inline double log_b_n(std::span<const double> path, const AccountingHistory& hist,
                                    Barrier z_c, const DriftParams& p, const ObsParams& o,
                                    double z0) {
    const std::size_t n = hist.size();
    if (path.size() != n)
        throw std::invalid_argument("log_b_n: path length must match history length");
    detail::require(z0 > z_c.level, "log_b_n: initial value must exceed the barrier");
    double acc = 0.0;
    double z_prev = z0;
    double t_prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = path[i];
        if (!(z > z_c.level)) return kNegInf;
        const double dt = hist.times[i] - t_prev;
        acc += log_bridge_no_hit_prob(z_prev - z_c.level, z - z_c.level,
                                      p.sigma * std::sqrt(dt));
        acc += log_transition_z(z, z_prev, dt, p);
        const std::optional<double> u_prev =
            i == 0 ? std::nullopt
                   : std::optional<double>(hist.log_reports[i - 1] - z_prev);
        acc += log_transition_u(hist.log_reports[i] - z, u_prev, o);
        z_prev = z;
        t_prev = hist.times[i];
    }
    return acc;
}

/// Same joint density without the survival factors: the plain conditional
/// law of the latent values given the reports, supported on all of R^n.
[[nodiscard]] inline double log_posterior_plain(std::span<const double> path,
                                                const AccountingHistory& hist,
                                                const DriftParams& p, const ObsParams& o,
                                                double z0) {
    const std::size_t n = hist.size();
    if (path.size() != n)
        throw std::invalid_argument("log_posterior_plain: path length must match history length");
    double acc = 0.0;
    double z_prev = z0;
    double t_prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = path[i];
        const double dt = hist.times[i] - t_prev;
        acc += log_transition_z(z, z_prev, dt, p);
        const std::optional<double> u_prev =
            i == 0 ? std::nullopt
                   : std::optional<double>(hist.log_reports[i - 1] - z_prev);
        acc += log_transition_u(hist.log_reports[i] - z, u_prev, o);
        z_prev = z;
        t_prev = hist.times[i];
    }
    return acc;
}

/// Sampling target for expectations against the filtered density at time t:
/// coordinates (z_1..z_n, z_t) with z_t the latent value at the valuation
/// time. When t coincides with the last report the extra coordinate is
/// dropped and the target reduces to b_n.
[[nodiscard]] inline double log_target_filtered(std::span<const double> path, double t,
                                                const AccountingHistory& hist, Barrier z_c,
                                                const DriftParams& p, const ObsParams& o,
                                                double z0) {
    const std::size_t n = hist.size();
    const double t_n = hist.last_time();
    const double lapse = t - t_n;
    if (lapse <= 1e-12) {
        if (n == 0)
            throw std::invalid_argument("log_target_filtered: no reports and t == 0");
        return log_b_n(path, hist, z_c, p, o, z0);
    }
    if (path.size() != n + 1)
        throw std::invalid_argument("log_target_filtered: expected n+1 coordinates");
    const double z_from = n == 0 ? z0 : path[n - 1];
    const double z_t = path[n];
    if (!(z_t > z_c.level) || !(z_from > z_c.level)) return kNegInf;
    double acc = n == 0 ? 0.0 : log_b_n(path.first(n), hist, z_c, p, o, z0);
    if (acc == kNegInf) return kNegInf;
    return acc + log_pre_report_density(lapse, z_t, z_from, z_c.level, p);
}

/// Sampling target for the bridged double integrals: coordinates
/// (z_1..z_n, z_t, z_T). The z_T coordinate carries the barrier-killed
/// transition over [t, T]; dividing by the survival probability makes the
/// target a proper density, and estimators re-weight by that survival.
[[nodiscard]] inline double log_target_bridged(std::span<const double> path, double t, double T,
                                               const AccountingHistory& hist, Barrier z_c,
                                               const DriftParams& p, const ObsParams& o,
                                               double z0) {
    detail::require(T > t, "log_target_bridged: T must exceed t");
    const std::size_t n = hist.size();
    const double t_n = hist.last_time();
    const bool degenerate = (t - t_n) <= 1e-12;
    const std::size_t expected = degenerate ? n + 1 : n + 2;
    if (path.size() != expected)
        throw std::invalid_argument("log_target_bridged: unexpected coordinate count");
    const double z_t = degenerate ? (n == 0 ? z0 : path[n - 1]) : path[expected - 2];
    const double z_T = path[expected - 1];
    if (!(z_T > z_c.level)) return kNegInf;
    const double head = log_target_filtered(path.first(expected - 1), t, hist, z_c, p, o, z0);
    if (head == kNegInf) return kNegInf;
    if (!(z_t > z_c.level)) return kNegInf;
    return head + log_killed_density(z_t, z_c.level, z_T, T - t, p) -
           std::log(no_hit_prob(T - t, z_t - z_c.level, p));
}

} // namespace coco
