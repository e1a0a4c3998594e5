#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "coco/accounting.hpp"
#include "coco/first_passage.hpp"
#include "coco/mcmc.hpp"
#include "coco/model.hpp"
#include "coco/mvn.hpp"

namespace coco {

struct FunctionalEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    double ess = 0.0;
};

/// Joint result for several functionals estimated on one shared sample.
struct EfReport {
    std::vector<FunctionalEstimate> estimates;
    double acceptance_rate = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<double> filtered_init(const AccountingHistory& hist, double z_c, double z0,
                                         double sigma_eps, int extra) {
    std::vector<double> init;
    init.reserve(hist.size() + extra);
    for (std::size_t i = 0; i < hist.size(); ++i)
        init.push_back(std::max(hist.log_reports[i], z_c + 3.0 * sigma_eps));
    double tail = init.empty() ? std::max(z0, z_c + 3.0 * sigma_eps) : init.back();
    for (int k = 0; k < extra; ++k) init.push_back(tail);
    return init;
}

inline std::vector<double> report_scales(const AccountingHistory& hist, const DriftParams& p,
                                         const ObsParams& o) {
    std::vector<double> scales;
    scales.reserve(hist.size());
    double t_prev = 0.0;
    for (std::size_t i = 0; i < hist.size(); ++i) {
        const double sd_prior = p.sigma * std::sqrt(hist.times[i] - t_prev);
        scales.push_back(std::min(sd_prior, o.sigma_eps));
        t_prev = hist.times[i];
    }
    return scales;
}

inline void pool_chain_stats(std::vector<std::vector<SeriesStats>>& per_chain,
                             std::vector<FunctionalEstimate>& out) {
    const std::size_t n_h = per_chain.front().size();
    const double c = static_cast<double>(per_chain.size());
    out.resize(n_h);
    for (std::size_t k = 0; k < n_h; ++k) {
        double mean = 0.0, var = 0.0, ess = 0.0;
        for (const auto& chain : per_chain) {
            mean += chain[k].mean;
            var += chain[k].stderr_ * chain[k].stderr_;
            ess += chain[k].ess;
        }
        out[k] = {mean / c, std::sqrt(var) / c, ess};
    }
}

} // namespace detail

/// Estimate expectations of h(Z_t) under the filtered conditional law of the
/// latent log-asset value at time t given the reports and survival above z_c.
/// All functionals are averaged over one shared chain per seed; standard
/// errors come from batch means.
template <typename HRange>
[[nodiscard]] inline EfReport estimate_E_f_many(const HRange& hs, double t,
                                                const AccountingHistory& hist, Barrier z_c,
                                                const DriftParams& p, const ObsParams& o,
                                                double z0, const ChainConfig& cfg) {
    hist.validate();
    cfg.validate();
    const std::size_t n = hist.size();
    const double t_n = hist.last_time();
    if (t < t_n - 1e-12)
        throw std::invalid_argument("estimate_E_f: valuation time precedes the last report");
    const bool degenerate = (t - t_n) <= 1e-12;
    if (degenerate && n == 0)
        throw std::invalid_argument("estimate_E_f: nothing to sample at t = 0 with no reports");
    const int dim = static_cast<int>(n) + (degenerate ? 0 : 1);

    const auto target = [&](std::span<const double> path) {
        return log_target_filtered(path, t, hist, z_c, p, o, z0);
    };
    const auto init = detail::filtered_init(hist, z_c.level, z0, o.sigma_eps, degenerate ? 0 : 1);
    auto scales = detail::report_scales(hist, p, o);
    if (!degenerate) scales.push_back(p.sigma * std::sqrt(t - t_n));

    EfReport rep;
    rep.seed = cfg.seed;
    std::vector<std::vector<SeriesStats>> per_chain;
    std::vector<double> hv(cfg.samples);
    for (int c = 0; c < cfg.chains; ++c) {
        ChainConfig ccfg = cfg;
        ccfg.seed = cfg.chains == 1 ? cfg.seed : derive_seed(cfg.seed, c);
        const auto chain = rw_metropolis(target, dim, init, ccfg, scales);
        rep.acceptance_rate += chain.acceptance_rate / cfg.chains;
        std::vector<SeriesStats> stats;
        for (const auto& h : hs) {
            for (long g = 0; g < chain.retained; ++g) hv[g] = h(chain.at(g, dim - 1));
            stats.push_back(batch_means(hv));
        }
        per_chain.push_back(std::move(stats));
    }
    detail::pool_chain_stats(per_chain, rep.estimates);
    return rep;
}

[[nodiscard]] inline FunctionalEstimate estimate_E_f(const std::function<double(double)>& h,
                                                     double t, const AccountingHistory& hist,
                                                     Barrier z_c, const DriftParams& p,
                                                     const ObsParams& o, double z0,
                                                     const ChainConfig& cfg) {
    const std::function<double(double)> hs[] = {h};
    return estimate_E_f_many(hs, t, hist, z_c, p, o, z0, cfg).estimates.front();
}

/// Estimate the bridged double integrals: expectations of
/// h2(Z_T) against the killed transition over [t,T], re-weighted by the
/// survival probability from the time-t coordinate. Each retained draw
/// contributes h2(z_T) * (1 - pi(T-t, z_t - z_c)).
template <typename HRange>
[[nodiscard]] inline EfReport estimate_E_f_bridge_many(const HRange& h2s, double t, double T,
                                                       const AccountingHistory& hist, Barrier z_c,
                                                       const DriftParams& p, const ObsParams& o,
                                                       double z0, const ChainConfig& cfg) {
    hist.validate();
    cfg.validate();
    detail::require(T > t, "estimate_E_f_bridge: T must exceed t");
    const std::size_t n = hist.size();
    const double t_n = hist.last_time();
    if (t < t_n - 1e-12)
        throw std::invalid_argument("estimate_E_f_bridge: valuation time precedes the last report");
    const bool degenerate = (t - t_n) <= 1e-12;
    if (degenerate && n == 0)
        throw std::invalid_argument("estimate_E_f_bridge: nothing to sample at t = 0 with no reports");
    const int dim = static_cast<int>(n) + (degenerate ? 1 : 2);

    const auto target = [&](std::span<const double> path) {
        return log_target_bridged(path, t, T, hist, z_c, p, o, z0);
    };
    const auto init = detail::filtered_init(hist, z_c.level, z0, o.sigma_eps, degenerate ? 1 : 2);
    auto scales = detail::report_scales(hist, p, o);
    if (!degenerate) scales.push_back(p.sigma * std::sqrt(t - t_n));
    scales.push_back(p.sigma * std::sqrt(T - t));

    EfReport rep;
    rep.seed = cfg.seed;
    std::vector<std::vector<SeriesStats>> per_chain;
    std::vector<double> hv(cfg.samples);
    for (int c = 0; c < cfg.chains; ++c) {
        ChainConfig ccfg = cfg;
        ccfg.seed = cfg.chains == 1 ? cfg.seed : derive_seed(cfg.seed, c);
        const auto chain = rw_metropolis(target, dim, init, ccfg, scales);
        rep.acceptance_rate += chain.acceptance_rate / cfg.chains;
        std::vector<SeriesStats> stats;
        for (const auto& h2 : h2s) {
            for (long g = 0; g < chain.retained; ++g) {
                const double z_t = chain.at(g, dim - 2);
                const double z_T = chain.at(g, dim - 1);
                hv[g] = h2(z_T) * no_hit_prob(T - t, z_t - z_c.level, p);
            }
            stats.push_back(batch_means(hv));
        }
        per_chain.push_back(std::move(stats));
    }
    detail::pool_chain_stats(per_chain, rep.estimates);
    return rep;
}

/// Survival-functional estimates plus the pieces needed to propagate their
/// Monte Carlo error through downstream linear combinations: per-batch outer
/// means (chain noise) and the independent inner standard error (rectangle
/// Monte Carlo noise).
struct SurvivalEstimates {
    std::vector<FunctionalEstimate> probs;
    std::vector<std::vector<double>> outer_batches;
    std::vector<double> inner_se;
    double acceptance_rate = 0.0;
};

/// Estimate P(xi(z_n) > bounds componentwise) averaged over the plain
/// (unkilled) posterior of the latent values given the reports, one estimate
/// per bounds vector, all sharing a single chain.
///
/// For one-dimensional rectangles the inner probability is exact. For higher
/// dimensions the mean of the projection is affine in z_n with positive
/// coefficients 1 - kappa^k whenever |kappa| < 1, so a shared set of
/// antithetic Gaussian draws reduces each draw to a scalar threshold on z_n
/// and the double average is computed by sorting both sides. Outside that
/// regime a thinned per-sample Monte Carlo fallback is used.
[[nodiscard]] inline SurvivalEstimates estimate_survival_rectangles(
    const std::vector<std::vector<double>>& bounds_list, const AccountingHistory& hist, double dt,
    const DriftParams& p, const ObsParams& o, double z0, const ChainConfig& cfg,
    long inner_pairs = 32768, int n_batches = 50) {
    hist.validate();
    cfg.validate();
    const std::size_t n = hist.size();
    if (n == 0)
        throw std::invalid_argument("estimate_survival_rectangles: at least one report required");
    if (!(dt > 0.0)) throw std::invalid_argument("estimate_survival_rectangles: dt must be > 0");

    const auto target = [&](std::span<const double> path) {
        return log_posterior_plain(path, hist, p, o, z0);
    };
    std::vector<double> init(hist.log_reports);
    std::vector<double> scales;
    double t_prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        scales.push_back(std::min(p.sigma * std::sqrt(hist.times[i] - t_prev), o.sigma_eps));
        t_prev = hist.times[i];
    }

    const auto chain = rw_metropolis(target, static_cast<int>(n), init, cfg, scales);
    const long G = chain.retained;
    std::vector<double> zn(G);
    for (long g = 0; g < G; ++g) zn[g] = chain.at(g, static_cast<int>(n) - 1);
    std::vector<double> zn_sorted(zn);
    std::sort(zn_sorted.begin(), zn_sorted.end());

    const double y_n = hist.log_reports.back();
    SurvivalEstimates out;
    out.acceptance_rate = chain.acceptance_rate;

    std::vector<double> pg(G);
    for (std::size_t idx = 0; idx < bounds_list.size(); ++idx) {
        const auto& lower = bounds_list[idx];
        const int i = static_cast<int>(lower.size());
        if (i < 1) throw std::invalid_argument("estimate_survival_rectangles: empty bounds");
        const auto proj = build_projection(i, 0.0, y_n, dt, p, o); // mean affine part via z_n = 0
        // mean of component k for latent value z: a[k] + b[k] * z
        std::vector<double> a(proj.mean), b(i);
        double kp = 1.0;
        for (int k = 0; k < i; ++k) {
            kp *= o.kappa;
            b[k] = 1.0 - kp;
        }
        double inner_se = 0.0;
        if (i == 1) {
            const double sd = std::sqrt(proj.cov_at(0, 0));
            for (long g = 0; g < G; ++g)
                pg[g] = norm_cdf((a[0] + b[0] * zn[g] - lower[0]) / sd);
        } else {
            bool monotone = true;
            for (int k = 0; k < i; ++k) monotone = monotone && b[k] > 1e-12;
            if (!monotone)
                throw std::invalid_argument(
                    "estimate_survival_rectangles: |kappa| < 1 required");
            const auto l_chol = cholesky(proj.cov, i);
            Rng rng(derive_seed(cfg.seed, 7100 + idx));
            const long n_thr = 2 * inner_pairs;
            std::vector<double> thresholds(n_thr);
            std::vector<double> u(i);
            for (long d = 0; d < inner_pairs; ++d) {
                for (int k = 0; k < i; ++k) u[k] = rng.normal();
                double s_plus = -1e300, s_minus = -1e300;
                for (int row = 0; row < i; ++row) {
                    double eta = 0.0;
                    for (int k = 0; k <= row; ++k)
                        eta += l_chol[static_cast<std::size_t>(row) * i + k] * u[k];
                    s_plus = std::max(s_plus, (lower[row] - a[row] - eta) / b[row]);
                    s_minus = std::max(s_minus, (lower[row] - a[row] + eta) / b[row]);
                }
                thresholds[2 * d] = s_plus;
                thresholds[2 * d + 1] = s_minus;
            }
            // inner noise: spread of the per-pair acceptance fractions over z
            std::vector<double> q(inner_pairs);
            for (long d = 0; d < inner_pairs; ++d) {
                const auto frac = [&](double s) {
                    const auto it = std::upper_bound(zn_sorted.begin(), zn_sorted.end(), s);
                    return static_cast<double>(zn_sorted.end() - it) / G;
                };
                q[d] = 0.5 * (frac(thresholds[2 * d]) + frac(thresholds[2 * d + 1]));
            }
            inner_se = mean_stderr(q).stderr_;
            std::sort(thresholds.begin(), thresholds.end());
            for (long g = 0; g < G; ++g) {
                const auto it =
                    std::lower_bound(thresholds.begin(), thresholds.end(), zn[g]);
                pg[g] = static_cast<double>(it - thresholds.begin()) / n_thr;
            }
        }
        const auto stats = batch_means(pg, n_batches);
        out.probs.push_back({stats.mean, std::sqrt(stats.stderr_ * stats.stderr_ +
                                                   inner_se * inner_se),
                             stats.ess});
        out.inner_se.push_back(inner_se);
        // per-batch means for downstream error propagation
        const long bs = G / n_batches;
        std::vector<double> batches(n_batches);
        for (int bch = 0; bch < n_batches; ++bch) {
            double s = 0.0;
            for (long g = bch * bs; g < (bch + 1) * bs; ++g) s += pg[g];
            batches[bch] = s / bs;
        }
        out.outer_batches.push_back(std::move(batches));
    }
    return out;
}

/// Convenience wrapper: the i-step survival family with bounds built per
/// horizon by `bounds_builder(i)`, for i = 1..i_max.
template <typename BoundsBuilder>
[[nodiscard]] inline SurvivalEstimates estimate_survival_functionals(
    int i_max, const BoundsBuilder& bounds_builder, const AccountingHistory& hist, double dt,
    const DriftParams& p, const ObsParams& o, double z0, const ChainConfig& cfg) {
    if (i_max < 1) throw std::invalid_argument("estimate_survival_functionals: i_max must be >= 1");
    std::vector<std::vector<double>> bounds;
    bounds.reserve(i_max);
    for (int i = 1; i <= i_max; ++i) bounds.push_back(bounds_builder(i));
    return estimate_survival_rectangles(bounds, hist, dt, p, o, z0, cfg);
}

} // namespace coco
