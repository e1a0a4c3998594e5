#pragma once

// Independent simulation oracles. Everything here re-derives the survival
// weights, crossing probabilities, and transforms inline from the model
// definition; the only machinery shared with the analytic modules is the
// primitive Gaussian pdf and the data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "coco/math.hpp"
#include "coco/model.hpp"
#include "coco/mvn.hpp"
#include "coco/pricing.hpp"
#include "coco/rng.hpp"

namespace coco::oracle {

struct SimConfig {
    long n_paths = 500000;
    double grid_step = 1e-3;
    std::uint64_t seed = 4242;
    double horizon_truncation_eps = 1e-6;
    int batches = 64;
    int threads = 0; ///< 0 = hardware concurrency

    void validate() const {
        if (n_paths < 1) throw std::invalid_argument("SimConfig: n_paths must be >= 1");
        if (!(grid_step > 0.0)) throw std::invalid_argument("SimConfig: grid_step must be > 0");
        if (!(horizon_truncation_eps > 0.0 && horizon_truncation_eps < 1.0))
            throw std::invalid_argument("SimConfig: horizon_truncation_eps must lie in (0,1)");
        if (batches < 1) throw std::invalid_argument("SimConfig: batches must be >= 1");
    }
};

struct McResult {
    double value = 0.0;
    double stderr_ = 0.0;
    double ess = 0.0;
};

namespace detail {

/// Fill out[i] for i in [0, n) using per-batch RNG streams; batches may run
/// on several threads, the batch layout and hence the result never change.
template <typename Body> // Body: void(Rng&, long path_index)
inline void run_batched(long n, std::uint64_t seed, int batches, int threads, const Body& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    const long per = (n + batches - 1) / batches;
    auto run_batch = [&](int b) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        const long lo = b * per;
        const long hi = std::min(n, lo + per);
        for (long i = lo; i < hi; ++i) body(rng, i);
    };
    if (threads == 1) {
        for (int b = 0; b < batches; ++b) run_batch(b);
        return;
    }
    std::vector<std::thread> pool;
    for (int tIdx = 0; tIdx < threads; ++tIdx)
        pool.emplace_back([&, tIdx] {
            for (int b = tIdx; b < batches; b += threads) run_batch(b);
        });
    for (auto& th : pool) th.join();
}

/// Probability that a Brownian bridge between two points above a barrier
/// dips to the barrier; 1 if an endpoint is at or below it.
[[nodiscard]] inline double cross_prob(double a, double b, double sig2h) noexcept {
    if (a <= 0.0 || b <= 0.0) return 1.0;
    const double e = 2.0 * a * b / sig2h;
    return e > 40.0 ? 0.0 : std::exp(-e);
}

[[nodiscard]] inline double gauss_pdf(double x, double mean, double sd) noexcept {
    const double z = (x - mean) / sd;
    return kInvSqrt2Pi * std::exp(-0.5 * z * z) / sd;
}

/// First-passage probability of the drifted path, written out locally.
[[nodiscard]] inline double hit_prob_formula(double t, double x, double m, double sigma) noexcept {
    const double st = sigma * std::sqrt(t);
    return 1.0 - 0.5 * std::erfc(-(x + m * t) / (st * kSqrt2)) +
           std::exp(-2.0 * m * x / (sigma * sigma)) * 0.5 * std::erfc((x - m * t) / (st * kSqrt2));
}

/// Laplace transform of the first-passage time to a barrier below, local copy.
[[nodiscard]] inline double laplace_hit(double gap, double r, double m, double sigma) noexcept {
    const double s2 = sigma * sigma;
    return std::exp(-gap * (m + std::sqrt(m * m + 2.0 * r * s2)) / s2);
}

[[nodiscard]] inline McResult plain_stats(const std::vector<double>& xs) {
    const auto ms = mean_stderr(xs);
    return {ms.mean, ms.stderr_, static_cast<double>(xs.size())};
}

} // namespace detail

/// P(path from x > 0 hits 0 before t), by bridge-corrected path simulation.
/// The per-interval crossing probabilities are exact for this process, so
/// the step count affects only the variance, not the bias.
[[nodiscard]] inline McResult fp_hit_prob_mc(double t, double x, const DriftParams& p,
                                             long n_paths, int n_steps, std::uint64_t seed,
                                             int batches = 64, int threads = 1) {
    std::vector<double> vals(n_paths);
    const double h = t / n_steps;
    const double sh = p.sigma * std::sqrt(h);
    const double sig2h = p.sigma * p.sigma * h;
    detail::run_batched(n_paths, seed, batches, threads, [&](Rng& rng, long i) {
        double z = x, w = 1.0;
        for (int k = 0; k < n_steps; ++k) {
            const double zn = z + p.m * h + sh * rng.normal();
            w *= 1.0 - detail::cross_prob(z, zn, sig2h);
            if (w == 0.0) break;
            z = zn;
        }
        vals[i] = 1.0 - w;
    });
    return detail::plain_stats(vals);
}

/// P(path survives above 0 on [0,t] and ends above y), same scheme.
[[nodiscard]] inline McResult fp_min_tail_mc(double t, double x, double y, const DriftParams& p,
                                             long n_paths, int n_steps, std::uint64_t seed,
                                             int batches = 64, int threads = 1) {
    std::vector<double> vals(n_paths);
    const double h = t / n_steps;
    const double sh = p.sigma * std::sqrt(h);
    const double sig2h = p.sigma * p.sigma * h;
    detail::run_batched(n_paths, seed, batches, threads, [&](Rng& rng, long i) {
        double z = x, w = 1.0;
        for (int k = 0; k < n_steps; ++k) {
            const double zn = z + p.m * h + sh * rng.normal();
            w *= 1.0 - detail::cross_prob(z, zn, sig2h);
            if (w == 0.0) break;
            z = zn;
        }
        vals[i] = z > y ? w : 0.0;
    });
    return detail::plain_stats(vals);
}

/// P(pinned bridge from z0 to x with total spread `scale` stays above 0).
[[nodiscard]] inline McResult bridge_stay_mc(double z0, double x, double scale, long n_paths,
                                             int n_steps, std::uint64_t seed, int batches = 64,
                                             int threads = 1) {
    std::vector<double> vals(n_paths);
    const double h = 1.0 / n_steps;
    const double var_rate = scale * scale;
    detail::run_batched(n_paths, seed, batches, threads, [&](Rng& rng, long i) {
        double v = z0, w = 1.0;
        for (int k = 0; k < n_steps; ++k) {
            const double s = k * h;
            const double remain = 1.0 - s;
            double vn;
            if (k == n_steps - 1) {
                vn = x;
            } else {
                const double mean = v + (x - v) * h / remain;
                const double var = var_rate * h * (remain - h) / remain;
                vn = mean + std::sqrt(var) * rng.normal();
            }
            w *= 1.0 - detail::cross_prob(v, vn, var_rate * h);
            if (w == 0.0) break;
            v = vn;
        }
        vals[i] = w;
    });
    return detail::plain_stats(vals);
}

/// Weighted bin masses of the barrier-killed endpoint distribution: paths
/// from z0, killed at `barrier`, observed at time t. Returns one McResult per
/// bin (mass, not density) plus the total surviving mass in `total`.
[[nodiscard]] inline std::vector<McResult> killed_bin_mass_mc(
    double t, double z0, double barrier, const std::vector<double>& bin_edges,
    const DriftParams& p, long n_paths, int n_steps, std::uint64_t seed, McResult* total,
    int batches = 64, int threads = 1) {
    std::vector<double> w_all(n_paths);
    std::vector<int> bin_of(n_paths);
    const double h = t / n_steps;
    const double sh = p.sigma * std::sqrt(h);
    const double sig2h = p.sigma * p.sigma * h;
    detail::run_batched(n_paths, seed, batches, threads, [&](Rng& rng, long i) {
        double z = z0, w = 1.0;
        for (int k = 0; k < n_steps; ++k) {
            const double zn = z + p.m * h + sh * rng.normal();
            w *= 1.0 - detail::cross_prob(z - barrier, zn - barrier, sig2h);
            if (w == 0.0) break;
            z = zn;
        }
        w_all[i] = w;
        const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), z);
        bin_of[i] = it == bin_edges.begin() || it == bin_edges.end()
                        ? -1
                        : static_cast<int>(it - bin_edges.begin()) - 1;
    });
    std::vector<McResult> out(bin_edges.size() - 1);
    std::vector<double> tmp(n_paths);
    for (std::size_t b = 0; b + 1 < bin_edges.size(); ++b) {
        for (long i = 0; i < n_paths; ++i)
            tmp[i] = bin_of[i] == static_cast<int>(b) ? w_all[i] : 0.0;
        out[b] = detail::plain_stats(tmp);
    }
    if (total) *total = detail::plain_stats(w_all);
    return out;
}

/// P(no hit of lower barrier z before t1, but hit of y before t2), x > y > z.
[[nodiscard]] inline McResult two_barrier_mc(double x, double y, double z, double t1, double t2,
                                             const DriftParams& p, long n_paths, int n_steps,
                                             std::uint64_t seed, int batches = 64,
                                             int threads = 1) {
    std::vector<double> vals(n_paths);
    const double t_lo = std::min(t1, t2);
    const double t_hi = std::max(t1, t2);
    const int k1 = std::max(1, static_cast<int>(std::lround(n_steps * t_lo / t_hi)));
    const int k2 = std::max(1, n_steps - k1);
    const double h1 = t_lo / k1;
    const double h2 = (t_hi - t_lo) / k2;
    detail::run_batched(n_paths, seed, batches, threads, [&](Rng& rng, long i) {
        double cur = x;
        double w_no_z = 1.0;  // stays above z through t1
        double w_joint = 1.0; // stays above y to t2, then above z to t1 (t1 > t2 case)
                              // or stays above y through t2 (t1 <= t2 case)
        const double s2h1 = p.sigma * p.sigma * h1;
        const double sh1 = p.sigma * std::sqrt(h1);
        for (int k = 0; k < k1; ++k) {
            const double nxt = cur + p.m * h1 + sh1 * rng.normal();
            w_joint *= 1.0 - detail::cross_prob(cur - y, nxt - y, s2h1);
            w_no_z *= 1.0 - detail::cross_prob(cur - z, nxt - z, s2h1);
            cur = nxt;
        }
        const double s2h2 = p.sigma * p.sigma * h2;
        const double sh2 = p.sigma * std::sqrt(h2);
        for (int k = 0; k < k2; ++k) {
            const double nxt = cur + p.m * h2 + sh2 * rng.normal();
            const double fy = 1.0 - detail::cross_prob(cur - y, nxt - y, s2h2);
            const double fz = 1.0 - detail::cross_prob(cur - z, nxt - z, s2h2);
            if (t1 <= t2) {
                w_joint *= fy; // second leg only constrains the y barrier
            } else {
                w_joint *= fz;
                w_no_z *= fz;
            }
            cur = nxt;
        }
        vals[i] = w_no_z - w_joint;
    });
    return detail::plain_stats(vals);
}

/// E[e^{-r tau} 1{tau <= horizon}] for the first passage to `barrier`,
/// with steps sized by the distance to the barrier (crossing corrections are
/// exact at any step, so coarse steps far away cost nothing).
[[nodiscard]] inline McResult discounted_hit_mc(double x, double barrier, double horizon, double r,
                                                const DriftParams& p, long n_paths,
                                                double h_min, double h_max, std::uint64_t seed,
                                                int batches = 64, int threads = 1) {
    std::vector<double> vals(n_paths);
    detail::run_batched(n_paths, seed, batches, threads, [&](Rng& rng, long i) {
        double z = x, w = 1.0, t = 0.0, acc = 0.0;
        while (t < horizon && w > 1e-14) {
            const double gap = (z - barrier) / (5.0 * p.sigma);
            double h = std::clamp(gap * gap, h_min, h_max);
            h = std::min(h, horizon - t);
            const double zn = z + p.m * h + p.sigma * std::sqrt(h) * rng.normal();
            const double pc = detail::cross_prob(z - barrier, zn - barrier, p.sigma * p.sigma * h);
            if (pc > 0.0) {
                acc += w * pc * std::exp(-r * (t + 0.5 * h));
                w *= 1.0 - pc;
            }
            z = zn;
            t += h;
            if (std::exp(-r * t) * w < 1e-12) break;
        }
        vals[i] = acc;
    });
    return detail::plain_stats(vals);
}

/// E[int_0^H e^{-ru} 1{alive at u} du] by trapezoid on a fixed fine grid.
[[nodiscard]] inline McResult survival_annuity_mc(double x, double barrier, double horizon,
                                                  double r, const DriftParams& p, long n_paths,
                                                  int n_steps, std::uint64_t seed,
                                                  int batches = 64, int threads = 1) {
    std::vector<double> vals(n_paths);
    const double h = horizon / n_steps;
    const double sh = p.sigma * std::sqrt(h);
    const double sig2h = p.sigma * p.sigma * h;
    detail::run_batched(n_paths, seed, batches, threads, [&](Rng& rng, long i) {
        double z = x, w = 1.0, acc = 0.0;
        for (int k = 0; k < n_steps; ++k) {
            const double zn = z + p.m * h + sh * rng.normal();
            const double wn = w * (1.0 - detail::cross_prob(z - barrier, zn - barrier, sig2h));
            const double du = (std::exp(-r * k * h) - std::exp(-r * (k + 1) * h)) / r;
            acc += 0.5 * (w + wn) * du;
            w = wn;
            z = zn;
            if (w < 1e-14) break;
        }
        vals[i] = acc;
    });
    return detail::plain_stats(vals);
}

/// Self-normalized importance-sampling estimate of the filtered expectation
/// E_f[h(Z_t)]: latent values drawn from the unconditioned Gaussian prior,
/// weighted by the report likelihoods and the inter-report survival factors,
/// with the final stub carrying the survival-normalized killed step to t.
[[nodiscard]] inline McResult is_expectation_f(const std::function<double(double)>& h, double t,
                                               const AccountingHistory& hist, double z_c,
                                               const ModelParams& mp, double z0,
                                               const SimConfig& cfg) {
    hist.validate();
    cfg.validate();
    const std::size_t n = hist.size();
    const double t_n = hist.last_time();
    const bool stub = (t - t_n) > 1e-12;
    const double m = mp.drift.m;
    const double sigma = mp.drift.sigma;
    const double kappa = mp.obs.kappa;
    const double mu_e = mp.obs.mu_eps;
    const double sd_e = mp.obs.sigma_eps;

    std::vector<double> ws(cfg.n_paths), hs(cfg.n_paths);
    detail::run_batched(cfg.n_paths, cfg.seed, cfg.batches, cfg.threads, [&](Rng& rng, long i) {
        double w = 1.0;
        double z_prev = z0;
        double t_prev = 0.0;
        double u_prev = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double dt = hist.times[k] - t_prev;
            const double z = z_prev + m * dt + sigma * std::sqrt(dt) * rng.normal();
            w *= 1.0 - detail::cross_prob(z_prev - z_c, z - z_c, sigma * sigma * dt);
            const double u_mean = k == 0 ? mu_e : kappa * u_prev + mu_e;
            const double u = hist.log_reports[k] - z;
            w *= detail::gauss_pdf(u, u_mean, sd_e);
            if (w == 0.0) break;
            u_prev = u;
            z_prev = z;
            t_prev = hist.times[k];
        }
        double x = z_prev;
        if (w > 0.0 && stub) {
            const double dt = t - t_n;
            x = z_prev + m * dt + sigma * std::sqrt(dt) * rng.normal();
            w *= 1.0 - detail::cross_prob(z_prev - z_c, x - z_c, sigma * sigma * dt);
            if (w > 0.0)
                w /= 1.0 - detail::hit_prob_formula(dt, z_prev - z_c, m, sigma);
        }
        ws[i] = w;
        hs[i] = w > 0.0 ? h(x) : 0.0;
    });

    double sw = 0.0, sw2 = 0.0, swh = 0.0;
    for (long i = 0; i < cfg.n_paths; ++i) {
        sw += ws[i];
        sw2 += ws[i] * ws[i];
        swh += ws[i] * hs[i];
    }
    if (!(sw > 0.0)) throw std::runtime_error("is_expectation_f: all importance weights vanished");
    const double est = swh / sw;
    const double ess = sw * sw / sw2;
    if (ess < 100.0)
        throw std::runtime_error("is_expectation_f: importance weights degenerate (ESS < 100)");
    double num = 0.0;
    for (long i = 0; i < cfg.n_paths; ++i) {
        const double d = ws[i] * (hs[i] - est);
        num += d * d;
    }
    return {est, std::sqrt(num) / sw, ess};
}

enum class Product { pwd_reg, pwd_reg_mda, converter, pwd_acc, pwd_acc_mda };

/// Direct cashflow simulation of each product: posterior draw of the history
/// by importance sampling, then a forward path on a fine grid with exact
/// per-interval crossing corrections (regulatory triggers) or exact report
/// draws (accounting triggers). Post-conversion equity for the converter is
/// valued at the barrier via the local Laplace transform.
[[nodiscard]] inline McResult simulate_price(Product product, const FirmSpec& firm,
                                             const CoCoSpec& coco, const AccountingHistory& hist,
                                             double t, const ModelParams& mp,
                                             const SimConfig& cfg) {
    hist.validate();
    cfg.validate();
    mp.validate();
    const std::size_t n = hist.size();
    const double t_n = hist.last_time();
    const double m = mp.drift.m;
    const double sigma = mp.drift.sigma;
    const double kappa = mp.obs.kappa;
    const double mu_e = mp.obs.mu_eps;
    const double sd_e = mp.obs.sigma_eps;
    const double r = mp.r;
    const double z0 = firm.z0();
    const double T = coco.maturity;
    if (!(T > t)) throw std::invalid_argument("simulate_price: maturity must exceed t");

    const bool accounting = product == Product::pwd_acc || product == Product::pwd_acc_mda;
    const bool reg_mda = product == Product::pwd_reg_mda ||
                         (product == Product::converter && coco.mda_enabled);
    const double z_c = firm.z_c.level;
    const double z_cc = firm.z_cc.level;

    // post-conversion equity per unit at the conversion barrier
    double epc = 0.0;
    if (product == Product::converter) {
        const double jb = -detail::laplace_hit(z_c - firm.z_b.level, r, m, sigma);
        const double jtb = (1.0 + jb) / r;
        epc = std::exp(z_c) - firm.c1 * firm.p1 * jtb + std::exp(firm.z_b.level) * jb;
    }
    const double conv_value = product == Product::converter ? coco.rho() * epc
                                                            : coco.recovery * coco.p2;

    int m_reports = 0;
    double dt_rep = 0.25;
    if (accounting) {
        if (n == 0) throw std::invalid_argument("simulate_price: accounting products need reports");
        dt_rep = n >= 2 ? hist.times[n - 1] - hist.times[n - 2] : hist.times[0];
        m_reports = static_cast<int>(std::lround((T - t_n) / dt_rep));
        if (m_reports < 1 || std::abs(T - t_n - m_reports * dt_rep) > 1e-9)
            throw std::invalid_argument("simulate_price: maturity off the report grid");
    }

    const double dT = T - t;
    const int n_steps = std::max(1, static_cast<int>(std::ceil(dT / cfg.grid_step)));
    const double h = dT / n_steps;

    std::vector<double> ws(cfg.n_paths), vs(cfg.n_paths);
    detail::run_batched(cfg.n_paths, cfg.seed, cfg.batches, cfg.threads, [&](Rng& rng, long i) {
        double w = 1.0;
        double z_prev = z0;
        double t_prev = 0.0;
        double u_prev = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double dtk = hist.times[k] - t_prev;
            const double z = z_prev + m * dtk + sigma * std::sqrt(dtk) * rng.normal();
            if (!accounting)
                w *= 1.0 - detail::cross_prob(z_prev - z_c, z - z_c, sigma * sigma * dtk);
            const double u_mean = k == 0 ? mu_e : kappa * u_prev + mu_e;
            const double u = hist.log_reports[k] - z;
            w *= detail::gauss_pdf(u, u_mean, sd_e);
            if (w == 0.0) break;
            u_prev = u;
            z_prev = z;
            t_prev = hist.times[k];
        }
        double value = 0.0;
        if (w > 0.0 && accounting) {
            // forward reports, conversion only at report dates
            const double cP_r = coco.c2 * coco.p2 / r;
            const bool mda = product == Product::pwd_acc_mda;
            double z = z_prev, u = hist.log_reports[n - 1] - z_prev;
            bool alive = true;
            if (!mda || hist.log_reports[n - 1] > coco.y_cc)
                value += cP_r * (1.0 - std::exp(-r * (t_n + dt_rep - t)));
            for (int k = 1; k <= m_reports && alive; ++k) {
                z += m * dt_rep + sigma * std::sqrt(dt_rep) * rng.normal();
                u = kappa * u + mu_e + sd_e * rng.normal();
                const double y = z + u;
                const double tk = t_n + k * dt_rep;
                if (y <= coco.y_c) {
                    value += coco.recovery * coco.p2 * std::exp(-r * (tk - t));
                    alive = false;
                } else if (k < m_reports && (!mda || y > coco.y_cc)) {
                    value += cP_r * (std::exp(-r * (tk - t)) - std::exp(-r * (tk + dt_rep - t)));
                }
            }
            if (alive) value += coco.p2 * std::exp(-r * dT);
        } else if (w > 0.0) {
            // stub to the valuation time under the survival-conditioned law
            double x = z_prev;
            if ((t - t_n) > 1e-12) {
                const double dts = t - t_n;
                x = z_prev + m * dts + sigma * std::sqrt(dts) * rng.normal();
                w *= 1.0 - detail::cross_prob(z_prev - z_c, x - z_c, sigma * sigma * dts);
                if (w > 0.0)
                    w /= 1.0 - detail::hit_prob_formula(dts, z_prev - z_c, m, sigma);
            }
            if (w > 0.0) {
                double alive = 1.0, coupon_units = 0.0;
                double z = x;
                const double sh = sigma * std::sqrt(h);
                const double sig2h = sigma * sigma * h;
                for (int k = 0; k < n_steps; ++k) {
                    const double zn = z + m * h + sh * rng.normal();
                    const double pc = detail::cross_prob(z - z_c, zn - z_c, sig2h);
                    const double alive_next = alive * (1.0 - pc);
                    if (pc > 0.0)
                        value += alive * pc * conv_value * std::exp(-r * (k + 0.5) * h);
                    double gate = 1.0;
                    if (reg_mda) gate = 0.5 * ((z > z_cc ? 1.0 : 0.0) + (zn > z_cc ? 1.0 : 0.0));
                    coupon_units += 0.5 * (alive + alive_next) * gate *
                                    (std::exp(-r * k * h) - std::exp(-r * (k + 1) * h)) / r;
                    alive = alive_next;
                    z = zn;
                    if (alive < 1e-14) break;
                }
                value += coco.c2 * coco.p2 * coupon_units + alive * coco.p2 * std::exp(-r * dT);
            }
        }
        ws[i] = w;
        vs[i] = value;
    });

    double sw = 0.0, sw2 = 0.0, swv = 0.0;
    for (long i = 0; i < cfg.n_paths; ++i) {
        sw += ws[i];
        sw2 += ws[i] * ws[i];
        swv += ws[i] * vs[i];
    }
    if (!(sw > 0.0)) throw std::runtime_error("simulate_price: all importance weights vanished");
    const double est = swv / sw;
    const double ess = sw * sw / sw2;
    if (ess < 100.0)
        throw std::runtime_error("simulate_price: importance weights degenerate (ESS < 100)");
    double num = 0.0;
    for (long i = 0; i < cfg.n_paths; ++i) {
        const double d = ws[i] * (vs[i] - est);
        num += d * d;
    }
    return {est, std::sqrt(num) / sw, ess};
}

/// Plain Cholesky Monte Carlo rectangle probability, no variance reduction;
/// a code path independent of the antithetic estimator it cross-checks.
[[nodiscard]] inline McResult mc_rectangle(const ReportProjection& proj,
                                           const std::vector<double>& lower, long n_draws,
                                           std::uint64_t seed) {
    const int dim = proj.horizon;
    if (static_cast<int>(lower.size()) != dim)
        throw std::invalid_argument("mc_rectangle: bound count must match dimension");
    const auto l = cholesky(proj.cov, dim);
    Rng rng(seed);
    std::vector<double> u(dim);
    long count = 0;
    for (long d = 0; d < n_draws; ++d) {
        for (int k = 0; k < dim; ++k) u[k] = rng.normal();
        bool in = true;
        for (int a = 0; a < dim && in; ++a) {
            double s = 0.0;
            for (int k = 0; k <= a; ++k) s += l[static_cast<std::size_t>(a) * dim + k] * u[k];
            in = proj.mean[a] + s > lower[a];
        }
        count += in;
    }
    const double p_hat = static_cast<double>(count) / n_draws;
    return {p_hat, std::sqrt(std::max(p_hat * (1.0 - p_hat), 0.0) / n_draws),
            static_cast<double>(n_draws)};
}

/// Forward-simulated i-step accounting survival: posterior draw of the
/// latent history by importance sampling, then exact simulation of the next
/// i reports counting paths with every report above its bound.
[[nodiscard]] inline McResult forward_survival_mc(const std::vector<double>& lower,
                                                  const AccountingHistory& hist, double dt,
                                                  const ModelParams& mp, double z0,
                                                  const SimConfig& cfg) {
    hist.validate();
    cfg.validate();
    const std::size_t n = hist.size();
    if (n == 0) throw std::invalid_argument("forward_survival_mc: needs at least one report");
    const int steps = static_cast<int>(lower.size());
    const double m = mp.drift.m;
    const double sigma = mp.drift.sigma;

    std::vector<double> ws(cfg.n_paths), vs(cfg.n_paths);
    detail::run_batched(cfg.n_paths, cfg.seed, cfg.batches, cfg.threads, [&](Rng& rng, long i) {
        double w = 1.0, z_prev = z0, t_prev = 0.0, u_prev = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double dtk = hist.times[k] - t_prev;
            const double z = z_prev + m * dtk + sigma * std::sqrt(dtk) * rng.normal();
            const double u_mean = k == 0 ? mp.obs.mu_eps : mp.obs.kappa * u_prev + mp.obs.mu_eps;
            const double u = hist.log_reports[k] - z;
            w *= detail::gauss_pdf(u, u_mean, mp.obs.sigma_eps);
            u_prev = u;
            z_prev = z;
            t_prev = hist.times[k];
        }
        double z = z_prev, u = hist.log_reports[n - 1] - z_prev;
        bool all_above = true;
        for (int k = 0; k < steps && all_above; ++k) {
            z += m * dt + sigma * std::sqrt(dt) * rng.normal();
            u = mp.obs.kappa * u + mp.obs.mu_eps + mp.obs.sigma_eps * rng.normal();
            all_above = z + u > lower[k];
        }
        ws[i] = w;
        vs[i] = all_above ? 1.0 : 0.0;
    });
    double sw = 0.0, sw2 = 0.0, swv = 0.0;
    for (long i = 0; i < cfg.n_paths; ++i) {
        sw += ws[i];
        sw2 += ws[i] * ws[i];
        swv += ws[i] * vs[i];
    }
    const double est = swv / sw;
    double num = 0.0;
    for (long i = 0; i < cfg.n_paths; ++i) {
        const double d = ws[i] * (vs[i] - est);
        num += d * d;
    }
    return {est, std::sqrt(num) / sw, sw * sw / sw2};
}

} // namespace coco::oracle
