#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coco/estimators.hpp"
#include "coco/first_passage.hpp"
#include "coco/model.hpp"
#include "coco/transforms.hpp"

namespace coco {

/// Issuer balance sheet: straight debt, recovery, and the log-level barriers.
struct FirmSpec {
    double v0 = 100.0;   ///< initial asset level (level, not log)
    double p1 = 50.0;    ///< straight-debt principal
    double c1 = 0.04;    ///< straight-debt coupon rate
    double alpha = 0.5;  ///< fraction of assets recovered at default
    Barrier z_b{};       ///< default barrier (log level)
    Barrier z_c{};       ///< conversion barrier (log level)
    Barrier z_cc{};      ///< coupon-block barrier (log level), used when MDA applies

    [[nodiscard]] double z0() const { return std::log(v0); }

    void validate(bool mda = false) const {
        if (!(v0 > 0.0)) throw std::invalid_argument("FirmSpec: v0 must be > 0");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("FirmSpec: alpha must lie in (0,1)");
        if (!(z_b.level < z_c.level))
            throw std::invalid_argument("FirmSpec: default barrier must lie below conversion barrier");
        if (mda && !(z_cc.level > z_c.level))
            throw std::invalid_argument("FirmSpec: coupon-block barrier must exceed conversion barrier");
        if (p1 < 0.0) throw std::invalid_argument("FirmSpec: p1 must be >= 0");
    }
};

enum class TriggerKind { regulatory, accounting };

/// Contingent convertible terms.
struct CoCoSpec {
    double p2 = 5.0;       ///< principal
    double c2 = 0.07;      ///< coupon rate
    double maturity = 5.5; ///< absolute maturity time T
    double recovery = 0.0; ///< fraction R of principal kept at write-down
    double delta = 0.0;    ///< shares per unit principal at conversion
    TriggerKind trigger_kind = TriggerKind::regulatory;
    double y_c = 0.0;      ///< accounting trigger on log reports
    double y_cc = 0.0;     ///< accounting coupon-block level on log reports
    bool mda_enabled = false;

    /// Fraction of post-conversion equity owned by the CoCo holders.
    [[nodiscard]] double rho() const { return delta * p2 / (delta * p2 + 1.0); }

    void validate() const {
        if (!(p2 >= 0.0)) throw std::invalid_argument("CoCoSpec: p2 must be >= 0");
        if (!(recovery >= 0.0 && recovery < 1.0))
            throw std::invalid_argument("CoCoSpec: recovery must lie in [0,1)");
        if (delta < 0.0) throw std::invalid_argument("CoCoSpec: delta must be >= 0");
        if (trigger_kind == TriggerKind::accounting && mda_enabled && !(y_cc > y_c))
            throw std::invalid_argument("CoCoSpec: y_cc must exceed y_c");
    }
};

/// Point estimate with Monte Carlo error, per-leg decomposition, and the
/// chain diagnostics it came from.
struct PriceEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::vector<std::pair<std::string, double>> components;
    double acceptance_rate = 0.0;
    double ess = 0.0;
    std::uint64_t seed = 0;
    long burn_in = 0;
    long samples = 0;

    [[nodiscard]] double component(const std::string& name) const {
        for (const auto& [k, v] : components)
            if (k == name) return v;
        return 0.0;
    }
};

namespace detail {

struct GL64 {
    static const GaussLegendre& get() {
        static const GaussLegendre gl(64);
        return gl;
    }
};

inline void fill_meta(PriceEstimate& pe, const EfReport& rep, const ChainConfig& cfg,
                      std::size_t total_idx) {
    pe.acceptance_rate = rep.acceptance_rate;
    pe.ess = rep.estimates[total_idx].ess;
    pe.seed = cfg.seed;
    pe.burn_in = cfg.burn_in;
    pe.samples = cfg.samples;
}

/// Coupon annuity value as a function of the time-t latent value, with the
/// coupon stream blocked below z_cc: quadrature over payment times of the
/// discounted joint probability of survival (above z_c) and being above z_cc.
inline std::function<double(double)> blocked_coupon_leg(double coupon_flow, double t, double T,
                                                        Barrier z_c, Barrier z_cc, double r,
                                                        const DriftParams& p) {
    const auto& gl = GL64::get();
    const double half = 0.5 * (T - t);
    std::vector<double> us(gl.nodes.size()), ws(gl.nodes.size());
    for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
        us[j] = half * (gl.nodes[j] + 1.0);       // elapsed time u - t
        ws[j] = half * gl.weights[j];
    }
    const double gap = z_cc.level - z_c.level;
    const DriftParams pv = p;
    return [=](double x) {
        double acc = 0.0;
        for (std::size_t j = 0; j < us.size(); ++j)
            acc += ws[j] * std::exp(-r * us[j]) *
                   min_tail_joint(us[j], x - z_c.level, gap, pv);
        return coupon_flow * acc;
    };
}

} // namespace detail

/// Principal write-down CoCo under a regulatory (continuously monitored)
/// trigger. The filtered expectation of
///
///   h(x) = P2 e^{-r(T-t)} (1 - pi) + c2 P2 Itilde(x) - R P2 I(x)
///
/// split into principal, coupon, and recovery legs on one shared sample.
[[nodiscard]] inline PriceEstimate price_pwd_regulatory(double t, const FirmSpec& firm,
                                                        const CoCoSpec& coco,
                                                        const AccountingHistory& hist,
                                                        const ModelParams& mp,
                                                        const ChainConfig& cfg) {
    firm.validate();
    coco.validate();
    mp.validate();
    if (!(mp.r > 0.0)) throw std::invalid_argument("price_pwd_regulatory: r must be > 0");
    const double dT = coco.maturity - t;
    if (dT < 0.0) throw std::invalid_argument("price_pwd_regulatory: maturity before valuation time");
    PriceEstimate pe;
    if (dT == 0.0) {
        pe.value = coco.p2;
        pe.components = {{"principal", coco.p2}, {"coupon", 0.0}, {"recovery", 0.0}};
        return pe;
    }
    const Barrier z_c = firm.z_c;
    const DriftParams& p = mp.drift;
    const double r = mp.r;
    const double disc = std::exp(-r * dT);
    const auto principal = [&, disc](double x) {
        return coco.p2 * disc * no_hit_prob(dT, x - z_c.level, p);
    };
    const auto coupon = [&](double x) {
        return coco.c2 * coco.p2 * discounted_survival_annuity(x, z_c, dT, r, p);
    };
    const auto recovery = [&](double x) {
        return -coco.recovery * coco.p2 * discounted_hitting_transform(x, z_c, dT, r, p);
    };
    const auto total = [&](double x) { return principal(x) + coupon(x) + recovery(x); };

    const std::function<double(double)> hs[] = {principal, coupon, recovery, total};
    const auto rep = estimate_E_f_many(hs, t, hist, z_c, p, mp.obs, firm.z0(), cfg);
    pe.value = rep.estimates[3].value;
    pe.stderr_ = rep.estimates[3].stderr_;
    pe.components = {{"principal", rep.estimates[0].value},
                     {"coupon", rep.estimates[1].value},
                     {"recovery", rep.estimates[2].value}};
    detail::fill_meta(pe, rep, cfg, 3);
    return pe;
}

/// Same instrument with coupons blocked while the latent value is below
/// z_cc: the coupon annuity is replaced by the time-quadrature of the joint
/// survival/above-block probability; principal and recovery are unchanged.
[[nodiscard]] inline PriceEstimate price_pwd_regulatory_mda(double t, const FirmSpec& firm,
                                                            const CoCoSpec& coco,
                                                            const AccountingHistory& hist,
                                                            const ModelParams& mp,
                                                            const ChainConfig& cfg) {
    firm.validate(true);
    coco.validate();
    mp.validate();
    if (!(mp.r > 0.0)) throw std::invalid_argument("price_pwd_regulatory_mda: r must be > 0");
    const double dT = coco.maturity - t;
    if (dT < 0.0)
        throw std::invalid_argument("price_pwd_regulatory_mda: maturity before valuation time");
    PriceEstimate pe;
    if (dT == 0.0) {
        pe.value = coco.p2;
        pe.components = {{"principal", coco.p2}, {"coupon", 0.0}, {"recovery", 0.0}};
        return pe;
    }
    const Barrier z_c = firm.z_c;
    const DriftParams& p = mp.drift;
    const double r = mp.r;
    const double disc = std::exp(-r * dT);
    const auto principal = [&, disc](double x) {
        return coco.p2 * disc * no_hit_prob(dT, x - z_c.level, p);
    };
    const auto coupon = detail::blocked_coupon_leg(coco.c2 * coco.p2, t, coco.maturity, z_c,
                                                   firm.z_cc, r, p);
    const auto recovery = [&](double x) {
        return -coco.recovery * coco.p2 * discounted_hitting_transform(x, z_c, dT, r, p);
    };
    const auto total = [&](double x) { return principal(x) + coupon(x) + recovery(x); };

    const std::function<double(double)> hs[] = {principal, coupon, recovery, total};
    const auto rep = estimate_E_f_many(hs, t, hist, z_c, p, mp.obs, firm.z0(), cfg);
    pe.value = rep.estimates[3].value;
    pe.stderr_ = rep.estimates[3].stderr_;
    pe.components = {{"principal", rep.estimates[0].value},
                     {"coupon", rep.estimates[1].value},
                     {"recovery", rep.estimates[2].value}};
    detail::fill_meta(pe, rep, cfg, 3);
    return pe;
}

/// CoCo converting into a fraction rho of post-conversion equity at the
/// regulatory trigger. Two sampling passes: the filtered expectation of
/// h0 + h1 (principal, coupons, and the conversion-value legs measurable at
/// t), and the bridged pass for the legs that settle at maturity on paths
/// that never converted.
[[nodiscard]] inline PriceEstimate price_converter_regulatory(double t, const FirmSpec& firm,
                                                              const CoCoSpec& coco,
                                                              const AccountingHistory& hist,
                                                              const ModelParams& mp,
                                                              const ChainConfig& cfg) {
    firm.validate(coco.mda_enabled);
    coco.validate();
    mp.validate();
    if (!(mp.r > 0.0)) throw std::invalid_argument("price_converter_regulatory: r must be > 0");
    const double dT = coco.maturity - t;
    if (dT < 0.0)
        throw std::invalid_argument("price_converter_regulatory: maturity before valuation time");
    PriceEstimate pe;
    if (dT == 0.0) {
        pe.value = coco.p2;
        pe.components = {{"principal", coco.p2}, {"coupon", 0.0}, {"conversion", 0.0}};
        return pe;
    }
    const Barrier z_c = firm.z_c;
    const Barrier z_b = firm.z_b;
    const DriftParams& p = mp.drift;
    const double r = mp.r;
    const double rho = coco.rho();
    const double disc = std::exp(-r * dT);
    const double e_zb = std::exp(z_b.level);
    const double e_zc = std::exp(z_c.level);

    const auto principal = [&, disc](double x) {
        return coco.p2 * disc * no_hit_prob(dT, x - z_c.level, p);
    };
    const std::function<double(double)> coupon =
        coco.mda_enabled
            ? detail::blocked_coupon_leg(coco.c2 * coco.p2, t, coco.maturity, z_c, firm.z_cc, r, p)
            : std::function<double(double)>([&](double x) {
                  return coco.c2 * coco.p2 * discounted_survival_annuity(x, z_c, dT, r, p);
              });
    const auto conv_now = [&](double x) {
        return rho * (e_zb * perpetual_hit_transform(x, z_b, r, p) +
                      firm.c1 * firm.p1 * discounted_survival_annuity(x, z_c, dT, r, p) -
                      firm.c1 * firm.p1 * perpetual_survival_annuity(x, z_b, r, p) -
                      e_zc * discounted_hitting_transform(x, z_c, dT, r, p));
    };
    const auto total_now = [&](double x) { return principal(x) + coupon(x) + conv_now(x); };

    const std::function<double(double)> hs[] = {principal, coupon, conv_now, total_now};
    ChainConfig cfg1 = cfg;
    cfg1.seed = derive_seed(cfg.seed, 11);
    const auto rep = estimate_E_f_many(hs, t, hist, z_c, p, mp.obs, firm.z0(), cfg1);

    double conv = rep.estimates[2].value;
    double var = rep.estimates[3].stderr_ * rep.estimates[3].stderr_;
    double ess = rep.estimates[3].ess;
    if (rho > 0.0) {
        const auto conv_at_T = [&, disc](double zt) {
            return rho * disc *
                   (firm.c1 * firm.p1 * perpetual_survival_annuity(zt, z_b, r, p) -
                    e_zb * perpetual_hit_transform(zt, z_b, r, p));
        };
        const std::function<double(double)> h2s[] = {conv_at_T};
        ChainConfig cfg2 = cfg;
        cfg2.seed = derive_seed(cfg.seed, 12);
        const auto rep2 =
            estimate_E_f_bridge_many(h2s, t, coco.maturity, hist, z_c, p, mp.obs, firm.z0(), cfg2);
        conv += rep2.estimates[0].value;
        var += rep2.estimates[0].stderr_ * rep2.estimates[0].stderr_;
        ess = std::min(ess, rep2.estimates[0].ess);
    }
    pe.value = rep.estimates[0].value + rep.estimates[1].value + conv;
    pe.stderr_ = std::sqrt(var);
    pe.components = {{"principal", rep.estimates[0].value},
                     {"coupon", rep.estimates[1].value},
                     {"conversion", conv}};
    detail::fill_meta(pe, rep, cfg, 3);
    pe.ess = ess;
    pe.seed = cfg.seed;
    return pe;
}

/// i-step conditional survival of the accounting trigger: probability that
/// the next i reports all stay above y_c (the last one above y_cc when
/// given), averaged over the plain posterior of the latent path.
[[nodiscard]] inline FunctionalEstimate i_step_survival(int i, const AccountingHistory& hist,
                                                        double dt, double y_c,
                                                        std::optional<double> y_cc,
                                                        const ModelParams& mp, double z0,
                                                        const ChainConfig& cfg) {
    if (i < 1) throw std::invalid_argument("i_step_survival: i must be >= 1");
    std::vector<double> bounds(static_cast<std::size_t>(i), y_c);
    if (y_cc) bounds.back() = *y_cc;
    const auto est = estimate_survival_rectangles({bounds}, hist, dt, mp.drift, mp.obs, z0, cfg);
    return est.probs.front();
}

namespace detail {

struct AccOutcome {
    PriceEstimate pe;
};

inline void check_accounting_preconditions(double t, const CoCoSpec& coco,
                                           const AccountingHistory& hist, double dt, int& m_out) {
    if (hist.empty())
        throw std::invalid_argument("accounting trigger pricing requires at least one report");
    for (double y : hist.log_reports)
        if (!(y > coco.y_c))
            throw std::invalid_argument("accounting trigger pricing: a past report is already at "
                                        "or below y_c (conversion has occurred)");
    const double t_n = hist.last_time();
    if (t < t_n - 1e-12 || t >= t_n + dt)
        throw std::invalid_argument("accounting trigger pricing: t must lie in [t_n, t_n + dt)");
    const double span = coco.maturity - t_n;
    const double m_real = span / dt;
    const int m = static_cast<int>(std::lround(m_real));
    if (m < 1 || std::abs(span - m * dt) > 1e-9 * std::max(1.0, coco.maturity))
        throw std::invalid_argument(
            "accounting trigger pricing: maturity must equal t_n + m*dt for integer m >= 1");
    m_out = m;
}

} // namespace detail

/// Principal write-down CoCo whose trigger is evaluated only at report
/// dates: discounted coupon intervals, principal, and write-down recovery
/// assembled from the i-step survival probabilities.
[[nodiscard]] inline PriceEstimate price_pwd_accounting(double t, const CoCoSpec& coco,
                                                        const AccountingHistory& hist, double dt,
                                                        const ModelParams& mp, double z0,
                                                        const ChainConfig& cfg) {
    coco.validate();
    mp.validate();
    if (!(mp.r > 0.0)) throw std::invalid_argument("price_pwd_accounting: r must be > 0");
    int m = 0;
    detail::check_accounting_preconditions(t, coco, hist, dt, m);
    const double t_n = hist.last_time();

    std::vector<std::vector<double>> bounds;
    for (int i = 1; i <= m; ++i) bounds.emplace_back(static_cast<std::size_t>(i), coco.y_c);
    const auto sv = estimate_survival_rectangles(bounds, hist, dt, mp.drift, mp.obs, z0, cfg);

    const double P = coco.p2, c = coco.c2, R = coco.recovery, r = mp.r;
    std::vector<double> d(m + 1);
    for (int i = 1; i <= m; ++i) d[i] = std::exp(-r * (t_n + i * dt - t));

    // price = const0 + sum_i coef_i * p_i
    const double const0 = (c * P / r) * (1.0 - d[1]) + R * P * d[1];
    std::vector<double> coef(m + 1, 0.0);
    for (int i = 1; i < m; ++i) coef[i] = (c * P / r - R * P) * (d[i] - d[i + 1]);
    coef[m] = (1.0 - R) * P * d[m];

    PriceEstimate pe;
    const auto& pr = sv.probs;
    pe.value = const0;
    for (int i = 1; i <= m; ++i) pe.value += coef[i] * pr[i - 1].value;

    const int B = static_cast<int>(sv.outer_batches.front().size());
    double var_outer = 0.0;
    {
        std::vector<double> pb(B, const0);
        for (int i = 1; i <= m; ++i)
            for (int b = 0; b < B; ++b) pb[b] += coef[i] * sv.outer_batches[i - 1][b];
        const auto ms = mean_stderr(pb);
        var_outer = ms.stderr_ * ms.stderr_;
    }
    double var_inner = 0.0;
    for (int i = 1; i <= m; ++i) var_inner += coef[i] * coef[i] * sv.inner_se[i - 1] * sv.inner_se[i - 1];
    pe.stderr_ = std::sqrt(var_outer + var_inner);

    double principal = P * d[m] * pr[m - 1].value;
    double coupon = (c * P / r) * (1.0 - d[1]);
    for (int i = 1; i < m; ++i) coupon += (c * P / r) * (d[i] - d[i + 1]) * pr[i - 1].value;
    double recovery = 0.0;
    double prev = 1.0;
    for (int i = 1; i <= m; ++i) {
        recovery += R * P * d[i] * (prev - pr[i - 1].value);
        prev = pr[i - 1].value;
    }
    pe.components = {{"principal", principal}, {"coupon", coupon}, {"recovery", recovery}};
    pe.acceptance_rate = sv.acceptance_rate;
    pe.ess = pr[m - 1].ess;
    pe.seed = cfg.seed;
    pe.burn_in = cfg.burn_in;
    pe.samples = cfg.samples;
    return pe;
}

/// Accounting-trigger PWD CoCo with coupons additionally gated by the report
/// staying above y_cc: the coupon over [t_{n+i}, t_{n+i+1}) pays only when
/// the (n+i)-th report exceeds y_cc, and the running interval pays only if
/// the latest observed report did.
[[nodiscard]] inline PriceEstimate price_pwd_accounting_mda(double t, const CoCoSpec& coco,
                                                            const AccountingHistory& hist,
                                                            double dt, const ModelParams& mp,
                                                            double z0, const ChainConfig& cfg) {
    coco.validate();
    mp.validate();
    if (!(mp.r > 0.0)) throw std::invalid_argument("price_pwd_accounting_mda: r must be > 0");
    if (!(coco.y_cc > coco.y_c))
        throw std::invalid_argument("price_pwd_accounting_mda: y_cc must exceed y_c");
    int m = 0;
    detail::check_accounting_preconditions(t, coco, hist, dt, m);
    const double t_n = hist.last_time();

    std::vector<std::vector<double>> bounds;
    for (int i = 1; i <= m; ++i) bounds.emplace_back(static_cast<std::size_t>(i), coco.y_c);
    for (int i = 1; i < m; ++i) {
        std::vector<double> q(static_cast<std::size_t>(i), coco.y_c);
        q.back() = coco.y_cc;
        bounds.push_back(std::move(q));
    }
    const auto sv = estimate_survival_rectangles(bounds, hist, dt, mp.drift, mp.obs, z0, cfg);

    const double P = coco.p2, c = coco.c2, R = coco.recovery, r = mp.r;
    std::vector<double> d(m + 1);
    for (int i = 1; i <= m; ++i) d[i] = std::exp(-r * (t_n + i * dt - t));
    const bool first_gate = hist.log_reports.back() > coco.y_cc;

    const double const0 = (first_gate ? (c * P / r) * (1.0 - d[1]) : 0.0) + R * P * d[1];
    std::vector<double> coef(2 * m, 0.0); // [1..m] -> p_i, [m+1..2m-1] -> q_i
    for (int i = 1; i < m; ++i) coef[i] = R * P * (d[i + 1] - d[i]);
    coef[m] = (1.0 - R) * P * d[m];
    for (int i = 1; i < m; ++i) coef[m + i] = (c * P / r) * (d[i] - d[i + 1]);

    PriceEstimate pe;
    pe.value = const0;
    for (std::size_t k = 1; k < coef.size(); ++k) pe.value += coef[k] * sv.probs[k - 1].value;

    const int B = static_cast<int>(sv.outer_batches.front().size());
    double var_outer = 0.0;
    {
        std::vector<double> pb(B, const0);
        for (std::size_t k = 1; k < coef.size(); ++k)
            for (int b = 0; b < B; ++b) pb[b] += coef[k] * sv.outer_batches[k - 1][b];
        const auto ms = mean_stderr(pb);
        var_outer = ms.stderr_ * ms.stderr_;
    }
    double var_inner = 0.0;
    for (std::size_t k = 1; k < coef.size(); ++k)
        var_inner += coef[k] * coef[k] * sv.inner_se[k - 1] * sv.inner_se[k - 1];
    pe.stderr_ = std::sqrt(var_outer + var_inner);

    double principal = P * d[m] * sv.probs[m - 1].value;
    double coupon = first_gate ? (c * P / r) * (1.0 - d[1]) : 0.0;
    for (int i = 1; i < m; ++i) coupon += (c * P / r) * (d[i] - d[i + 1]) * sv.probs[m + i - 1].value;
    double recovery = 0.0;
    double prev = 1.0;
    for (int i = 1; i <= m; ++i) {
        recovery += R * P * d[i] * (prev - sv.probs[i - 1].value);
        prev = sv.probs[i - 1].value;
    }
    pe.components = {{"principal", principal}, {"coupon", coupon}, {"recovery", recovery}};
    pe.acceptance_rate = sv.acceptance_rate;
    pe.ess = sv.probs[m - 1].ess;
    pe.seed = cfg.seed;
    pe.burn_in = cfg.burn_in;
    pe.samples = cfg.samples;
    return pe;
}

/// Perpetual straight debt given the filtered law at t: coupon annuity until
/// default plus recovery of alpha * V at the default barrier.
[[nodiscard]] inline PriceEstimate value_straight_debt(double t, const FirmSpec& firm,
                                                       const AccountingHistory& hist,
                                                       const ModelParams& mp,
                                                       const ChainConfig& cfg) {
    firm.validate();
    mp.validate();
    if (!(mp.r > 0.0)) throw std::invalid_argument("value_straight_debt: r must be > 0");
    const DriftParams& p = mp.drift;
    const double e_zb = std::exp(firm.z_b.level);
    const auto coupon = [&](double x) {
        return firm.c1 * firm.p1 * perpetual_survival_annuity(x, firm.z_b, mp.r, p);
    };
    const auto recovery = [&](double x) {
        return -firm.alpha * e_zb * perpetual_hit_transform(x, firm.z_b, mp.r, p);
    };
    const auto total = [&](double x) { return coupon(x) + recovery(x); };
    const std::function<double(double)> hs[] = {coupon, recovery, total};
    const auto rep = estimate_E_f_many(hs, t, hist, firm.z_c, p, mp.obs, firm.z0(), cfg);
    PriceEstimate pe;
    pe.value = rep.estimates[2].value;
    pe.stderr_ = rep.estimates[2].stderr_;
    pe.components = {{"coupon", rep.estimates[0].value}, {"recovery", rep.estimates[1].value}};
    detail::fill_meta(pe, rep, cfg, 2);
    return pe;
}

/// Residual equity value E = E_f[V] - D - C - BC with the bankruptcy
/// deadweight BC = -(1-alpha) e^{z_b} E_f[J_b]. All filtered expectations run
/// on one shared sample so the balance-sheet identity holds to rounding; the
/// converter's maturity-settled leg comes from the bridged chain and is
/// subtracted with its own independent error.
[[nodiscard]] inline PriceEstimate value_equity_residual(double t, const FirmSpec& firm,
                                                         const CoCoSpec& coco,
                                                         const AccountingHistory& hist,
                                                         const ModelParams& mp,
                                                         const ChainConfig& cfg) {
    firm.validate(coco.mda_enabled && coco.trigger_kind == TriggerKind::regulatory);
    coco.validate();
    mp.validate();
    if (!(mp.r > 0.0)) throw std::invalid_argument("value_equity_residual: r must be > 0");
    if (coco.p2 > 0.0 && coco.trigger_kind != TriggerKind::regulatory)
        throw std::invalid_argument(
            "value_equity_residual: only regulatory-trigger CoCos share the filtered sample");
    const double dT = coco.maturity - t;
    if (coco.p2 > 0.0 && dT <= 0.0)
        throw std::invalid_argument("value_equity_residual: CoCo must not have matured");

    const DriftParams& p = mp.drift;
    const double r = mp.r;
    const Barrier z_c = firm.z_c;
    const Barrier z_b = firm.z_b;
    const double e_zb = std::exp(z_b.level);
    const double e_zc = std::exp(z_c.level);
    const double rho = coco.rho();
    const double disc = coco.p2 > 0.0 ? std::exp(-r * dT) : 1.0;

    const auto assets = [](double x) { return std::exp(x); };
    const auto debt = [&](double x) {
        return firm.p1 == 0.0
                   ? 0.0
                   : firm.c1 * firm.p1 * perpetual_survival_annuity(x, z_b, r, p) -
                         firm.alpha * e_zb * perpetual_hit_transform(x, z_b, r, p);
    };
    const auto bankruptcy = [&](double x) {
        return -(1.0 - firm.alpha) * e_zb * perpetual_hit_transform(x, z_b, r, p);
    };
    const std::function<double(double)> coupon_leg =
        coco.mda_enabled
            ? detail::blocked_coupon_leg(coco.c2 * coco.p2, t, coco.maturity, z_c, firm.z_cc, r, p)
            : std::function<double(double)>([&](double x) {
                  return coco.c2 * coco.p2 * discounted_survival_annuity(x, z_c, dT, r, p);
              });
    const auto coco_now = [&](double x) {
        if (coco.p2 == 0.0) return 0.0;
        double v = coco.p2 * disc * no_hit_prob(dT, x - z_c.level, p) + coupon_leg(x) -
                   coco.recovery * coco.p2 * discounted_hitting_transform(x, z_c, dT, r, p);
        if (rho > 0.0)
            v += rho * (e_zb * perpetual_hit_transform(x, z_b, r, p) +
                        firm.c1 * firm.p1 * discounted_survival_annuity(x, z_c, dT, r, p) -
                        firm.c1 * firm.p1 * perpetual_survival_annuity(x, z_b, r, p) -
                        e_zc * discounted_hitting_transform(x, z_c, dT, r, p));
        return v;
    };
    const auto equity = [&](double x) {
        return assets(x) - debt(x) - coco_now(x) - bankruptcy(x);
    };

    const std::function<double(double)> hs[] = {assets, debt, coco_now, bankruptcy, equity};
    ChainConfig cfg1 = cfg;
    cfg1.seed = derive_seed(cfg.seed, 11);
    const auto rep = estimate_E_f_many(hs, t, hist, z_c, p, mp.obs, firm.z0(), cfg1);

    double coco_value = rep.estimates[2].value;
    double equity_value = rep.estimates[4].value;
    double var = rep.estimates[4].stderr_ * rep.estimates[4].stderr_;
    if (coco.p2 > 0.0 && rho > 0.0) {
        const auto conv_at_T = [&, disc](double zt) {
            return rho * disc *
                   (firm.c1 * firm.p1 * perpetual_survival_annuity(zt, z_b, r, p) -
                    e_zb * perpetual_hit_transform(zt, z_b, r, p));
        };
        const std::function<double(double)> h2s[] = {conv_at_T};
        ChainConfig cfg2 = cfg;
        cfg2.seed = derive_seed(cfg.seed, 12);
        const auto rep2 =
            estimate_E_f_bridge_many(h2s, t, coco.maturity, hist, z_c, p, mp.obs, firm.z0(), cfg2);
        coco_value += rep2.estimates[0].value;
        equity_value -= rep2.estimates[0].value;
        var += rep2.estimates[0].stderr_ * rep2.estimates[0].stderr_;
    }
    PriceEstimate pe;
    pe.value = equity_value;
    pe.stderr_ = std::sqrt(var);
    pe.components = {{"assets", rep.estimates[0].value},
                     {"straight_debt", -rep.estimates[1].value},
                     {"coco", -coco_value},
                     {"bankruptcy_cost", -rep.estimates[3].value}};
    detail::fill_meta(pe, rep, cfg, 4);
    pe.seed = cfg.seed;
    return pe;
}

} // namespace coco
