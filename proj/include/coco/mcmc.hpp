#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coco/math.hpp"
#include "coco/rng.hpp"

namespace coco {

/// Random-walk Metropolis chain settings.
struct ChainConfig {
    long burn_in = 20000;
    long samples = 200000;
    double target_acceptance = 0.3;
    std::uint64_t seed = 20240501ULL;
    double proposal_scale = 0.05;
    int chains = 1;

    void validate() const {
        if (burn_in < 0) throw std::invalid_argument("ChainConfig: burn_in must be >= 0");
        if (samples < 1) throw std::invalid_argument("ChainConfig: samples must be >= 1");
        if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
            throw std::invalid_argument("ChainConfig: target_acceptance must lie in (0,1)");
        if (!(proposal_scale > 0.0))
            throw std::invalid_argument("ChainConfig: proposal_scale must be > 0");
        if (chains < 1) throw std::invalid_argument("ChainConfig: chains must be >= 1");
    }
};

/// Retained draws of one chain, row-major samples x dim.
struct ChainResult {
    std::vector<double> samples;
    int dim = 0;
    long retained = 0;
    double acceptance_rate = 0.0;
    std::vector<double> ess;
    std::uint64_t seed_used = 0;

    [[nodiscard]] double at(long g, int j) const noexcept {
        return samples[static_cast<std::size_t>(g) * dim + j];
    }
};

/// Metropolis acceptance probability from the two log-target values.
[[nodiscard]] inline double mh_acceptance_prob(double log_target_current,
                                               double log_target_proposal) noexcept {
    if (log_target_proposal == kNegInf || std::isnan(log_target_proposal)) return 0.0;
    const double d = log_target_proposal - log_target_current;
    return d >= 0.0 ? 1.0 : std::exp(d);
}

/// Mean, batch-means standard error, and implied effective sample size of a
/// (possibly autocorrelated) scalar series. Uses n_batches equal batches,
/// dropping the remainder.
struct SeriesStats {
    double mean = 0.0;
    double stderr_ = 0.0;
    double ess = 0.0;
};

[[nodiscard]] inline SeriesStats batch_means(std::span<const double> xs, int n_batches = 50) {
    SeriesStats st;
    const std::size_t n = xs.size();
    if (n == 0) return st;
    double total = 0.0;
    for (double x : xs) total += x;
    st.mean = total / static_cast<double>(n);
    if (n < static_cast<std::size_t>(2 * n_batches)) n_batches = static_cast<int>(n / 2);
    if (n_batches < 2) {
        st.stderr_ = 0.0;
        st.ess = static_cast<double>(n);
        return st;
    }
    const std::size_t bs = n / n_batches;
    double var_bm = 0.0;
    for (int b = 0; b < n_batches; ++b) {
        double s = 0.0;
        for (std::size_t k = b * bs; k < (b + 1) * bs; ++k) s += xs[k];
        const double d = s / static_cast<double>(bs) - st.mean;
        var_bm += d * d;
    }
    var_bm /= (n_batches - 1.0);
    st.stderr_ = std::sqrt(var_bm / n_batches);
    double var_sample = 0.0;
    for (double x : xs) var_sample += (x - st.mean) * (x - st.mean);
    var_sample /= (n - 1.0);
    const double var_mean = var_bm / n_batches;
    st.ess = var_mean > 0.0 ? std::min(var_sample / var_mean, static_cast<double>(n))
                            : static_cast<double>(n);
    return st;
}

/// Random-walk Metropolis with diagonal Gaussian proposals.
///
/// The proposal standard deviation of coordinate j is s * base_scales[j],
/// where the global factor s is adapted on the log scale toward the target
/// acceptance rate during burn-in only (Robbins-Monro, step k^-0.6) and
/// frozen afterwards so the retained draws follow the exact invariant law.
/// A proposal with non-finite log-target is rejected; an initial point with
/// non-finite log-target is an error.
template <typename LogTarget>
[[nodiscard]] inline ChainResult rw_metropolis(const LogTarget& log_target, int dim,
                                               std::span<const double> init,
                                               const ChainConfig& cfg,
                                               std::span<const double> base_scales = {}) {
    cfg.validate();
    if (dim < 1) throw std::invalid_argument("rw_metropolis: dim must be >= 1");
    if (static_cast<int>(init.size()) != dim)
        throw std::invalid_argument("rw_metropolis: init size must equal dim");
    if (!base_scales.empty() && static_cast<int>(base_scales.size()) != dim)
        throw std::invalid_argument("rw_metropolis: base_scales size must equal dim");

    std::vector<double> x(init.begin(), init.end());
    double lt = log_target(std::span<const double>(x));
    if (!std::isfinite(lt))
        throw std::runtime_error("rw_metropolis: log-target not finite at the initial point");

    std::vector<double> scales(dim, cfg.proposal_scale);
    if (!base_scales.empty())
        for (int j = 0; j < dim; ++j) scales[j] = base_scales[j];

    Rng rng(cfg.seed);
    ChainResult res;
    res.dim = dim;
    res.retained = cfg.samples;
    res.seed_used = cfg.seed;
    res.samples.resize(static_cast<std::size_t>(cfg.samples) * dim);

    double log_s = 0.0;
    std::vector<double> prop(dim);
    long accepted_post = 0;
    const long total = cfg.burn_in + cfg.samples;
    for (long k = 0; k < total; ++k) {
        const double s = std::exp(log_s);
        for (int j = 0; j < dim; ++j) prop[j] = x[j] + s * scales[j] * rng.normal();
        const double lt_prop = log_target(std::span<const double>(prop));
        const double alpha = mh_acceptance_prob(lt, lt_prop);
        if (alpha >= 1.0 || rng.uniform() < alpha) {
            x = prop;
            lt = lt_prop;
            if (k >= cfg.burn_in) ++accepted_post;
        }
        if (k < cfg.burn_in) {
            log_s += std::pow(static_cast<double>(k + 1), -0.6) * (alpha - cfg.target_acceptance);
        } else {
            double* row = res.samples.data() + static_cast<std::size_t>(k - cfg.burn_in) * dim;
            for (int j = 0; j < dim; ++j) row[j] = x[j];
        }
    }
    res.acceptance_rate = static_cast<double>(accepted_post) / cfg.samples;

    res.ess.resize(dim);
    std::vector<double> coord(cfg.samples);
    for (int j = 0; j < dim; ++j) {
        for (long g = 0; g < cfg.samples; ++g) coord[g] = res.at(g, j);
        res.ess[j] = batch_means(coord).ess;
    }
    return res;
}

} // namespace coco
