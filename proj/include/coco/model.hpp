#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace coco {

/// Drifted Brownian motion parameters of the log-asset process:
/// dZ = m dt + sigma dW.
struct DriftParams {
    double m = 0.0;     ///< drift per unit time
    double sigma = 0.1; ///< volatility per sqrt-unit-time, > 0

    void validate() const {
        if (!(sigma > 0.0)) throw std::invalid_argument("DriftParams: sigma must be > 0");
        if (!std::isfinite(m)) throw std::invalid_argument("DriftParams: m must be finite");
    }
};

/// A log-asset threshold.
struct Barrier {
    double level = 0.0;

    void validate() const {
        if (!std::isfinite(level)) throw std::invalid_argument("Barrier: level must be finite");
    }
};

/// AR(1) accounting-noise parameters: U_i = kappa * U_{i-1} + eps_i with
/// eps_i ~ N(mu_eps, sigma_eps^2). The first report uses U_1 = eps_1.
struct ObsParams {
    double kappa = 0.0;
    double mu_eps = 0.0;
    double sigma_eps = 0.1;

    void validate() const {
        if (!(sigma_eps > 0.0)) throw std::invalid_argument("ObsParams: sigma_eps must be > 0");
        if (!std::isfinite(kappa)) throw std::invalid_argument("ObsParams: kappa must be finite");
        if (!std::isfinite(mu_eps)) throw std::invalid_argument("ObsParams: mu_eps must be finite");
    }
};

/// Latent-process dynamics, observation noise, and the risk-free rate.
struct ModelParams {
    DriftParams drift;
    ObsParams obs;
    double r = 0.03;

    void validate() const {
        drift.validate();
        obs.validate();
        if (!std::isfinite(r)) throw std::invalid_argument("ModelParams: r must be finite");
    }
};

/// Ordered accounting reports: times t_1 < ... < t_n and log-report values.
struct AccountingHistory {
    std::vector<double> times;
    std::vector<double> log_reports;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] bool empty() const noexcept { return times.empty(); }
    [[nodiscard]] double last_time() const noexcept { return times.empty() ? 0.0 : times.back(); }

    void validate() const {
        if (times.size() != log_reports.size())
            throw std::invalid_argument("AccountingHistory: times and log_reports lengths differ");
        double prev = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!(times[i] > prev))
                throw std::invalid_argument(
                    "AccountingHistory: report times must be strictly increasing and positive");
            prev = times[i];
        }
    }
};

} // namespace coco
