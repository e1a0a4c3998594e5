// Command-line front end: single prices, parameter sweeps, the 2016
// accounting-shock case study, and oracle validation runs.
//
// Exit codes: 0 ok, 1 configuration error, 2 numeric/validation failure.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coco/scenario.hpp"

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<long> samples;
    std::optional<long> burn_in;
    std::optional<int> chains;
    std::string out;

    void apply(coco::ScenarioConfig& cfg) const {
        if (seed) cfg.chain.seed = *seed;
        if (samples) cfg.chain.samples = *samples;
        if (burn_in) cfg.chain.burn_in = *burn_in;
        if (chains) cfg.chain.chains = *chains;
        if (!out.empty()) cfg.output = out;
    }
};

void print_estimate(const coco::PriceEstimate& pe) {
    std::printf("price      %.6f\n", pe.value);
    std::printf("stderr     %.6f\n", pe.stderr_);
    for (const auto& [name, value] : pe.components)
        std::printf("leg %-18s %.6f\n", name.c_str(), value);
    std::printf("acceptance %.3f\n", pe.acceptance_rate);
    std::printf("ess        %.0f\n", pe.ess);
    std::printf("seed       %llu\n", static_cast<unsigned long long>(pe.seed));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"contingent convertible pricing under noisy accounting reports"};
    app.require_subcommand(1);
    app.fallthrough();

    Overrides ov;
    app.add_option("--seed", ov.seed, "override the master seed");
    app.add_option("--samples", ov.samples, "override retained samples per chain (G)");
    app.add_option("--burn-in", ov.burn_in, "override burn-in iterations (n0)");
    app.add_option("--chains", ov.chains, "override the number of chains");
    app.add_option("--out", ov.out, "override the output path");

    std::string config_path;
    auto* cmd_price = app.add_subcommand("price", "price the configured instrument once");
    cmd_price->add_option("config", config_path, "scenario JSON file")->required();

    auto* cmd_sweep = app.add_subcommand("sweep", "run the configured parameter sweep to CSV");
    cmd_sweep->add_option("config", config_path, "scenario JSON file")->required();

    auto* cmd_db = app.add_subcommand("db-case", "accounting-shock case study price drops");
    double mda_cet1 = -1.0;
    bool no_mda = false;
    coco::DbCaseConfig db_defaults;
    double db_kappa = db_defaults.kappa;
    double db_sigma_eps = db_defaults.sigma_eps;
    cmd_db->add_option("--mda-cet1", mda_cet1,
                       "single CET1 coupon-block level in percent (e.g. 10)");
    cmd_db->add_flag("--no-mda", no_mda, "only the run without a coupon block");
    cmd_db->add_option("--kappa", db_kappa, "accounting-noise autocorrelation");
    cmd_db->add_option("--sigma-eps", db_sigma_eps, "accounting-noise innovation std-dev");

    auto* cmd_validate = app.add_subcommand("validate", "oracle cross-check suite");
    bool quick = false, fault = false;
    cmd_validate->add_flag("--quick", quick, "smaller sample sizes");
    cmd_validate->add_flag("--fault-injection", fault,
                           "deliberately corrupt one estimate; the run must fail");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*cmd_price || *cmd_sweep) {
            coco::ScenarioConfig cfg = coco::load_config(config_path);
            ov.apply(cfg);
            if (*cmd_price) {
                const auto pe = coco::run_price(cfg);
                print_estimate(pe);
                if (!cfg.output.empty()) {
                    std::string csv = coco::kCsvHeader;
                    char buf[512];
                    std::snprintf(buf, sizeof(buf),
                                  ",,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%llu\n", pe.value,
                                  pe.stderr_, pe.component("principal"), pe.component("coupon"),
                                  pe.component("conversion") + pe.component("recovery"),
                                  pe.acceptance_rate, pe.ess,
                                  static_cast<unsigned long long>(pe.seed));
                    std::ofstream(cfg.output) << csv << buf;
                }
            } else {
                const std::string csv = coco::run_sweep(cfg);
                if (cfg.output.empty()) std::cout << csv;
                else std::printf("wrote %zu rows to %s\n", cfg.sweep->grid.size(),
                                 cfg.output.c_str());
            }
        } else if (*cmd_db) {
            coco::DbCaseConfig dc;
            dc.kappa = db_kappa;
            dc.sigma_eps = db_sigma_eps;
            if (ov.seed) dc.chain.seed = *ov.seed;
            if (ov.samples) dc.chain.samples = *ov.samples;
            if (ov.burn_in) dc.chain.burn_in = *ov.burn_in;
            if (no_mda) {
                dc.mda_cet1.clear();
            } else if (mda_cet1 > 0.0) {
                dc.include_no_mda = false;
                dc.mda_cet1 = {mda_cet1 / 100.0};
            }
            const auto rows = coco::run_db_case(dc);
            std::printf("%-22s %12s %12s %9s\n", "coupon block", "pre-report", "post-report",
                        "drop %");
            for (const auto& r : rows)
                std::printf("%-22s %12.4f %12.4f %9.2f\n", r.label.c_str(), r.price_pre,
                            r.price_post, r.drop_pct());
        } else if (*cmd_validate) {
            coco::ValidationOptions opt;
            opt.quick = quick;
            opt.fault_injection = fault;
            if (ov.seed) opt.seed = *ov.seed;
            const auto rows = coco::run_validate(opt);
            bool all_pass = true;
            for (const auto& r : rows) {
                all_pass = all_pass && r.pass();
                std::printf("[%s] %-55s  %12.6g vs %12.6g (band %.3g)\n",
                            r.pass() ? "PASS" : "FAIL", r.name.c_str(), r.lhs, r.rhs, r.band);
            }
            if (!all_pass) return 2;
        }
    } catch (const coco::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
