// isac: design, sweep, validate and deconvolve from a JSON experiment config.
// Exit codes: 0 ok, 2 config/usage error, 3 numerical failure.

#include "isac/error.hpp"
#include "isac/experiment.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

using namespace isac;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;

struct Options {
    std::string config;
    std::optional<uint64_t> seed;
    std::string method;
    std::string out = "out";
    std::string figure;
    std::optional<int> frames;
    bool unnormalized = false;
    std::string plan;
};

ExperimentConfig resolve(const Options& o) {
    auto cfg = o.config.empty() ? parse_config(nlohmann::json::object()) : load_config(o.config);
    if (o.seed) {
        cfg.seed = *o.seed;
    }
    if (o.method == "gp") {
        cfg.method = Method::gp;
    } else if (o.method == "ba") {
        cfg.method = Method::ba;
    }
    if (o.frames) {
        if (*o.frames < 2) {
            throw ConfigError("--frames must be >= 2");
        }
        cfg.frames = *o.frames;
    }
    if (o.unnormalized) {
        cfg.unnormalized = true;
    }
    return cfg;
}

std::string path(const Options& o, const std::string& name) { return o.out + "/" + name; }

void emit(const Options& o, const std::string& name, const std::string& content) {
    write_atomic(path(o, name), content);
    std::cout << "wrote " << path(o, name) << "\n";
}

double bits(double nats, size_t n) { return nats / std::numbers::ln2 / static_cast<double>(n); }

int cmd_design(const Options& o) {
    const auto cfg = resolve(o);
    const auto d = run_design(cfg, cfg.seed);
    emit(o, "design.json", design_json(cfg, cfg.seed, d));
    if (d.ba) {
        emit(o, "ba_weights.csv", ba_weights_csv(cfg, cfg.seed, *d.ba));
    }
    std::printf("rate %.6f bits/subcarrier (%s), converged %s\n", bits(d.rate, d.plan.size()),
                cfg.method == Method::gp ? "surrogate" : "BA", d.converged ? "yes" : "no");
    return d.converged ? 0 : kNumericalFailure;
}

int cmd_deconvolve(const Options& o) {
    const auto cfg = resolve(o);
    const auto d = run_design(cfg, cfg.seed);
    const auto f = deconvolve_subcarrier(cfg, d, cfg.deconv_subcarrier);
    emit(o, "fig6.csv", fig6_csv(cfg, cfg.seed, f));
    emit(o, "fig6.json", fig6_json(cfg, cfg.seed, f));
    std::printf("subcarrier %d: legitimate %s, residual %.3g, negative mass %.3g\n", f.subcarrier,
                f.legitimacy.legitimate ? "yes" : "no", f.legitimacy.residual, f.legitimacy.negative_mass);
    if (!f.legitimacy.deconvolution.converged) {
        std::printf("note: deconvolution stopped at the iteration cap (trace in fig6.json)\n");
    }
    return 0;
}

int cmd_sweep(const Options& o) {
    const auto cfg = resolve(o);
    const std::string fig = o.figure.empty() ? "all" : o.figure;
    if (fig == "fig2" || fig == "all") {
        emit(o, "fig2.csv", fig2_csv(cfg, rate_kurtosis_sweep(cfg)));
    }
    if (fig == "fig3" || fig == "fig5" || fig == "all") {
        const auto d = run_design(cfg, cfg.seed);
        if (fig != "fig5") {
            emit(o, "fig3.csv", fig3_csv(cfg, cfg.seed, d));
        }
        if (fig != "fig3") {
            emit(o, "fig5.csv", fig5_csv(cfg, cfg.seed, d));
        }
    }
    if (fig == "fig4" || fig == "all") {
        emit(o, "fig4.csv", fig4_csv(cfg, rate_snr_sweep(cfg)));
    }
    if (fig == "fig6") {
        return cmd_deconvolve(o);
    }
    return 0;
}

int cmd_validate(const Options& o) {
    const auto cfg = resolve(o);
    AllocationPlan plan;
    if (!o.plan.empty()) {
        std::ifstream in(o.plan);
        if (!in) {
            throw ConfigError("cannot open plan '" + o.plan + "'");
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("plan '" + o.plan + "' is not valid JSON: " + e.what());
        }
        plan = plan_from_design_json(j);
    } else {
        plan = run_design(cfg, cfg.seed).plan;
    }
    const auto r = run_validate(cfg, plan, cfg.seed);
    emit(o, "validate.json", validate_json(cfg, cfg.seed, r));
    std::printf("EISL expected %.6g, empirical %.6g +- %.2g, budget %.6g: %s\n", r.eisl_expected,
                r.eisl_empirical.mean, r.eisl_empirical.std_error, r.eisl_budget, r.pass ? "PASS" : "FAIL");
    return r.pass ? 0 : kNumericalFailure;
}

void common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "channel / sampling seed (overrides config)");
    sub->add_option("--method", o.method, "gp or ba (overrides config)")->check(CLI::IsMember({"gp", "ba"}));
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rate/sidelobe input design for OFDM ISAC"};
    app.require_subcommand(1);
    Options o;

    auto* design = app.add_subcommand("design", "optimize (p, d) and write design.json");
    common(design, o);

    auto* sweep = app.add_subcommand("sweep", "write figure data");
    common(sweep, o);
    sweep->add_option("--figure", o.figure, "one figure (default: fig2-fig5)")
        ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "fig6"}));

    auto* validate = app.add_subcommand("validate", "Monte-Carlo check of a plan's sidelobes");
    common(validate, o);
    validate->add_option("--frames", o.frames, "frames to sample");
    validate->add_flag("--unnormalized", o.unnormalized, "use the unnormalized PACS");
    validate->add_option("--plan", o.plan, "design.json to validate (default: design from the config)");

    auto* deconv = app.add_subcommand("deconvolve", "recover one subcarrier's input law (fig6 data)");
    common(deconv, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }

    try {
        if (*design) {
            return cmd_design(o);
        }
        if (*sweep) {
            return cmd_sweep(o);
        }
        if (*validate) {
            return cmd_validate(o);
        }
        return cmd_deconvolve(o);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    }
}
