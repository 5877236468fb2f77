#pragma once

// Experiment orchestration: a declarative config, the design run, the figure
// data (rate/kurtosis tradeoff, delay response, SNR sweep, kurtosis
// allocation, magnitude densities) and Monte-Carlo validation of a plan.
// Everything here is deterministic given config and seed.

#include "isac/blahut_arimoto.hpp"
#include "isac/channel.hpp"
#include "isac/deconvolution.hpp"
#include "isac/gradient_projection.hpp"
#include "isac/montecarlo.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace isac {

inline constexpr const char* kSchemaVersion = "1";

enum class Method { gp, ba };
enum class SnrUnit { linear, db };

struct ExperimentConfig {
    int n = 64;
    int paths = 4;
    double rician_k_db = 6.0;
    double snr = 10.0;  ///< average per-subcarrier SNR in `snr_unit`
    SnrUnit snr_unit = SnrUnit::linear;
    std::optional<double> total_power;  ///< overrides P = snr N

    // EISL budget: exactly one of these, kappa_bar by default.
    double kappa_bar = 1.064;
    std::optional<double> zeta;
    std::optional<double> eisl_budget;

    std::vector<double> kappa_sweep{1.01, 1.02, 1.03, 1.04, 1.05, 1.06, 1.07, 1.08, 1.09, 1.10};
    std::vector<double> snr_sweep{1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0};  ///< in `snr_unit`
    std::vector<double> snr_sweep_kappas{1.032, 1.064};

    uint64_t seed = 1;
    int seeds = 1;  ///< channel seeds seed, seed+1, ... averaged in sweeps
    Method method = Method::gp;
    int frames = 10000;
    bool unnormalized = false;
    int deconv_subcarrier = 35;
    int deconv_grid = 256;
    int marginal_bins = 120;
    int threads = 0;  ///< 0: hardware concurrency

    GpConfig gp;
    BaConfig ba;
};

/// Throws ConfigError on unknown keys, wrong types or out-of-range values.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// FNV-1a of the canonical JSON dump, 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

double linear_snr(const ExperimentConfig& cfg, double snr);
double total_power(const ExperimentConfig& cfg, double snr);
/// EISL budget for the configured (or given) average kurtosis and power.
double budget(const ExperimentConfig& cfg, double P);
double budget_for_kappa(const ExperimentConfig& cfg, double kappa_bar, double P);

/// Provenance block embedded in every artifact.
nlohmann::json run_meta(const ExperimentConfig& cfg, uint64_t seed);
std::string csv_preamble(const ExperimentConfig& cfg, uint64_t seed);

struct DesignOutput {
    ChannelRealization channel;
    AllocationPlan plan;
    double rate = 0.0;  ///< nats, surrogate (gp) or BA mutual information (ba)
    double surrogate_rate = 0.0;
    bool converged = false;
    std::optional<BaDesign> ba;
};

/// Channel for `seed`, then gp_run at (P, D); with Method::ba the BA solver
/// realizes the gp moments.
DesignOutput run_design(const ExperimentConfig& cfg, uint64_t seed);
DesignOutput run_design_at(const ExperimentConfig& cfg, uint64_t seed, double P, double D);

struct TradeoffPoint {
    double kappa_bar = 0.0;
    double proposed = 0.0;  ///< bits per subcarrier
    double uniform = 0.0;
};
/// Rate/kurtosis tradeoff (fig2) for one channel seed.
std::vector<TradeoffPoint> rate_kurtosis_curve(const ExperimentConfig& cfg, uint64_t seed);
/// Mean over cfg.seeds channel seeds.
std::vector<TradeoffPoint> rate_kurtosis_sweep(const ExperimentConfig& cfg);

struct SnrPoint {
    double snr = 0.0;  ///< in the configured unit
    double kappa_bar = 0.0;
    double proposed = 0.0;
    double uniform = 0.0;
};
std::vector<SnrPoint> rate_snr_sweep(const ExperimentConfig& cfg);

struct Fig6Data {
    int subcarrier = 0;
    double p = 0.0, d = 0.0;
    cplx h;
    LegitimacyReport legitimacy;
    double reconvolution_error = 0.0;  ///< relative L2, reconvolved vs target
    MagnitudeMarginal output;          ///< |z| of the designed output
    MagnitudeMarginal input;           ///< |x| of the deconvolved input, in input units
    MagnitudeMarginal reconvolved;     ///< |z| of the reconvolved output
};
Fig6Data deconvolve_subcarrier(const ExperimentConfig& cfg, const DesignOutput& design, int subcarrier);

struct ValidationReport {
    double eisl_expected = 0.0;
    double eisl_budget = 0.0;
    ScalarStatistic eisl_empirical;
    std::vector<double> bins_expected;
    BinStatistics bins_empirical;
    bool pass = false;  ///< empirical EISL <= budget + 3 standard errors
};
ValidationReport run_validate(const ExperimentConfig& cfg, const AllocationPlan& plan, uint64_t seed);

// Serializers. CSV outputs start with '#' provenance lines.
std::string design_json(const ExperimentConfig& cfg, uint64_t seed, const DesignOutput& d);
std::string ba_weights_csv(const ExperimentConfig& cfg, uint64_t seed, const BaDesign& ba);
std::string fig2_csv(const ExperimentConfig& cfg, const std::vector<TradeoffPoint>& pts);
std::string fig3_csv(const ExperimentConfig& cfg, uint64_t seed, const DesignOutput& d);
std::string fig4_csv(const ExperimentConfig& cfg, const std::vector<SnrPoint>& pts);
std::string fig5_csv(const ExperimentConfig& cfg, uint64_t seed, const DesignOutput& d);
std::string fig6_csv(const ExperimentConfig& cfg, uint64_t seed, const Fig6Data& f);
std::string fig6_json(const ExperimentConfig& cfg, uint64_t seed, const Fig6Data& f);
std::string validate_json(const ExperimentConfig& cfg, uint64_t seed, const ValidationReport& r);

/// Plan read back from design_json output.
AllocationPlan plan_from_design_json(const nlohmann::json& j);

/// Writes via a temporary file and rename, creating parent directories.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace isac
