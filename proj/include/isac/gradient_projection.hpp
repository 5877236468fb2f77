#pragma once

// Fast design path: per-subcarrier rate surrogate from the output-entropy
// upper bound, projected ascent over (p, d) under the power and EISL budgets,
// and the water-filling / uniform-kurtosis baselines.

#include "isac/channel.hpp"
#include "isac/sidelobe.hpp"

#include <optional>
#include <span>
#include <vector>

namespace isac {

/// Moments of y = h x + n for unit circular Gaussian noise.
struct OutputMoments {
    double m2 = 1.0;
    double m4 = 2.0;
};
OutputMoments output_moments(double p, double d, double gain);

/// Margin used when the surrogate inverts output moments; smaller than the
/// public default so the surrogate is smooth up to the Gaussian end.
inline constexpr double kSurrogateMargin = 1e-10;

/// Upper bound on I(x; hx+n) in nats: max-entropy of the output moments minus ln(pi e).
double rate_surrogate(double p, double d, cplx h);

struct RateGradient {
    double d_p = 0.0;
    double d_d = 0.0;
};
/// Exact partial derivatives of rate_surrogate through the output-moment map.
RateGradient rate_surrogate_gradient(double p, double d, cplx h);

struct Projection {
    std::vector<double> p;
    std::vector<double> d;
    double lambda = 0.0;  ///< multiplier of sum p = P
    double mu = 0.0;      ///< multiplier of the EISL budget, >= 0
};

/// Euclidean projection of (p_raw, d_raw) onto
/// { p >= 0, d >= 0, sum p = P, sum d + N |p|^2/(N-1) <= (N D + P^2)/(N-1) }.
Projection project(std::span<const double> p_raw, std::span<const double> d_raw, double P, double D);

/// Stationarity, sign and complementary-slackness residuals of a projection.
double projection_kkt_residual(std::span<const double> p_raw, std::span<const double> d_raw, double P, double D,
                               const Projection& proj);

/// Classical water-filling p_i = (1/nu - 1/|h_i|^2)_+ with sum p = P.
std::vector<double> water_filling(const ChannelRealization& ch, double P);

struct DesignResult {
    AllocationPlan plan;
    double rate = 0.0;  ///< surrogate sum rate, nats
};

/// Uniform power, identical kurtosis kappa_bar on every subcarrier.
DesignResult uniform_kurtosis_baseline(const ChannelRealization& ch, double P, double kappa_bar);

/// Sum of rate_surrogate over subcarriers.
double surrogate_sum_rate(const AllocationPlan& plan, const ChannelRealization& ch);

enum class GpMode {
    exact_gradient,     ///< projected ascent in (p, d) with the exact surrogate gradient
    natural_parameter,  ///< step in the output family's natural parameters, then map back
};

struct GpConfig {
    double alpha = 1e-2;      ///< initial step (natural-parameter mode) or first step scale
    int max_iters = 5000;
    double tol = 1e-8;  ///< on the unit-step projected gradient in the scaled variables p/(P/N), d/(P/N)^2
    bool backtracking = true;
    GpMode mode = GpMode::exact_gradient;
    double kurtosis_margin = 1e-4;  ///< input kurtosis capped at 2 - margin
};

struct GpTraceEntry {
    int iteration = 0;
    double rate = 0.0;  ///< nats
    double eisl = 0.0;
    double slack = 0.0;  ///< budget minus EISL-constraint left side, >= 0 when feasible
};

struct GpResult {
    AllocationPlan plan;
    double rate = 0.0;
    std::vector<GpTraceEntry> trace;
    int iterations = 0;
    bool converged = false;
};

/// Uniform power with d_i = min(zeta p_i^2, cap), zeta = D N^2 / ((N-1) P^2).
AllocationPlan default_initial_plan(const ChannelRealization& ch, double P, double D, double kurtosis_margin);

GpResult gp_run(const ChannelRealization& ch, double P, double D, const GpConfig& cfg = {},
                std::optional<AllocationPlan> init = std::nullopt);

}  // namespace isac
