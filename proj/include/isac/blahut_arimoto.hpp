#pragma once

// Factorized modified Blahut-Arimoto on circularly symmetric inputs.
//
// A subcarrier with gain h carries rings |x| = rho_k with uniform phase. The
// output magnitude r = |y| has density
//   f(r | s) = 2 r exp(-(r - s)^2) I0e(2 r s),  s = |h| rho,
// (the phase integral done analytically), discretized by composite
// Gauss-Legendre nodes r_j with weights v_j. Row-normalizing
// W_kj = f(r_j | s_k) v_j gives a discrete channel, and
//   I(w) = sum_k w_k D(W_k || q) + sum_k w_k A_k,
//   A_k = -sum_j W_kj ln(W_kj / (2 pi r_j v_j)) - ln(pi e),
// is the quadrature estimate of h(y) - h(n). The constant A_k enters the BA
// update as a per-input cost, so the iteration is an exact BA on a discrete
// channel and inherits its monotonicity.

#include "isac/channel.hpp"
#include "isac/radial.hpp"

#include <vector>

namespace isac {

struct OutputQuadrature {
    double panel_width = 0.75;  ///< target width of each Gauss-Legendre panel in |y|
    int order = 8;              ///< nodes per panel
    double noise_margin = 6.0;  ///< |y| range extends to |h| rho_max + margin
};

class RadialChannel {
public:
    RadialChannel(std::vector<double> rings, cplx h, OutputQuadrature quad = {});

    const std::vector<double>& rings() const { return rings_; }
    size_t size() const { return rings_.size(); }
    size_t output_nodes() const { return nodes_.size(); }

    /// Quadrature estimate of I(x; hx + n) in nats for ring weights w.
    double mutual_info(const std::vector<double>& w) const;

    /// I(w) - lambda E|x|^2 - mu E|x|^4.
    double lagrangian(const std::vector<double>& w, double lambda, double mu) const;

    /// One BA step: w_k <- w_k exp(D(W_k || q) + A_k - lambda rho_k^2 - mu rho_k^4), normalized.
    std::vector<double> update(const std::vector<double>& w, double lambda, double mu) const;

    /// Per-ring divergence D(W_k || q) + A_k (the BA potential before costs).
    std::vector<double> potentials(const std::vector<double>& w) const;

    /// K x K matrix sum_j W_kj W_lj / q_j, the negative Hessian of I(w).
    std::vector<double> curvature(const std::vector<double>& w) const;

private:
    std::vector<double> rings_;
    std::vector<double> nodes_;
    std::vector<double> log_node_measure_;  // ln(2 pi r_j v_j)
    std::vector<double> w_matrix_;          // K x J, row-normalized
    std::vector<double> ring_constant_;     // A_k
    std::vector<double> neg_entropy_;       // sum_j W_kj ln W_kj
};

/// Uniformly spaced magnitude grid [0, rho_max] with `rings` points.
std::vector<double> ring_grid(int rings, double rho_max);

/// Single BA update of a radial distribution.
RadialDistribution ba_inner_update(const RadialDistribution& r, cplx h, double lambda, double mu);

/// Mutual information of a radial input over y = h x + n, nats.
double mutual_info(const RadialDistribution& r, cplx h);

struct BaConfig {
    int rings = 64;
    double rho_max_factor = 4.0;   ///< rho_max = factor sqrt(p kappa)
    bool refine_grid = false;      ///< double the rings until the rate moves < refine_tol
    double refine_tol = 1e-4;
    int max_inner = 20000;
    double inner_tol = 1e-8;       ///< total-variation change that ends the inner loop
    double moment_tol = 1e-4;      ///< relative moment error that ends the dual search
    int max_dual_evals = 400;
    OutputQuadrature quadrature;
};

struct BaInnerResult {
    std::vector<double> weights;
    int iterations = 0;
    bool converged = false;
};

/// Runs BA updates from `w0` to a fixed point for fixed dual variables. Plain BA
/// is sublinear on fine grids, so after a warm-up the support is polished with
/// line-searched Newton steps; every accepted step raises the Lagrangian.
BaInnerResult ba_fixed_point(const RadialChannel& channel, std::vector<double> w0, double lambda, double mu,
                             int max_iters, double tol);

struct BaSubcarrier {
    RadialDistribution distribution;
    double lambda = 0.0;
    double mu = 0.0;
    double m2 = 0.0;
    double m4 = 0.0;
    double rate = 0.0;  ///< nats
    int inner_iterations = 0;
    bool converged = false;
};

struct BaDesign {
    std::vector<BaSubcarrier> subcarriers;
    double rate = 0.0;  ///< sum over subcarriers, nats
    double shared_mu = 0.0;  ///< pooled mode only
};

/// Per-subcarrier dual search (Nelder-Mead on lambda_i, mu_i) hitting E|x|^2 = p_i
/// and E|x|^4 = d_i + p_i^2. Kurtosis-2 targets fix mu = 0; kurtosis-1 targets
/// are a single ring.
BaSubcarrier ba_design_subcarrier(cplx h, double p_target, double d_target, const BaConfig& cfg = {});
BaDesign ba_design(const ChannelRealization& ch, const std::vector<double>& p_targets,
                   const std::vector<double>& d_targets, const BaConfig& cfg = {});

/// Shared-mu mode: lambda_i per subcarrier hits p_i, a single mu is bisected so
/// that the total excess fourth moment matches sum d_i.
BaDesign ba_design_pooled(const ChannelRealization& ch, const std::vector<double>& p_targets,
                          const std::vector<double>& d_targets, const BaConfig& cfg = {});

/// Full 2-D BA on a polar input lattice (rings x phases) for one subcarrier,
/// with output quadrature over the plane; returns the fixed-point mutual
/// information for the power multiplier lambda. Used to check the radial reduction.
struct PlanarBaResult {
    std::vector<double> weights;  ///< rings x phases, row-major by ring
    double mutual_info = 0.0;
    int iterations = 0;
};
PlanarBaResult planar_ba(const std::vector<double>& rings, int phases, cplx h, double lambda, int max_iters,
                         double tol, int angle_nodes = 64);

}  // namespace isac
