#pragma once

// Densities on a square lattice over the complex plane, Gaussian noise
// convolution by FFT, and the constrained deconvolution that recovers an input
// density from a designed output density.
//
// The lattice has M x M nodes z = (ix - M/2, iy - M/2) * dx with dx = 2L/M, so
// the origin is a node. Convolution is circular; with the default extent of
// six output standard deviations the wrap-around mass is negligible, and the
// lattice symmetries (quarter turns, reflections) are kept exactly.

#include "isac/fft.hpp"

#include <functional>
#include <vector>

namespace isac {

struct PlaneDensity {
    int m = 0;             ///< nodes per side (even)
    double extent = 0.0;   ///< half width L
    std::vector<double> values;  ///< row-major [iy * m + ix]

    PlaneDensity() = default;
    PlaneDensity(int m, double extent);

    double spacing() const { return 2.0 * extent / m; }
    double cell_area() const { return spacing() * spacing(); }
    double coord(int i) const { return (i - m / 2) * spacing(); }
    double& at(int ix, int iy) { return values[static_cast<size_t>(iy) * m + ix]; }
    double at(int ix, int iy) const { return values[static_cast<size_t>(iy) * m + ix]; }

    double mass() const;
    double m2() const;  ///< E|z|^2
    double m4() const;  ///< E|z|^4
    void normalize();
    /// Throws DomainError on negative entries or mass off by more than tol.
    void validate(double tol = 1e-6) const;

    /// Samples f(x, y) at the nodes and normalizes.
    static PlaneDensity sample(int m, double extent, const std::function<double(double, double)>& f);
    /// All mass on the origin node.
    static PlaneDensity point_mass(int m, double extent);
};

struct ConvolveResult {
    PlaneDensity density;
    double boundary_mass = 0.0;  ///< output mass in the outermost ring of cells
    bool extent_warning = false; ///< boundary_mass > 1e-6
};

/// Density of z + n with n circular Gaussian of variance noise_var, on the input lattice.
ConvolveResult forward_convolve(const PlaneDensity& input, double noise_var);

struct DeconvConfig {
    int max_iters = 20000;
    double tol = 1e-9;  ///< gradient-mapping norm relative to the target norm
    double warm_start_reg = 1e-12;  ///< Tikhonov term of the Fourier-division start
};

struct DeconvResult {
    PlaneDensity density;
    double residual = 0.0;      ///< relative L2 distance of the reconvolved density to the target
    double stationarity = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_trace;  ///< every 50 iterations
};

/// Least-squares deconvolution over nonnegative normalized densities
/// (accelerated projected gradient with restarts).
DeconvResult deconvolve(const PlaneDensity& target, double noise_var, const DeconvConfig& cfg = {});

/// Max-entropy output density of subcarrier (p, d, h) with unit noise, on an
/// m-node lattice of half width 6 sqrt(M2_out).
PlaneDensity maxent_output_density(double p, double d, cplx h, int m = 256);

struct LegitimacyConfig {
    double residual_threshold = 1e-2;
    double negativity_threshold = 1e-3;
    double retained_noise = 0.5;  ///< fraction of the noise variance left in the Fourier division
    int grid = 256;
    DeconvConfig deconv;
};

struct LegitimacyReport {
    bool legitimate = false;
    double residual = 0.0;       ///< constrained deconvolution residual
    double negative_mass = 0.0;  ///< negative share of the Fourier-division estimate
    DeconvResult deconvolution;
};

/// Whether the max-entropy output for (p, d, h) is, to tolerance, noise
/// convolved with some input law. The Fourier estimate divides out all but
/// `retained_noise` of the noise variance: for a legitimate target it equals
/// the input smoothed by that much Gaussian noise, hence nonnegative.
LegitimacyReport legitimacy_check(double p, double d, cplx h, const LegitimacyConfig& cfg = {});

/// Share of |negative| mass in the partial Fourier division of `target`.
double fourier_negative_mass(const PlaneDensity& target, double noise_var, double retained_noise);

struct MagnitudeMarginal {
    std::vector<double> radius;
    std::vector<double> density;  ///< integrates to ~1 over radius
};

/// Histogram density of |z| / scale on `bins` equal bins over [0, L / scale].
MagnitudeMarginal magnitude_marginal(const PlaneDensity& d, int bins, double scale = 1.0);

/// ||a - b|| / ||b|| over the lattice.
double relative_l2(const PlaneDensity& a, const PlaneDensity& b);

}  // namespace isac
