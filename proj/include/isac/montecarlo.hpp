#pragma once

// Seeded Monte-Carlo validation of the sidelobe expectations.
//
// Symbol (frame f, subcarrier i) of a batch with seed s is a pure function of
// Philox4x32-10 block (counter = [i, 0, f mod 2^32, tag ^ (f >> 32)], key = s),
// so batches are reproducible bit for bit and can be generated in any order.

#include "isac/error.hpp"
#include "isac/fft.hpp"
#include "isac/maxent.hpp"
#include "isac/radial.hpp"
#include "isac/sidelobe.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace isac {

struct ConstantModulus {
    double power = 0.0;  ///< |x|^2, deterministic
};
struct CircularGaussian {
    double power = 1.0;  ///< E|x|^2
};

/// Law of one subcarrier's symbol. MaxEntParams samples the family exactly:
/// |x|^2 is a normal (mean a/2c, variance 1/2c) truncated to [0, inf).
using SymbolLaw = std::variant<ConstantModulus, CircularGaussian, MaxEntParams, RadialDistribution>;

/// Law with second moment p and excess fourth moment d: constant modulus at
/// kappa = 1, circular Gaussian at kappa = 2, the max-entropy member between.
SymbolLaw law_for_moments(double p, double d);
std::vector<SymbolLaw> laws_for_plan(const AllocationPlan& plan);

struct FrameBatch {
    size_t frames = 0;
    size_t n = 0;
    uint64_t seed = 0;
    std::vector<cplx> symbols;  ///< row-major, frames x n

    const cplx& at(size_t frame, size_t i) const { return symbols[frame * n + i]; }
};

FrameBatch sample_symbols(const std::vector<SymbolLaw>& laws, size_t frames, uint64_t seed);

/// Inverse-CDF draw of a unit normal truncated to [alpha, inf), returned as the
/// excess z - alpha (accurate when alpha is large).
double truncated_normal_excess(double alpha, double u);

struct BinStatistics {
    std::vector<double> mean;
    std::vector<double> std_error;  ///< standard error of each mean
};
/// Mean and standard error of |r_i|^2 over frames, r = pacs(frame).
BinStatistics empirical_pacs_power(const FrameBatch& batch, bool unnormalized = false);

struct ScalarStatistic {
    double mean = 0.0;
    double std_error = 0.0;
};
/// Mean and standard error of sum_{i>=1} |r_i|^2 over frames.
ScalarStatistic empirical_eisl(const FrameBatch& batch, bool unnormalized = false);

/// Per-subcarrier sample means of |x|^2 and |x|^4.
struct MomentStatistics {
    std::vector<ScalarStatistic> m2;
    std::vector<ScalarStatistic> m4;
};
MomentStatistics empirical_moments(const FrameBatch& batch);

}  // namespace isac
