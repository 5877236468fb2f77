#pragma once

// Periodic autocorrelation spectrum (PACS) of an OFDM frame and the closed-form
// expectations of its sidelobes under independent per-subcarrier symbols.
//
// DFT convention: F = [w^{kn}] / sqrt(N), w = exp(-2 pi i / N). The normalized
// PACS is r = F^H |x|^2 and r[0] is the zero-delay mainlobe. The unnormalized
// PACS is sqrt(N) r.

#include "isac/fft.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace isac {

/// Per-subcarrier second moments p and excess fourth moments d = E|x|^4 - p^2,
/// together with the global power budget P and EISL budget D.
struct AllocationPlan {
    std::vector<double> p;
    std::vector<double> d;
    double P = 0.0;
    double D = 0.0;

    size_t size() const { return p.size(); }
    /// kappa_i = 1 + d_i / p_i^2 (requires p_i > 0).
    double kurtosis(size_t i) const { return 1.0 + d[i] / (p[i] * p[i]); }
    std::vector<double> kurtoses() const;
};

/// Left side minus right side of the EISL budget constraint
/// sum d + N ||p||^2 / (N-1) <= (N D + P^2) / (N-1). Feasible iff <= 0.
double eisl_constraint_slack(const AllocationPlan& plan);

/// Checks p, d >= 0, sum p = P (relative tol) and the EISL budget (absolute tol).
bool is_feasible(const AllocationPlan& plan, double tol = 1e-9);

/// Normalized PACS r = F^H |x|^2 (complex, length N). Multiply by sqrt(N) when
/// `unnormalized` is set.
std::vector<cplx> pacs(std::span<const cplx> frame, bool unnormalized = false);

/// Expected integrated sidelobe level sum_{i>=2} E|r_i|^2 for independent symbols.
double eisl_expected(const AllocationPlan& plan);

/// E|r_i|^2 for every delay i (index 0 is the mainlobe).
std::vector<double> pacs_expected(const AllocationPlan& plan);

/// E|r_i|^2 / E|r_0|^2.
std::vector<double> normalized_delay_response(const AllocationPlan& plan);

/// EISL budget D = zeta (N-1) P^2 / N^2; zeta = kappa_bar - 1 under uniform power.
double eisl_budget(double zeta, size_t n, double total_power);

struct AverageKurtosis {
    double value = 0.0;
    std::vector<size_t> excluded;  ///< subcarriers with p_i = 0
};

/// Mean of kappa_i over subcarriers carrying power.
AverageKurtosis average_kurtosis(const AllocationPlan& plan);

}  // namespace isac
