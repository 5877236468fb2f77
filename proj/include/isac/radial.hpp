#pragma once

// Circularly symmetric law on a finite set of magnitudes; phase uniform.

#include <vector>

namespace isac {

struct RadialDistribution {
    std::vector<double> grid;     ///< magnitudes rho_k, strictly increasing, >= 0
    std::vector<double> weights;  ///< probabilities, sum 1

    size_t size() const { return grid.size(); }
    double m2() const;  ///< E|x|^2
    double m4() const;  ///< E|x|^4
    /// Throws std::invalid_argument unless sizes match, the grid is increasing and nonnegative,
    /// and the weights are nonnegative with unit sum (tolerance `tol`).
    void validate(double tol = 1e-12) const;
};

/// Single ring |x| = rho.
RadialDistribution point_mass(double rho);

}  // namespace isac
