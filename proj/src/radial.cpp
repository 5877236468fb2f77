#include "isac/radial.hpp"

#include <cmath>
#include <stdexcept>

namespace isac {

double RadialDistribution::m2() const {
    double s = 0.0;
    for (size_t k = 0; k < grid.size(); ++k) {
        s += weights[k] * grid[k] * grid[k];
    }
    return s;
}

double RadialDistribution::m4() const {
    double s = 0.0;
    for (size_t k = 0; k < grid.size(); ++k) {
        const double r2 = grid[k] * grid[k];
        s += weights[k] * r2 * r2;
    }
    return s;
}

void RadialDistribution::validate(double tol) const {
    if (grid.empty() || grid.size() != weights.size()) {
        throw std::invalid_argument("radial distribution: grid and weights must be nonempty and of equal length");
    }
    double total = 0.0;
    for (size_t k = 0; k < grid.size(); ++k) {
        if (!(grid[k] >= 0.0) || (k > 0 && !(grid[k] > grid[k - 1]))) {
            throw std::invalid_argument("radial distribution: grid must be nonnegative and strictly increasing");
        }
        if (!(weights[k] >= 0.0)) {
            throw std::invalid_argument("radial distribution: negative weight");
        }
        total += weights[k];
    }
    if (std::abs(total - 1.0) > tol) {
        throw std::invalid_argument("radial distribution: weights sum to " + std::to_string(total));
    }
}

RadialDistribution point_mass(double rho) { return {{rho}, {1.0}}; }

}  // namespace isac
