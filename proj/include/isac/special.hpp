#pragma once

#include <vector>

namespace isac::special {

/// ln(erfcx(t)) where erfcx(t) = exp(t^2) erfc(t); finite for every finite t.
double log_erfcx(double t);

/// Quantities of a unit normal truncated to [alpha, inf).
///
/// excess = lambda(alpha) - alpha with lambda the inverse Mills ratio
/// phi(alpha)/Q(alpha); one_minus = 1 - alpha * excess. Both are computed
/// without cancellation for large alpha (continued fraction).
struct TailRatio {
    double inverse_mills;  ///< lambda(alpha) = phi(alpha)/Q(alpha)
    double excess;
    double one_minus;
    double log_mills;  ///< ln(Q(alpha)/phi(alpha))
};
TailRatio normal_tail_ratio(double alpha);

/// ln Q(x) for the standard normal upper tail, accurate far into the tail.
double log_normal_tail(double x);

/// Exponentially scaled modified Bessel function exp(-x) I0(x), x >= 0.
double bessel_i0e(double x);

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [lo, hi].
QuadratureRule gauss_legendre(int n, double lo = -1.0, double hi = 1.0);

/// Composite Gauss-Legendre: `panels` equal panels of `order` nodes each.
QuadratureRule composite_gauss_legendre(int panels, int order, double lo, double hi);

}  // namespace isac::special
