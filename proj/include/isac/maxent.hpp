#pragma once

// Two-parameter maximum-entropy family of circularly symmetric complex
// scalars with density p(z) = exp(a|z|^2 - c|z|^4) / Z0, Z0 = pi * Z1.
//
// Every quantity is evaluated through the shape variable t = -a / (2 sqrt(c))
// and the scale s = sqrt(c). The squared magnitude eta = |z|^2 is a normal
// variable with mean a/(2c) and variance 1/(2c) truncated to [0, inf), so the
// closed forms reduce to truncated-normal tail ratios that stay finite in
// both limits (ring, t -> -inf; Gaussian, t -> +inf).

namespace isac {

struct MaxEntParams {
    double a = 0.0;  ///< coefficient of +|z|^2 in the exponent
    double c = 1.0;  ///< coefficient of -|z|^4 in the exponent, c > 0
};

struct MomentPair {
    double m2 = 1.0;  ///< E|z|^2
    double m4 = 2.0;  ///< E|z|^4

    double kurtosis() const { return m4 / (m2 * m2); }
};

struct EntropyGradient {
    double d_a = 0.0;
    double d_c = 0.0;
};

/// Default distance kept from the open ends of the attainable kurtosis interval (1, 2).
inline constexpr double kKurtosisMargin = 1e-4;

/// ln Z1 with Z1 = int_0^inf exp(a eta - c eta^2) d eta.
double log_partition(MaxEntParams params);

/// Second and fourth absolute moments of the family member.
MomentPair moments(MaxEntParams params);

/// Differential entropy of z in nats.
double entropy(MaxEntParams params);

/// Exact gradient of the entropy with respect to (a, c).
EntropyGradient grad_entropy(MaxEntParams params);

/// Kurtosis of the family as a function of the shape variable t = -a/(2 sqrt(c)).
/// Increases monotonically from 1 (t -> -inf) to 2 (t -> +inf).
double kurtosis_of_shape(double t);

struct MomentInversion {
    MaxEntParams params;
    bool clamped = false;  ///< requested kurtosis was pulled into [1+margin, 2-margin]
};

/// Inverse of the moment map: natural parameters reproducing (m2, m4).
///
/// Kurtosis requests inside (1, 2) but within `margin` of an end are clamped
/// and flagged; requests outside (1, 2) throw InfeasibleKurtosis.
MomentInversion invert_moments(MomentPair target, double margin = kKurtosisMargin);

/// Convenience wrapper returning only the parameters of invert_moments.
MaxEntParams params_from_moments(MomentPair target, double margin = kKurtosisMargin);

/// Largest differential entropy (nats) among circularly symmetric laws with the
/// given moments. Kurtosis exactly 2 (to rounding) is the circular Gaussian
/// ln(pi e m2); otherwise the family member is used with the given margin.
double max_entropy(MomentPair m, double margin = kKurtosisMargin);

/// Sensitivities of max_entropy to its constraints: dh/dm2 = -a, dh/dm4 = c.
struct MomentSensitivity {
    double d_m2 = 0.0;
    double d_m4 = 0.0;
};
MomentSensitivity max_entropy_sensitivity(MomentPair m, double margin = kKurtosisMargin);

/// max_entropy and its sensitivities from a single moment inversion.
struct MaxEntropyPoint {
    double value = 0.0;
    MomentSensitivity sensitivity;
};
MaxEntropyPoint max_entropy_point(MomentPair m, double margin = kKurtosisMargin);

/// Numerical partial derivative of the max-entropy value with respect to the
/// power constraint m2, holding the fourth-moment constraint at its value
/// m4 = kappa * m2^2 (central difference through invert_moments and entropy).
///
/// Analytically this equals -a, so it is negative for kappa < pi/2, zero at
/// pi/2 and positive above, for every m2. Along the fixed-kurtosis curve the
/// derivative would instead be 1/m2 (scale law), which never changes sign.
double partial_entropy_wrt_power(double kappa, double m2);

}  // namespace isac
