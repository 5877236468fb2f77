#include "isac/maxent.hpp"

#include "isac/error.hpp"
#include "isac/special.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

namespace isac {

namespace {

// Closed-form building blocks at shape t = -a/(2 sqrt c) and scale s = sqrt c.
struct Shape {
    double t;
    double s;
    double u;          // s * M2
    double one_minus;  // 2 c M4 = 1 + a M2
    double log_z1;
    double inv_z1;
};

void check_params(MaxEntParams params) {
    if (!std::isfinite(params.a) || !std::isfinite(params.c) || !(params.c > 0.0)) {
        throw DomainError("max-entropy family requires finite a and c > 0 (got a=" + std::to_string(params.a) +
                          ", c=" + std::to_string(params.c) + ")");
    }
}

Shape shape_of(MaxEntParams params) {
    check_params(params);
    const double s = std::sqrt(params.c);
    const double t = -params.a / (2.0 * s);
    const auto tail = special::normal_tail_ratio(std::numbers::sqrt2 * t);
    Shape sh{};
    sh.t = t;
    sh.s = s;
    sh.u = tail.excess / std::numbers::sqrt2;
    sh.one_minus = tail.one_minus;
    const double log_erfcx = tail.log_mills - 0.5 * std::log(std::numbers::pi / 2.0);
    sh.log_z1 = std::log(std::sqrt(std::numbers::pi) / 2.0) - std::log(s) + log_erfcx;
    sh.inv_z1 = std::numbers::sqrt2 * s * tail.inverse_mills;
    if (!std::isfinite(sh.log_z1) || !std::isfinite(sh.u)) {
        throw DomainError("max-entropy family: non-finite partition function");
    }
    return sh;
}

}  // namespace

double log_partition(MaxEntParams params) { return shape_of(params).log_z1; }

MomentPair moments(MaxEntParams params) {
    const Shape sh = shape_of(params);
    return {sh.u / sh.s, sh.one_minus / (2.0 * params.c)};
}

double entropy(MaxEntParams params) {
    const Shape sh = shape_of(params);
    // ln(pi) + ln Z1 - a M2 + c M4 with a M2 = -2 t u and c M4 = (1 - 2 t u)/2.
    return std::log(std::numbers::pi) + 0.5 + sh.log_z1 + sh.t * sh.u;
}

EntropyGradient grad_entropy(MaxEntParams params) {
    const Shape sh = shape_of(params);
    const double m4 = sh.one_minus / (2.0 * params.c);
    return {0.5 * m4 * sh.inv_z1, -0.5 / params.c - params.a * m4 * sh.inv_z1 / (4.0 * params.c)};
}

double kurtosis_of_shape(double t) {
    const auto tail = special::normal_tail_ratio(std::numbers::sqrt2 * t);
    return tail.one_minus / (tail.excess * tail.excess);
}

MomentInversion invert_moments(MomentPair target, double margin) {
    if (!std::isfinite(target.m2) || !std::isfinite(target.m4) || !(target.m2 > 0.0)) {
        throw DomainError("moment inversion requires finite m2 > 0");
    }
    double kappa = target.kurtosis();
    if (!(kappa > 1.0 && kappa < 2.0)) {
        throw InfeasibleKurtosis(kappa);
    }
    MomentInversion out;
    if (kappa < 1.0 + margin) {
        kappa = 1.0 + margin;
        out.clamped = true;
    } else if (kappa > 2.0 - margin) {
        kappa = 2.0 - margin;
        out.clamped = true;
    }

    // Brackets from the asymptotes kappa ~ 1 + 1/(2t^2) (ring) and kappa ~ 2 - 1/t^2 (Gaussian).
    double lo = 0.0;
    double hi = 0.0;
    if (kappa < std::numbers::pi / 2.0) {
        lo = -1.0 / std::sqrt(2.0 * (kappa - 1.0)) - 1.0;
    } else {
        hi = 2.0 / std::sqrt(2.0 - kappa) + 1.0;
    }
    auto residual = [kappa](double t) { return kurtosis_of_shape(t) - kappa; };
    for (int k = 0; k < 60 && residual(lo) > 0.0; ++k) {
        lo = 2.0 * lo - 1.0;
    }
    for (int k = 0; k < 60 && residual(hi) < 0.0; ++k) {
        hi = 2.0 * hi + 1.0;
    }
    std::uintmax_t max_iter = 200;
    const auto bracket = boost::math::tools::toms748_solve(residual, lo, hi, boost::math::tools::eps_tolerance<double>(52),
                                                           max_iter);
    if (max_iter >= 200) {
        throw NoConvergence("moment inversion: root search did not converge for kurtosis " + std::to_string(kappa));
    }
    const double t = 0.5 * (bracket.first + bracket.second);

    // Unit-power solution, then rescale: z -> sqrt(m2) z maps (a, c) to (a/m2, c/m2^2).
    const auto tail = special::normal_tail_ratio(std::numbers::sqrt2 * t);
    const double s_unit = tail.excess / std::numbers::sqrt2;
    const double a_unit = -2.0 * s_unit * t;
    const double c_unit = s_unit * s_unit;
    out.params = {a_unit / target.m2, c_unit / (target.m2 * target.m2)};
    return out;
}

MaxEntParams params_from_moments(MomentPair target, double margin) { return invert_moments(target, margin).params; }

namespace {

constexpr double kGaussianTolerance = 1e-12;

bool is_gaussian(MomentPair m) {
    const double kappa = m.kurtosis();
    if (kappa > 2.0 + kGaussianTolerance) {
        throw InfeasibleKurtosis(kappa);
    }
    return kappa >= 2.0 - kGaussianTolerance;
}

}  // namespace

double max_entropy(MomentPair m, double margin) {
    if (!(m.m2 > 0.0)) {
        throw DomainError("max_entropy requires m2 > 0");
    }
    if (is_gaussian(m)) {
        return std::log(std::numbers::pi * std::numbers::e * m.m2);
    }
    return entropy(invert_moments(m, margin).params);
}

MomentSensitivity max_entropy_sensitivity(MomentPair m, double margin) {
    if (!(m.m2 > 0.0)) {
        throw DomainError("max_entropy_sensitivity requires m2 > 0");
    }
    if (is_gaussian(m)) {
        return {1.0 / m.m2, 0.0};
    }
    const auto params = invert_moments(m, margin).params;
    return {-params.a, params.c};
}

MaxEntropyPoint max_entropy_point(MomentPair m, double margin) {
    if (!(m.m2 > 0.0)) {
        throw DomainError("max_entropy_point requires m2 > 0");
    }
    if (is_gaussian(m)) {
        return {std::log(std::numbers::pi * std::numbers::e * m.m2), {1.0 / m.m2, 0.0}};
    }
    const auto params = invert_moments(m, margin).params;
    return {entropy(params), {-params.a, params.c}};
}

double partial_entropy_wrt_power(double kappa, double m2) {
    if (!(kappa > 1.0 && kappa < 2.0)) {
        throw InfeasibleKurtosis(kappa);
    }
    if (!(m2 > 0.0)) {
        throw DomainError("partial_entropy_wrt_power requires m2 > 0");
    }
    const double m4 = kappa * m2 * m2;
    const double step = 1e-5 * m2;
    const double up = max_entropy({m2 + step, m4}, 1e-12);
    const double down = max_entropy({m2 - step, m4}, 1e-12);
    return (up - down) / (2.0 * step);
}

}  // namespace isac
