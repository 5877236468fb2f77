#pragma once

// Independent reference computations used only by the test suites. Nothing in
// here calls into the closed forms under test.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

/// Radial moments of p(eta) ∝ exp(a eta - c eta^2), eta = |z|^2 >= 0, by
/// adaptive Gauss-Kronrod quadrature.
struct RadialQuadrature {
    double log_z1;   // ln int_0^inf exp(a eta - c eta^2)
    double m2;       // E eta
    double m4;       // E eta^2
    double entropy;  // -int p_z ln p_z over the complex plane
};

inline RadialQuadrature radial_quadrature(double a, double c) {
    using boost::math::quadrature::gauss_kronrod;
    const double mode = std::max(a / (2.0 * c), 0.0);
    const double peak = a * mode - c * mode * mode;
    const double sigma = 1.0 / std::sqrt(2.0 * c);
    // Support bound: 40 Gaussian widths past the mode, or 40 decay lengths when a < 0.
    const double scale = a < 0.0 ? std::min(sigma, -1.0 / a) : sigma;
    const double upper = mode + 40.0 * scale;
    auto weight = [=](double eta) { return std::exp(a * eta - c * eta * eta - peak); };
    auto integrate = [&](const std::function<double(double)>& f) {
        double err = 0.0;
        return gauss_kronrod<double, 61>::integrate(f, 0.0, upper, 15, 1e-14, &err);
    };
    const double z = integrate(weight);
    const double e1 = integrate([&](double x) { return x * weight(x); }) / z;
    const double e2 = integrate([&](double x) { return x * x * weight(x); }) / z;
    const double log_z1 = std::log(z) + peak;
    // -int p_z ln p_z dz with dz = pi d eta and p_z = p(eta) / pi.
    const double h = integrate([&](double x) {
        const double w = weight(x) / z;
        return w > 0.0 ? -w * (std::log(w) - std::log(std::numbers::pi)) : 0.0;
    });
    return {log_z1, e1, e2, h};
}

/// Central finite difference of a scalar function.
template <class F>
double central_difference(F&& f, double x, double step) {
    return (f(x + step) - f(x - step)) / (2.0 * step);
}

}  // namespace oracle

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace oracle {

/// Central finite differences of the literal closed-form entropy evaluated in
/// 100-digit arithmetic. Resolves gradients that are exponentially small
/// relative to h itself (ring limit), where double-precision differencing
/// only sees rounding noise.
struct EntropyDifferences {
    double d_a;
    double d_c;
};

inline EntropyDifferences entropy_finite_differences(double a_in, double c_in) {
    using real = boost::multiprecision::cpp_bin_float_100;
    auto h = [](const real& a, const real& c) {
        const real pi = boost::math::constants::pi<real>();
        const real z1 = sqrt(pi / (4 * c)) * exp(a * a / (4 * c)) * (1 + boost::math::erf(a / (2 * sqrt(c))));
        return log(pi) + real(0.5) + log(z1) - a / (4 * c) / z1 - a * a / (4 * c);
    };
    const real a = a_in;
    const real c = c_in;
    const real step("1e-25");
    const real da = (h(a + step, c) - h(a - step, c)) / (2 * step);
    const real dc = (h(a, c + step) - h(a, c - step)) / (2 * step);
    return {static_cast<double>(da), static_cast<double>(dc)};
}

}  // namespace oracle
