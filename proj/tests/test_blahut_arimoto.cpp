#include "isac/blahut_arimoto.hpp"
#include "isac/error.hpp"
#include "isac/gradient_projection.hpp"

#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace isac;

namespace {

const double kLogPiE = std::log(std::numbers::pi * std::numbers::e);

// h(y) - ln(pi e) for a ring input of radius s = |h| rho, integrating the
// planar density over (|y|, angle): adaptive Gauss-Kronrod in |y|, a
// 256-point trapezoid over the angle (spectrally accurate for periodic
// integrands) and an inner 256-point trapezoid over the input phase.
double ring_mutual_info_oracle(double s) {
    const int angles = 256;
    auto density = [&](double r) {
        // Planar output density at (r, 0); by symmetry it does not depend on the output angle.
        double acc = 0.0;
        for (int m = 0; m < angles; ++m) {
            const double phi = 2.0 * std::numbers::pi * (m + 0.5) / angles;
            const double dx = r - s * std::cos(phi);
            const double dy = s * std::sin(phi);
            acc += std::exp(-(dx * dx + dy * dy));
        }
        return acc / angles / std::numbers::pi;
    };
    auto integrand = [&](double r) {
        const double f = density(r);
        return f > 0.0 ? -2.0 * std::numbers::pi * r * f * std::log(f) : 0.0;
    };
    const double lo = std::max(0.0, s - 9.0);
    const double hi = s + 9.0;
    double err = 0.0;
    const double h = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 12, 1e-13, &err);
    return h - kLogPiE;
}

std::vector<double> rayleigh_weights(const std::vector<double>& grid, double p) {
    std::vector<double> w(grid.size());
    double s = 0.0;
    for (size_t k = 0; k < grid.size(); ++k) {
        w[k] = grid[k] * std::exp(-grid[k] * grid[k] / p);
        s += w[k];
    }
    for (auto& v : w) {
        v /= s;
    }
    return w;
}

}  // namespace

TEST_CASE("ring grid") {
    const auto g = ring_grid(5, 2.0);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 2.0);
    CHECK(g[1] == doctest::Approx(0.5));
    CHECK_THROWS_AS(ring_grid(1, 1.0), std::invalid_argument);
}

TEST_CASE("point mass at the origin carries no information") {
    CHECK(mutual_info(point_mass(0.0), 1.0) == 0.0);
    // Through the quadrature as well: the output is exactly the noise.
    const RadialChannel ch({0.0}, cplx(0.3, 1.1));
    CHECK(std::abs(ch.mutual_info({1.0})) < 1e-10);
}

TEST_CASE("one update keeps the weights normalized") {
    const RadialDistribution r{ring_grid(64, 8.0), std::vector<double>(64, 1.0 / 64)};
    const auto next = ba_inner_update(r, cplx(0.8, 0.2), 0.3, 0.01);
    CHECK(std::accumulate(next.weights.begin(), next.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (double w : next.weights) {
        CHECK(w >= 0.0);
    }
}

TEST_CASE("discretized Rayleigh input reaches AWGN capacity") {
    for (double g : {0.2, 1.0, 3.0}) {
        for (double p : {0.5, 2.0, 10.0}) {
            const auto grid = ring_grid(64, 4.0 * std::sqrt(2.0 * p));
            const RadialDistribution r{grid, rayleigh_weights(grid, p)};
            CHECK(std::abs(mutual_info(r, std::sqrt(g)) - std::log1p(g * p)) < 2e-3);
        }
    }
}

TEST_CASE("constant-modulus mutual information against the planar oracle") {
    for (double g : {0.5, 1.0, 4.0}) {
        for (double p : {0.5, 3.0, 10.0}) {
            const double got = mutual_info(point_mass(std::sqrt(p)), std::sqrt(g));
            const double want = ring_mutual_info_oracle(std::sqrt(g * p));
            CHECK(got == doctest::Approx(want).epsilon(1e-8));
            CHECK(got > 0.0);
            CHECK(got < std::log1p(g * p));
        }
    }
}

TEST_CASE("BA Lagrangian is monotone and the fixed point is stable") {
    const RadialChannel ch(ring_grid(64, 4.0 * std::sqrt(2.0 * 4.0)), cplx(0.0, 1.3));
    for (auto [lambda, mu] : {std::pair{0.2, 0.0}, std::pair{0.05, 0.01}, std::pair{-0.1, 0.03}}) {
        std::vector<double> w(64, 1.0 / 64);
        double prev = ch.lagrangian(w, lambda, mu);
        for (int it = 0; it < 300; ++it) {
            w = ch.update(w, lambda, mu);
            const double now = ch.lagrangian(w, lambda, mu);
            CHECK(now >= prev - 1e-9);
            prev = now;
        }
        const auto fixed = ba_fixed_point(ch, w, lambda, mu, 200000, 1e-11);
        CHECK(fixed.converged);
        const auto again = ch.update(fixed.weights, lambda, mu);
        double tv = 0.0;
        for (size_t k = 0; k < again.size(); ++k) {
            tv += 0.5 * std::abs(again[k] - fixed.weights[k]);
        }
        CHECK(tv < 1e-8);
    }
}

TEST_CASE("power-constrained fixed point is near Gaussian") {
    // For y = x + n the optimum under E|x|^2 <= p is Gaussian, with lambda = 1/(1+p).
    const double p = 5.0;
    const RadialChannel ch(ring_grid(64, 4.0 * std::sqrt(2.0 * p)), 1.0);
    const auto fixed = ba_fixed_point(ch, std::vector<double>(64, 1.0 / 64), 1.0 / (1.0 + p), 0.0, 200000, 1e-10);
    double m2 = 0.0, m4 = 0.0;
    for (size_t k = 0; k < 64; ++k) {
        const double r2 = ch.rings()[k] * ch.rings()[k];
        m2 += fixed.weights[k] * r2;
        m4 += fixed.weights[k] * r2 * r2;
    }
    CHECK(m2 == doctest::Approx(p).epsilon(1e-2));
    CHECK(m4 / (m2 * m2) == doctest::Approx(2.0).epsilon(1e-2));
    CHECK(ch.mutual_info(fixed.weights) == doctest::Approx(std::log1p(p)).epsilon(2e-3));
}

TEST_CASE("per-subcarrier design hits moment targets") {
    for (double g : {0.3, 1.0, 2.5}) {
        const double p = 10.0;
        for (double kappa : {1.05, 1.3, 1.6, 1.9}) {
            const double d = (kappa - 1.0) * p * p;
            const auto s = ba_design_subcarrier(std::sqrt(g), p, d);
            CHECK(std::abs(s.m2 - p) <= 1e-3 * p);
            CHECK(std::abs(s.m4 - (d + p * p)) <= 1e-3 * (d + p * p));
            CHECK(s.rate <= rate_surrogate(p, d, std::sqrt(g)) + 1e-3);
            CHECK(s.rate > 0.0);
            CHECK(std::accumulate(s.distribution.weights.begin(), s.distribution.weights.end(), 0.0) ==
                  doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("Gaussian and constant-modulus targets") {
    const double p = 4.0;
    const auto gauss = ba_design_subcarrier(1.0, p, p * p);
    CHECK(gauss.mu == 0.0);
    CHECK(std::abs(gauss.m2 - p) <= 1e-3 * p);
    CHECK(gauss.rate == doctest::Approx(std::log1p(p)).epsilon(2e-3));
    const auto ring = ba_design_subcarrier(1.0, p, 0.0);
    REQUIRE(ring.distribution.size() == 1);
    CHECK(ring.distribution.grid[0] == doctest::Approx(2.0));
    CHECK(ring.m4 == doctest::Approx(p * p));
    CHECK_THROWS_AS(ba_design_subcarrier(1.0, p, 1.5 * p * p), InfeasibleKurtosis);
}

TEST_CASE("radial reduction agrees with a planar BA") {
    // Low SNR so eight phases resolve the ring as well as continuous phase does.
    const std::vector<double> rings = ring_grid(8, 2.5);
    const cplx h(0.6, 0.4);
    const double lambda = 0.6;
    const auto planar = planar_ba(rings, 8, h, lambda, 20000, 1e-10);
    const RadialChannel ch(rings, h);
    const auto radial = ba_fixed_point(ch, std::vector<double>(8, 1.0 / 8), lambda, 0.0, 20000, 1e-10);
    CHECK(std::abs(planar.mutual_info - ch.mutual_info(radial.weights)) < 1e-3);
    // The planar optimum is phase-symmetric.
    for (size_t k = 0; k < 8; ++k) {
        for (size_t m = 1; m < 8; ++m) {
            CHECK(planar.weights[k * 8 + m] == doctest::Approx(planar.weights[k * 8]).epsilon(1e-6).scale(1e-12));
        }
    }
}

TEST_CASE("pooled mu meets power targets and the total fourth-moment budget") {
    const auto ch = channel_from_gains({0.5, 1.0, cplx(0.0, 1.4), 2.0});
    const std::vector<double> p{8.0, 10.0, 11.0, 11.0};
    const std::vector<double> d{8.0, 20.0, 30.0, 40.0};
    BaConfig cfg;
    const auto pooled = ba_design_pooled(ch, p, d, cfg);
    double d_sum = 0.0;
    for (size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(pooled.subcarriers[i].m2 - p[i]) <= 1e-3 * p[i]);
        d_sum += pooled.subcarriers[i].m4 - p[i] * p[i];
    }
    CHECK(d_sum == doctest::Approx(98.0).epsilon(1e-3));
    CHECK(pooled.rate > 0.0);
}
