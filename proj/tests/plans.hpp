#pragma once

// Random allocation plans and brute-force sidelobe oracles shared by tests.

#include "isac/fft.hpp"
#include "isac/sidelobe.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

// Random plan with p on the simplex scaled by P, kurtoses in [1, 2], and D set
// to the plan's own EISL so that it is feasible with an active constraint.
inline isac::AllocationPlan random_plan(std::mt19937_64& rng, size_t n, double total_power) {
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    std::uniform_real_distribution<double> kappa(1.0, 2.0);
    isac::AllocationPlan plan;
    plan.p.resize(n);
    plan.d.resize(n);
    double s = 0.0;
    for (auto& v : plan.p) {
        v = unit(rng);
        s += v;
    }
    for (size_t i = 0; i < n; ++i) {
        plan.p[i] *= total_power / s;
        plan.d[i] = (kappa(rng) - 1.0) * plan.p[i] * plan.p[i];
    }
    plan.P = total_power;
    const double nd = static_cast<double>(n);
    double sd = 0.0, sp2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sd += plan.d[i];
        sp2 += plan.p[i] * plan.p[i];
    }
    // Equality in sum d + N|p|^2/(N-1) <= (N D + P^2)/(N-1).
    plan.D = ((nd - 1.0) * sd + nd * sp2 - total_power * total_power) / nd;
    return plan;
}

// Direct O(N^2) inverse DFT with 1/sqrt(N) normalization.
inline std::vector<isac::cplx> naive_idft(const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<isac::cplx> out(n);
    for (size_t k = 0; k < n; ++k) {
        isac::cplx acc = 0.0;
        for (size_t j = 0; j < n; ++j) {
            const double ang = 2.0 * std::numbers::pi * static_cast<double>(k * j % n) / static_cast<double>(n);
            acc += v[j] * std::polar(1.0, ang);
        }
        out[k] = acc / std::sqrt(static_cast<double>(n));
    }
    return out;
}

// E|r_k|^2 by expanding |sum_j |x_j|^2 w^{-kj}|^2 and taking the expectation
// term by term under independence.
inline std::vector<double> pacs_power_double_sum(const isac::AllocationPlan& plan) {
    const size_t n = plan.size();
    std::vector<double> out(n);
    for (size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (size_t j = 0; j < n; ++j) {
            for (size_t l = 0; l < n; ++l) {
                const double second = j == l ? plan.d[j] + plan.p[j] * plan.p[j] : plan.p[j] * plan.p[l];
                const long diff = static_cast<long>(j) - static_cast<long>(l);
                const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) * static_cast<double>(diff) /
                                   static_cast<double>(n);
                acc += second * std::cos(ang);
            }
        }
        out[k] = acc / static_cast<double>(n);
    }
    return out;
}

}  // namespace oracle
