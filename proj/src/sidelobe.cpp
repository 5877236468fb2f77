#include "isac/sidelobe.hpp"

#include "isac/error.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace isac {

namespace {

void check_plan(const AllocationPlan& plan) {
    if (plan.p.size() != plan.d.size()) {
        throw std::invalid_argument("allocation plan: p and d differ in length");
    }
    if (plan.p.size() < 2) {
        throw std::invalid_argument("allocation plan: need N >= 2 subcarriers");
    }
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

double sum_squares(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0, [](double acc, double x) { return acc + x * x; });
}

}  // namespace

std::vector<double> AllocationPlan::kurtoses() const {
    std::vector<double> out(size());
    for (size_t i = 0; i < size(); ++i) {
        out[i] = kurtosis(i);
    }
    return out;
}

double eisl_constraint_slack(const AllocationPlan& plan) {
    check_plan(plan);
    const double n = static_cast<double>(plan.size());
    return sum(plan.d) + n * sum_squares(plan.p) / (n - 1.0) - (n * plan.D + plan.P * plan.P) / (n - 1.0);
}

bool is_feasible(const AllocationPlan& plan, double tol) {
    check_plan(plan);
    for (size_t i = 0; i < plan.size(); ++i) {
        if (plan.p[i] < 0.0 || plan.d[i] < 0.0) {
            return false;
        }
    }
    if (std::abs(sum(plan.p) - plan.P) > tol * plan.P) {
        return false;
    }
    return eisl_constraint_slack(plan) <= tol * std::max(1.0, plan.P * plan.P);
}

std::vector<cplx> pacs(std::span<const cplx> frame, bool unnormalized) {
    if (frame.size() < 2) {
        throw std::invalid_argument("pacs: need N >= 2");
    }
    const size_t n = frame.size();
    std::vector<cplx> power(n);
    for (size_t i = 0; i < n; ++i) {
        power[i] = std::norm(frame[i]);
    }
    // F^H has kernel w^{-kn} = exp(+2 pi i kn / N).
    auto r = FftPlan(static_cast<int>(n), +1)(power);
    const double scale = unnormalized ? 1.0 : 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : r) {
        v *= scale;
    }
    return r;
}

double eisl_expected(const AllocationPlan& plan) {
    check_plan(plan);
    const double n = static_cast<double>(plan.size());
    double fourth = 0.0;
    for (size_t i = 0; i < plan.size(); ++i) {
        fourth += plan.d[i] + plan.p[i] * plan.p[i];
    }
    const double power = sum(plan.p);
    return (n - 1.0) / n * fourth - power * power / n + sum_squares(plan.p) / n;
}

std::vector<double> pacs_expected(const AllocationPlan& plan) {
    check_plan(plan);
    const size_t n = plan.size();
    const double nd = static_cast<double>(n);
    std::vector<cplx> p(plan.p.begin(), plan.p.end());
    const auto spectrum = FftPlan(static_cast<int>(n), +1)(p);
    // (1/N) sum_j (kappa_j - 1) p_j^2 = (1/N) sum_j d_j
    const double floor = sum(plan.d) / nd;
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
        out[i] = std::norm(spectrum[i]) / nd + floor;
    }
    return out;
}

std::vector<double> normalized_delay_response(const AllocationPlan& plan) {
    auto out = pacs_expected(plan);
    const double main = out.front();
    for (auto& v : out) {
        v /= main;
    }
    return out;
}

double eisl_budget(double zeta, size_t n, double total_power) {
    if (n < 2 || !(total_power > 0.0) || zeta < 0.0) {
        throw std::invalid_argument("eisl_budget: need zeta >= 0, N >= 2, P > 0");
    }
    const double nd = static_cast<double>(n);
    return zeta * (nd - 1.0) * total_power * total_power / (nd * nd);
}

AverageKurtosis average_kurtosis(const AllocationPlan& plan) {
    check_plan(plan);
    AverageKurtosis out;
    double acc = 0.0;
    size_t count = 0;
    for (size_t i = 0; i < plan.size(); ++i) {
        if (plan.p[i] > 0.0) {
            acc += plan.kurtosis(i);
            ++count;
        } else {
            out.excluded.push_back(i);
        }
    }
    out.value = count > 0 ? acc / static_cast<double>(count) : 0.0;
    return out;
}

}  // namespace isac
