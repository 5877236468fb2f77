#include "isac/gradient_projection.hpp"

#include "isac/error.hpp"
#include "isac/maxent.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace isac {

namespace {

const double kLogPiE = std::log(std::numbers::pi * std::numbers::e);

double total(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

OutputMoments output_moments(double p, double d, double gain) {
    return {gain * p + 1.0, gain * gain * (d + p * p) + 4.0 * gain * p + 2.0};
}

double rate_surrogate(double p, double d, cplx h) {
    const auto m = output_moments(p, d, std::norm(h));
    return std::max(0.0, max_entropy({m.m2, m.m4}, kSurrogateMargin) - kLogPiE);
}

RateGradient rate_surrogate_gradient(double p, double d, cplx h) {
    const double g = std::norm(h);
    const auto m = output_moments(p, d, g);
    const auto s = max_entropy_sensitivity({m.m2, m.m4}, kSurrogateMargin);
    return {s.d_m2 * g + s.d_m4 * (2.0 * g * g * p + 4.0 * g), s.d_m4 * g * g};
}

// ---------------------------------------------------------------------------
// Projection

namespace {

// Threshold lambda with sum (q_i - lambda)_+ = target, q sorted descending.
double simplex_threshold(const std::vector<double>& q_sorted, double target) {
    double prefix = 0.0;
    double lambda = 0.0;
    for (size_t k = 0; k < q_sorted.size(); ++k) {
        prefix += q_sorted[k];
        lambda = (prefix - target) / static_cast<double>(k + 1);
        if (k + 1 == q_sorted.size() || q_sorted[k + 1] <= lambda) {
            break;
        }
    }
    return lambda;
}

struct ProjectionProblem {
    std::span<const double> p_raw;
    std::span<const double> d_raw;
    std::vector<double> sorted;
    double n;
    double P;
    double budget;  // (N D + P^2) / (N - 1)

    double beta(double mu) const { return (n - 1.0) / (n - 1.0 + 2.0 * n * mu); }

    double lambda(double mu) const { return simplex_threshold(sorted, P / beta(mu)); }

    // Left side of the EISL constraint minus the budget at multiplier mu.
    double excess(double mu) const {
        const double b = beta(mu);
        const double lam = lambda(mu);
        double s = 0.0;
        for (size_t i = 0; i < p_raw.size(); ++i) {
            const double p = b * std::max(0.0, p_raw[i] - lam);
            s += std::max(0.0, d_raw[i] - mu) + n / (n - 1.0) * p * p;
        }
        return s - budget;
    }

    Projection at(double mu) const {
        Projection out;
        out.mu = mu;
        out.lambda = lambda(mu);
        const double b = beta(mu);
        out.p.resize(p_raw.size());
        out.d.resize(p_raw.size());
        for (size_t i = 0; i < p_raw.size(); ++i) {
            out.p[i] = b * std::max(0.0, p_raw[i] - out.lambda);
            out.d[i] = std::max(0.0, d_raw[i] - mu);
        }
        return out;
    }
};

}  // namespace

Projection project(std::span<const double> p_raw, std::span<const double> d_raw, double P, double D) {
    const size_t n = p_raw.size();
    if (n < 2 || d_raw.size() != n) {
        throw std::invalid_argument("project: need N >= 2 and matching p/d lengths");
    }
    if (!(P > 0.0) || !(D >= 0.0)) {
        throw std::invalid_argument("project: need P > 0 and D >= 0");
    }
    const double nd = static_cast<double>(n);
    ProjectionProblem prob{p_raw, d_raw, {p_raw.begin(), p_raw.end()}, nd, P, (nd * D + P * P) / (nd - 1.0)};
    std::sort(prob.sorted.begin(), prob.sorted.end(), std::greater<>());

    if (prob.excess(0.0) <= 0.0) {
        return prob.at(0.0);
    }
    if (D == 0.0) {
        // Only uniform power with constant modulus satisfies a zero budget; mu -> infinity.
        Projection out;
        out.p.assign(n, P / nd);
        out.d.assign(n, 0.0);
        out.mu = std::numeric_limits<double>::infinity();
        out.lambda = -std::numeric_limits<double>::infinity();
        return out;
    }
    double lo = 0.0;
    double hi = std::max(1.0, *std::max_element(d_raw.begin(), d_raw.end()));
    int grow = 0;
    while (prob.excess(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++grow > 2000) {
            throw NoConvergence("project: could not bracket the EISL multiplier (last bracket [" + std::to_string(lo) +
                                ", " + std::to_string(hi) + "])");
        }
    }
    std::uintmax_t iters = 300;
    const auto root = boost::math::tools::toms748_solve([&](double mu) { return prob.excess(mu); }, lo, hi,
                                                        boost::math::tools::eps_tolerance<double>(52), iters);
    // The upper end of the final bracket is on the feasible side.
    return prob.at(prob.excess(root.second) <= 0.0 ? root.second : 0.5 * (root.first + root.second));
}

double projection_kkt_residual(std::span<const double> p_raw, std::span<const double> d_raw, double P, double D,
                               const Projection& proj) {
    const size_t n = p_raw.size();
    const double nd = static_cast<double>(n);
    const double budget = (nd * D + P * P) / (nd - 1.0);
    double scale = 1.0;
    for (size_t i = 0; i < n; ++i) {
        scale = std::max({scale, std::abs(p_raw[i]), std::abs(d_raw[i])});
    }
    double lhs = 0.0;
    for (size_t i = 0; i < n; ++i) {
        lhs += proj.d[i] + nd / (nd - 1.0) * proj.p[i] * proj.p[i];
    }
    double r = std::abs(total(proj.p) - P) / P;
    r = std::max(r, std::max(0.0, lhs - budget) / budget);
    if (!std::isfinite(proj.mu)) {
        return r;
    }
    r = std::max(r, std::max(0.0, -proj.mu));
    const double curvature = 2.0 * nd * proj.mu / (nd - 1.0);
    for (size_t i = 0; i < n; ++i) {
        r = std::max({r, std::max(0.0, -proj.p[i]), std::max(0.0, -proj.d[i])});
        if (proj.p[i] > 0.0) {
            r = std::max(r, std::abs(proj.p[i] - p_raw[i] + proj.lambda + curvature * proj.p[i]) / scale);
        } else {
            r = std::max(r, std::max(0.0, p_raw[i] - proj.lambda) / scale);
        }
        if (proj.d[i] > 0.0) {
            r = std::max(r, std::abs(proj.d[i] - d_raw[i] + proj.mu) / scale);
        } else {
            r = std::max(r, std::max(0.0, d_raw[i] - proj.mu) / scale);
        }
    }
    if (proj.mu > 0.0) {
        r = std::max(r, std::abs(lhs - budget) / budget);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Baselines

std::vector<double> water_filling(const ChannelRealization& ch, double P) {
    if (!(P > 0.0)) {
        throw std::invalid_argument("water_filling: need P > 0");
    }
    const auto g = ch.gains();
    std::vector<double> inv;
    for (double v : g) {
        if (v > 0.0) {
            inv.push_back(1.0 / v);
        }
    }
    if (inv.empty()) {
        throw std::invalid_argument("water_filling: every subcarrier has zero gain");
    }
    std::sort(inv.begin(), inv.end());
    // Water level L = 1/nu: sum over the k best subcarriers of (L - 1/g) = P.
    double prefix = 0.0;
    double level = 0.0;
    for (size_t k = 0; k < inv.size(); ++k) {
        prefix += inv[k];
        level = (P + prefix) / static_cast<double>(k + 1);
        if (k + 1 == inv.size() || inv[k + 1] >= level) {
            break;
        }
    }
    std::vector<double> p(g.size(), 0.0);
    for (size_t i = 0; i < g.size(); ++i) {
        if (g[i] > 0.0) {
            p[i] = std::max(0.0, level - 1.0 / g[i]);
        }
    }
    return p;
}

double surrogate_sum_rate(const AllocationPlan& plan, const ChannelRealization& ch) {
    double r = 0.0;
    for (size_t i = 0; i < plan.size(); ++i) {
        r += rate_surrogate(plan.p[i], plan.d[i], ch.h[i]);
    }
    return r;
}

DesignResult uniform_kurtosis_baseline(const ChannelRealization& ch, double P, double kappa_bar) {
    if (!(kappa_bar >= 1.0 && kappa_bar <= 2.0)) {
        throw InfeasibleKurtosis(kappa_bar);
    }
    const size_t n = ch.size();
    const double p = P / static_cast<double>(n);
    DesignResult out;
    out.plan.p.assign(n, p);
    out.plan.d.assign(n, (kappa_bar - 1.0) * p * p);
    out.plan.P = P;
    out.plan.D = eisl_budget(kappa_bar - 1.0, n, P);
    out.rate = surrogate_sum_rate(out.plan, ch);
    return out;
}

// ---------------------------------------------------------------------------
// Gradient projection

namespace {

struct Objective {
    double value = 0.0;
    std::vector<double> grad_p;
    std::vector<double> grad_d;
};

Objective evaluate(const std::vector<double>& p, const std::vector<double>& d, const std::vector<double>& gains,
                   bool with_gradient) {
    Objective out;
    const size_t n = p.size();
    if (with_gradient) {
        out.grad_p.assign(n, 0.0);
        out.grad_d.assign(n, 0.0);
    }
    for (size_t i = 0; i < n; ++i) {
        const double g = gains[i];
        if (g <= 0.0) {
            continue;
        }
        const auto m = output_moments(p[i], d[i], g);
        // Beyond kurtosis 2 the value is continued along the Gaussian edge m4 = kmax m2^2.
        const double kmax = 2.0 - kSurrogateMargin;
        const bool edge = m.m4 > kmax * m.m2 * m.m2;
        const auto pt = max_entropy_point({m.m2, edge ? kmax * m.m2 * m.m2 : m.m4}, kSurrogateMargin);
        out.value += std::max(0.0, pt.value - kLogPiE);
        if (with_gradient) {
            double s2 = pt.sensitivity.d_m2, s4 = pt.sensitivity.d_m4;
            if (edge) {
                s2 += s4 * 2.0 * kmax * m.m2;
                s4 = 0.0;
            }
            out.grad_p[i] = s2 * g + s4 * (2.0 * g * g * p[i] + 4.0 * g);
            out.grad_d[i] = s4 * g * g;
        }
    }
    return out;
}

// Projection onto the budget set with dead subcarriers pinned at zero.
void project_live(std::vector<double>& p, std::vector<double>& d, const std::vector<double>& gains, double P,
                  double D) {
    for (size_t i = 0; i < p.size(); ++i) {
        if (gains[i] <= 0.0) {
            p[i] = std::numeric_limits<double>::lowest();
            d[i] = 0.0;
        }
    }
    auto proj = project(p, d, P, D);
    p = std::move(proj.p);
    d = std::move(proj.d);
}

void clamp_kurtosis(const std::vector<double>& p, std::vector<double>& d, double cap) {
    for (size_t i = 0; i < p.size(); ++i) {
        d[i] = std::min(d[i], cap * p[i] * p[i]);
    }
}

void project_capped(std::vector<double>& p, std::vector<double>& d, const std::vector<double>& gains, double P,
                    double D, double cap) {
    project_live(p, d, gains, P, D);
    clamp_kurtosis(p, d, cap);
}

GpTraceEntry trace_entry(int it, double rate, const std::vector<double>& p, const std::vector<double>& d, double P,
                         double D) {
    const AllocationPlan plan{p, d, P, D};
    return {it, rate, eisl_expected(plan), -eisl_constraint_slack(plan)};
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

}  // namespace

AllocationPlan default_initial_plan(const ChannelRealization& ch, double P, double D, double kurtosis_margin) {
    const size_t n = ch.size();
    const double nd = static_cast<double>(n);
    const double p = P / nd;
    const double zeta = D * nd * nd / ((nd - 1.0) * P * P);
    const double cap = 1.0 - kurtosis_margin;
    AllocationPlan plan{std::vector<double>(n, p), std::vector<double>(n, std::min(zeta, cap) * p * p), P, D};
    const auto g = ch.gains();
    if (std::any_of(g.begin(), g.end(), [](double v) { return v <= 0.0; })) {
        project_capped(plan.p, plan.d, g, P, D, cap);
    }
    return plan;
}

GpResult gp_run(const ChannelRealization& ch, double P, double D, const GpConfig& cfg,
                std::optional<AllocationPlan> init) {
    const size_t n = ch.size();
    if (n < 2) {
        throw std::invalid_argument("gp_run: need N >= 2");
    }
    if (!(P > 0.0) || !(D >= 0.0)) {
        throw std::invalid_argument("gp_run: need P > 0 and D >= 0");
    }
    if (!(cfg.alpha > 0.0) || !(cfg.tol > 0.0) || cfg.max_iters < 0) {
        throw std::invalid_argument("gp_run: need alpha > 0, tol > 0, max_iters >= 0");
    }
    const auto gains = ch.gains();
    const double cap = 1.0 - cfg.kurtosis_margin;
    const double unit = P / static_cast<double>(n);

    AllocationPlan start = init ? *init : default_initial_plan(ch, P, D, cfg.kurtosis_margin);
    if (start.size() != n) {
        throw std::invalid_argument("gp_run: initial plan has the wrong length");
    }
    std::vector<double> p = start.p;
    std::vector<double> d = start.d;
    project_capped(p, d, gains, P, D, cap);

    GpResult res;
    auto obj = evaluate(p, d, gains, true);
    res.trace.push_back(trace_entry(0, obj.value, p, d, P, D));

    if (cfg.mode == GpMode::exact_gradient) {
        // Spectral projected gradient in the scaled variables p/u, d/u^2 with
        // u = P/N, where the budget set keeps its form (P -> N, D -> D/u^2).
        // Barzilai-Borwein trial step, projection, Armijo backtracking along
        // the projected segment. The kurtosis cap is not convex, so it stays
        // out of the iteration: past d = p^2 the output is Gaussian-limited
        // and the surrogate is flat in d, so an active budget never parks
        // mass there. The cap is applied once at the end.
        const double Ps = static_cast<double>(n);
        const double Ds = D / (unit * unit);
        auto to_scaled = [&](std::vector<double>& sp, std::vector<double>& sd) {
            for (size_t i = 0; i < n; ++i) {
                sp[i] = p[i] / unit;
                sd[i] = d[i] / (unit * unit);
            }
        };
        std::vector<double> x(n), y(n), gx(n), gy(n);
        auto load = [&] {
            to_scaled(x, y);
            for (size_t i = 0; i < n; ++i) {
                gx[i] = obj.grad_p[i] * unit;
                gy[i] = obj.grad_d[i] * unit * unit;
            }
        };
        load();
        // Projected gradient at unit step: the stationarity measure.
        auto stationarity = [&] {
            std::vector<double> tp(n), td(n);
            for (size_t i = 0; i < n; ++i) {
                tp[i] = x[i] + gx[i];
                td[i] = y[i] + gy[i];
            }
            project_live(tp, td, gains, Ps, Ds);
            return std::max(max_abs_diff(tp, x), max_abs_diff(td, y));
        };
        double step = cfg.alpha;
        constexpr double kStallResidual = 1e-6;
        int stalled = 0;
        std::vector<double> prev_x, prev_y, prev_gx, prev_gy;
        for (int it = 1; it <= cfg.max_iters; ++it) {
            // Relative to the gradient scale; the moment inversion limits the
            // gradient to roughly 1e-9 relative accuracy, so a run whose rate
            // has stopped moving with a small residual is also done.
            double gscale = 1.0;
            for (size_t i = 0; i < n; ++i) {
                gscale = std::max({gscale, std::abs(gx[i]), std::abs(gy[i])});
            }
            const double resid = stationarity();
            if (resid <= cfg.tol * gscale || (stalled >= 25 && resid <= kStallResidual * gscale)) {
                res.converged = true;
                break;
            }
            if (!prev_x.empty()) {
                double ss = 0.0, sy = 0.0;
                for (size_t i = 0; i < n; ++i) {
                    const double sx = x[i] - prev_x[i], sd = y[i] - prev_y[i];
                    ss += sx * sx + sd * sd;
                    sy += sx * (gx[i] - prev_gx[i]) + sd * (gy[i] - prev_gy[i]);
                }
                step = sy < 0.0 ? std::clamp(-ss / sy, 1e-10, 1e10) : 1e10;
            }
            std::vector<double> tp(n), td(n);
            for (size_t i = 0; i < n; ++i) {
                tp[i] = x[i] + step * gx[i];
                td[i] = y[i] + step * gy[i];
            }
            project_live(tp, td, gains, Ps, Ds);
            double slope = 0.0;
            for (size_t i = 0; i < n; ++i) {
                slope += gx[i] * (tp[i] - x[i]) + gy[i] * (td[i] - y[i]);
            }
            double t = 1.0;
            std::vector<double> nx(n), ny(n), np(n), nd(n);
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                for (size_t i = 0; i < n; ++i) {
                    nx[i] = x[i] + t * (tp[i] - x[i]);
                    ny[i] = y[i] + t * (td[i] - y[i]);
                    np[i] = nx[i] * unit;
                    nd[i] = ny[i] * unit * unit;
                }
                const auto trial = evaluate(np, nd, gains, false);
                if (!cfg.backtracking || trial.value >= obj.value + 1e-4 * t * slope) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) {
                // Rounding noise in the objective hides any further ascent.
                break;
            }
            prev_x = x;
            prev_y = y;
            prev_gx = gx;
            prev_gy = gy;
            p = np;
            d = nd;
            const double before = obj.value;
            obj = evaluate(p, d, gains, true);
            stalled = obj.value > before ? 0 : stalled + 1;
            load();
            res.iterations = it;
            res.trace.push_back(trace_entry(it, obj.value, p, d, P, D));
        }
        clamp_kurtosis(p, d, cap);
        obj = evaluate(p, d, gains, false);
    } else {
        // Step in the natural parameters of each output law, map back through
        // the output-moment relations, clamp, project.
        double alpha = cfg.alpha;
        for (int it = 1; it <= cfg.max_iters; ++it) {
            std::vector<double> np(n), nd(n);
            Objective trial;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                for (size_t i = 0; i < n; ++i) {
                    const double g = gains[i];
                    if (g <= 0.0) {
                        np[i] = nd[i] = 0.0;
                        continue;
                    }
                    const auto m = output_moments(p[i], d[i], g);
                    const double kappa = std::min(m.m4 / (m.m2 * m.m2), 2.0 - kSurrogateMargin);
                    const auto theta = params_from_moments({m.m2, kappa * m.m2 * m.m2}, kSurrogateMargin);
                    const auto grad = grad_entropy(theta);
                    MaxEntParams next{theta.a + alpha * grad.d_a, theta.c + alpha * grad.d_c};
                    next.c = std::max(next.c, 1e-3 * theta.c);
                    const auto mm = moments(next);
                    const double gp = mm.m2 - 1.0;
                    np[i] = std::max(0.0, gp / g);
                    nd[i] = std::max(0.0, (mm.m4 - gp * gp - 4.0 * gp - 2.0) / (g * g));
                }
                project_capped(np, nd, gains, P, D, cap);
                trial = evaluate(np, nd, gains, false);
                if (!cfg.backtracking || trial.value >= obj.value) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) {
                res.converged = true;
                break;
            }
            const double change = std::max(max_abs_diff(np, p) / unit, max_abs_diff(nd, d) / (unit * unit));
            p = std::move(np);
            d = std::move(nd);
            obj = evaluate(p, d, gains, true);
            res.iterations = it;
            res.trace.push_back(trace_entry(it, obj.value, p, d, P, D));
            alpha *= 1.5;
            if (change <= cfg.tol) {
                res.converged = true;
                break;
            }
        }
    }

    res.plan = AllocationPlan{p, d, P, D};
    res.rate = obj.value;
    return res;
}

}  // namespace isac
