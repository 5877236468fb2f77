#include "isac/blahut_arimoto.hpp"

#include "isac/error.hpp"
#include "isac/gradient_projection.hpp"
#include "isac/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace isac {

namespace {

const double kLogPiE = std::log(std::numbers::pi * std::numbers::e);
constexpr double kLogFloor = -745.0;  // ln of the smallest subnormal

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        s += std::abs(a[i] - b[i]);
    }
    return 0.5 * s;
}

// Normalizes exp(log_w) in place with max subtraction.
std::vector<double> softmax(const std::vector<double>& log_w) {
    const double top = *std::max_element(log_w.begin(), log_w.end());
    std::vector<double> w(log_w.size());
    double s = 0.0;
    for (size_t k = 0; k < w.size(); ++k) {
        w[k] = std::exp(log_w[k] - top);
        s += w[k];
    }
    for (auto& v : w) {
        v /= s;
    }
    return w;
}

// Row-normalized discrete channel plus the entropy bookkeeping shared by the
// radial and planar solvers. `density(k, j)` is the output density of input k
// at node j, `measure[j]` the quadrature measure of node j.
void build_channel(size_t inputs, const std::vector<double>& measure, const std::function<double(size_t, size_t)>& density,
                   std::vector<double>& w_matrix, std::vector<double>& ring_constant, std::vector<double>& neg_entropy,
                   std::vector<double>& log_measure) {
    const size_t nodes = measure.size();
    log_measure.resize(nodes);
    for (size_t j = 0; j < nodes; ++j) {
        log_measure[j] = std::log(measure[j]);
    }
    w_matrix.assign(inputs * nodes, 0.0);
    ring_constant.assign(inputs, 0.0);
    neg_entropy.assign(inputs, 0.0);
    for (size_t k = 0; k < inputs; ++k) {
        double* row = &w_matrix[k * nodes];
        double s = 0.0;
        for (size_t j = 0; j < nodes; ++j) {
            row[j] = density(k, j) * measure[j];
            s += row[j];
        }
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw NoConvergence("blahut-arimoto: output quadrature lost all mass for input " + std::to_string(k));
        }
        double ne = 0.0, cross = 0.0;
        for (size_t j = 0; j < nodes; ++j) {
            row[j] /= s;
            if (row[j] > 0.0) {
                ne += row[j] * std::log(row[j]);
                cross += row[j] * log_measure[j];
            }
        }
        neg_entropy[k] = ne;
        ring_constant[k] = -ne + cross - kLogPiE;
    }
}

std::vector<double> channel_potentials(const std::vector<double>& w, const std::vector<double>& w_matrix,
                                       const std::vector<double>& ring_constant, const std::vector<double>& neg_entropy,
                                       size_t nodes) {
    const size_t inputs = w.size();
    std::vector<double> q(nodes, 0.0);
    for (size_t k = 0; k < inputs; ++k) {
        if (w[k] == 0.0) {
            continue;
        }
        const double* row = &w_matrix[k * nodes];
        for (size_t j = 0; j < nodes; ++j) {
            q[j] += w[k] * row[j];
        }
    }
    for (auto& v : q) {
        v = v > 0.0 ? std::log(v) : kLogFloor;
    }
    std::vector<double> pot(inputs);
    for (size_t k = 0; k < inputs; ++k) {
        const double* row = &w_matrix[k * nodes];
        double cross = 0.0;
        for (size_t j = 0; j < nodes; ++j) {
            cross += row[j] * q[j];
        }
        pot[k] = neg_entropy[k] - cross + ring_constant[k];
    }
    return pot;
}

}  // namespace

std::vector<double> ring_grid(int rings, double rho_max) {
    if (rings < 2 || !(rho_max > 0.0)) {
        throw std::invalid_argument("ring_grid: need at least 2 rings and rho_max > 0");
    }
    std::vector<double> g(static_cast<size_t>(rings));
    for (int k = 0; k < rings; ++k) {
        g[static_cast<size_t>(k)] = rho_max * k / (rings - 1);
    }
    return g;
}

RadialChannel::RadialChannel(std::vector<double> rings, cplx h, OutputQuadrature quad) : rings_(std::move(rings)) {
    if (rings_.empty()) {
        throw std::invalid_argument("RadialChannel: empty ring grid");
    }
    const double gain = std::abs(h);
    if (!(gain > 0.0)) {
        throw DomainError("RadialChannel: subcarrier gain must be nonzero");
    }
    const double rho_max = *std::max_element(rings_.begin(), rings_.end());
    const double upper = gain * rho_max + quad.noise_margin;
    const int panels = std::max(1, static_cast<int>(std::ceil(upper / quad.panel_width)));
    const auto rule = special::composite_gauss_legendre(panels, quad.order, 0.0, upper);
    nodes_ = rule.nodes;
    std::vector<double> measure(nodes_.size());
    for (size_t j = 0; j < nodes_.size(); ++j) {
        measure[j] = 2.0 * std::numbers::pi * nodes_[j] * rule.weights[j];
    }
    // Magnitude density divided by 2 pi r: the planar output density averaged over the input phase.
    auto density = [&](size_t k, size_t j) {
        const double s = gain * rings_[k];
        const double r = nodes_[j];
        const double dr = r - s;
        return std::exp(-dr * dr) * special::bessel_i0e(2.0 * r * s) / std::numbers::pi;
    };
    build_channel(rings_.size(), measure, density, w_matrix_, ring_constant_, neg_entropy_, log_node_measure_);
}

std::vector<double> RadialChannel::potentials(const std::vector<double>& w) const {
    if (w.size() != rings_.size()) {
        throw std::invalid_argument("RadialChannel: weight vector length differs from the ring grid");
    }
    return channel_potentials(w, w_matrix_, ring_constant_, neg_entropy_, nodes_.size());
}

std::vector<double> RadialChannel::curvature(const std::vector<double>& w) const {
    const size_t inputs = rings_.size(), nodes = nodes_.size();
    std::vector<double> inv_q(nodes, 0.0);
    for (size_t k = 0; k < inputs; ++k) {
        for (size_t j = 0; j < nodes; ++j) {
            inv_q[j] += w[k] * w_matrix_[k * nodes + j];
        }
    }
    for (auto& v : inv_q) {
        v = v > 0.0 ? 1.0 / v : 0.0;
    }
    std::vector<double> out(inputs * inputs, 0.0);
    std::vector<double> scaled(nodes);
    for (size_t k = 0; k < inputs; ++k) {
        const double* rk = &w_matrix_[k * nodes];
        for (size_t j = 0; j < nodes; ++j) {
            scaled[j] = rk[j] * inv_q[j];
        }
        for (size_t l = k; l < inputs; ++l) {
            const double* rl = &w_matrix_[l * nodes];
            double s = 0.0;
            for (size_t j = 0; j < nodes; ++j) {
                s += scaled[j] * rl[j];
            }
            out[k * inputs + l] = out[l * inputs + k] = s;
        }
    }
    return out;
}

double RadialChannel::mutual_info(const std::vector<double>& w) const {
    const auto pot = potentials(w);
    double s = 0.0;
    for (size_t k = 0; k < w.size(); ++k) {
        s += w[k] * pot[k];
    }
    return std::max(0.0, s);
}

double RadialChannel::lagrangian(const std::vector<double>& w, double lambda, double mu) const {
    const auto pot = potentials(w);
    double s = 0.0;
    for (size_t k = 0; k < w.size(); ++k) {
        const double r2 = rings_[k] * rings_[k];
        s += w[k] * (pot[k] - lambda * r2 - mu * r2 * r2);
    }
    return s;
}

std::vector<double> RadialChannel::update(const std::vector<double>& w, double lambda, double mu) const {
    const auto pot = potentials(w);
    std::vector<double> log_w(w.size());
    for (size_t k = 0; k < w.size(); ++k) {
        const double r2 = rings_[k] * rings_[k];
        log_w[k] = w[k] > 0.0 ? std::log(w[k]) + pot[k] - lambda * r2 - mu * r2 * r2
                              : -std::numeric_limits<double>::infinity();
        if (std::isnan(log_w[k])) {
            throw NoConvergence("blahut-arimoto: non-finite potential at ring " + std::to_string(k) +
                                " (rho=" + std::to_string(rings_[k]) + ")");
        }
    }
    return softmax(log_w);
}

RadialDistribution ba_inner_update(const RadialDistribution& r, cplx h, double lambda, double mu) {
    r.validate(1e-9);
    const RadialChannel ch(r.grid, h);
    return {r.grid, ch.update(r.weights, lambda, mu)};
}

double mutual_info(const RadialDistribution& r, cplx h) {
    r.validate(1e-9);
    if (std::abs(h) == 0.0) {
        return 0.0;
    }
    if (r.size() == 1 && r.grid[0] == 0.0) {
        return 0.0;
    }
    return RadialChannel(r.grid, h).mutual_info(r.weights);
}

namespace {

std::vector<double> logs(const std::vector<double>& w) {
    std::vector<double> out(w.size());
    for (size_t i = 0; i < w.size(); ++i) {
        out[i] = std::log(std::max(w[i], 1e-300));
    }
    return out;
}

// Two BA steps plus a squared-extrapolation step in log weights, kept only if
// it does not lose Lagrangian against the plain two-step iterate.
std::vector<double> squarem_cycle(const RadialChannel& ch, const std::vector<double>& w, const std::vector<double>& w1,
                                  double lambda, double mu, int& used) {
    auto w2 = ch.update(w1, lambda, mu);
    ++used;
    const auto t0 = logs(w), t1 = logs(w1), t2 = logs(w2);
    double rr = 0.0, vv = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
        const double r = t1[i] - t0[i];
        const double v = t2[i] - 2.0 * t1[i] + t0[i];
        rr += r * r;
        vv += v * v;
    }
    if (!(vv > 0.0)) {
        return w2;
    }
    const double alpha = std::min(-1.0, -std::sqrt(rr / vv));
    std::vector<double> t(w.size());
    for (size_t i = 0; i < w.size(); ++i) {
        const double r = t1[i] - t0[i];
        const double v = t2[i] - 2.0 * t1[i] + t0[i];
        t[i] = t0[i] - 2.0 * alpha * r + alpha * alpha * v;
    }
    auto w3 = ch.update(softmax(t), lambda, mu);
    ++used;
    return ch.lagrangian(w3, lambda, mu) >= ch.lagrangian(w2, lambda, mu) ? w3 : w2;
}

// Solves (C + delta I) x = b in place for symmetric positive definite C (n x n).
bool cholesky_solve(std::vector<double> a, size_t n, std::vector<double>& b) {
    for (size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (size_t k = 0; k < j; ++k) {
            d -= a[j * n + k] * a[j * n + k];
        }
        if (!(d > 0.0)) {
            return false;
        }
        d = std::sqrt(d);
        a[j * n + j] = d;
        for (size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (size_t k = 0; k < j; ++k) {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for (size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (size_t k = 0; k < i; ++k) {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for (size_t i = n; i-- > 0;) {
        double s = b[i];
        for (size_t k = i + 1; k < n; ++k) {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    return true;
}

struct KktState {
    double value = 0.0;   // Lagrangian
    double spread = 0.0;  // sum_k w_k |g_k - gbar|, zero at a fixed point
};

KktState kkt_state(const RadialChannel& ch, const std::vector<double>& w, double lambda, double mu) {
    const auto pot = ch.potentials(w);
    std::vector<double> g(w.size());
    KktState st;
    for (size_t k = 0; k < w.size(); ++k) {
        const double r2 = ch.rings()[k] * ch.rings()[k];
        g[k] = pot[k] - lambda * r2 - mu * r2 * r2;
        st.value += w[k] * g[k];
    }
    for (size_t k = 0; k < w.size(); ++k) {
        st.spread += w[k] * std::abs(g[k] - st.value);
    }
    return st;
}

// One damped Newton step on max J(w) over the simplex. The damping
// delta diag(1/w) makes delta = 1 a linearized BA step and delta -> 0 Newton.
// Returns false once the damping has grown without finding ascent.
bool newton_step(const RadialChannel& ch, std::vector<double>& w, double lambda, double mu, double& delta) {
    constexpr double kSeed = 1e-12;        // metric for rings re-entering the support
    constexpr double kNegligible = 1e-16;  // such weights may be clipped to zero
    const size_t k_all = w.size();
    const auto pot = ch.potentials(w);
    std::vector<double> g(k_all);
    double gbar = 0.0;
    for (size_t k = 0; k < k_all; ++k) {
        const double r2 = ch.rings()[k] * ch.rings()[k];
        g[k] = pot[k] - lambda * r2 - mu * r2 * r2;
        gbar += w[k] * g[k];
    }
    std::vector<size_t> s;
    for (size_t k = 0; k < k_all; ++k) {
        if (w[k] > 0.0 || g[k] > gbar) {
            s.push_back(k);
        }
    }
    const auto c_full = ch.curvature(w);
    const auto s0 = kkt_state(ch, w, lambda, mu);
    // At round-off level J stops resolving progress; a step that keeps J within
    // a few ulps and shrinks the fixed-point residual is still taken.
    const double flat = 1e-13 * std::max(1.0, std::abs(s0.value));
    while (delta < 1e4) {
        const size_t n = s.size();
        std::vector<double> a(n * n), x(n), y(n, 1.0);
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < n; ++j) {
                a[i * n + j] = c_full[s[i] * k_all + s[j]];
            }
            a[i * n + i] += delta / (w[s[i]] > 0.0 ? w[s[i]] : kSeed);
            x[i] = g[s[i]];
        }
        if (!cholesky_solve(a, n, x) || !cholesky_solve(a, n, y)) {
            delta *= 10.0;
            continue;
        }
        const double nu = std::accumulate(x.begin(), x.end(), 0.0) / std::accumulate(y.begin(), y.end(), 0.0);
        double t = 1.0;
        size_t blocking = k_all;
        for (size_t i = 0; i < n; ++i) {
            const double step = x[i] - nu * y[i];
            if (step < 0.0 && w[s[i]] > kNegligible && w[s[i]] + t * step < 0.0) {
                t = -w[s[i]] / step;
                blocking = s[i];
            }
        }
        auto trial = w;
        for (size_t i = 0; i < n; ++i) {
            trial[s[i]] = std::max(0.0, w[s[i]] + t * (x[i] - nu * y[i]));
        }
        if (blocking < k_all) {
            trial[blocking] = 0.0;
        }
        const double sum = std::accumulate(trial.begin(), trial.end(), 0.0);
        for (auto& v : trial) {
            v /= sum;
        }
        const auto st = kkt_state(ch, trial, lambda, mu);
        if (st.value > s0.value || (st.value >= s0.value - flat && st.spread < s0.spread)) {
            w = std::move(trial);
            if (t == 1.0) {
                delta = std::max(1e-16, delta * 0.1);
            }
            return true;
        }
        delta *= 10.0;
    }
    return false;
}

}  // namespace

BaInnerResult ba_fixed_point(const RadialChannel& channel, std::vector<double> w0, double lambda, double mu,
                             int max_iters, double tol) {
    BaInnerResult res;
    res.weights = std::move(w0);
    int used = 0;
    bool polish = true;
    double delta = 1e-2;
    int warm = 0;
    while (used < max_iters) {
        auto w1 = channel.update(res.weights, lambda, mu);
        ++used;
        const double tv = total_variation(w1, res.weights);
        if (tv < tol) {
            res.converged = true;
            break;
        }
        if (polish && (tv < 1e-4 || warm >= 500)) {
            if (newton_step(channel, res.weights, lambda, mu, delta)) {
                continue;
            }
            polish = false;
        }
        ++warm;
        res.weights = squarem_cycle(channel, res.weights, w1, lambda, mu, used);
    }
    res.iterations = used;
    return res;
}

// ---------------------------------------------------------------------------
// Dual search

namespace {

struct Moments2 {
    double m2;
    double m4;
};

Moments2 ring_moments(const std::vector<double>& rings, const std::vector<double>& w) {
    Moments2 m{0.0, 0.0};
    for (size_t k = 0; k < rings.size(); ++k) {
        const double r2 = rings[k] * rings[k];
        m.m2 += w[k] * r2;
        m.m4 += w[k] * r2 * r2;
    }
    return m;
}

// Warm start that keeps every ring reachable by the multiplicative update.
std::vector<double> reseed(const std::vector<double>& w) {
    std::vector<double> out(w.size());
    const double floor = 1e-3 / static_cast<double>(w.size());
    for (size_t k = 0; k < w.size(); ++k) {
        out[k] = 0.999 * w[k] + floor;
    }
    return out;
}

// Monotone decreasing scalar equation f(x) = 0 by bracketing plus Illinois false position.
template <class F>
double solve_decreasing(F&& f, double x0, double step, double ftol, int max_evals) {
    double lo = x0, hi = x0;
    double flo = f(x0), fhi = flo;
    if (std::abs(flo) <= ftol) {
        return x0;
    }
    int evals = 1;
    if (flo > 0.0) {
        while (fhi > 0.0) {
            lo = hi;
            flo = fhi;
            hi += step;
            step *= 2.0;
            fhi = f(hi);
            if (++evals > max_evals) {
                throw NoConvergence("dual search: could not bracket the multiplier");
            }
        }
    } else {
        while (flo < 0.0) {
            hi = lo;
            fhi = flo;
            lo -= step;
            step *= 2.0;
            flo = f(lo);
            if (++evals > max_evals) {
                throw NoConvergence("dual search: could not bracket the multiplier");
            }
        }
    }
    int side = 0;
    double x = lo;
    while (evals < max_evals) {
        x = (lo * fhi - hi * flo) / (fhi - flo);
        if (!(x > lo && x < hi)) {
            x = 0.5 * (lo + hi);
        }
        const double fx = f(x);
        ++evals;
        if (std::abs(fx) <= ftol || hi - lo <= 1e-14 * std::max(1.0, std::abs(x))) {
            return x;
        }
        if (fx > 0.0) {
            lo = x;
            flo = fx;
            if (side == 1) {
                fhi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            fhi = fx;
            if (side == -1) {
                flo *= 0.5;
            }
            side = -1;
        }
    }
    throw NoConvergence("dual search: multiplier root not resolved in " + std::to_string(max_evals) + " evaluations");
}

// Nelder-Mead minimization in two variables.
struct NelderMeadResult {
    std::array<double, 2> x;
    double value;
    int evals;
};

template <class F>
NelderMeadResult nelder_mead(F&& f, std::array<double, 2> x0, std::array<double, 2> scale, double ftarget,
                             int max_evals) {
    std::array<std::array<double, 2>, 3> pts{x0, x0, x0};
    pts[1][0] += scale[0];
    pts[2][1] += scale[1];
    std::array<double, 3> val{};
    int evals = 0;
    for (int i = 0; i < 3; ++i) {
        val[i] = f(pts[i]);
        ++evals;
    }
    while (evals < max_evals) {
        std::array<int, 3> order{0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int a, int b) { return val[a] < val[b]; });
        const int best = order[0], mid = order[1], worst = order[2];
        if (val[best] <= ftarget) {
            break;
        }
        const std::array<double, 2> c{0.5 * (pts[best][0] + pts[mid][0]), 0.5 * (pts[best][1] + pts[mid][1])};
        auto along = [&](double t) {
            return std::array<double, 2>{c[0] + t * (pts[worst][0] - c[0]), c[1] + t * (pts[worst][1] - c[1])};
        };
        const auto xr = along(-1.0);
        const double fr = f(xr);
        ++evals;
        if (fr < val[best]) {
            const auto xe = along(-2.0);
            const double fe = f(xe);
            ++evals;
            if (fe < fr) {
                pts[worst] = xe;
                val[worst] = fe;
            } else {
                pts[worst] = xr;
                val[worst] = fr;
            }
        } else if (fr < val[mid]) {
            pts[worst] = xr;
            val[worst] = fr;
        } else {
            const bool outside = fr < val[worst];
            const auto xc = along(outside ? -0.5 : 0.5);
            const double fc = f(xc);
            ++evals;
            if (fc < (outside ? fr : val[worst])) {
                pts[worst] = xc;
                val[worst] = fc;
            } else {
                for (int i : {mid, worst}) {
                    for (int d = 0; d < 2; ++d) {
                        pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
                    }
                    val[i] = f(pts[i]);
                    ++evals;
                }
            }
        }
        // Collapsed simplex: nothing left to resolve.
        const double span = std::max({std::abs(pts[0][0] - pts[1][0]), std::abs(pts[0][0] - pts[2][0]),
                                      std::abs(pts[0][1] - pts[1][1]), std::abs(pts[0][1] - pts[2][1])});
        if (span < 1e-13) {
            break;
        }
    }
    const int best = static_cast<int>(std::min_element(val.begin(), val.end()) - val.begin());
    return {pts[best], val[best], evals};
}

void check_targets(double p, double d) {
    if (!(p >= 0.0) || !(d >= 0.0) || !std::isfinite(p) || !std::isfinite(d)) {
        throw DomainError("ba_design: need finite p, d >= 0");
    }
    if (p > 0.0 && d > p * p * (1.0 + 1e-9)) {
        throw InfeasibleKurtosis(1.0 + d / (p * p));
    }
}

BaSubcarrier finish(const RadialChannel& ch, std::vector<double> w, double lambda, double mu, int iters, bool conv) {
    BaSubcarrier out;
    const auto m = ring_moments(ch.rings(), w);
    out.m2 = m.m2;
    out.m4 = m.m4;
    out.rate = ch.mutual_info(w);
    out.lambda = lambda;
    out.mu = mu;
    out.inner_iterations = iters;
    out.converged = conv;
    out.distribution = {ch.rings(), std::move(w)};
    return out;
}

BaSubcarrier design_on_grid(cplx h, double p, double d, const BaConfig& cfg, int rings) {
    const double e = d + p * p;
    const double kappa = e / (p * p);
    const RadialChannel ch(ring_grid(rings, cfg.rho_max_factor * std::sqrt(p * kappa)), h, cfg.quadrature);
    const auto& grid = ch.rings();

    std::vector<double> w(grid.size(), 1.0 / static_cast<double>(grid.size()));
    int inner_total = 0;
    bool inner_ok = true;
    auto solve = [&](double lambda, double mu) {
        auto res = ba_fixed_point(ch, reseed(w), lambda, mu, cfg.max_inner, cfg.inner_tol);
        inner_total += res.iterations;
        inner_ok = inner_ok && res.converged;
        w = std::move(res.weights);
        return ring_moments(grid, w);
    };

    const auto sens = rate_surrogate_gradient(p, std::min(d, (1.0 - 1e-9) * p * p), h);
    double lambda = sens.d_p - 2.0 * p * sens.d_d;
    double mu = sens.d_d;

    if (kappa >= 2.0 - 1e-9) {
        // Gaussian target: the fourth moment is left free.
        mu = 0.0;
        lambda = solve_decreasing([&](double l) { return solve(l / p, 0.0).m2 / p - 1.0; }, lambda * p, 0.1,
                                  cfg.moment_tol, cfg.max_dual_evals) / p;
        solve(lambda, 0.0);
    } else {
        // Scaled multipliers (lambda p, mu p^2) are O(1) across powers.
        auto objective = [&](const std::array<double, 2>& x) {
            const auto m = solve(x[0] / p, x[1] / (p * p));
            const double e2 = m.m2 / p - 1.0;
            const double e4 = m.m4 / e - 1.0;
            return e2 * e2 + e4 * e4;
        };
        const std::array<double, 2> x0{lambda * p, mu * p * p};
        const std::array<double, 2> step{0.1 * std::abs(x0[0]) + 0.05, 0.1 * std::abs(x0[1]) + 0.05};
        const auto nm = nelder_mead(objective, x0, step, cfg.moment_tol * cfg.moment_tol, cfg.max_dual_evals);
        lambda = nm.x[0] / p;
        mu = nm.x[1] / (p * p);
        solve(lambda, mu);
    }
    return finish(ch, w, lambda, mu, inner_total, inner_ok);
}

}  // namespace

BaSubcarrier ba_design_subcarrier(cplx h, double p, double d, const BaConfig& cfg) {
    check_targets(p, d);
    if (p == 0.0 || std::abs(h) == 0.0) {
        BaSubcarrier out;
        out.distribution = point_mass(0.0);
        out.converged = true;
        return out;
    }
    if (d <= 1e-12 * p * p) {
        // Only a single ring has unit kurtosis.
        const RadialChannel ch({std::sqrt(p)}, h, cfg.quadrature);
        return finish(ch, {1.0}, 0.0, 0.0, 0, true);
    }
    int rings = cfg.rings;
    auto best = design_on_grid(h, p, d, cfg, rings);
    if (cfg.refine_grid) {
        for (int level = 0; level < 4; ++level) {
            rings *= 2;
            auto finer = design_on_grid(h, p, d, cfg, rings);
            const double change = std::abs(finer.rate - best.rate);
            best = std::move(finer);
            if (change < cfg.refine_tol) {
                break;
            }
        }
    }
    return best;
}

BaDesign ba_design(const ChannelRealization& ch, const std::vector<double>& p_targets,
                   const std::vector<double>& d_targets, const BaConfig& cfg) {
    if (p_targets.size() != ch.size() || d_targets.size() != ch.size()) {
        throw std::invalid_argument("ba_design: target vectors must match the channel length");
    }
    BaDesign out;
    for (size_t i = 0; i < ch.size(); ++i) {
        try {
            out.subcarriers.push_back(ba_design_subcarrier(ch.h[i], p_targets[i], d_targets[i], cfg));
        } catch (const Error& err) {
            throw NoConvergence("ba_design: subcarrier " + std::to_string(i) + ": " + err.what());
        }
        out.rate += out.subcarriers.back().rate;
    }
    return out;
}

BaDesign ba_design_pooled(const ChannelRealization& ch, const std::vector<double>& p_targets,
                          const std::vector<double>& d_targets, const BaConfig& cfg) {
    const size_t n = ch.size();
    if (p_targets.size() != n || d_targets.size() != n) {
        throw std::invalid_argument("ba_design_pooled: target vectors must match the channel length");
    }
    struct Slot {
        std::unique_ptr<RadialChannel> channel;
        std::vector<double> w;
        double lambda = 0.0;
    };
    std::vector<Slot> slots(n);
    double scale = 0.0;
    double d_total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        check_targets(p_targets[i], d_targets[i]);
        if (p_targets[i] > 0.0 && std::abs(ch.h[i]) > 0.0) {
            const double p = p_targets[i];
            slots[i].channel = std::make_unique<RadialChannel>(
                ring_grid(cfg.rings, cfg.rho_max_factor * std::sqrt(2.0 * p)), ch.h[i], cfg.quadrature);
            slots[i].w.assign(static_cast<size_t>(cfg.rings), 1.0 / cfg.rings);
            const auto sens = rate_surrogate_gradient(p, std::min(d_targets[i], (1.0 - 1e-9) * p * p), ch.h[i]);
            slots[i].lambda = sens.d_p - 2.0 * p * sens.d_d;
            scale += p * p;
        }
        d_total += d_targets[i];
    }
    if (scale == 0.0) {
        throw std::invalid_argument("ba_design_pooled: no subcarrier carries power");
    }
    const double unit = std::sqrt(scale / static_cast<double>(n));  // typical p

    // For a shared mu, each lambda_i hits its power target; returns the excess fourth moment mismatch.
    auto excess = [&](double mu_scaled) {
        const double mu = mu_scaled / (unit * unit);
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            auto& s = slots[i];
            if (!s.channel) {
                continue;
            }
            const double p = p_targets[i];
            auto m2_err = [&](double lp) {
                auto res = ba_fixed_point(*s.channel, reseed(s.w), lp / p, mu, cfg.max_inner, cfg.inner_tol);
                s.w = std::move(res.weights);
                return ring_moments(s.channel->rings(), s.w).m2 / p - 1.0;
            };
            s.lambda = solve_decreasing(m2_err, s.lambda * p, 0.1, cfg.moment_tol, cfg.max_dual_evals) / p;
            const auto m = ring_moments(s.channel->rings(), s.w);
            total += m.m4 - p * p;
        }
        return total / (unit * unit) - d_total / (unit * unit);
    };
    const double mu_scaled = solve_decreasing(excess, 0.0, 0.05, cfg.moment_tol * std::max(1.0, d_total / (unit * unit)),
                                              cfg.max_dual_evals);
    excess(mu_scaled);

    BaDesign out;
    out.shared_mu = mu_scaled / (unit * unit);
    for (size_t i = 0; i < n; ++i) {
        auto& s = slots[i];
        if (!s.channel) {
            BaSubcarrier zero;
            zero.distribution = point_mass(0.0);
            zero.converged = true;
            out.subcarriers.push_back(zero);
            continue;
        }
        out.subcarriers.push_back(finish(*s.channel, s.w, s.lambda, out.shared_mu, 0, true));
        out.rate += out.subcarriers.back().rate;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Planar check

PlanarBaResult planar_ba(const std::vector<double>& rings, int phases, cplx h, double lambda, int max_iters,
                         double tol, int angle_nodes) {
    if (rings.empty() || phases < 1 || angle_nodes < 4) {
        throw std::invalid_argument("planar_ba: need rings, phases >= 1 and angle_nodes >= 4");
    }
    const OutputQuadrature quad;
    const double rho_max = *std::max_element(rings.begin(), rings.end());
    const double upper = std::abs(h) * rho_max + quad.noise_margin;
    const int panels = std::max(1, static_cast<int>(std::ceil(upper / quad.panel_width)));
    const auto rule = special::composite_gauss_legendre(panels, quad.order, 0.0, upper);

    std::vector<cplx> outputs;
    std::vector<double> measure;
    for (size_t j = 0; j < rule.nodes.size(); ++j) {
        for (int l = 0; l < angle_nodes; ++l) {
            outputs.push_back(std::polar(rule.nodes[j], 2.0 * std::numbers::pi * (l + 0.5) / angle_nodes));
            measure.push_back(rule.nodes[j] * rule.weights[j] * 2.0 * std::numbers::pi / angle_nodes);
        }
    }
    std::vector<cplx> inputs;
    std::vector<double> power;
    for (double rho : rings) {
        for (int m = 0; m < phases; ++m) {
            inputs.push_back(h * std::polar(rho, 2.0 * std::numbers::pi * m / phases));
            power.push_back(rho * rho);
        }
    }
    std::vector<double> w_matrix, constant, neg_entropy, log_measure;
    build_channel(
        inputs.size(), measure,
        [&](size_t k, size_t j) { return std::exp(-std::norm(outputs[j] - inputs[k])) / std::numbers::pi; },
        w_matrix, constant, neg_entropy, log_measure);

    PlanarBaResult res;
    res.weights.assign(inputs.size(), 1.0 / static_cast<double>(inputs.size()));
    std::vector<double> pot;
    for (int it = 1; it <= max_iters; ++it) {
        pot = channel_potentials(res.weights, w_matrix, constant, neg_entropy, outputs.size());
        std::vector<double> log_w(inputs.size());
        for (size_t k = 0; k < inputs.size(); ++k) {
            log_w[k] = res.weights[k] > 0.0 ? std::log(res.weights[k]) + pot[k] - lambda * power[k]
                                            : -std::numeric_limits<double>::infinity();
        }
        auto next = softmax(log_w);
        const double tv = total_variation(next, res.weights);
        res.weights = std::move(next);
        res.iterations = it;
        if (tv < tol) {
            break;
        }
    }
    pot = channel_potentials(res.weights, w_matrix, constant, neg_entropy, outputs.size());
    res.mutual_info = std::inner_product(res.weights.begin(), res.weights.end(), pot.begin(), 0.0);
    return res;
}

}  // namespace isac
