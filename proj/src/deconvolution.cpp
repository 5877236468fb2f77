#include "isac/deconvolution.hpp"

#include "isac/error.hpp"
#include "isac/gradient_projection.hpp"
#include "isac/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace isac {

namespace {

// Spectrum (half plane, real since the kernel is even) of the normalized
// circular Gaussian sampled at the periodic lattice offsets. Variance 0 is the identity.
std::vector<double> kernel_spectrum(int m, double dx, double variance) {
    const RealFft2 plan(m, m);
    if (variance <= 0.0) {
        return std::vector<double>(plan.spectrum_size(), 1.0);
    }
    std::vector<double> k(plan.real_size());
    double sum = 0.0;
    for (int iy = 0; iy < m; ++iy) {
        const double y = (iy <= m / 2 ? iy : iy - m) * dx;
        for (int ix = 0; ix < m; ++ix) {
            const double x = (ix <= m / 2 ? ix : ix - m) * dx;
            const double v = std::exp(-(x * x + y * y) / variance);
            k[static_cast<size_t>(iy) * m + ix] = v;
            sum += v;
        }
    }
    for (auto& v : k) {
        v /= sum;
    }
    std::vector<cplx> spec(plan.spectrum_size());
    plan.forward(k, spec);
    std::vector<double> out(spec.size());
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = spec[i].real();
    }
    return out;
}

// Euclidean projection onto {x >= 0, sum x = 1} (Michelot's algorithm).
void project_simplex(std::vector<double>& x) {
    std::vector<double> active(x);
    double sum = std::accumulate(active.begin(), active.end(), 0.0);
    double tau = (sum - 1.0) / static_cast<double>(active.size());
    for (;;) {
        const size_t before = active.size();
        std::erase_if(active, [tau](double v) { return v <= tau; });
        if (active.size() == before) {
            break;
        }
        sum = std::accumulate(active.begin(), active.end(), 0.0);
        tau = (sum - 1.0) / static_cast<double>(active.size());
    }
    for (auto& v : x) {
        v = std::max(v - tau, 0.0);
    }
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

// Real lattice <-> half spectrum, backward normalized.
struct Convolver {
    RealFft2 plan;
    std::vector<cplx> scratch;

    explicit Convolver(int m) : plan(m, m), scratch(plan.spectrum_size()) {}
    size_t size() const { return plan.real_size(); }
    size_t spectrum_size() const { return plan.spectrum_size(); }

    std::vector<cplx> transform(const std::vector<double>& x) const {
        std::vector<cplx> s(spectrum_size());
        plan.forward(x, s);
        return s;
    }
    void back(const std::vector<cplx>& s, std::vector<double>& out) {
        std::copy(s.begin(), s.end(), scratch.begin());
        out.resize(size());
        plan.backward(scratch, out);
        const double scale = 1.0 / static_cast<double>(size());
        for (auto& v : out) {
            v *= scale;
        }
    }
    std::vector<double> back(const std::vector<cplx>& s) {
        std::vector<double> out;
        back(s, out);
        return out;
    }
};

std::vector<double> masses(const PlaneDensity& d) {
    std::vector<double> x(d.values);
    const double a = d.cell_area();
    for (auto& v : x) {
        v *= a;
    }
    return x;
}

PlaneDensity from_masses(int m, double extent, std::vector<double> x) {
    PlaneDensity d(m, extent);
    const double a = d.cell_area();
    for (auto& v : x) {
        v /= a;
    }
    d.values = std::move(x);
    return d;
}

}  // namespace

PlaneDensity::PlaneDensity(int m_, double extent_) : m(m_), extent(extent_) {
    if (m_ < 2 || m_ % 2 != 0 || !(extent_ > 0.0)) {
        throw std::invalid_argument("PlaneDensity: need an even side >= 2 and a positive extent");
    }
    values.assign(static_cast<size_t>(m_) * m_, 0.0);
}

double PlaneDensity::mass() const { return std::accumulate(values.begin(), values.end(), 0.0) * cell_area(); }

double PlaneDensity::m2() const {
    double s = 0.0;
    for (int iy = 0; iy < m; ++iy) {
        for (int ix = 0; ix < m; ++ix) {
            s += at(ix, iy) * (coord(ix) * coord(ix) + coord(iy) * coord(iy));
        }
    }
    return s * cell_area();
}

double PlaneDensity::m4() const {
    double s = 0.0;
    for (int iy = 0; iy < m; ++iy) {
        for (int ix = 0; ix < m; ++ix) {
            const double r2 = coord(ix) * coord(ix) + coord(iy) * coord(iy);
            s += at(ix, iy) * r2 * r2;
        }
    }
    return s * cell_area();
}

void PlaneDensity::normalize() {
    const double total = mass();
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw DomainError("PlaneDensity: cannot normalize zero or non-finite mass");
    }
    for (auto& v : values) {
        v /= total;
    }
}

void PlaneDensity::validate(double tol) const {
    for (size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0)) {
            throw DomainError("PlaneDensity: negative or NaN value at node " + std::to_string(i));
        }
    }
    if (std::abs(mass() - 1.0) > tol) {
        throw DomainError("PlaneDensity: mass " + std::to_string(mass()) + " is not 1");
    }
}

PlaneDensity PlaneDensity::sample(int m, double extent, const std::function<double(double, double)>& f) {
    PlaneDensity d(m, extent);
    for (int iy = 0; iy < m; ++iy) {
        for (int ix = 0; ix < m; ++ix) {
            d.at(ix, iy) = f(d.coord(ix), d.coord(iy));
        }
    }
    d.normalize();
    return d;
}

PlaneDensity PlaneDensity::point_mass(int m, double extent) {
    PlaneDensity d(m, extent);
    d.at(m / 2, m / 2) = 1.0 / d.cell_area();
    return d;
}

ConvolveResult forward_convolve(const PlaneDensity& input, double noise_var) {
    if (!(noise_var > 0.0)) {
        throw std::invalid_argument("forward_convolve: noise variance must be positive");
    }
    const int m = input.m;
    Convolver conv(m);
    const auto k = kernel_spectrum(m, input.spacing(), noise_var);
    auto s = conv.transform(masses(input));
    for (size_t i = 0; i < s.size(); ++i) {
        s[i] *= k[i];
    }
    auto out = conv.back(s);
    for (auto& v : out) {
        v = std::max(v, 0.0);  // round-off below zero in the far tail
    }
    ConvolveResult res;
    res.density = from_masses(m, input.extent, std::move(out));
    for (int i = 0; i < m; ++i) {
        res.boundary_mass += res.density.at(i, 0) + res.density.at(i, m - 1);
        if (i > 0 && i < m - 1) {
            res.boundary_mass += res.density.at(0, i) + res.density.at(m - 1, i);
        }
    }
    res.boundary_mass *= res.density.cell_area();
    res.extent_warning = res.boundary_mass > 1e-6;
    res.density.normalize();
    return res;
}

DeconvResult deconvolve(const PlaneDensity& target, double noise_var, const DeconvConfig& cfg) {
    if (!(noise_var > 0.0)) {
        throw std::invalid_argument("deconvolve: noise variance must be positive");
    }
    target.validate(1e-6);
    const int m = target.m;
    const size_t n = static_cast<size_t>(m) * m;
    Convolver conv(m);
    const auto k = kernel_spectrum(m, target.spacing(), noise_var);
    const auto b = masses(target);
    const auto bs = conv.transform(b);
    const double bnorm = norm2(b);

    // Gradient of 0.5 |K x - b|^2 is K(Kx - b); |K| <= 1, so step 1 is safe.
    const size_t ns = conv.spectrum_size();
    std::vector<cplx> s(ns);
    std::vector<double> g(n);
    auto gradient = [&](const std::vector<double>& y) {
        conv.plan.forward(y, s);
        for (size_t i = 0; i < ns; ++i) {
            s[i] = k[i] * (k[i] * s[i] - bs[i]);
        }
        conv.back(s, g);
    };
    auto residual = [&](const std::vector<double>& x) {
        auto s = conv.transform(x);
        for (size_t i = 0; i < ns; ++i) {
            s[i] *= k[i];
        }
        const auto ax = conv.back(s);
        double r = 0.0;
        for (size_t i = 0; i < n; ++i) {
            r += (ax[i] - b[i]) * (ax[i] - b[i]);
        }
        return std::sqrt(r) / bnorm;
    };

    // Warm start: regularized Fourier division, projected. Near-exact for targets
    // that really are noise plus something; FISTA then only repairs the negatives.
    std::vector<double> x(n);
    {
        std::vector<cplx> w(bs);
        for (size_t i = 0; i < w.size(); ++i) {
            w[i] *= k[i] / (k[i] * k[i] + cfg.warm_start_reg);
        }
        x = conv.back(w);
        project_simplex(x);
    }
    DeconvResult res;
    std::vector<double> y = x, next(n);
    double t = 1.0;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        gradient(y);
        for (size_t i = 0; i < n; ++i) {
            next[i] = y[i] - g[i];
        }
        project_simplex(next);
        double step = 0.0, restart = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double gm = y[i] - next[i];
            step += gm * gm;
            restart += gm * (next[i] - x[i]);
        }
        res.stationarity = std::sqrt(step) / bnorm;
        res.iterations = it;
        if (res.stationarity <= cfg.tol) {
            x = next;
            res.converged = true;
            break;
        }
        // Momentum, reset whenever it points against the gradient step.
        if (restart > 0.0) {
            t = 1.0;
            y = next;
        } else {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double beta = (t - 1.0) / t_next;
            for (size_t i = 0; i < n; ++i) {
                y[i] = next[i] + beta * (next[i] - x[i]);
            }
            t = t_next;
        }
        x.swap(next);
        if (it % 50 == 0) {
            res.residual_trace.push_back(residual(x));
        }
    }
    res.residual = residual(x);
    res.density = from_masses(m, target.extent, std::move(x));
    return res;
}

PlaneDensity maxent_output_density(double p, double d, cplx h, int m) {
    if (!(p >= 0.0) || !(d >= 0.0)) {
        throw std::invalid_argument("maxent_output_density: need p >= 0 and d >= 0");
    }
    const double g = std::norm(h);
    const auto mo = output_moments(p, d, g);
    const double extent = 6.0 * std::sqrt(mo.m2);
    const double kappa = mo.m4 / (mo.m2 * mo.m2);
    if (kappa >= 2.0 - 1e-12) {
        return PlaneDensity::sample(m, extent, [&](double x, double y) { return std::exp(-(x * x + y * y) / mo.m2); });
    }
    const auto th = params_from_moments({mo.m2, mo.m4}, 1e-12);
    // Peak of a r^2 - c r^4 over r >= 0, subtracted before exponentiating.
    const double top = th.a > 0.0 ? th.a * th.a / (4.0 * th.c) : 0.0;
    return PlaneDensity::sample(m, extent, [&](double x, double y) {
        const double r2 = x * x + y * y;
        return std::exp(th.a * r2 - th.c * r2 * r2 - top);
    });
}

double fourier_negative_mass(const PlaneDensity& target, double noise_var, double retained_noise) {
    if (!(noise_var > 0.0) || !(retained_noise >= 0.0 && retained_noise < 1.0)) {
        throw std::invalid_argument("fourier_negative_mass: need noise_var > 0 and retained fraction in [0, 1)");
    }
    constexpr double kCutoff = 1e-14;  // noise spectrum below this is treated as unrecoverable
    const int m = target.m;
    Convolver conv(m);
    const auto full = kernel_spectrum(m, target.spacing(), noise_var);
    const auto kept = kernel_spectrum(m, target.spacing(), retained_noise * noise_var);
    auto s = conv.transform(masses(target));
    for (size_t i = 0; i < s.size(); ++i) {
        s[i] = full[i] > kCutoff ? s[i] * (kept[i] / full[i]) : 0.0;
    }
    const auto x = conv.back(s);
    double neg = 0.0, total = 0.0;
    for (double v : x) {
        neg += std::max(-v, 0.0);
        total += std::abs(v);
    }
    return total > 0.0 ? neg / total : 0.0;
}

LegitimacyReport legitimacy_check(double p, double d, cplx h, const LegitimacyConfig& cfg) {
    LegitimacyReport rep;
    const auto target = maxent_output_density(p, d, h, cfg.grid);
    rep.deconvolution = deconvolve(target, 1.0, cfg.deconv);
    rep.residual = rep.deconvolution.residual;
    rep.negative_mass = fourier_negative_mass(target, 1.0, cfg.retained_noise);
    rep.legitimate = rep.residual <= cfg.residual_threshold && rep.negative_mass <= cfg.negativity_threshold;
    return rep;
}

MagnitudeMarginal magnitude_marginal(const PlaneDensity& d, int bins, double scale) {
    if (bins < 1 || !(scale > 0.0)) {
        throw std::invalid_argument("magnitude_marginal: need bins >= 1 and scale > 0");
    }
    constexpr int kSub = 8;  // sub-samples per cell side; smooths the lattice count per bin
    const double r_max = d.extent / scale;
    const double width = r_max / bins;
    MagnitudeMarginal mm;
    mm.radius.resize(static_cast<size_t>(bins));
    mm.density.assign(static_cast<size_t>(bins), 0.0);
    for (int k = 0; k < bins; ++k) {
        mm.radius[static_cast<size_t>(k)] = (k + 0.5) * width;
    }
    const double dx = d.spacing();
    const double w = d.cell_area() / (kSub * kSub);
    for (int iy = 0; iy < d.m; ++iy) {
        for (int ix = 0; ix < d.m; ++ix) {
            const double v = d.at(ix, iy);
            if (v == 0.0) {
                continue;
            }
            for (int sy = 0; sy < kSub; ++sy) {
                const double y = d.coord(iy) + ((sy + 0.5) / kSub - 0.5) * dx;
                for (int sx = 0; sx < kSub; ++sx) {
                    const double x = d.coord(ix) + ((sx + 0.5) / kSub - 0.5) * dx;
                    const int bin = static_cast<int>(std::hypot(x, y) / scale / width);
                    if (bin < bins) {
                        mm.density[static_cast<size_t>(bin)] += v * w;
                    }
                }
            }
        }
    }
    for (auto& v : mm.density) {
        v /= width;
    }
    return mm;
}

double relative_l2(const PlaneDensity& a, const PlaneDensity& b) {
    if (a.m != b.m || a.extent != b.extent) {
        throw std::invalid_argument("relative_l2: densities live on different lattices");
    }
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        num += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
        den += b.values[i] * b.values[i];
    }
    return std::sqrt(num / den);
}

}  // namespace isac
