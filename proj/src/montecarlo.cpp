#include "isac/montecarlo.hpp"

#include "isac/random.hpp"
#include "isac/special.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace isac {

namespace {

constexpr uint32_t kSymbolTag = 0x53594D42u;  // "SYMB"

// Running mean and variance (Welford).
struct Accumulator {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        count += 1.0;
        const double delta = x - mean;
        mean += delta / count;
        m2 += delta * (x - mean);
    }
    double std_error() const { return count > 1.0 ? std::sqrt(m2 / (count - 1.0) / count) : 0.0; }
};

// Draws |x|^2 for one law from a uniform u in (0, 1).
struct PowerSampler {
    SymbolLaw law;
    std::vector<double> cdf;  // radial laws only
    double alpha = 0.0;       // max-entropy laws: standardized lower truncation
    double sigma = 0.0;

    explicit PowerSampler(const SymbolLaw& l) : law(l) {
        if (const auto* r = std::get_if<RadialDistribution>(&law)) {
            r->validate(1e-9);
            cdf.resize(r->size());
            double acc = 0.0;
            for (size_t k = 0; k < r->size(); ++k) {
                acc += r->weights[k];
                cdf[k] = acc;
            }
        } else if (const auto* m = std::get_if<MaxEntParams>(&law)) {
            if (!(m->c > 0.0)) {
                throw std::invalid_argument("sample_symbols: max-entropy law needs c > 0");
            }
            sigma = 1.0 / std::sqrt(2.0 * m->c);
            alpha = -m->a * sigma;  // -(a / 2c) / sigma
        }
    }

    double operator()(double u) const {
        return std::visit(
            [&](const auto& l) -> double {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, ConstantModulus>) {
                    return l.power;
                } else if constexpr (std::is_same_v<T, CircularGaussian>) {
                    return -l.power * std::log(u);
                } else if constexpr (std::is_same_v<T, MaxEntParams>) {
                    return sigma * truncated_normal_excess(alpha, u);
                } else {
                    const double target = u * cdf.back();
                    const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
                    const size_t k = std::min<size_t>(static_cast<size_t>(it - cdf.begin()), cdf.size() - 1);
                    return l.grid[k] * l.grid[k];
                }
            },
            law);
    }
};

}  // namespace

double truncated_normal_excess(double alpha, double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::invalid_argument("truncated_normal_excess: u must lie in (0, 1)");
    }
    // u is the conditional upper-tail probability: Q(alpha + x) = u Q(alpha).
    if (alpha >= 3.0) {
        // Newton on ln Q(alpha + x) - ln Q(alpha) - ln u, written through the
        // Mills ratio so nothing underflows however far out alpha is.
        const double log_u = std::log(u);
        const double base = special::normal_tail_ratio(alpha).log_mills;
        double x = -alpha + std::sqrt(alpha * alpha - 2.0 * log_u);
        for (int it = 0; it < 50; ++it) {
            const auto tail = special::normal_tail_ratio(alpha + x);
            const double f = tail.log_mills - base - (alpha * x + 0.5 * x * x) - log_u;
            const double next = std::max(0.0, x + f / tail.inverse_mills);
            const bool done = std::abs(next - x) <= 1e-15 * (1.0 + x);
            x = next;
            if (done) {
                break;
            }
        }
        return x;
    }
    const boost::math::normal unit;
    const double q_alpha = 0.5 * std::erfc(alpha / std::numbers::sqrt2);
    if (alpha >= 0.0) {
        return boost::math::quantile(boost::math::complement(unit, u * q_alpha)) - alpha;
    }
    const double phi_alpha = 0.5 * std::erfc(-alpha / std::numbers::sqrt2);
    return boost::math::quantile(unit, phi_alpha + (1.0 - u) * q_alpha) - alpha;
}

SymbolLaw law_for_moments(double p, double d) {
    if (!(p >= 0.0) || !(d >= 0.0)) {
        throw std::invalid_argument("law_for_moments: need p, d >= 0");
    }
    if (p == 0.0) {
        return ConstantModulus{0.0};
    }
    const double kappa = 1.0 + d / (p * p);
    if (kappa <= 1.0 + 1e-12) {
        return ConstantModulus{p};
    }
    if (kappa >= 2.0 - 1e-12) {
        if (kappa > 2.0 + 1e-12) {
            throw InfeasibleKurtosis(kappa);
        }
        return CircularGaussian{p};
    }
    return params_from_moments({p, kappa * p * p}, 1e-12);
}

std::vector<SymbolLaw> laws_for_plan(const AllocationPlan& plan) {
    std::vector<SymbolLaw> laws;
    laws.reserve(plan.size());
    for (size_t i = 0; i < plan.size(); ++i) {
        laws.push_back(law_for_moments(plan.p[i], plan.d[i]));
    }
    return laws;
}

FrameBatch sample_symbols(const std::vector<SymbolLaw>& laws, size_t frames, uint64_t seed) {
    if (frames < 1 || laws.empty()) {
        throw std::invalid_argument("sample_symbols: need frames >= 1 and at least one subcarrier");
    }
    std::vector<PowerSampler> samplers;
    samplers.reserve(laws.size());
    for (const auto& l : laws) {
        samplers.emplace_back(l);
    }
    FrameBatch batch;
    batch.frames = frames;
    batch.n = laws.size();
    batch.seed = seed;
    batch.symbols.resize(frames * batch.n);
    for (size_t f = 0; f < frames; ++f) {
        const Philox rng(seed, static_cast<uint32_t>(f), kSymbolTag ^ static_cast<uint32_t>(uint64_t(f) >> 32));
        for (size_t i = 0; i < batch.n; ++i) {
            const auto u = rng.uniforms(i);
            const double power = samplers[i](u[0]);
            batch.symbols[f * batch.n + i] = std::polar(std::sqrt(power), 2.0 * std::numbers::pi * u[1]);
        }
    }
    return batch;
}

namespace {

template <class Sink>
void for_each_pacs_power(const FrameBatch& batch, bool unnormalized, Sink&& sink) {
    const size_t n = batch.n;
    if (batch.frames < 2 || n < 2) {
        throw std::invalid_argument("empirical statistics need frames >= 2 and N >= 2");
    }
    const FftPlan plan(static_cast<int>(n), +1);
    const double scale = unnormalized ? 1.0 : 1.0 / static_cast<double>(n);
    std::vector<cplx> power(n), r(n);
    std::vector<double> bins(n);
    for (size_t f = 0; f < batch.frames; ++f) {
        for (size_t i = 0; i < n; ++i) {
            power[i] = std::norm(batch.at(f, i));
        }
        plan.execute(power, r);
        for (size_t i = 0; i < n; ++i) {
            bins[i] = std::norm(r[i]) * scale;
        }
        sink(bins);
    }
}

}  // namespace

BinStatistics empirical_pacs_power(const FrameBatch& batch, bool unnormalized) {
    std::vector<Accumulator> acc(batch.n);
    for_each_pacs_power(batch, unnormalized, [&](const std::vector<double>& bins) {
        for (size_t i = 0; i < bins.size(); ++i) {
            acc[i].add(bins[i]);
        }
    });
    BinStatistics out;
    for (const auto& a : acc) {
        out.mean.push_back(a.mean);
        out.std_error.push_back(a.std_error());
    }
    return out;
}

ScalarStatistic empirical_eisl(const FrameBatch& batch, bool unnormalized) {
    Accumulator acc;
    for_each_pacs_power(batch, unnormalized, [&](const std::vector<double>& bins) {
        double s = 0.0;
        for (size_t i = 1; i < bins.size(); ++i) {
            s += bins[i];
        }
        acc.add(s);
    });
    return {acc.mean, acc.std_error()};
}

MomentStatistics empirical_moments(const FrameBatch& batch) {
    std::vector<Accumulator> a2(batch.n), a4(batch.n);
    for (size_t f = 0; f < batch.frames; ++f) {
        for (size_t i = 0; i < batch.n; ++i) {
            const double e = std::norm(batch.at(f, i));
            a2[i].add(e);
            a4[i].add(e * e);
        }
    }
    MomentStatistics out;
    for (size_t i = 0; i < batch.n; ++i) {
        out.m2.push_back({a2[i].mean, a2[i].std_error()});
        out.m4.push_back({a4[i].mean, a4[i].std_error()});
    }
    return out;
}

}  // namespace isac
