#include "isac/experiment.hpp"

#include "isac/error.hpp"
#include "isac/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

namespace isac {

using nlohmann::json;

namespace {

constexpr double kLn2 = std::numbers::ln2;

[[noreturn]] void bad(const std::string& what) { throw ConfigError("config: " + what); }

// Typed readers. nlohmann's own conversions accept too much (bool as number).
double get_number(const json& j, const std::string& key) {
    if (!j.is_number()) {
        bad("'" + key + "' must be a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        bad("'" + key + "' must be finite");
    }
    return v;
}

int64_t get_integer(const json& j, const std::string& key) {
    if (!j.is_number_integer()) {
        bad("'" + key + "' must be an integer");
    }
    return j.get<int64_t>();
}

bool get_bool(const json& j, const std::string& key) {
    if (!j.is_boolean()) {
        bad("'" + key + "' must be true or false");
    }
    return j.get<bool>();
}

std::string get_string(const json& j, const std::string& key) {
    if (!j.is_string()) {
        bad("'" + key + "' must be a string");
    }
    return j.get<std::string>();
}

std::vector<double> get_numbers(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty()) {
        bad("'" + key + "' must be a nonempty array of numbers");
    }
    std::vector<double> out;
    for (const auto& v : j) {
        out.push_back(get_number(v, key));
    }
    return out;
}

void require(bool ok, const std::string& what) {
    if (!ok) {
        bad(what);
    }
}

GpConfig parse_gp(const json& j) {
    if (!j.is_object()) {
        bad("'gp' must be an object");
    }
    GpConfig g;
    for (const auto& [key, v] : j.items()) {
        if (key == "tol") {
            g.tol = get_number(v, "gp.tol");
        } else if (key == "max_iters") {
            g.max_iters = static_cast<int>(get_integer(v, "gp.max_iters"));
        } else if (key == "alpha") {
            g.alpha = get_number(v, "gp.alpha");
        } else if (key == "mode") {
            const auto m = get_string(v, "gp.mode");
            if (m == "exact") {
                g.mode = GpMode::exact_gradient;
            } else if (m == "natural") {
                g.mode = GpMode::natural_parameter;
            } else {
                bad("gp.mode must be \"exact\" or \"natural\"");
            }
        } else if (key == "kurtosis_margin") {
            g.kurtosis_margin = get_number(v, "gp.kurtosis_margin");
        } else {
            bad("unknown key 'gp." + key + "'");
        }
    }
    require(g.tol > 0.0, "gp.tol must be positive");
    require(g.max_iters >= 1, "gp.max_iters must be >= 1");
    require(g.alpha > 0.0, "gp.alpha must be positive");
    require(g.kurtosis_margin > 0.0 && g.kurtosis_margin < 1.0, "gp.kurtosis_margin must be in (0, 1)");
    return g;
}

BaConfig parse_ba(const json& j) {
    if (!j.is_object()) {
        bad("'ba' must be an object");
    }
    BaConfig b;
    for (const auto& [key, v] : j.items()) {
        if (key == "rings") {
            b.rings = static_cast<int>(get_integer(v, "ba.rings"));
        } else if (key == "rho_max_factor") {
            b.rho_max_factor = get_number(v, "ba.rho_max_factor");
        } else if (key == "refine_grid") {
            b.refine_grid = get_bool(v, "ba.refine_grid");
        } else if (key == "refine_tol") {
            b.refine_tol = get_number(v, "ba.refine_tol");
        } else if (key == "max_inner") {
            b.max_inner = static_cast<int>(get_integer(v, "ba.max_inner"));
        } else if (key == "inner_tol") {
            b.inner_tol = get_number(v, "ba.inner_tol");
        } else if (key == "moment_tol") {
            b.moment_tol = get_number(v, "ba.moment_tol");
        } else {
            bad("unknown key 'ba." + key + "'");
        }
    }
    require(b.rings >= 2, "ba.rings must be >= 2");
    require(b.rho_max_factor > 1.0, "ba.rho_max_factor must exceed 1");
    require(b.refine_tol > 0.0 && b.inner_tol > 0.0 && b.moment_tol > 0.0, "ba tolerances must be positive");
    require(b.max_inner >= 1, "ba.max_inner must be >= 1");
    return b;
}

void check_kappa(double k, const std::string& key) {
    require(k >= 1.0 && k <= 2.0, "'" + key + "' must lie in [1, 2]");
}

// Runs f(0..count-1) on a small pool; every index writes only its own slot.
void parallel_for(size_t count, int threads, const std::function<void(size_t)>& f) {
    size_t workers = threads > 0 ? static_cast<size_t>(threads) : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (size_t i = 0; i < count; ++i) {
            f(i);
        }
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (size_t i = next++; i < count; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

// Shortest round-trip representation keeps CSVs exact and stable.
std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

double bits_per_subcarrier(double nats, size_t n) { return nats / kLn2 / static_cast<double>(n); }

double rate_of(const ExperimentConfig& cfg, const ChannelRealization& ch, const AllocationPlan& plan) {
    if (cfg.method == Method::ba) {
        return ba_design(ch, plan.p, plan.d, cfg.ba).rate;
    }
    return surrogate_sum_rate(plan, ch);
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) {
        bad("top level must be an object");
    }
    ExperimentConfig c;
    int budgets = 0;
    for (const auto& [key, v] : j.items()) {
        if (key == "n") {
            c.n = static_cast<int>(get_integer(v, key));
        } else if (key == "paths") {
            c.paths = static_cast<int>(get_integer(v, key));
        } else if (key == "rician_k_db") {
            c.rician_k_db = get_number(v, key);
        } else if (key == "snr") {
            c.snr = get_number(v, key);
        } else if (key == "snr_unit") {
            const auto u = get_string(v, key);
            if (u == "linear") {
                c.snr_unit = SnrUnit::linear;
            } else if (u == "db") {
                c.snr_unit = SnrUnit::db;
            } else {
                bad("snr_unit must be \"linear\" or \"db\"");
            }
        } else if (key == "total_power") {
            c.total_power = get_number(v, key);
        } else if (key == "kappa_bar") {
            c.kappa_bar = get_number(v, key);
            ++budgets;
        } else if (key == "zeta") {
            c.zeta = get_number(v, key);
            ++budgets;
        } else if (key == "eisl_budget") {
            c.eisl_budget = get_number(v, key);
            ++budgets;
        } else if (key == "kappa_sweep") {
            c.kappa_sweep = get_numbers(v, key);
        } else if (key == "snr_sweep") {
            c.snr_sweep = get_numbers(v, key);
        } else if (key == "snr_sweep_kappas") {
            c.snr_sweep_kappas = get_numbers(v, key);
        } else if (key == "seed") {
            if (!v.is_number_unsigned()) {
                bad("'seed' must be a nonnegative integer");
            }
            c.seed = v.get<uint64_t>();
        } else if (key == "seeds") {
            c.seeds = static_cast<int>(get_integer(v, key));
        } else if (key == "method") {
            const auto m = get_string(v, key);
            if (m == "gp") {
                c.method = Method::gp;
            } else if (m == "ba") {
                c.method = Method::ba;
            } else {
                bad("method must be \"gp\" or \"ba\"");
            }
        } else if (key == "frames") {
            c.frames = static_cast<int>(get_integer(v, key));
        } else if (key == "unnormalized") {
            c.unnormalized = get_bool(v, key);
        } else if (key == "deconv_subcarrier") {
            c.deconv_subcarrier = static_cast<int>(get_integer(v, key));
        } else if (key == "deconv_grid") {
            c.deconv_grid = static_cast<int>(get_integer(v, key));
        } else if (key == "marginal_bins") {
            c.marginal_bins = static_cast<int>(get_integer(v, key));
        } else if (key == "threads") {
            c.threads = static_cast<int>(get_integer(v, key));
        } else if (key == "gp") {
            c.gp = parse_gp(v);
        } else if (key == "ba") {
            c.ba = parse_ba(v);
        } else {
            bad("unknown key '" + key + "'");
        }
    }
    require(budgets <= 1, "give at most one of kappa_bar, zeta, eisl_budget");
    require(c.n >= 2 && c.n <= 1 << 16, "n must be in [2, 65536]");
    require(c.paths >= 1 && c.paths <= c.n, "paths must be in [1, n]");
    require(c.snr_unit == SnrUnit::db || c.snr > 0.0, "linear snr must be positive");
    require(!c.total_power || *c.total_power > 0.0, "total_power must be positive");
    check_kappa(c.kappa_bar, "kappa_bar");
    require(!c.zeta || (*c.zeta >= 0.0), "zeta must be >= 0");
    require(!c.eisl_budget || (*c.eisl_budget >= 0.0), "eisl_budget must be >= 0");
    for (double k : c.kappa_sweep) {
        check_kappa(k, "kappa_sweep");
    }
    for (double k : c.snr_sweep_kappas) {
        check_kappa(k, "snr_sweep_kappas");
    }
    for (double s : c.snr_sweep) {
        require(c.snr_unit == SnrUnit::db || s > 0.0, "linear snr_sweep entries must be positive");
    }
    require(c.seeds >= 1, "seeds must be >= 1");
    require(c.frames >= 2, "frames must be >= 2");
    require(c.deconv_subcarrier >= 0, "deconv_subcarrier must be >= 0");
    require(c.deconv_grid >= 16 && c.deconv_grid % 2 == 0, "deconv_grid must be even and >= 16");
    require(c.marginal_bins >= 2, "marginal_bins must be >= 2");
    require(c.threads >= 0, "threads must be >= 0");
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        bad("cannot open '" + path + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        bad("'" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["n"] = c.n;
    j["paths"] = c.paths;
    j["rician_k_db"] = c.rician_k_db;
    j["snr"] = c.snr;
    j["snr_unit"] = c.snr_unit == SnrUnit::linear ? "linear" : "db";
    if (c.total_power) {
        j["total_power"] = *c.total_power;
    }
    if (c.zeta) {
        j["zeta"] = *c.zeta;
    } else if (c.eisl_budget) {
        j["eisl_budget"] = *c.eisl_budget;
    } else {
        j["kappa_bar"] = c.kappa_bar;
    }
    j["kappa_sweep"] = c.kappa_sweep;
    j["snr_sweep"] = c.snr_sweep;
    j["snr_sweep_kappas"] = c.snr_sweep_kappas;
    j["seed"] = c.seed;
    j["seeds"] = c.seeds;
    j["method"] = c.method == Method::gp ? "gp" : "ba";
    j["frames"] = c.frames;
    j["unnormalized"] = c.unnormalized;
    j["deconv_subcarrier"] = c.deconv_subcarrier;
    j["deconv_grid"] = c.deconv_grid;
    j["marginal_bins"] = c.marginal_bins;
    j["threads"] = c.threads;
    j["gp"] = {{"tol", c.gp.tol},
               {"max_iters", c.gp.max_iters},
               {"alpha", c.gp.alpha},
               {"mode", c.gp.mode == GpMode::exact_gradient ? "exact" : "natural"},
               {"kurtosis_margin", c.gp.kurtosis_margin}};
    j["ba"] = {{"rings", c.ba.rings},          {"rho_max_factor", c.ba.rho_max_factor},
               {"refine_grid", c.ba.refine_grid}, {"refine_tol", c.ba.refine_tol},
               {"max_inner", c.ba.max_inner},  {"inner_tol", c.ba.inner_tol},
               {"moment_tol", c.ba.moment_tol}};
    return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
    auto j = config_to_json(cfg);
    j.erase("threads");  // execution only
    const std::string text = j.dump();
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

double linear_snr(const ExperimentConfig& cfg, double snr) {
    return cfg.snr_unit == SnrUnit::db ? std::pow(10.0, snr / 10.0) : snr;
}

double total_power(const ExperimentConfig& cfg, double snr) {
    if (cfg.total_power) {
        return *cfg.total_power;
    }
    // Unit noise and unit mean channel gain: average SNR = P / N.
    return linear_snr(cfg, snr) * cfg.n;
}

double budget_for_kappa(const ExperimentConfig& cfg, double kappa_bar, double P) {
    return eisl_budget(kappa_bar - 1.0, static_cast<size_t>(cfg.n), P);
}

double budget(const ExperimentConfig& cfg, double P) {
    if (cfg.eisl_budget) {
        return *cfg.eisl_budget;
    }
    if (cfg.zeta) {
        return eisl_budget(*cfg.zeta, static_cast<size_t>(cfg.n), P);
    }
    return budget_for_kappa(cfg, cfg.kappa_bar, P);
}

json run_meta(const ExperimentConfig& cfg, uint64_t seed) {
    return {{"schema", kSchemaVersion},
            {"version", ISAC_VERSION},
            {"config_hash", config_hash(cfg)},
            {"seed", seed},
            {"snr_unit", cfg.snr_unit == SnrUnit::linear ? "linear" : "db"},
            {"method", cfg.method == Method::gp ? "gp" : "ba"}};
}

std::string csv_preamble(const ExperimentConfig& cfg, uint64_t seed) {
    std::ostringstream os;
    os << "# schema=" << kSchemaVersion << "\n# version=" << ISAC_VERSION << "\n# config_hash=" << config_hash(cfg)
       << "\n# seed=" << seed << "\n# snr_unit=" << (cfg.snr_unit == SnrUnit::linear ? "linear" : "db")
       << "\n# method=" << (cfg.method == Method::gp ? "gp" : "ba") << "\n";
    return os.str();
}

DesignOutput run_design_at(const ExperimentConfig& cfg, uint64_t seed, double P, double D) {
    DesignOutput out;
    out.channel = rician_channel(cfg.n, cfg.paths, cfg.rician_k_db, seed);
    out.channel.meta.average_snr = P / cfg.n;
    auto gp = gp_run(out.channel, P, D, cfg.gp);
    out.plan = std::move(gp.plan);
    out.surrogate_rate = gp.rate;
    out.rate = gp.rate;
    out.converged = gp.converged;
    if (cfg.method == Method::ba) {
        out.ba = ba_design(out.channel, out.plan.p, out.plan.d, cfg.ba);
        out.rate = out.ba->rate;
        out.converged = out.converged && std::all_of(out.ba->subcarriers.begin(), out.ba->subcarriers.end(),
                                                     [](const BaSubcarrier& s) { return s.converged; });
    }
    return out;
}

DesignOutput run_design(const ExperimentConfig& cfg, uint64_t seed) {
    const double P = total_power(cfg, cfg.snr);
    return run_design_at(cfg, seed, P, budget(cfg, P));
}

std::vector<TradeoffPoint> rate_kurtosis_curve(const ExperimentConfig& cfg, uint64_t seed) {
    const double P = total_power(cfg, cfg.snr);
    std::vector<TradeoffPoint> pts(cfg.kappa_sweep.size());
    const auto ch = rician_channel(cfg.n, cfg.paths, cfg.rician_k_db, seed);
    for (size_t k = 0; k < pts.size(); ++k) {
        const double kb = cfg.kappa_sweep[k];
        const auto d = run_design_at(cfg, seed, P, budget_for_kappa(cfg, kb, P));
        const auto base = uniform_kurtosis_baseline(ch, P, kb);
        pts[k] = {kb, bits_per_subcarrier(d.rate, ch.size()), bits_per_subcarrier(rate_of(cfg, ch, base.plan), ch.size())};
    }
    return pts;
}

std::vector<TradeoffPoint> rate_kurtosis_sweep(const ExperimentConfig& cfg) {
    std::vector<std::vector<TradeoffPoint>> per_seed(static_cast<size_t>(cfg.seeds));
    parallel_for(per_seed.size(), cfg.threads,
                 [&](size_t s) { per_seed[s] = rate_kurtosis_curve(cfg, cfg.seed + s); });
    auto mean = per_seed.front();
    for (size_t k = 0; k < mean.size(); ++k) {
        double prop = 0.0, uni = 0.0;
        for (const auto& curve : per_seed) {  // fixed order: sums do not depend on scheduling
            prop += curve[k].proposed;
            uni += curve[k].uniform;
        }
        mean[k].proposed = prop / cfg.seeds;
        mean[k].uniform = uni / cfg.seeds;
    }
    return mean;
}

std::vector<SnrPoint> rate_snr_sweep(const ExperimentConfig& cfg) {
    const size_t ns = cfg.snr_sweep.size(), nk = cfg.snr_sweep_kappas.size();
    const size_t seeds = static_cast<size_t>(cfg.seeds);
    std::vector<SnrPoint> runs(ns * nk * seeds);
    parallel_for(runs.size(), cfg.threads, [&](size_t idx) {
        const size_t s = idx % seeds, k = (idx / seeds) % nk, i = idx / (seeds * nk);
        const double snr = cfg.snr_sweep[i], kb = cfg.snr_sweep_kappas[k];
        const double P = total_power(cfg, snr);
        const auto d = run_design_at(cfg, cfg.seed + s, P, budget_for_kappa(cfg, kb, P));
        const auto base = uniform_kurtosis_baseline(d.channel, P, kb);
        runs[idx] = {snr, kb, bits_per_subcarrier(d.rate, d.channel.size()),
                     bits_per_subcarrier(rate_of(cfg, d.channel, base.plan), d.channel.size())};
    });
    std::vector<SnrPoint> out;
    for (size_t at = 0; at < runs.size(); at += seeds) {
        SnrPoint pt = runs[at];
        pt.proposed = pt.uniform = 0.0;
        for (size_t s = 0; s < seeds; ++s) {
            pt.proposed += runs[at + s].proposed / cfg.seeds;
            pt.uniform += runs[at + s].uniform / cfg.seeds;
        }
        out.push_back(pt);
    }
    return out;
}

Fig6Data deconvolve_subcarrier(const ExperimentConfig& cfg, const DesignOutput& design, int subcarrier) {
    if (subcarrier < 0 || static_cast<size_t>(subcarrier) >= design.plan.size()) {
        bad("deconv_subcarrier " + std::to_string(subcarrier) + " outside [0, " + std::to_string(design.plan.size()) +
            ")");
    }
    const auto i = static_cast<size_t>(subcarrier);
    Fig6Data f;
    f.subcarrier = subcarrier;
    f.p = design.plan.p[i];
    f.d = design.plan.d[i];
    f.h = design.channel.h[i];
    LegitimacyConfig lc;
    lc.grid = cfg.deconv_grid;
    f.legitimacy = legitimacy_check(f.p, f.d, f.h, lc);
    const auto target = maxent_output_density(f.p, f.d, f.h, cfg.deconv_grid);
    const auto& input = f.legitimacy.deconvolution.density;  // law of h x
    const auto reconvolved = forward_convolve(input, 1.0).density;
    f.reconvolution_error = relative_l2(reconvolved, target);
    f.output = magnitude_marginal(target, cfg.marginal_bins);
    f.reconvolved = magnitude_marginal(reconvolved, cfg.marginal_bins);
    f.input = magnitude_marginal(input, cfg.marginal_bins, std::abs(f.h));
    return f;
}

ValidationReport run_validate(const ExperimentConfig& cfg, const AllocationPlan& plan, uint64_t seed) {
    ValidationReport r;
    const double scale = cfg.unnormalized ? static_cast<double>(plan.size()) : 1.0;
    r.eisl_expected = eisl_expected(plan) * scale;
    r.eisl_budget = plan.D * scale;
    r.bins_expected = pacs_expected(plan);
    for (auto& v : r.bins_expected) {
        v *= scale;
    }
    const auto batch = sample_symbols(laws_for_plan(plan), static_cast<size_t>(cfg.frames), seed);
    r.eisl_empirical = empirical_eisl(batch, cfg.unnormalized);
    r.bins_empirical = empirical_pacs_power(batch, cfg.unnormalized);
    r.pass = r.eisl_empirical.mean <= r.eisl_budget + 3.0 * r.eisl_empirical.std_error;
    return r;
}

std::string design_json(const ExperimentConfig& cfg, uint64_t seed, const DesignOutput& d) {
    json j;
    j["meta"] = run_meta(cfg, seed);
    j["P"] = d.plan.P;
    j["D"] = d.plan.D;
    j["rate_nats"] = d.rate;
    j["rate_bits_per_subcarrier"] = bits_per_subcarrier(d.rate, d.plan.size());
    j["surrogate_rate_nats"] = d.surrogate_rate;
    j["converged"] = d.converged;
    j["eisl"] = eisl_expected(d.plan);
    json subs = json::array();
    for (size_t i = 0; i < d.plan.size(); ++i) {
        json s = {{"index", i},
                  {"h_re", d.channel.h[i].real()},
                  {"h_im", d.channel.h[i].imag()},
                  {"abs_h", std::abs(d.channel.h[i])},
                  {"p", d.plan.p[i]},
                  {"d", d.plan.d[i]},
                  {"kappa", d.plan.p[i] > 0.0 ? d.plan.kurtosis(i) : 0.0}};
        if (d.ba) {
            const auto& b = d.ba->subcarriers[i];
            s["ba"] = {{"rate_nats", b.rate}, {"lambda", b.lambda}, {"mu", b.mu},
                       {"m2", b.m2},          {"m4", b.m4},         {"converged", b.converged}};
        }
        subs.push_back(std::move(s));
    }
    j["subcarriers"] = std::move(subs);
    return j.dump(2) + "\n";
}

AllocationPlan plan_from_design_json(const json& j) {
    try {
        AllocationPlan plan;
        plan.P = j.at("P").get<double>();
        plan.D = j.at("D").get<double>();
        for (const auto& s : j.at("subcarriers")) {
            plan.p.push_back(s.at("p").get<double>());
            plan.d.push_back(s.at("d").get<double>());
        }
        if (plan.size() < 2) {
            bad("design file has fewer than two subcarriers");
        }
        return plan;
    } catch (const json::exception& e) {
        bad(std::string("malformed design file: ") + e.what());
    }
}

std::string ba_weights_csv(const ExperimentConfig& cfg, uint64_t seed, const BaDesign& ba) {
    std::ostringstream os;
    os << csv_preamble(cfg, seed) << "subcarrier,rho,weight\n";
    for (size_t i = 0; i < ba.subcarriers.size(); ++i) {
        const auto& r = ba.subcarriers[i].distribution;
        for (size_t k = 0; k < r.size(); ++k) {
            os << i << ',' << num(r.grid[k]) << ',' << num(r.weights[k]) << '\n';
        }
    }
    return os.str();
}

std::string fig2_csv(const ExperimentConfig& cfg, const std::vector<TradeoffPoint>& pts) {
    std::ostringstream os;
    os << csv_preamble(cfg, cfg.seed) << "# seeds=" << cfg.seeds << "\n"
       << "kappa_bar,rate_proposed_bits,rate_uniform_bits,gain_bits\n";
    for (const auto& p : pts) {
        os << num(p.kappa_bar) << ',' << num(p.proposed) << ',' << num(p.uniform) << ',' << num(p.proposed - p.uniform)
           << '\n';
    }
    return os.str();
}

std::string fig3_csv(const ExperimentConfig& cfg, uint64_t seed, const DesignOutput& d) {
    const auto proposed = normalized_delay_response(d.plan);
    const auto uniform = normalized_delay_response(uniform_kurtosis_baseline(d.channel, d.plan.P, cfg.kappa_bar).plan);
    std::ostringstream os;
    os << csv_preamble(cfg, seed) << "delay,response_proposed,response_uniform\n";
    for (size_t i = 0; i < proposed.size(); ++i) {
        os << i << ',' << num(proposed[i]) << ',' << num(uniform[i]) << '\n';
    }
    return os.str();
}

std::string fig4_csv(const ExperimentConfig& cfg, const std::vector<SnrPoint>& pts) {
    std::ostringstream os;
    os << csv_preamble(cfg, cfg.seed) << "# seeds=" << cfg.seeds << "\n"
       << "snr,kappa_bar,rate_proposed_bits,rate_uniform_bits,gain_bits\n";
    for (const auto& p : pts) {
        os << num(p.snr) << ',' << num(p.kappa_bar) << ',' << num(p.proposed) << ',' << num(p.uniform) << ','
           << num(p.proposed - p.uniform) << '\n';
    }
    return os.str();
}

std::string fig5_csv(const ExperimentConfig& cfg, uint64_t seed, const DesignOutput& d) {
    std::ostringstream os;
    os << csv_preamble(cfg, seed) << "subcarrier,abs_h,kappa,p\n";
    for (size_t i = 0; i < d.plan.size(); ++i) {
        os << i << ',' << num(std::abs(d.channel.h[i])) << ',' << num(d.plan.p[i] > 0.0 ? d.plan.kurtosis(i) : 0.0)
           << ',' << num(d.plan.p[i]) << '\n';
    }
    return os.str();
}

std::string fig6_csv(const ExperimentConfig& cfg, uint64_t seed, const Fig6Data& f) {
    std::ostringstream os;
    os << csv_preamble(cfg, seed) << "# subcarrier=" << f.subcarrier << "\n"
       << "radius,output,reconvolved,input_radius,input\n";
    for (size_t k = 0; k < f.output.radius.size(); ++k) {
        os << num(f.output.radius[k]) << ',' << num(f.output.density[k]) << ',' << num(f.reconvolved.density[k]) << ','
           << num(f.input.radius[k]) << ',' << num(f.input.density[k]) << '\n';
    }
    return os.str();
}

std::string fig6_json(const ExperimentConfig& cfg, uint64_t seed, const Fig6Data& f) {
    json j;
    j["meta"] = run_meta(cfg, seed);
    j["subcarrier"] = f.subcarrier;
    j["p"] = f.p;
    j["d"] = f.d;
    j["kappa"] = f.p > 0.0 ? 1.0 + f.d / (f.p * f.p) : 0.0;
    j["abs_h"] = std::abs(f.h);
    j["legitimate"] = f.legitimacy.legitimate;
    j["residual"] = f.legitimacy.residual;
    j["negative_mass"] = f.legitimacy.negative_mass;
    j["reconvolution_error"] = f.reconvolution_error;
    j["iterations"] = f.legitimacy.deconvolution.iterations;
    j["converged"] = f.legitimacy.deconvolution.converged;
    j["residual_trace"] = f.legitimacy.deconvolution.residual_trace;
    return j.dump(2) + "\n";
}

std::string validate_json(const ExperimentConfig& cfg, uint64_t seed, const ValidationReport& r) {
    json j;
    j["meta"] = run_meta(cfg, seed);
    j["frames"] = cfg.frames;
    j["unnormalized"] = cfg.unnormalized;
    const auto z = [](double emp, double exp, double se) { return se > 0.0 ? (emp - exp) / se : 0.0; };
    j["eisl"] = {{"expected", r.eisl_expected},
                 {"budget", r.eisl_budget},
                 {"empirical", r.eisl_empirical.mean},
                 {"std_error", r.eisl_empirical.std_error},
                 {"z", z(r.eisl_empirical.mean, r.eisl_expected, r.eisl_empirical.std_error)}};
    json bins = json::array();
    for (size_t i = 0; i < r.bins_expected.size(); ++i) {
        bins.push_back({{"delay", i},
                        {"expected", r.bins_expected[i]},
                        {"empirical", r.bins_empirical.mean[i]},
                        {"std_error", r.bins_empirical.std_error[i]},
                        {"z", z(r.bins_empirical.mean[i], r.bins_expected[i], r.bins_empirical.std_error[i])}});
    }
    j["bins"] = std::move(bins);
    j["pass"] = r.pass;
    return j.dump(2) + "\n";
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write '" + tmp.string() + "'");
        }
        out << content;
        if (!out.flush()) {
            throw Error("write failed for '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, target);
}

}  // namespace isac
