#include "platcomp/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "platcomp/abm.hpp"
#include "platcomp/domain.hpp"
#include "platcomp/equilibrium.hpp"
#include "platcomp/market.hpp"
#include "platcomp/twolevel.hpp"

namespace platcomp {

namespace {

using nlohmann::json;

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string dashed(std::string key) {
    for (char& ch : key)
        if (ch == '_') ch = '-';
    return "--" + key;
}

//! Options of one subcommand, resolved as flag > config file > default.
class OptionSet {
public:
    explicit OptionSet(CLI::App* app) : app_(app) {}

    void real(const std::string& key, const std::string& help) {
        auto& slot = reals_[key];
        slot.opt = app_->add_option(dashed(key), slot.value, help);
    }
    void integer(const std::string& key, const std::string& help) {
        auto& slot = ints_[key];
        slot.opt = app_->add_option(dashed(key), slot.value, help);
    }
    void text(const std::string& key, const std::string& help) {
        auto& slot = texts_[key];
        slot.opt = app_->add_option(dashed(key), slot.value, help);
    }
    void flag(const std::string& key, const std::string& help) {
        auto& slot = flags_[key];
        slot.opt = app_->add_flag(dashed(key), slot.value, help);
    }

    std::optional<double> real(const std::string& key, const json& conf) const {
        const auto& slot = reals_.at(key);
        if (slot.opt->count() > 0) return slot.value;
        if (conf.contains(key)) return conf.at(key).get<double>();
        return std::nullopt;
    }
    double real(const std::string& key, const json& conf, double fallback) const {
        return real(key, conf).value_or(fallback);
    }
    std::optional<long long> integer(const std::string& key, const json& conf) const {
        const auto& slot = ints_.at(key);
        if (slot.opt->count() > 0) return slot.value;
        if (conf.contains(key)) return conf.at(key).get<long long>();
        return std::nullopt;
    }
    std::optional<std::string> text(const std::string& key, const json& conf) const {
        const auto& slot = texts_.at(key);
        if (slot.opt->count() > 0) return slot.value;
        if (conf.contains(key)) return conf.at(key).get<std::string>();
        return std::nullopt;
    }
    bool flag(const std::string& key, const json& conf) const {
        const auto& slot = flags_.at(key);
        if (slot.opt->count() > 0) return slot.value;
        return conf.contains(key) && conf.at(key).get<bool>();
    }

private:
    template <class T>
    struct Slot {
        T value{};
        CLI::Option* opt = nullptr;
    };
    CLI::App* app_;
    std::map<std::string, Slot<double>> reals_;
    std::map<std::string, Slot<long long>> ints_;
    std::map<std::string, Slot<std::string>> texts_;
    std::map<std::string, Slot<bool>> flags_;
};

struct Globals {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string out_dir;
    long long grid_cells = 1000;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* grid_opt = nullptr;
    json conf = json::object();
    json resolved = json::object();  // echoed into the sidecar

    std::uint64_t get_seed() const {
        if (seed_opt->count() > 0) return seed;
        if (conf.contains("seed")) return conf.at("seed").get<std::uint64_t>();
        return 1;
    }
    std::size_t get_grid_cells() const {
        long long n = grid_cells;
        if (grid_opt->count() == 0 && conf.contains("grid_cells")) n = conf.at("grid_cells").get<long long>();
        if (n < 2) throw std::invalid_argument("--grid-cells must be at least 2");
        return static_cast<std::size_t>(n);
    }
};

void write_file(const std::string& dir, const std::string& name, const std::string& body) {
    std::filesystem::create_directories(dir);
    std::ofstream f(std::filesystem::path(dir) / name);
    if (!f) throw std::invalid_argument("cannot write " + name + " in " + dir);
    f << body;
}

void write_sidecar(const Globals& g, const std::string& command) {
    if (g.out_dir.empty()) return;
    json side = g.resolved;
    side["command"] = command;
    write_file(g.out_dir, "config.json", side.dump(2) + "\n");
}

// ---- shared option groups -------------------------------------------------------------------

void add_market_options(OptionSet& o) {
    o.real("alpha", "matching elasticity in (0,1)");
    o.real("gamma", "platform commission in [0,1]");
    o.real("cost", "manual production cost");
}

void add_density_options(OptionSet& o) {
    o.text("p", "demand density file (CSV x,value or JSON)");
    o.text("g", "GenAI density file (CSV x,value or JSON)");
    o.real("two_level", "use the two-level example with this low GenAI level instead of files");
}

MarketParams resolve_market(const OptionSet& o, Globals& g, bool two_level) {
    MarketParams m;
    if (two_level) {
        m.gamma = o.real("gamma", g.conf, 0.85);
        m.alpha = o.real("alpha", g.conf, 0.5);
        m.cost = o.real("cost", g.conf, 1.0 - m.gamma);
    } else {
        m.alpha = o.real("alpha", g.conf, m.alpha);
        m.gamma = o.real("gamma", g.conf, m.gamma);
        m.cost = o.real("cost", g.conf, m.cost);
    }
    m.validate();
    g.resolved["alpha"] = m.alpha;
    g.resolved["gamma"] = m.gamma;
    g.resolved["cost"] = m.cost;
    return m;
}

struct Market {
    MarketParams params;
    DensityField p;
    DensityField g;
    std::unique_ptr<RatioDistribution> rd;
};

Market resolve_market_and_densities(const OptionSet& o, Globals& g) {
    const auto two = o.real("two_level", g.conf);
    const auto pf = o.text("p", g.conf);
    const auto gf = o.text("g", g.conf);
    Market m;
    m.params = resolve_market(o, g, two.has_value());
    if (two) {
        if (pf || gf) throw std::invalid_argument("give either --two-level or --p/--g, not both");
        const std::size_t cells = g.get_grid_cells();
        TwoLevelConfig cfg;
        cfg.g_low = *two;
        cfg.params = m.params;
        auto dens = twolevel_densities(cfg, cells);
        m.p = std::move(dens.first);
        m.g = std::move(dens.second);
        g.resolved["two_level"] = *two;
        g.resolved["grid_cells"] = cells;
    } else {
        if (!pf || !gf) throw std::invalid_argument("density files --p and --g are required");
        m.p = load_density(*pf);
        m.g = load_density(*gf);
        if (!m.p.grid.same_as(m.g.grid)) throw std::invalid_argument("p and g must share the same grid");
        g.resolved["p"] = *pf;
        g.resolved["g"] = *gf;
    }
    m.rd = std::make_unique<RatioDistribution>(RatioDistribution::from_densities(m.p, m.g));
    return m;
}

json quantities_json(const InteriorQuantities& q) {
    return json{{"r_bar", q.r_bar}, {"M_g", q.M_g}, {"M_p", q.M_p}, {"V_tilde", q.V_tilde}, {"w_implied", q.w_implied}};
}

json solution_json(const EquilibriumSolution& sol, const Market& m, const ResidualReport& rep) {
    json j;
    j["classification"] = to_string(sol.classification);
    j["scheme"] = {{"v_bar", sol.scheme.v_bar}, {"w", sol.scheme.w}};
    j["params"] = {{"alpha", m.params.alpha}, {"gamma", m.params.gamma}, {"cost", m.params.cost}};
    j["grid"] = {{"lo", m.p.grid.lo}, {"hi", m.p.grid.hi}, {"n_cells", m.p.grid.n_cells}};
    j["p"] = m.p.values;
    j["g"] = m.g.values;
    j["beta"] = sol.beta_ai;
    j["q"] = sol.q.values;
    std::vector<std::string> region;
    region.reserve(sol.region.size());
    for (Region r : sol.region) region.push_back(to_string(r));
    j["region"] = region;
    j["genai_mass"] = sol.genai_mass;
    j["level"] = sol.level;
    j["quantities"] = sol.quantities ? quantities_json(*sol.quantities) : json(nullptr);
    j["reduced"] = sol.reduced ? json{{"v_bar", sol.reduced->v_bar}, {"w", sol.reduced->w}} : json(nullptr);
    j["boundary_tie"] = sol.boundary_tie;
    j["assumed_large_w"] = sol.assumed_large_w;
    j["note"] = sol.note;
    j["residuals"] = {{"consistency", rep.consistency},
                      {"incentive", rep.incentive},
                      {"normalization", rep.normalization},
                      {"beta_range", rep.beta_range}};
    return j;
}

Classification parse_classification(const std::string& s) {
    for (Classification c : {Classification::Interior, Classification::PureAI, Classification::NoCompensationEquivalent,
                             Classification::Reducible, Classification::Nonexistent, Classification::Undecided})
        if (to_string(c) == s) return c;
    throw std::invalid_argument("unknown classification '" + s + "'");
}

// ---- commands -------------------------------------------------------------------------------

int cmd_pregenai(const OptionSet& o, Globals& g, std::ostream& out) {
    const MarketParams params = resolve_market(o, g, false);
    json j;
    j["params"] = {{"alpha", params.alpha}, {"gamma", params.gamma}, {"cost", params.cost}};
    const auto w = o.real("w", g.conf);
    const Grid grid = build_grid(0.0, 1.0, 2);
    const DensityField uniform = density_from_values(grid, {1.0, 1.0});
    if (w) {
        g.resolved["w"] = *w;
        const PreGenAIEquilibrium eq = pregenai_equilibrium(params, *w, uniform);
        j["W"] = *w;
        j["beta_h"] = eq.beta_h;
        j["q_scale"] = eq.beta_h;
        j["revenue"] = eq.revenue;
        j["profit"] = eq.profit;
    } else {
        const PreGenAIOptimum opt = pregenai_optimal(params);
        const PreGenAIEquilibrium eq = pregenai_equilibrium(params, opt.w_star, uniform);
        j["W_star"] = opt.w_star;
        j["Pi_star"] = opt.pi_star;
        j["interior"] = opt.interior;
        j["beta_h"] = eq.beta_h;
        j["q_scale"] = eq.beta_h;
    }
    out << j.dump(2) << "\n";
    write_sidecar(g, "pregenai");
    if (!g.out_dir.empty()) write_file(g.out_dir, "pregenai.json", j.dump(2) + "\n");
    return kExitOk;
}

int cmd_solve(const OptionSet& o, Globals& g, std::ostream& out, bool full) {
    Market m = resolve_market_and_densities(o, g);
    const auto v_bar = o.real("v_bar", g.conf);
    if (!v_bar) throw std::invalid_argument("--v-bar is required");
    ClassifyOptions copts;
    copts.assume_large_w = o.flag("assume_large_w", g.conf);
    std::optional<double> w = o.real("w", g.conf);
    if (!w) {
        const InteriorQuantities iq = interior_quantities(*m.rd, *v_bar, m.params);
        w = std::max(0.0, iq.w_implied);
    }
    g.resolved["v_bar"] = *v_bar;
    g.resolved["w"] = *w;
    g.resolved["assume_large_w"] = copts.assume_large_w;
    const EquilibriumSolution sol = classify_scheme({*v_bar, *w}, m.p, m.g, *m.rd, m.params, copts);
    const ResidualReport rep = verify_equilibrium(sol, m.p, m.g, m.params);
    json j = solution_json(sol, m, rep);
    const char* name = full ? "solve" : "classify";
    if (!full) {
        for (const char* k : {"grid", "p", "g", "beta", "q", "region"}) j.erase(k);
    }
    out << j.dump(2) << "\n";
    write_sidecar(g, name);
    if (!g.out_dir.empty()) write_file(g.out_dir, std::string(name) + ".json", j.dump(2) + "\n");
    return kExitOk;
}

int cmd_verify(const OptionSet& o, Globals& g, std::ostream& out) {
    const auto path = o.text("solution", g.conf);
    if (!path) throw std::invalid_argument("--solution is required");
    std::ifstream in(*path);
    if (!in) throw std::invalid_argument("cannot open solution file: " + *path);
    json j;
    try {
        in >> j;
        Market m;
        m.params = MarketParams{j.at("params").at("alpha").get<double>(), j.at("params").at("gamma").get<double>(),
                                j.at("params").at("cost").get<double>()};
        m.params.validate();
        const Grid grid = build_grid(j.at("grid").at("lo").get<double>(), j.at("grid").at("hi").get<double>(),
                                     j.at("grid").at("n_cells").get<std::size_t>());
        m.p = density_exact(grid, j.at("p").get<std::vector<double>>());
        m.g = density_exact(grid, j.at("g").get<std::vector<double>>());
        EquilibriumSolution sol;
        sol.scheme = {j.at("scheme").at("v_bar").get<double>(), j.at("scheme").at("w").get<double>()};
        sol.classification = parse_classification(j.at("classification").get<std::string>());
        sol.beta_ai = j.at("beta").get<std::vector<double>>();
        sol.q = density_exact(grid, j.at("q").get<std::vector<double>>());
        for (const auto& r : j.at("region")) {
            const std::string s = r.get<std::string>();
            if (s != "AI" && s != "IN") throw std::invalid_argument("unknown region tag '" + s + "'");
            sol.region.push_back(s == "AI" ? Region::AI : Region::IN);
        }
        const ResidualReport rep = verify_equilibrium(sol, m.p, m.g, m.params);
        json r = {{"classification", to_string(sol.classification)},
                  {"consistency", rep.consistency},
                  {"incentive", rep.incentive},
                  {"normalization", rep.normalization},
                  {"beta_range", rep.beta_range},
                  {"max", rep.max()}};
        out << r.dump(2) << "\n";
        g.resolved["solution"] = *path;
        write_sidecar(g, "verify");
        if (!g.out_dir.empty()) write_file(g.out_dir, "verify.json", r.dump(2) + "\n");
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed solution file: ") + e.what());
    }
    return kExitOk;
}

int cmd_curve(const OptionSet& o, Globals& g, std::ostream& out) {
    Market m = resolve_market_and_densities(o, g);
    const ProfitEvaluator ev(*m.rd, m.params, &m.p, &m.g);
    const long long n = o.integer("points", g.conf).value_or(100);
    if (n < 2) throw std::invalid_argument("--points must be at least 2");
    const double v_hi = o.real("v_max", g.conf, 1.25 * ev.upper());
    const double v_lo = o.real("v_min", g.conf, ev.lower() + (v_hi - ev.lower()) / static_cast<double>(n));
    g.resolved["points"] = n;
    g.resolved["v_min"] = v_lo;
    g.resolved["v_max"] = v_hi;
    const auto pts = profit_curve(ev, v_lo, v_hi, static_cast<std::size_t>(n));
    std::ostringstream csv;
    csv << "v_bar,w,R,Pi,classification\n";
    for (const auto& pt : pts)
        csv << fmt9(pt.v_bar) << ',' << fmt9(pt.w) << ',' << fmt9(pt.R) << ',' << fmt9(pt.Pi) << ','
            << to_string(pt.classification) << '\n';
    out << csv.str();
    write_sidecar(g, "curve");
    if (!g.out_dir.empty()) write_file(g.out_dir, "curve.csv", csv.str());
    return kExitOk;
}

json optimum_json(const Optimum& opt) {
    return json{{"v_star", opt.v_star},
                {"w_star", opt.w_star},
                {"R_star", opt.R_star},
                {"Pi_star", opt.Pi_star},
                {"no_compensation", opt.no_compensation},
                {"Pi_no_compensation", opt.baseline.Pi},
                {"R_no_compensation", opt.baseline.R}};
}

int cmd_optimize(const OptionSet& o, Globals& g, std::ostream& out) {
    Market m = resolve_market_and_densities(o, g);
    const long long pts = o.integer("grid_points", g.conf).value_or(512);
    if (pts < 32) throw std::invalid_argument("--grid-points must be at least 32");
    g.resolved["grid_points"] = pts;
    const ProfitEvaluator ev(*m.rd, m.params, &m.p, &m.g);
    json j = optimum_json(optimize_vstar(ev, static_cast<std::size_t>(pts)));
    j["v0"] = ev.v0() ? json(*ev.v0()) : json(nullptr);
    out << j.dump(2) << "\n";
    write_sidecar(g, "optimize");
    if (!g.out_dir.empty()) write_file(g.out_dir, "optimize.json", j.dump(2) + "\n");
    return kExitOk;
}

int cmd_twolevel(const OptionSet& o, Globals& g, std::ostream& out) {
    const auto g_low = o.real("g_low", g.conf);
    if (!g_low) throw std::invalid_argument("--g-low is required");
    TwoLevelConfig cfg;
    cfg.g_low = *g_low;
    cfg.params = resolve_market(o, g, true);
    cfg.validate();
    g.resolved["g_low"] = *g_low;
    json j;
    j["g_low"] = cfg.g_low;
    j["g_high"] = cfg.g_high();
    const double gstar = twolevel_gstar(cfg.params);
    j["g_star"] = gstar;
    j["g_star_residual"] = twolevel_gstar_residual(cfg.params, gstar);
    const bool has_v0 = cfg.g_low == 0.0 || twolevel_gstar_residual(cfg.params, cfg.g_low) > 0.0;
    j["regime"] = has_v0 ? "indifference_without_compensation" : "pure_genai_without_compensation";
    if (has_v0) {
        const double v0 = twolevel_v0(cfg);
        j["v0"] = v0;
        j["v0_residual"] = twolevel_v0_residual(cfg, v0);
    } else {
        j["w_min"] = twolevel_wmin(cfg);
    }
    if (const auto v = o.real("v_bar", g.conf)) {
        g.resolved["v_bar"] = *v;
        const InteriorQuantities iq = twolevel_quantities(cfg, *v);
        const TwoLevelProfit pr = twolevel_profit(cfg, *v);
        j["at"] = quantities_json(iq);
        j["at"]["v_bar"] = *v;
        j["at"]["R"] = pr.R;
        j["at"]["Pi"] = pr.Pi;
    }
    if (cfg.g_low > 0.0) {
        const RatioDistribution rd = twolevel_ratio(cfg);
        const ProfitEvaluator ev(rd, cfg.params);
        j["optimum"] = optimum_json(optimize_vstar(ev));
    }
    out << j.dump(2) << "\n";
    write_sidecar(g, "twolevel");
    if (!g.out_dir.empty()) write_file(g.out_dir, "twolevel.json", j.dump(2) + "\n");
    return kExitOk;
}

void add_abm_options(OptionSet& o) {
    add_market_options(o);
    o.real("v_bar", "revenue threshold");
    o.real("w", "compensation");
    o.integer("n_agents", "consumers, creators and contents per period");
    o.integer("bins", "number of equal bins over the preference range");
    o.integer("max_rounds", "round cap per period");
    o.real("tol", "histogram TV tolerance between rounds");
    o.flag("no_noise_floor", "do not add the sampling-noise level to the tolerance");
    o.flag("pay_genai", "also compensate GenAI content above the threshold");
    o.real("bandwidth_mult", "multiplier on the Silverman bandwidth");
    o.real("bandwidth", "fixed kernel bandwidth");
    o.real("shrink", "contraction factor of the generator toward its center");
    o.real("shrink_center", "contraction center (training mean when unset)");
}

ABMConfig resolve_abm(const OptionSet& o, Globals& g, GenerativeOptions& gen) {
    ABMConfig cfg;
    cfg.params.alpha = o.real("alpha", g.conf, 0.5);
    cfg.params.gamma = o.real("gamma", g.conf, 0.9);
    cfg.params.cost = o.real("cost", g.conf, 0.1);
    cfg.scheme.v_bar = o.real("v_bar", g.conf, 0.110);
    cfg.scheme.w = o.real("w", g.conf, 0.0);
    auto positive = [](std::optional<long long> v, const char* name, std::size_t fallback) {
        if (!v) return fallback;
        if (*v < 1) throw std::invalid_argument(std::string("--") + name + " must be positive");
        return static_cast<std::size_t>(*v);
    };
    cfg.n_agents = positive(o.integer("n_agents", g.conf), "n-agents", cfg.n_agents);
    cfg.n_bins = positive(o.integer("bins", g.conf), "bins", cfg.n_bins);
    cfg.max_rounds = positive(o.integer("max_rounds", g.conf), "max-rounds", cfg.max_rounds);
    cfg.convergence_tv = o.real("tol", g.conf, cfg.convergence_tv);
    cfg.noise_floor = !o.flag("no_noise_floor", g.conf);
    cfg.pay_genai_content = o.flag("pay_genai", g.conf);
    cfg.seed = g.get_seed();
    cfg.validate();
    gen.bandwidth_multiplier = o.real("bandwidth_mult", g.conf, gen.bandwidth_multiplier);
    if (const auto h = o.real("bandwidth", g.conf)) gen.bandwidth = *h;
    gen.shrink = o.real("shrink", g.conf, gen.shrink);
    if (const auto c = o.real("shrink_center", g.conf)) gen.center = *c;

    json& r = g.resolved;
    r["alpha"] = cfg.params.alpha;
    r["gamma"] = cfg.params.gamma;
    r["cost"] = cfg.params.cost;
    r["v_bar"] = cfg.scheme.v_bar;
    r["w"] = cfg.scheme.w;
    r["n_agents"] = cfg.n_agents;
    r["bins"] = cfg.n_bins;
    r["max_rounds"] = cfg.max_rounds;
    r["tol"] = cfg.convergence_tv;
    r["noise_floor"] = cfg.noise_floor;
    r["pay_genai"] = cfg.pay_genai_content;
    r["seed"] = cfg.seed;
    r["bandwidth_mult"] = gen.bandwidth_multiplier;
    r["bandwidth"] = gen.bandwidth ? json(*gen.bandwidth) : json(nullptr);
    r["shrink"] = gen.shrink;
    r["shrink_center"] = gen.center ? json(*gen.center) : json(nullptr);
    return cfg;
}

std::string histogram_csv(const PeriodRecord& rec, const MixtureSpec& spec) {
    std::ostringstream csv;
    csv << "bin_center,consumers,contents\n";
    const std::size_t B = rec.content_hist.size();
    const double width = (spec.clip_hi - spec.clip_lo) / static_cast<double>(B);
    for (std::size_t b = 0; b < B; ++b)
        csv << fmt9(spec.clip_lo + (static_cast<double>(b) + 0.5) * width) << ',' << rec.consumer_hist[b] << ','
            << rec.content_hist[b] << '\n';
    return csv.str();
}

json metrics_json(const CollapseMetrics& m) {
    return json{{"central_mass", m.central_mass}, {"modal_mass", m.modal_mass}, {"std", m.std_dev}, {"tv_to_p", m.tv_to_p}};
}

int cmd_simulate(const OptionSet& o, Globals& g, std::ostream& out) {
    SinglePeriodOptions sp;
    const ABMConfig cfg = resolve_abm(o, g, sp.generative);
    if (const auto n = o.integer("train_size", g.conf)) {
        if (*n < 2) throw std::invalid_argument("--train-size must be at least 2");
        sp.n_train = static_cast<std::size_t>(*n);
    }
    g.resolved["train_size"] = sp.n_train;
    const MixtureSpec spec = MixtureSpec::bimodal_default();
    const PeriodRecord rec = run_single_period(cfg, spec, sp);
    json j = {{"v_bar", cfg.scheme.v_bar},
              {"w", cfg.scheme.w},
              {"R", rec.R},
              {"Pi", rec.Pi},
              {"manual_fraction", rec.manual_fraction},
              {"genai_expected_revenue", rec.genai_expected_revenue},
              {"rounds_used", rec.rounds_used},
              {"converged", rec.converged},
              {"metrics", metrics_json(collapse_metrics(rec.contents, spec, cfg.n_bins))}};
    out << j.dump(2) << "\n";
    write_sidecar(g, "simulate");
    if (!g.out_dir.empty()) {
        write_file(g.out_dir, "simulate.json", j.dump(2) + "\n");
        write_file(g.out_dir, "histogram.csv", histogram_csv(rec, spec));
    }
    return rec.converged ? kExitOk : kExitNotConverged;
}

int cmd_multiperiod(const OptionSet& o, Globals& g, std::ostream& out) {
    MultiPeriodOptions mp;
    const ABMConfig cfg = resolve_abm(o, g, mp.generative);
    if (const auto t = o.integer("periods", g.conf)) {
        if (*t < 1) throw std::invalid_argument("--periods must be at least 1");
        mp.periods = static_cast<std::size_t>(*t);
    }
    mp.train_frac = o.real("train_frac", g.conf, mp.train_frac);
    g.resolved["periods"] = mp.periods;
    g.resolved["train_frac"] = mp.train_frac;
    const MixtureSpec spec = MixtureSpec::bimodal_default();
    const auto recs = run_multiperiod(cfg, spec, mp);

    std::ostringstream csv;
    csv << "t,R,Pi,manual_fraction,central_mass,modal_mass,tv_to_p\n";
    double total = 0.0;
    bool all_converged = true;
    std::vector<CollapseMetrics> ms;
    for (std::size_t t = 0; t < recs.size(); ++t) {
        const auto& r = recs[t];
        ms.push_back(collapse_metrics(r.contents, spec, cfg.n_bins));
        total += r.Pi;
        all_converged = all_converged && r.converged;
        csv << t + 1 << ',' << fmt9(r.R) << ',' << fmt9(r.Pi) << ',' << fmt9(r.manual_fraction) << ','
            << fmt9(ms.back().central_mass) << ',' << fmt9(ms.back().modal_mass) << ',' << fmt9(ms.back().tv_to_p)
            << '\n';
    }
    out << csv.str();
    const bool collapse = ms.back().tv_to_p > ms.front().tv_to_p && ms.back().central_mass > ms.front().central_mass;
    json summary = {{"periods", recs.size()},
                    {"total_profit", total},
                    {"collapse", collapse},
                    {"all_converged", all_converged},
                    {"first", metrics_json(ms.front())},
                    {"last", metrics_json(ms.back())}};
    write_sidecar(g, "multiperiod");
    if (!g.out_dir.empty()) {
        write_file(g.out_dir, "periods.csv", csv.str());
        write_file(g.out_dir, "summary.json", summary.dump(2) + "\n");
        for (std::size_t t = 0; t < recs.size(); ++t)
            write_file(g.out_dir, "histogram_t" + std::to_string(t + 1) + ".csv", histogram_csv(recs[t], spec));
    }
    return all_converged ? kExitOk : kExitNotConverged;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Equilibria, compensation thresholds and simulations for a creator platform with GenAI"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config_path, "JSON file with option values; flags override it");
    g.seed_opt = app.add_option("--seed", g.seed, "random seed");
    app.add_option("--out", g.out_dir, "directory for output files");
    g.grid_opt = app.add_option("--grid-cells", g.grid_cells, "cells for generated grids (even)");

    auto* pregenai = app.add_subcommand("pregenai", "equilibrium and optimal flat compensation without GenAI");
    OptionSet o_pre(pregenai);
    add_market_options(o_pre);
    o_pre.real("w", "flat compensation; prints the optimum when omitted");

    auto* solve = app.add_subcommand("solve", "classify a threshold scheme and print the equilibrium");
    auto* classify = app.add_subcommand("classify", "classify a threshold scheme");
    OptionSet o_solve(solve), o_classify(classify);
    for (OptionSet* o : {&o_solve, &o_classify}) {
        add_market_options(*o);
        add_density_options(*o);
        o->real("v_bar", "revenue threshold");
        o->real("w", "compensation (defaults to the implied level)");
        o->flag("assume_large_w", "treat compensation above the implied level as the implied level");
    }

    auto* curve = app.add_subcommand("curve", "revenue and profit along the threshold");
    OptionSet o_curve(curve);
    add_market_options(o_curve);
    add_density_options(o_curve);
    o_curve.integer("points", "number of thresholds");
    o_curve.real("v_min", "first threshold");
    o_curve.real("v_max", "last threshold");

    auto* optimize = app.add_subcommand("optimize", "profit-maximizing threshold");
    OptionSet o_opt(optimize);
    add_market_options(o_opt);
    add_density_options(o_opt);
    o_opt.integer("grid_points", "log-spaced search points");

    auto* twolevel = app.add_subcommand("twolevel", "closed forms of the two-level example");
    OptionSet o_two(twolevel);
    add_market_options(o_two);
    o_two.real("g_low", "low GenAI density level in [0,1]");
    o_two.real("v_bar", "threshold at which to report quantities");

    auto* simulate = app.add_subcommand("simulate", "one simulated period with a finite population");
    OptionSet o_sim(simulate);
    add_abm_options(o_sim);
    o_sim.integer("train_size", "human samples used to fit the generator");

    auto* multiperiod = app.add_subcommand("multiperiod", "repeated periods with a retrained generator");
    OptionSet o_multi(multiperiod);
    add_abm_options(o_multi);
    o_multi.integer("periods", "number of periods");
    o_multi.real("train_frac", "share of the population used to fit each generator");

    auto* verify = app.add_subcommand("verify", "residuals of a saved equilibrium");
    OptionSet o_verify(verify);
    o_verify.text("solution", "JSON written by solve");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInvalidInput;
    }

    try {
        if (!g.config_path.empty()) {
            std::ifstream in(g.config_path);
            if (!in) throw std::invalid_argument("cannot open config file: " + g.config_path);
            try {
                in >> g.conf;
            } catch (const nlohmann::json::exception& e) {
                throw std::invalid_argument(std::string("config file is not valid JSON: ") + e.what());
            }
            if (!g.conf.is_object()) throw std::invalid_argument("config file must hold a JSON object");
        }
        if (g.conf.contains("out") && g.out_dir.empty()) g.out_dir = g.conf.at("out").get<std::string>();
        if (*pregenai) return cmd_pregenai(o_pre, g, out);
        if (*solve) return cmd_solve(o_solve, g, out, true);
        if (*classify) return cmd_solve(o_classify, g, out, false);
        if (*curve) return cmd_curve(o_curve, g, out);
        if (*optimize) return cmd_optimize(o_opt, g, out);
        if (*twolevel) return cmd_twolevel(o_two, g, out);
        if (*simulate) return cmd_simulate(o_sim, g, out);
        if (*multiperiod) return cmd_multiperiod(o_multi, g, out);
        if (*verify) return cmd_verify(o_verify, g, out);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const nlohmann::json::exception& e) {
        err << "error: bad config value: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitInvalidInput;
}

}  // namespace platcomp
