#include "platcomp/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "platcomp/numeric.hpp"

namespace platcomp {

std::string to_string(Classification c) {
    switch (c) {
        case Classification::Interior: return "Interior";
        case Classification::PureAI: return "PureAI";
        case Classification::NoCompensationEquivalent: return "NoCompensationEquivalent";
        case Classification::Reducible: return "Reducible";
        case Classification::Nonexistent: return "Nonexistent";
        case Classification::Undecided: return "Undecided";
    }
    return "Unknown";
}

std::string to_string(Region r) { return r == Region::AI ? "AI" : "IN"; }

namespace {

double keep_share(const MarketParams& params) {
    const double k = 1.0 - params.gamma;
    if (!(k > 0.0)) throw std::invalid_argument("threshold analysis needs gamma < 1");
    return k;
}

// relative slack used when comparing a computed revenue against the threshold
constexpr double kTieSlack = 1e-12;

bool reaches(double v, double v_bar) { return v >= v_bar * (1.0 - kTieSlack); }

}  // namespace

RbarSolution solve_rbar_split(const RatioDistribution& rd, double v_bar, const MarketParams& params) {
    params.validate();
    const double keep = keep_share(params);
    if (!(v_bar >= keep)) throw std::invalid_argument("solve_rbar: v_bar must be at least 1-gamma");
    const double rhs = std::pow(v_bar / keep, 1.0 / params.alpha);
    const auto& e = rd.entries();
    const std::size_t m = e.size();
    if (rhs <= 1.0) return {e.front().r_value, 0};

    std::vector<double> p_tail(m + 1, 0.0);
    for (std::size_t k = m; k-- > 0;) p_tail[k] = p_tail[k + 1] + e[k].p_mass;

    double g_below = 0.0;
    for (std::size_t k = 1; k < m; ++k) {
        g_below += e[k - 1].g_mass;
        const double lhs_k = e[k].r_value * g_below + p_tail[k];
        if (lhs_k >= rhs) {
            double t = (rhs - p_tail[k]) / g_below;
            t = std::clamp(t, e[k - 1].r_value, e[k].r_value);
            if (t <= e[k - 1].r_value) t = std::nextafter(e[k - 1].r_value, e[k].r_value);
            return {t, k};
        }
    }
    return {std::max(rhs, e.back().r_value), m};
}

double solve_rbar(const RatioDistribution& rd, double v_bar, const MarketParams& params) {
    return solve_rbar_split(rd, v_bar, params).r_bar;
}

InteriorQuantities interior_quantities(const RatioDistribution& rd, double v_bar, const MarketParams& params) {
    const double keep = keep_share(params);
    if (!(v_bar > keep)) throw std::invalid_argument("interior_quantities: v_bar must exceed 1-gamma");
    const RbarSolution rs = solve_rbar_split(rd, v_bar, params);
    if (rs.split == 0) throw std::invalid_argument("interior_quantities: the strict-GenAI side is empty");
    const auto& e = rd.entries();
    const double a = params.alpha;

    InteriorQuantities iq;
    iq.r_bar = rs.r_bar;
    iq.split = rs.split;
    iq.kappa = std::pow(keep / v_bar, 1.0 / a);
    for (std::size_t k = 0; k < e.size(); ++k) {
        if (k < rs.split) {
            iq.M_g += std::pow(e[k].r_value, a) * e[k].g_mass;
            iq.g_ai += e[k].g_mass;
        } else {
            iq.p_in += e[k].p_mass;
        }
    }
    iq.M_p = iq.kappa * iq.p_in;
    if (!(iq.M_p < 1.0)) throw std::invalid_argument("interior_quantities: indifferent content mass reaches one");
    const double genai_plus_cost = (v_bar * std::pow(iq.r_bar, -a) * iq.M_g + params.cost) / iq.g_ai;
    iq.V_tilde = genai_plus_cost - params.cost;
    iq.w_implied = genai_plus_cost - v_bar;
    return iq;
}

double top_revenue(const RatioDistribution& rd, const MarketParams& params) {
    return (1.0 - params.gamma) * std::pow(rd.r_max(), params.alpha);
}

double genai_outside_option(const RatioDistribution& rd, const MarketParams& params) {
    return (1.0 - params.gamma) * rd.g_moment(params.alpha) + params.cost;
}

namespace {

// V~ + c - v_bar, with +inf where the strict-GenAI side is still empty
double nocomp_gap(const RatioDistribution& rd, double v, const MarketParams& params) {
    if (v <= 1.0 - params.gamma) return std::numeric_limits<double>::infinity();
    const RbarSolution rs = solve_rbar_split(rd, v, params);
    if (rs.split == 0) return std::numeric_limits<double>::infinity();
    return interior_quantities(rd, v, params).w_implied;
}

}  // namespace

std::optional<double> solve_v0(const RatioDistribution& rd, const MarketParams& params) {
    params.validate();
    const double sup = top_revenue(rd, params);
    const double outside = genai_outside_option(rd, params);
    if (!(sup > outside)) return std::nullopt;
    double lo = 1.0 - params.gamma, hi = sup;
    if (nocomp_gap(rd, hi, params) >= 0.0) return hi;
    for (int it = 0; it < 400 && hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (nocomp_gap(rd, mid, params) > 0.0) lo = mid;
        else hi = mid;
    }
    const double f_lo = nocomp_gap(rd, lo, params), f_hi = nocomp_gap(rd, hi, params);
    return std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
}

double discontinuity_gap(const RatioDistribution& rd, const MarketParams& params) {
    if (!rd.top_is_atom()) return 0.0;
    const double g_top = rd.entries().back().g_mass;
    double g_below = 0.0;
    for (std::size_t k = 0; k + 1 < rd.size(); ++k) g_below += rd[k].g_mass;
    if (!(g_below > 0.0)) throw std::invalid_argument("discontinuity_gap: no g-mass below the top ratio");
    return (g_top / g_below) * (top_revenue(rd, params) - genai_outside_option(rd, params));
}

EquilibriumSolution build_equilibrium(double v_bar, const DensityField& p, const DensityField& g,
                                      const RatioDistribution& rd, const MarketParams& params) {
    params.validate();
    const double keep = keep_share(params);
    if (rd.cell_entry().size() != p.size())
        throw std::invalid_argument("build_equilibrium: ratio distribution was not built from these densities");
    if (!(v_bar > keep)) throw std::invalid_argument("build_equilibrium: inadmissible, v_bar must exceed 1-gamma");
    const double sup = top_revenue(rd, params);
    if (v_bar > sup * (1.0 + 1e-14))
        throw std::invalid_argument("build_equilibrium: inadmissible, v_bar exceeds (1-gamma) sup r^alpha");
    const InteriorQuantities iq = interior_quantities(rd, v_bar, params);
    if (iq.w_implied < -1e-10)
        throw std::invalid_argument("build_equilibrium: inadmissible, v_bar exceeds V~ + c (implied w < 0)");

    const std::size_t n = p.size();
    EquilibriumSolution sol;
    sol.beta_ai.resize(n);
    sol.region.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rd.cell_entry()[i] < iq.split) {
            sol.beta_ai[i] = 1.0;
            sol.region[i] = Region::AI;
        } else {
            const double r = rd.cell_ratio()[i];
            sol.beta_ai[i] = std::clamp(1.0 - iq.kappa * (1.0 - iq.r_bar / r), 0.0, 1.0);
            sol.region[i] = Region::IN;
        }
    }
    sol.q = content_distribution(sol.beta_ai, p, g);
    sol.genai_mass = genai_mass(sol.beta_ai, p);
    sol.quantities = iq;
    sol.scheme = {v_bar, std::max(0.0, iq.w_implied)};
    sol.level = v_bar;
    sol.classification = Classification::Interior;
    return sol;
}

EquilibriumSolution pure_ai_solution(const DensityField& p, const DensityField& g, const RevenueThresholdScheme& scheme) {
    EquilibriumSolution sol;
    sol.scheme = scheme;
    sol.beta_ai.assign(p.size(), 1.0);
    sol.region.assign(p.size(), Region::AI);
    sol.q = density_exact(g.grid, g.values, true);
    sol.genai_mass = 1.0;
    sol.classification = Classification::PureAI;
    return sol;
}

namespace {

// GenAI expected compensated revenue minus the indifference condition, at the equilibrium built on level v
double reduced_gap(const RatioDistribution& rd, double v, const RevenueThresholdScheme& scheme,
                   const MarketParams& params) {
    const RbarSolution rs = solve_rbar_split(rd, v, params);
    double vwg = 0.0;
    for (std::size_t k = 0; k < rd.size(); ++k) {
        const double V = k < rs.split ? v * std::pow(rd[k].r_value / rs.r_bar, params.alpha) : v;
        vwg += rd[k].g_mass * (V + (reaches(V, scheme.v_bar) ? scheme.w : 0.0));
    }
    return vwg + params.cost - scheme.w - v;
}

// largest gain from manual creation when everyone else uses GenAI
double pure_ai_violation(const DensityField& p, const DensityField& g, const RevenueThresholdScheme& scheme,
                         const MarketParams& params) {
    const auto V = creator_revenue(g, p, params);
    std::vector<double> comp(V.size());
    for (std::size_t i = 0; i < V.size(); ++i) comp[i] = V[i] + (reaches(V[i], scheme.v_bar) ? scheme.w : 0.0);
    const double vwg = genai_expected_revenue(comp, g);
    double worst = -std::numeric_limits<double>::infinity();
    for (double cv : comp) worst = std::max(worst, cv - params.cost - vwg);
    return worst;
}

}  // namespace

EquilibriumSolution classify_scheme(const RevenueThresholdScheme& scheme, const DensityField& p, const DensityField& g,
                                    const RatioDistribution& rd, const MarketParams& params,
                                    const ClassifyOptions& opts) {
    params.validate();
    scheme.validate();
    const double keep = keep_share(params);
    const double sup = top_revenue(rd, params);
    const double outside = genai_outside_option(rd, params);
    const std::optional<double> v0 = solve_v0(rd, params);
    const double v_bar = scheme.v_bar, w = scheme.w;
    const double slack = 1e-12 * std::max(1.0, sup);

    auto from_level = [&](double level, Classification cls) {
        EquilibriumSolution sol = build_equilibrium(level, p, g, rd, params);
        sol.scheme = scheme;
        sol.classification = cls;
        return sol;
    };

    if (w <= 0.0) {
        if (!v0) return pure_ai_solution(p, g, scheme);
        if (std::abs(v_bar - *v0) <= 1e-12 * std::max(1.0, *v0)) return from_level(*v0, Classification::Interior);
        if (v_bar > *v0) return from_level(*v0, Classification::NoCompensationEquivalent);
        EquilibriumSolution sol = from_level(*v0, Classification::Reducible);
        sol.reduced = RevenueThresholdScheme{*v0, 0.0};
        return sol;
    }

    if (std::min(outside, v_bar) >= sup - slack) {
        EquilibriumSolution sol = pure_ai_solution(p, g, scheme);
        const bool strict = std::min(outside, v_bar) > sup + slack;
        if (!strict && v_bar + w > outside) {
            sol.boundary_tie = true;
            sol.note = "pure-GenAI condition holds with equality";
        }
        return sol;
    }

    if (v0 && v_bar > *v0) {
        EquilibriumSolution sol = from_level(*v0, Classification::NoCompensationEquivalent);
        sol.note = "threshold is above every equilibrium revenue; compensation is never paid";
        return sol;
    }

    if (v_bar > keep && v_bar < sup) {
        const InteriorQuantities iq = interior_quantities(rd, v_bar, params);
        if (std::abs(w - iq.w_implied) <= opts.w_tol) {
            EquilibriumSolution sol = from_level(v_bar, Classification::Interior);
            return sol;
        }
        if (w > iq.w_implied) {
            if (opts.assume_large_w) {
                EquilibriumSolution sol = from_level(v_bar, Classification::Interior);
                sol.assumed_large_w = true;
                sol.note = "w above the implied level treated as the implied level (assume-large-w)";
                return sol;
            }
            EquilibriumSolution sol = pure_ai_solution(p, g, scheme);
            sol.classification = Classification::Nonexistent;
            sol.quantities = iq;
            sol.note = "compensation exceeds V~ + c - v_bar; no equilibrium exists";
            return sol;
        }
    }

    // w is too small to hold creators at v_bar: look for a higher indifference level
    const double lo0 = std::max(v_bar, keep);
    const double hi0 = v0 ? *v0 : sup;
    if (hi0 > lo0) {
        double lo = lo0, hi = hi0;
        if (reduced_gap(rd, hi, scheme, params) <= 0.0) {
            for (int it = 0; it < 400 && hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (reduced_gap(rd, mid, scheme, params) > 0.0) lo = mid;
                else hi = mid;
            }
            const double level = (lo > keep) ? 0.5 * (lo + hi) : hi;
            EquilibriumSolution sol = from_level(level, Classification::Reducible);
            sol.reduced = RevenueThresholdScheme{level, std::max(0.0, sol.quantities->w_implied)};
            const ResidualReport rep = verify_equilibrium(sol, p, g, params);
            if (rep.max() <= 1e-6) return sol;
            sol.classification = Classification::Nonexistent;
            sol.reduced.reset();
            sol.note = "indifference level falls on a compensation jump";
            return sol;
        }
    }

    if (pure_ai_violation(p, g, scheme, params) <= 1e-12) {
        EquilibriumSolution sol = pure_ai_solution(p, g, scheme);
        sol.note = "pure GenAI is a best response under this scheme";
        return sol;
    }
    EquilibriumSolution sol = pure_ai_solution(p, g, scheme);
    sol.classification = Classification::Nonexistent;
    sol.note = "no indifference level and pure GenAI is not a best response";
    return sol;
}

double ResidualReport::max() const { return std::max({consistency, incentive, normalization, beta_range}); }

ResidualReport verify_equilibrium(const EquilibriumSolution& sol, const DensityField& p, const DensityField& g,
                                  const MarketParams& params, const std::vector<double>* w_field) {
    ResidualReport rep;
    const std::size_t n = p.size();
    if (sol.beta_ai.size() != n || sol.q.size() != n || sol.region.size() != n)
        throw std::invalid_argument("verify_equilibrium: solution does not match the grid");

    const double dx = p.grid.width();
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double b = sol.beta_ai[i];
        rep.beta_range = std::max(rep.beta_range, std::max(b - 1.0, -b));
        m += b * p.values[i];
    }
    m *= dx;
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double q_re = (1.0 - sol.beta_ai[i]) * p.values[i] + g.values[i] * m;
        rep.consistency = std::max(rep.consistency, std::abs(q_re - sol.q.values[i]));
        mass += sol.q.values[i];
    }
    rep.normalization = std::abs(mass * dx - 1.0);

    const auto V = creator_revenue(sol.q, p, params);
    std::vector<double> W(n, 0.0);
    if (w_field) {
        if (w_field->size() != n) throw std::invalid_argument("verify_equilibrium: compensation size mismatch");
        W = *w_field;
    } else if (sol.scheme.w > 0.0) {
        for (std::size_t i = 0; i < n; ++i) W[i] = reaches(V[i], sol.scheme.v_bar) ? sol.scheme.w : 0.0;
    }
    double vwg = 0.0;
    for (std::size_t i = 0; i < n; ++i) vwg += (V[i] + W[i]) * g.values[i];
    vwg *= dx;
    for (std::size_t i = 0; i < n; ++i) {
        const double gain = V[i] + W[i] - params.cost - vwg;
        const double viol = sol.region[i] == Region::IN ? std::abs(gain) : std::max(0.0, gain);
        rep.incentive = std::max(rep.incentive, viol);
    }
    return rep;
}

XBasedScheme xbased_equivalent(const EquilibriumSolution& sol, const DensityField& p, const MarketParams& params) {
    XBasedScheme W{p.grid, std::vector<double>(p.size(), 0.0)};
    if (sol.classification == Classification::PureAI) return W;
    if (sol.classification != Classification::Interior)
        throw std::invalid_argument("xbased_equivalent: needs an Interior or PureAI solution");
    const auto V = creator_revenue(sol.q, p, params);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double by_revenue = reaches(V[i], sol.scheme.v_bar) ? sol.scheme.w : 0.0;
        const double by_region = sol.region[i] == Region::IN ? sol.scheme.w : 0.0;
        if (by_revenue != by_region)
            throw std::logic_error("xbased_equivalent: revenue and ratio indicators disagree");
        W.values[i] = by_region;
    }
    return W;
}

// ---- profit ---------------------------------------------------------------------------------

ProfitEvaluator::ProfitEvaluator(const RatioDistribution& rd, const MarketParams& params, const DensityField* p,
                                 const DensityField* g)
    : rd_(rd), params_(params), p_(p), g_(g) {
    params_.validate();
    keep_share(params_);
    v0_ = solve_v0(rd_, params_);
    sup_term_ = top_revenue(rd_, params_);
}

double ProfitEvaluator::lower() const { return 1.0 - params_.gamma; }
double ProfitEvaluator::upper() const { return v0_ ? *v0_ : sup_term_; }

ProfitPoint ProfitEvaluator::pure_ai_point(double v_bar) const {
    ProfitPoint pt;
    pt.v_bar = v_bar;
    pt.w = 0.0;
    pt.classification = Classification::PureAI;
    pt.pi_formula = params_.gamma * rd_.g_moment(params_.alpha);
    pt.R = pt.Pi = pt.pi_identity = pt.pi_formula;
    if (p_ && g_) {
        pt.pi_definitional = platform_revenue(*g_, *p_, params_);
        pt.has_definitional = true;
        pt.R = pt.Pi = pt.pi_definitional;
        pt.route_gap = std::abs(pt.pi_formula - pt.pi_definitional) / std::max(1.0, std::abs(pt.Pi));
    }
    return pt;
}

ProfitPoint ProfitEvaluator::at(double v_bar) const {
    if (!(v_bar > lower())) throw std::invalid_argument("profit_at: v_bar must exceed 1-gamma");
    if (v0_ && v_bar > *v0_) {
        ProfitPoint pt = at(*v0_);
        pt.v_bar = v_bar;
        pt.classification = Classification::NoCompensationEquivalent;
        return pt;
    }
    if (!v0_ && v_bar > sup_term_) return pure_ai_point(v_bar);

    const double a = params_.alpha, gam = params_.gamma, c = params_.cost, keep = 1.0 - gam;
    const InteriorQuantities iq = interior_quantities(rd_, v_bar, params_);
    ProfitPoint pt;
    pt.v_bar = v_bar;
    pt.w = std::max(0.0, iq.w_implied);
    pt.quantities = iq;
    pt.classification = Classification::Interior;

    const double lead = v_bar / keep * iq.M_p;
    const double tail = std::pow(iq.r_bar, 1.0 - a) * std::pow(keep / v_bar, 1.0 / a - 1.0) * iq.M_g;
    const double R_formula = gam * lead + gam * tail;
    pt.pi_formula = lead + tail * (gam - iq.M_p) / (1.0 - iq.M_p) -
                    c * iq.r_bar * std::pow(keep / v_bar, 1.0 / a) * iq.M_p / (1.0 - iq.M_p);
    pt.R = R_formula;
    pt.pi_identity = R_formula - iq.w_implied * iq.M_p;
    pt.Pi = pt.pi_formula;

    if (p_ && g_) {
        const EquilibriumSolution sol = build_equilibrium(v_bar, *p_, *g_, rd_, params_);
        std::vector<double> W(p_->size(), 0.0);
        for (std::size_t i = 0; i < W.size(); ++i)
            if (sol.region[i] == Region::IN) W[i] = iq.w_implied;
        pt.R = platform_revenue(sol.q, *p_, params_);
        pt.pi_definitional = platform_profit(sol.q, *p_, W, params_);
        pt.pi_identity = pt.R - iq.w_implied * iq.M_p;
        pt.has_definitional = true;
        pt.Pi = pt.pi_definitional;
    }
    const double scale = std::max(1.0, std::abs(pt.Pi));
    if (pt.has_definitional) {
        pt.route_gap = std::max(std::abs(pt.pi_formula - pt.pi_definitional),
                                std::abs(pt.pi_definitional - pt.pi_identity)) / scale;
    } else {
        pt.route_gap = std::abs(pt.pi_formula - pt.pi_identity) / scale;
    }
    return pt;
}

ProfitPoint ProfitEvaluator::no_compensation() const {
    if (v0_) {
        ProfitPoint pt = at(*v0_);
        pt.w = 0.0;
        pt.classification = Classification::NoCompensationEquivalent;
        return pt;
    }
    return pure_ai_point(sup_term_);
}

ProfitPoint profit_at(double v_bar, const RatioDistribution& rd, const MarketParams& params, const DensityField* p,
                      const DensityField* g) {
    return ProfitEvaluator(rd, params, p, g).at(v_bar);
}

std::vector<ProfitPoint> profit_curve(const ProfitEvaluator& ev, double v_lo, double v_hi, std::size_t n_points) {
    if (n_points < 2) throw std::invalid_argument("profit_curve: need at least two points");
    if (!(v_hi > v_lo)) throw std::invalid_argument("profit_curve: need v_hi > v_lo");
    if (!(v_lo > ev.lower())) throw std::invalid_argument("profit_curve: v_lo must exceed 1-gamma");
    std::vector<ProfitPoint> out;
    out.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double v = v_lo + (v_hi - v_lo) * static_cast<double>(i) / static_cast<double>(n_points - 1);
        out.push_back(ev.at(v));
    }
    return out;
}

Optimum optimize_vstar(const ProfitEvaluator& ev, std::size_t grid_points) {
    if (grid_points < 32) throw std::invalid_argument("optimize_vstar: need at least 32 grid points");
    const double lo = ev.lower();
    const double hi = ev.v0() ? *ev.v0() : ev.sup_term() * (1.0 - 1e-12);
    if (!(hi > lo)) throw std::invalid_argument("optimize_vstar: empty threshold range");

    std::vector<double> vs(grid_points), pis(grid_points);
    const double span = std::log(hi / lo);
    for (std::size_t i = 0; i < grid_points; ++i) {
        vs[i] = lo * std::exp(span * static_cast<double>(i + 1) / static_cast<double>(grid_points));
        pis[i] = ev.at(vs[i]).Pi;
    }
    vs.back() = hi;
    pis.back() = ev.at(hi).Pi;
    const std::size_t best = static_cast<std::size_t>(std::max_element(pis.begin(), pis.end()) - pis.begin());
    const double a = best == 0 ? lo * (1.0 + 1e-9) : vs[best - 1];
    const double b = best + 1 < grid_points ? vs[best + 1] : hi;
    const double v_ref = golden_section_max([&](double v) { return ev.at(v).Pi; }, a, b, 1e-13);
    double v_star = ev.at(v_ref).Pi >= pis[best] ? v_ref : vs[best];

    Optimum opt;
    opt.best = ev.at(v_star);
    opt.baseline = ev.no_compensation();
    if (opt.baseline.Pi >= opt.best.Pi) {
        opt.no_compensation = true;
        opt.best = opt.baseline;
    }
    opt.v_star = opt.best.v_bar;
    opt.w_star = opt.no_compensation ? 0.0 : opt.best.w;
    opt.R_star = opt.best.R;
    opt.Pi_star = opt.best.Pi;
    return opt;
}

// ---- fixed point ----------------------------------------------------------------------------

namespace {

using CompensationRule = std::function<void(const std::vector<double>& V, std::vector<double>& W)>;

FixedPointResult iterate_fixed_point(const CompensationRule& rule, const DensityField& p, const DensityField& g,
                                     const MarketParams& params, const FixedPointOptions& opts) {
    params.validate();
    if (!p.grid.same_as(g.grid)) throw std::invalid_argument("solve_xbased: grid mismatch");
    if (!(opts.damping > 0.0 && opts.damping <= 1.0)) throw std::invalid_argument("solve_xbased: damping must lie in (0,1]");
    if (opts.delta_schedule.empty()) throw std::invalid_argument("solve_xbased: empty delta schedule");
    for (std::size_t k = 0; k < opts.delta_schedule.size(); ++k) {
        if (opts.delta_schedule[k] < 0.0) throw std::invalid_argument("solve_xbased: negative delta");
        if (k > 0 && !(opts.delta_schedule[k] < opts.delta_schedule[k - 1]))
            throw std::invalid_argument("solve_xbased: delta schedule must be strictly decreasing");
    }

    const std::size_t n = p.size();
    const double dx = p.grid.width(), a = params.alpha, keep = 1.0 - params.gamma, c = params.cost;
    const double lam = opts.damping;
    std::vector<double> r(n), beta(n, 1.0), V(n), W(n, 0.0), bt(n), Vt(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = p.values[i] / g.values[i];
        V[i] = keep * std::pow(r[i], a);
    }

    auto apply_map = [&](double delta) {
        rule(V, W);
        double m = 0.0, vwg = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m += beta[i] * p.values[i];
            vwg += (V[i] + W[i]) * g.values[i];
        }
        m *= dx;
        vwg *= dx;
        double mt = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double denom = vwg + c - W[i];
            if (delta > 0.0) denom = std::max(denom, delta);
            const double need = denom > 0.0 ? std::pow(keep / denom, 1.0 / a) : std::numeric_limits<double>::infinity();
            bt[i] = std::clamp(1.0 + m / r[i] - need, delta, 1.0);
            mt += bt[i] * p.values[i];
        }
        mt *= dx;
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Vt[i] = keep * std::pow(1.0 - bt[i] + mt / r[i], -a);
            res = std::max({res, std::abs(bt[i] - beta[i]), std::abs(Vt[i] - V[i])});
        }
        return res;
    };

    FixedPointResult out;
    double res = std::numeric_limits<double>::infinity();
    for (std::size_t stage = 0; stage < opts.delta_schedule.size(); ++stage) {
        const double delta = opts.delta_schedule[stage];
        const bool last = stage + 1 == opts.delta_schedule.size();
        std::size_t used = 0;
        while (out.iterations < opts.max_iterations) {
            if (!last && used >= opts.stage_iterations) break;
            res = apply_map(delta);
            ++out.iterations;
            ++used;
            if (res <= opts.tol) break;
            for (std::size_t i = 0; i < n; ++i) {
                beta[i] = (1.0 - lam) * beta[i] + lam * bt[i];
                V[i] = (1.0 - lam) * V[i] + lam * Vt[i];
            }
        }
    }
    res = apply_map(opts.delta_schedule.back());
    out.residual = res;
    out.converged = res <= opts.tol;

    EquilibriumSolution& sol = out.solution;
    sol.beta_ai = beta;
    for (double& b : sol.beta_ai) b = std::clamp(b, 0.0, 1.0);
    sol.q = content_distribution(sol.beta_ai, p, g);
    sol.genai_mass = genai_mass(sol.beta_ai, p);
    sol.region.resize(n);
    bool all_ai = true;
    for (std::size_t i = 0; i < n; ++i) {
        sol.region[i] = sol.beta_ai[i] < 1.0 - 1e-9 ? Region::IN : Region::AI;
        all_ai = all_ai && sol.region[i] == Region::AI;
    }
    if (!out.converged) {
        sol.classification = Classification::Undecided;
        sol.note = "fixed-point iteration did not converge";
    } else {
        sol.classification = all_ai ? Classification::PureAI : Classification::Interior;
    }
    rule(V, W);
    out.w_field = W;
    return out;
}

}  // namespace

FixedPointResult solve_xbased(const XBasedScheme& W, const DensityField& p, const DensityField& g,
                              const MarketParams& params, const FixedPointOptions& opts) {
    if (!W.grid.same_as(p.grid) || W.values.size() != p.size())
        throw std::invalid_argument("solve_xbased: compensation grid mismatch");
    for (double v : W.values)
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("solve_xbased: compensation must be finite and nonnegative");
    CompensationRule rule = [&](const std::vector<double>&, std::vector<double>& out) { out = W.values; };
    FixedPointResult res = iterate_fixed_point(rule, p, g, params, opts);
    res.solution.note = res.solution.note.empty() ? "location-based compensation" : res.solution.note;
    return res;
}

FixedPointResult solve_threshold_iteration(const RevenueThresholdScheme& scheme, const DensityField& p,
                                           const DensityField& g, const MarketParams& params,
                                           const FixedPointOptions& opts) {
    scheme.validate();
    CompensationRule rule = [&](const std::vector<double>& V, std::vector<double>& out) {
        for (std::size_t i = 0; i < V.size(); ++i) out[i] = V[i] >= scheme.v_bar ? scheme.w : 0.0;
    };
    FixedPointResult res = iterate_fixed_point(rule, p, g, params, opts);
    res.solution.scheme = scheme;
    return res;
}

}  // namespace platcomp
