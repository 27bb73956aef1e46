#include "platcomp/market.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "platcomp/numeric.hpp"

namespace platcomp {

void MarketParams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0,1]");
    if (!(cost > 0.0) || !std::isfinite(cost)) throw std::invalid_argument("cost must be positive");
}

void RevenueThresholdScheme::validate() const {
    if (!(v_bar >= 0.0) || !std::isfinite(v_bar)) throw std::invalid_argument("v_bar must be nonnegative");
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("w must be nonnegative");
}

namespace {
void require_same_grid(const DensityField& a, const DensityField& b, const char* what) {
    if (!a.grid.same_as(b.grid)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}
}  // namespace

std::vector<double> creator_revenue(const DensityField& q, const DensityField& p, const MarketParams& params) {
    require_same_grid(q, p, "creator_revenue");
    std::vector<double> v(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!(q.values[i] > 0.0)) throw std::invalid_argument("creator_revenue: zero content density");
        v[i] = (1.0 - params.gamma) * std::pow(p.values[i] / q.values[i], params.alpha);
    }
    return v;
}

std::vector<double> compensated_revenue(const std::vector<double>& V, const RevenueThresholdScheme& scheme) {
    std::vector<double> out(V);
    for (double& v : out)
        if (v >= scheme.v_bar) v += scheme.w;
    return out;
}

double genai_expected_revenue(const std::vector<double>& v_comp, const DensityField& g) {
    if (v_comp.size() != g.size()) throw std::invalid_argument("genai_expected_revenue: size mismatch");
    CompensatedSum s;
    for (std::size_t i = 0; i < g.size(); ++i) s += v_comp[i] * g.values[i];
    return s.value() * g.grid.width();
}

double genai_mass(const std::vector<double>& beta_ai, const DensityField& p) {
    CompensatedSum s;
    for (std::size_t i = 0; i < p.size(); ++i) s += beta_ai[i] * p.values[i];
    return s.value() * p.grid.width();
}

DensityField content_distribution(const std::vector<double>& beta_ai, const DensityField& p, const DensityField& g) {
    require_same_grid(p, g, "content_distribution");
    if (beta_ai.size() != p.size()) throw std::invalid_argument("content_distribution: size mismatch");
    for (double b : beta_ai)
        if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("content_distribution: beta outside [0,1]");
    const double m = genai_mass(beta_ai, p);
    std::vector<double> q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) q[i] = (1.0 - beta_ai[i]) * p.values[i] + g.values[i] * m;
    DensityField out = density_exact(p.grid, std::move(q), true);
    if (std::abs(out.total_mass() - 1.0) > 1e-12)
        throw std::logic_error("content_distribution: result does not integrate to one");
    return out;
}

double platform_revenue(const DensityField& q, const DensityField& p, const MarketParams& params) {
    require_same_grid(q, p, "platform_revenue");
    CompensatedSum s;
    for (std::size_t i = 0; i < q.size(); ++i)
        s += std::pow(p.values[i], params.alpha) * std::pow(q.values[i], 1.0 - params.alpha);
    return params.gamma * s.value() * q.grid.width();
}

double platform_profit(const DensityField& q, const DensityField& p, const std::vector<double>& w_field,
                       const MarketParams& params) {
    if (w_field.size() != q.size()) throw std::invalid_argument("platform_profit: size mismatch");
    CompensatedSum paid;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (w_field[i] < 0.0) throw std::invalid_argument("platform_profit: negative compensation");
        paid += w_field[i] * q.values[i];
    }
    return platform_revenue(q, p, params) - paid.value() * q.grid.width();
}

namespace {
double pregenai_beta(const MarketParams& params, double w_const) {
    const double gap = params.cost - w_const;
    if (gap <= 0.0) return 1.0;
    return std::min(1.0, std::pow((1.0 - params.gamma) / gap, 1.0 / params.alpha));
}
}  // namespace

double pregenai_profit(const MarketParams& params, double w_const) {
    const double b = pregenai_beta(params, w_const);
    return params.gamma * std::pow(b, 1.0 - params.alpha) - w_const * b;
}

PreGenAIEquilibrium pregenai_equilibrium(const MarketParams& params, double w_const, const DensityField& p) {
    params.validate();
    if (!(w_const >= 0.0)) throw std::invalid_argument("pregenai_equilibrium: W must be nonnegative");
    PreGenAIEquilibrium eq;
    eq.beta_h = pregenai_beta(params, w_const);
    const std::size_t n = p.size();
    eq.strategy.grid = p.grid;
    eq.strategy.beta_h.assign(n, eq.beta_h);
    eq.strategy.beta_ai.assign(n, 0.0);
    eq.strategy.beta_o.assign(n, 1.0 - eq.beta_h);
    std::vector<double> qv(n);
    for (std::size_t i = 0; i < n; ++i) qv[i] = eq.beta_h * p.values[i];
    eq.q = density_exact(p.grid, std::move(qv), eq.beta_h == 1.0);
    eq.revenue = platform_revenue(eq.q, p, params);
    eq.profit = eq.revenue - w_const * eq.q.total_mass();
    return eq;
}

PreGenAIOptimum pregenai_optimal(const MarketParams& params) {
    params.validate();
    const double a = params.alpha, gam = params.gamma, c = params.cost;
    // 1 - gamma is computed, so allow for its rounding when it equals c
    if (c - (1.0 - gam) <= 1e-12 * c) return {0.0, gam, false};
    const double w_free = std::max(0.0, c * (gam - a) / (1.0 - a));
    if (c - w_free < 1.0 - gam) {
        // the unconstrained optimum would push beta_h above one; cap at the point where it reaches one
        const double w = c - (1.0 - gam);
        return {w, gam - w, false};
    }
    const double m = std::min(gam, a);
    return {w_free, m * std::pow((1.0 - m) / c, 1.0 / a - 1.0), true};
}

std::vector<double> ai_posterior(const DensityField& q, const DensityField& g, const std::vector<double>& beta_ai,
                                 const DensityField& p) {
    require_same_grid(q, g, "ai_posterior");
    const double m = genai_mass(beta_ai, p);
    std::vector<double> post(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) post[i] = g.values[i] * m / q.values[i];
    return post;
}

}  // namespace platcomp
