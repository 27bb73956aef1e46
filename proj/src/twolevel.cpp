#include "platcomp/twolevel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "platcomp/numeric.hpp"

namespace platcomp {

void TwoLevelConfig::validate() const {
    params.validate();
    if (!(g_low >= 0.0 && g_low <= 1.0)) throw std::invalid_argument("two-level: g_low must lie in [0,1]");
    if (params.alpha != 0.5) throw std::invalid_argument("two-level: alpha must be exactly 0.5");
    if (!(params.gamma < 1.0)) throw std::invalid_argument("two-level: gamma must be below 1");
}

TwoLevelConfig TwoLevelConfig::make(double g_low, double gamma, double cost) {
    TwoLevelConfig cfg;
    cfg.g_low = g_low;
    cfg.params = MarketParams{0.5, gamma, cost < 0.0 ? 1.0 - gamma : cost};
    cfg.validate();
    return cfg;
}

double twolevel_vmax(const TwoLevelConfig& cfg) {
    const double keep = 1.0 - cfg.params.gamma;
    return cfg.g_low > 0.0 ? keep / std::sqrt(cfg.g_low) : std::numeric_limits<double>::infinity();
}

namespace {

double check_range(const TwoLevelConfig& cfg, double v_bar) {
    cfg.validate();
    const double keep = 1.0 - cfg.params.gamma;
    if (!(v_bar > keep && v_bar < twolevel_vmax(cfg)))
        throw std::invalid_argument("two-level: v_bar must lie in (1-gamma, (1-gamma)/sqrt(g_low))");
    return keep / v_bar;
}

}  // namespace

double twolevel_rbar(const TwoLevelConfig& cfg, double v_bar) {
    const double s = check_range(cfg, v_bar);
    return (2.0 / (s * s) - 1.0) / cfg.g_high();
}

InteriorQuantities twolevel_quantities(const TwoLevelConfig& cfg, double v_bar) {
    const double s = check_range(cfg, v_bar);
    const double keep = 1.0 - cfg.params.gamma, c = cfg.params.cost, gh = cfg.g_high();
    InteriorQuantities iq;
    iq.r_bar = (2.0 / (s * s) - 1.0) / gh;
    iq.M_g = std::sqrt(gh) / 2.0;
    iq.kappa = s * s;
    iq.p_in = 0.5;
    iq.g_ai = gh / 2.0;
    iq.M_p = 0.5 * s * s;
    iq.V_tilde = keep / std::sqrt(2.0 - s * s) + c * cfg.g_low / gh;
    iq.w_implied = iq.V_tilde + c - v_bar;
    iq.split = 1;
    return iq;
}

double twolevel_v0_residual(const TwoLevelConfig& cfg, double v) {
    const double keep = 1.0 - cfg.params.gamma, s = keep / v;
    return keep / std::sqrt(2.0 - s * s) + 2.0 * cfg.params.cost / cfg.g_high() - v;
}

double twolevel_gstar_residual(const MarketParams& params, double g) {
    const double keep = 1.0 - params.gamma;
    return keep / std::sqrt(g) - keep * (std::sqrt(g) + std::sqrt(2.0 - g)) / 2.0 - params.cost;
}

double twolevel_v0(const TwoLevelConfig& cfg) {
    cfg.validate();
    if (cfg.g_low > 0.0 && !(twolevel_gstar_residual(cfg.params, cfg.g_low) > 0.0))
        throw std::invalid_argument("two-level: no zero-compensation level, g_low is at or above the pure-GenAI bound");
    const double keep = 1.0 - cfg.params.gamma;
    double hi = twolevel_vmax(cfg);
    if (!std::isfinite(hi)) {
        hi = 2.0 * keep;
        while (twolevel_v0_residual(cfg, hi) > 0.0) hi *= 2.0;
    }
    auto f = [&](double v) { return v <= keep ? std::numeric_limits<double>::infinity() : twolevel_v0_residual(cfg, v); };
    return bisect_root(f, keep, hi, 1e-15);
}

double twolevel_gstar(const MarketParams& params) {
    params.validate();
    if (params.alpha != 0.5) throw std::invalid_argument("two-level: alpha must be exactly 0.5");
    auto f = [&](double g) {
        return g <= 0.0 ? std::numeric_limits<double>::infinity() : twolevel_gstar_residual(params, g);
    };
    if (!(f(1.0) < 0.0)) throw std::invalid_argument("two-level: pure-GenAI condition has no sign change on (0,1)");
    return bisect_root(f, 0.0, 1.0, 1e-15);
}

double twolevel_wmin(const TwoLevelConfig& cfg) {
    cfg.validate();
    const double keep = 1.0 - cfg.params.gamma;
    return keep / std::sqrt(cfg.g_high()) - keep / std::sqrt(cfg.g_low) + 2.0 * cfg.params.cost / cfg.g_high();
}

TwoLevelProfit twolevel_profit(const TwoLevelConfig& cfg, double v_bar) {
    const double s = check_range(cfg, v_bar);
    const double gam = cfg.params.gamma, keep = 1.0 - gam, root = std::sqrt(2.0 - s * s);
    TwoLevelProfit out;
    out.R = 0.5 * gam * s + 0.5 * gam * root;
    out.Pi = 0.5 * s + 0.5 * root - keep / root - cfg.params.cost / cfg.g_high() * s * s;
    return out;
}

RatioDistribution twolevel_ratio(const TwoLevelConfig& cfg) {
    cfg.validate();
    if (!(cfg.g_low > 0.0)) throw std::invalid_argument("two-level: g_low = 0 has no finite ratio");
    return RatioDistribution::from_atoms({{1.0 / cfg.g_high(), 0.5}, {1.0 / cfg.g_low, 0.5}});
}

std::pair<DensityField, DensityField> twolevel_densities(const TwoLevelConfig& cfg, std::size_t n_cells) {
    cfg.validate();
    if (n_cells < 2 || n_cells % 2 != 0) throw std::invalid_argument("two-level: n_cells must be even");
    const Grid grid = build_grid(0.0, 1.0, n_cells);
    std::vector<double> pv(n_cells, 1.0), gv(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) gv[i] = i < n_cells / 2 ? cfg.g_high() : cfg.g_low;
    return {density_from_values(grid, pv), density_from_values(grid, gv)};
}

}  // namespace platcomp
