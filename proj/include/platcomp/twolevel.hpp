#pragma once

#include <utility>

#include "platcomp/domain.hpp"
#include "platcomp/equilibrium.hpp"
#include "platcomp/market.hpp"

namespace platcomp {

//! Uniform demand on [0,1] with a GenAI model at level 2 - g_low on [0,1/2] and g_low on (1/2,1].
struct TwoLevelConfig {
    double g_low = 0.2;
    MarketParams params{0.5, 0.85, 0.15};

    double g_high() const { return 2.0 - g_low; }
    void validate() const;
    //! alpha = 1/2 and cost = 1 - gamma unless a cost is given.
    static TwoLevelConfig make(double g_low, double gamma, double cost = -1.0);
};

//! Largest threshold with a nonempty indifferent side, (1-gamma)/sqrt(g_low).
double twolevel_vmax(const TwoLevelConfig& cfg);

double twolevel_rbar(const TwoLevelConfig& cfg, double v_bar);
InteriorQuantities twolevel_quantities(const TwoLevelConfig& cfg, double v_bar);
double twolevel_v0(const TwoLevelConfig& cfg);
//! Residual of the zero-compensation indifference equation at v.
double twolevel_v0_residual(const TwoLevelConfig& cfg, double v);
//! Threshold level of g_low above which pure GenAI is the outcome without compensation.
double twolevel_gstar(const MarketParams& params);
//! Difference of the two sides of the pure-GenAI condition at g_low = g.
double twolevel_gstar_residual(const MarketParams& params, double g);
double twolevel_wmin(const TwoLevelConfig& cfg);

struct TwoLevelProfit {
    double R = 0.0;
    double Pi = 0.0;
};
TwoLevelProfit twolevel_profit(const TwoLevelConfig& cfg, double v_bar);

//! Exact two-atom ratio distribution.
RatioDistribution twolevel_ratio(const TwoLevelConfig& cfg);
//! (p, g) on a uniform grid over [0,1]; n_cells must be even.
std::pair<DensityField, DensityField> twolevel_densities(const TwoLevelConfig& cfg, std::size_t n_cells);

}  // namespace platcomp
