#pragma once

#include <vector>

#include "platcomp/domain.hpp"

namespace platcomp {

struct MarketParams {
    double alpha = 0.5;  // matching elasticity
    double gamma = 0.9;  // platform commission
    double cost = 0.1;   // manual production cost

    void validate() const;
};

struct RevenueThresholdScheme {
    double v_bar = 0.0;
    double w = 0.0;

    void validate() const;
};

//! Compensation that depends on content location only.
struct XBasedScheme {
    Grid grid;
    std::vector<double> values;
};

struct CreatorStrategy {
    Grid grid;
    std::vector<double> beta_h;
    std::vector<double> beta_ai;
    std::vector<double> beta_o;
};

//! Per-cell creator revenue (1-gamma)(p/q)^alpha.
std::vector<double> creator_revenue(const DensityField& q, const DensityField& p, const MarketParams& params);

//! Adds w wherever V reaches v_bar (ties included).
std::vector<double> compensated_revenue(const std::vector<double>& V, const RevenueThresholdScheme& scheme);

//! sum of V_comp * g * dx
double genai_expected_revenue(const std::vector<double>& v_comp, const DensityField& g);

//! q = (1-beta) p + g * integral(beta p)
DensityField content_distribution(const std::vector<double>& beta_ai, const DensityField& p, const DensityField& g);

double platform_revenue(const DensityField& q, const DensityField& p, const MarketParams& params);
double platform_profit(const DensityField& q, const DensityField& p, const std::vector<double>& w_field,
                       const MarketParams& params);

struct PreGenAIEquilibrium {
    CreatorStrategy strategy;
    DensityField q;  // beta_h * p, not normalized
    double beta_h = 1.0;
    double revenue = 0.0;
    double profit = 0.0;
};

//! Equilibrium without GenAI under a constant compensation W.
PreGenAIEquilibrium pregenai_equilibrium(const MarketParams& params, double w_const, const DensityField& p);

//! Profit of the pre-GenAI equilibrium under constant W (independent of p once p is normalized).
double pregenai_profit(const MarketParams& params, double w_const);

struct PreGenAIOptimum {
    double w_star = 0.0;
    double pi_star = 0.0;
    bool interior = true;  // false when the optimum sits where everyone already creates
};

PreGenAIOptimum pregenai_optimal(const MarketParams& params);

//! Posterior probability that the content at each cell came from GenAI.
std::vector<double> ai_posterior(const DensityField& q, const DensityField& g, const std::vector<double>& beta_ai,
                                 const DensityField& p);

//! integral of beta * p
double genai_mass(const std::vector<double>& beta_ai, const DensityField& p);

}  // namespace platcomp
