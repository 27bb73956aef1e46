#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "platcomp/domain.hpp"
#include "platcomp/market.hpp"

namespace platcomp {

enum class Region { AI, IN };

enum class Classification { Interior, PureAI, NoCompensationEquivalent, Reducible, Nonexistent, Undecided };

std::string to_string(Classification c);
std::string to_string(Region r);

struct RbarSolution {
    double r_bar = 0.0;
    std::size_t split = 0;  // entries [0, split) are strictly below r_bar
};

struct InteriorQuantities {
    double r_bar = 0.0;
    double M_g = 0.0;
    double M_p = 0.0;
    double V_tilde = 0.0;
    double w_implied = 0.0;
    // supporting values
    double kappa = 0.0;  // ((1-gamma)/v_bar)^(1/alpha)
    double p_in = 0.0;   // p-mass of the indifferent side
    double g_ai = 0.0;   // g-mass of the strict-GenAI side
    std::size_t split = 0;
};

RbarSolution solve_rbar_split(const RatioDistribution& rd, double v_bar, const MarketParams& params);
double solve_rbar(const RatioDistribution& rd, double v_bar, const MarketParams& params);

//! Throws when the strict-GenAI side is empty or the indifferent mass reaches one.
InteriorQuantities interior_quantities(const RatioDistribution& rd, double v_bar, const MarketParams& params);

//! (1-gamma) sup r^alpha
double top_revenue(const RatioDistribution& rd, const MarketParams& params);
//! (1-gamma) E_g r^alpha + c
double genai_outside_option(const RatioDistribution& rd, const MarketParams& params);

//! Indifference level without compensation, if one exists.
std::optional<double> solve_v0(const RatioDistribution& rd, const MarketParams& params);

double discontinuity_gap(const RatioDistribution& rd, const MarketParams& params);

struct EquilibriumSolution {
    RevenueThresholdScheme scheme;
    std::vector<double> beta_ai;
    DensityField q;
    std::vector<Region> region;
    std::optional<InteriorQuantities> quantities;
    Classification classification = Classification::Interior;
    double genai_mass = 0.0;
    double level = 0.0;  // indifference revenue of the constructed equilibrium
    std::optional<RevenueThresholdScheme> reduced;
    bool boundary_tie = false;
    bool assumed_large_w = false;
    std::string note;
};

EquilibriumSolution build_equilibrium(double v_bar, const DensityField& p, const DensityField& g,
                                      const RatioDistribution& rd, const MarketParams& params);

EquilibriumSolution pure_ai_solution(const DensityField& p, const DensityField& g, const RevenueThresholdScheme& scheme);

struct ClassifyOptions {
    bool assume_large_w = false;
    double w_tol = 1e-6;
};

EquilibriumSolution classify_scheme(const RevenueThresholdScheme& scheme, const DensityField& p, const DensityField& g,
                                    const RatioDistribution& rd, const MarketParams& params,
                                    const ClassifyOptions& opts = {});

struct ResidualReport {
    double consistency = 0.0;    // max |q - q(beta)|
    double incentive = 0.0;      // best-response violation
    double normalization = 0.0;  // |integral q - 1|
    double beta_range = 0.0;     // distance of beta outside [0,1]
    double max() const;
};

//! Checks an equilibrium against its own revenue-threshold scheme, or against w_field when given.
ResidualReport verify_equilibrium(const EquilibriumSolution& sol, const DensityField& p, const DensityField& g,
                                  const MarketParams& params, const std::vector<double>* w_field = nullptr);

XBasedScheme xbased_equivalent(const EquilibriumSolution& sol, const DensityField& p, const MarketParams& params);

// ---- profit along the threshold ------------------------------------------------------------

struct ProfitPoint {
    double v_bar = 0.0;
    double w = 0.0;
    double R = 0.0;
    double Pi = 0.0;
    Classification classification = Classification::Interior;
    double pi_formula = 0.0;
    double pi_definitional = 0.0;
    double pi_identity = 0.0;
    double route_gap = 0.0;  // largest pairwise disagreement, relative to max(1,|Pi|)
    bool has_definitional = false;
    std::optional<InteriorQuantities> quantities;
};

//! Evaluates revenue and profit of the equilibrium induced by a threshold, caching v0 and the bounds.
class ProfitEvaluator {
public:
    ProfitEvaluator(const RatioDistribution& rd, const MarketParams& params, const DensityField* p = nullptr,
                    const DensityField* g = nullptr);

    ProfitPoint at(double v_bar) const;
    //! Outcome without any compensation (pure GenAI or the v0 equilibrium).
    ProfitPoint no_compensation() const;
    double lower() const;  // 1 - gamma
    //! v0 when it exists, else the top revenue.
    double upper() const;
    const std::optional<double>& v0() const { return v0_; }
    double sup_term() const { return sup_term_; }

private:
    ProfitPoint pure_ai_point(double v_bar) const;
    const RatioDistribution& rd_;
    MarketParams params_;
    const DensityField* p_;
    const DensityField* g_;
    std::optional<double> v0_;
    double sup_term_ = 0.0;
};

ProfitPoint profit_at(double v_bar, const RatioDistribution& rd, const MarketParams& params,
                      const DensityField* p = nullptr, const DensityField* g = nullptr);

std::vector<ProfitPoint> profit_curve(const ProfitEvaluator& ev, double v_lo, double v_hi, std::size_t n_points);

struct Optimum {
    double v_star = 0.0;
    double w_star = 0.0;
    double R_star = 0.0;
    double Pi_star = 0.0;
    bool no_compensation = false;
    ProfitPoint best;
    ProfitPoint baseline;  // the no-compensation outcome
};

Optimum optimize_vstar(const ProfitEvaluator& ev, std::size_t grid_points = 512);

// ---- fixed-point iteration for location-based compensation ---------------------------------

struct FixedPointOptions {
    std::vector<double> delta_schedule{1e-2, 1e-3, 1e-4, 0.0};
    double damping = 0.5;
    double tol = 1e-10;
    std::size_t max_iterations = 20000;  // total across all stages
    std::size_t stage_iterations = 5000; // cap for each non-final stage
};

struct FixedPointResult {
    EquilibriumSolution solution;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> w_field;  // compensation at the final iterate
};

FixedPointResult solve_xbased(const XBasedScheme& W, const DensityField& p, const DensityField& g,
                              const MarketParams& params, const FixedPointOptions& opts = {});

//! Same iteration, with compensation w*1[V >= v_bar] re-evaluated on every iterate.
FixedPointResult solve_threshold_iteration(const RevenueThresholdScheme& scheme, const DensityField& p,
                                           const DensityField& g, const MarketParams& params,
                                           const FixedPointOptions& opts = {});

}  // namespace platcomp
