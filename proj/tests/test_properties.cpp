#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "platcomp/equilibrium.hpp"

using namespace platcomp;

namespace {

struct Instance {
    DensityField p, g;
    RatioDistribution rd;
    MarketParams params;
};

Instance random_instance(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> height(0.1, 2.0);
    std::uniform_int_distribution<int> cells(20, 200);
    std::uniform_real_distribution<double> alpha(0.2, 0.8), gamma(0.5, 0.95);
    const std::size_t n = static_cast<std::size_t>(cells(rng));
    const Grid grid = build_grid(0.0, 1.0, n);
    std::vector<double> pv(n), gv(n);
    for (std::size_t i = 0; i < n; ++i) {
        pv[i] = height(rng);
        gv[i] = height(rng);
    }
    Instance ins;
    ins.p = density_from_values(grid, pv);
    ins.g = density_from_values(grid, gv);
    ins.rd = RatioDistribution::from_densities(ins.p, ins.g);
    const double gam = gamma(rng);
    ins.params = MarketParams{alpha(rng), gam, (1.0 - gam) * std::uniform_real_distribution<double>(0.5, 2.0)(rng)};
    return ins;
}

constexpr int kInstances = 100;

}  // namespace

TEST_CASE("interior equilibria over random instances") {
    std::mt19937_64 rng(20240611);
    for (int k = 0; k < kInstances; ++k) {
        const Instance ins = random_instance(rng);
        const ProfitEvaluator ev(ins.rd, ins.params, &ins.p, &ins.g);
        const double lo = ev.lower(), hi = ev.upper();
        std::uniform_real_distribution<double> pick(lo + 1e-3 * (hi - lo), lo + 0.999 * (hi - lo));
        const double v = pick(rng);
        const EquilibriumSolution sol = build_equilibrium(v, ins.p, ins.g, ins.rd, ins.params);
        CAPTURE(k);
        CAPTURE(v);
        CHECK(std::abs(sol.q.total_mass() - 1.0) <= 1e-12);
        CHECK(verify_equilibrium(sol, ins.p, ins.g, ins.params).max() <= 1e-8);
        CHECK(sol.genai_mass > 0.0);
        double gap = 0.0;
        for (std::size_t i = 0; i < sol.q.size(); ++i) gap = std::max(gap, std::abs(sol.q.values[i] - ins.p.values[i]));
        CHECK(gap > 0.0);
        const auto post = ai_posterior(sol.q, ins.g, sol.beta_ai, ins.p);
        for (double x : post) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0 + 1e-12);
        }
        const double R = platform_revenue(sol.q, ins.p, ins.params);
        CHECK(R <= ins.params.gamma + 1e-12);
    }
}

TEST_CASE("revenue never rises with the threshold") {
    std::mt19937_64 rng(777);
    for (int k = 0; k < kInstances; ++k) {
        const Instance ins = random_instance(rng);
        const ProfitEvaluator ev(ins.rd, ins.params);
        const double lo = ev.lower(), hi = ev.upper();
        const auto curve = profit_curve(ev, lo + 1e-6 * (hi - lo), hi * (1.0 - 1e-9), 200);
        CAPTURE(k);
        for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].R <= curve[i - 1].R + 1e-10);
    }
}

TEST_CASE("threshold ratio and its left side are monotone") {
    std::mt19937_64 rng(99);
    for (int k = 0; k < kInstances; ++k) {
        const Instance ins = random_instance(rng);
        const double keep = 1.0 - ins.params.gamma;
        double prev_r = 0.0;
        for (int i = 1; i <= 50; ++i) {
            const double v = keep * (1.0 + 0.05 * i);
            const double r = solve_rbar(ins.rd, v, ins.params);
            CHECK(r >= prev_r);
            prev_r = r;
        }
        double prev_lhs = 0.0;
        const double r_lo = ins.rd.r_min() * 0.5, r_hi = ins.rd.r_max() * 1.5;
        for (int i = 0; i <= 400; ++i) {
            const double t = r_lo + (r_hi - r_lo) * i / 400.0;
            const double lhs = ins.rd.threshold_lhs(t);
            CHECK(lhs >= prev_lhs - 1e-12);
            // Lipschitz in t with constant sum p/r, so no jumps
            CHECK(std::abs(ins.rd.threshold_lhs(t + 1e-9) - lhs) <= 1e-9 / ins.rd.r_min() + 1e-12);
            prev_lhs = lhs;
        }
    }
}

TEST_CASE("pre-GenAI optimum beats a fine grid of constant compensation") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> alpha(0.1, 0.9), gamma(0.05, 0.95), cost(0.01, 1.0);
    for (int k = 0; k < 50; ++k) {
        const MarketParams params{alpha(rng), gamma(rng), cost(rng)};
        const PreGenAIOptimum opt = pregenai_optimal(params);
        double best = -1e300;
        const double top = std::max(params.cost, 1e-9);
        for (int i = 0; i <= 20000; ++i) best = std::max(best, pregenai_profit(params, top * i / 20000.0));
        CAPTURE(k);
        CHECK(opt.pi_star >= best - 1e-9);
        CHECK(opt.pi_star == doctest::Approx(pregenai_profit(params, opt.w_star)).epsilon(1e-12));
    }
}
