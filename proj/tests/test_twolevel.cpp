#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "platcomp/twolevel.hpp"

using namespace platcomp;

TEST_CASE("configuration") {
    const auto cfg = TwoLevelConfig::make(0.2, 0.85);
    CHECK(cfg.g_high() == doctest::Approx(1.8));
    CHECK(cfg.params.cost == doctest::Approx(0.15));
    CHECK(TwoLevelConfig::make(0.2, 0.85, 0.3).params.cost == 0.3);
    CHECK_THROWS_AS(TwoLevelConfig::make(-0.1, 0.85), std::invalid_argument);
    CHECK_THROWS_AS(TwoLevelConfig::make(1.2, 0.85), std::invalid_argument);
    CHECK_THROWS_AS(twolevel_densities(cfg, 7), std::invalid_argument);
}

TEST_CASE("closed forms agree with the exact atoms and with a grid") {
    for (double g_low : {0.15, 0.2, 0.3, 0.45}) {
        const auto cfg = TwoLevelConfig::make(g_low, 0.85);
        const auto atoms = twolevel_ratio(cfg);
        const auto d = twolevel_densities(cfg, 2000);
        const auto grid_rd = RatioDistribution::from_densities(d.first, d.second);
        const double vmax = twolevel_vmax(cfg);
        for (double frac : {0.1, 0.4, 0.8, 0.99}) {
            const double v = 0.15 + frac * (vmax - 0.15);
            const InteriorQuantities cf = twolevel_quantities(cfg, v);
            const InteriorQuantities ex = interior_quantities(atoms, v, cfg.params);
            const InteriorQuantities gr = interior_quantities(grid_rd, v, cfg.params);
            CHECK(cf.r_bar == doctest::Approx(ex.r_bar).epsilon(1e-10));
            CHECK(cf.V_tilde == doctest::Approx(ex.V_tilde).epsilon(1e-10));
            CHECK(cf.w_implied == doctest::Approx(ex.w_implied).epsilon(1e-10));
            CHECK(std::abs(cf.w_implied - gr.w_implied) <= 1e-4);
            CHECK(twolevel_rbar(cfg, v) == doctest::Approx(cf.r_bar).epsilon(1e-12));
            if (cf.w_implied >= 0.0) {
                const auto tp = twolevel_profit(cfg, v);
                const auto pp = profit_at(v, atoms, cfg.params);
                CHECK(tp.R == doctest::Approx(pp.R).epsilon(1e-10));
                CHECK(tp.Pi == doctest::Approx(pp.Pi).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("reference values at g_low = 0.2") {
    const auto cfg = TwoLevelConfig::make(0.2, 0.85);
    const auto iq = twolevel_quantities(cfg, 0.16);
    CHECK(iq.r_bar == doctest::Approx(0.708641975308642).epsilon(1e-12));
    CHECK(iq.w_implied == doctest::Approx(0.148334187330896).epsilon(1e-12));
    const auto tp = twolevel_profit(cfg, 0.16);
    CHECK(tp.R == doctest::Approx(0.848434787318213).epsilon(1e-12));
    CHECK(tp.Pi == doctest::Approx(0.783248865151315).epsilon(1e-12));
    CHECK(twolevel_vmax(cfg) == doctest::Approx(0.15 / std::sqrt(0.2)).epsilon(1e-14));
}

TEST_CASE("limits of the threshold") {
    const auto cfg = TwoLevelConfig::make(0.2, 0.85);
    CHECK(twolevel_rbar(cfg, 0.15 + 1e-12) == doctest::Approx(1.0 / 1.8).epsilon(1e-9));
    CHECK_THROWS_AS(twolevel_rbar(cfg, 0.15), std::invalid_argument);
    CHECK_THROWS_AS(twolevel_quantities(cfg, 0.149), std::invalid_argument);
    CHECK_THROWS_AS(twolevel_quantities(cfg, twolevel_vmax(cfg) * 1.01), std::invalid_argument);
}

TEST_CASE("zero-compensation level") {
    const auto cfg = TwoLevelConfig::make(0.2, 0.85);
    const double v0 = twolevel_v0(cfg);
    CHECK(v0 == doctest::Approx(0.281192532543895).epsilon(1e-12));
    CHECK(std::abs(twolevel_v0_residual(cfg, v0)) <= 1e-12);
    CHECK(std::abs(twolevel_quantities(cfg, v0).w_implied) <= 1e-12);
    CHECK_THROWS_AS(twolevel_v0(TwoLevelConfig::make(0.4, 0.85)), std::invalid_argument);
}

TEST_CASE("pure GenAI threshold on g_low") {
    const MarketParams params{0.5, 0.85, 0.15};
    const double gs = twolevel_gstar(params);
    CHECK(gs == doctest::Approx(0.271836798667617).epsilon(1e-12));
    CHECK(std::abs(twolevel_gstar_residual(params, gs)) <= 1e-12);
    CHECK(twolevel_gstar_residual(params, 0.2) * twolevel_gstar_residual(params, 0.4) < 0.0);
    // below g* a zero-compensation level exists, above it does not
    CHECK_NOTHROW(twolevel_v0(TwoLevelConfig::make(gs - 0.01, 0.85)));
    CHECK_THROWS(twolevel_v0(TwoLevelConfig::make(gs + 0.01, 0.85)));
}

TEST_CASE("smallest effective compensation") {
    CHECK(twolevel_wmin(TwoLevelConfig::make(0.3, 0.85)) == doctest::Approx(0.0176540578098166).epsilon(1e-10));
    CHECK(twolevel_wmin(TwoLevelConfig::make(0.4, 0.85)) == doctest::Approx(0.0689145877436858).epsilon(1e-10));
    CHECK(twolevel_wmin(TwoLevelConfig::make(0.35, 0.85)) > twolevel_wmin(TwoLevelConfig::make(0.3, 0.85)));
}

TEST_CASE("revenue falls and compensation falls along the threshold") {
    const auto cfg = TwoLevelConfig::make(0.2, 0.85);
    const double v0 = twolevel_v0(cfg);
    double prev_r = 2.0, prev_w = 2.0;
    for (int i = 1; i < 100; ++i) {
        const double v = 0.15 + (v0 - 0.15) * i / 100.0;
        const auto tp = twolevel_profit(cfg, v);
        const auto iq = twolevel_quantities(cfg, v);
        CHECK(tp.R <= prev_r + 1e-12);
        CHECK(iq.w_implied <= prev_w + 1e-12);
        CHECK(tp.Pi <= tp.R);
        prev_r = tp.R;
        prev_w = iq.w_implied;
    }
}
