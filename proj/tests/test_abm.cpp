#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "platcomp/abm.hpp"

using namespace platcomp;

namespace {
double mean_of(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}
double var_of(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}
}  // namespace

TEST_CASE("mixture definition") {
    const auto spec = MixtureSpec::bimodal_default();
    CHECK(spec.mean() == doctest::Approx(0.4));
    // clipping leaves point masses at both ends
    CHECK(spec.cdf(-4.0 - 1e-9) == 0.0);
    CHECK(spec.cdf(-4.0) == doctest::Approx(0.4 * 0.5 * std::erfc(4.0 / std::sqrt(2.0))).epsilon(1e-9));
    CHECK(spec.cdf(4.0) == 1.0);
    CHECK(spec.cdf(0.0) == doctest::Approx(0.4).epsilon(1e-4));
    MixtureSpec bad = spec;
    bad.components[0].weight = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = spec;
    bad.components[1].scale = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("mixture sampling") {
    const auto spec = MixtureSpec::bimodal_default();
    const auto xs = sample_mixture(spec, 200000, std::uint64_t{7});
    CHECK(std::abs(mean_of(xs) - 0.4) < 0.02);
    for (double x : xs) {
        CHECK_FALSE(x < -4.0);
        CHECK_FALSE(x > 4.0);
    }
    CHECK(sample_mixture(spec, 100, std::uint64_t{3}) == sample_mixture(spec, 100, std::uint64_t{3}));
    MixtureSpec narrow{{{1.0, 0.0, 1.0}}, 0.5, 0.5};
    for (double x : sample_mixture(narrow, 50, std::uint64_t{1})) CHECK(x == 0.5);
}

TEST_CASE("kernel model of a point mass") {
    const GenerativeModel model(std::vector<double>(10, 0.0), 0.5, -4.0, 4.0);
    Rng rng(11);
    const auto xs = model.sample(100000, rng);
    CHECK(std::abs(mean_of(xs)) < 0.01);
    CHECK(std::sqrt(var_of(xs)) == doctest::Approx(0.5).epsilon(0.02));
    const auto d = model.density_on(build_grid(-4.0, 4.0, 80));
    CHECK(d.total_mass() == doctest::Approx(1.0));
    CHECK(d.values[40] > d.values[60]);
    CHECK_THROWS_AS(GenerativeModel({1.0}, 0.5, -4.0, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(GenerativeModel({1.0, 2.0}, 0.0, -4.0, 4.0), std::invalid_argument);
}

TEST_CASE("a fitted model differs from the human distribution") {
    const auto spec = MixtureSpec::bimodal_default();
    const auto train = sample_mixture(spec, 2650, std::uint64_t{5});
    const auto model = fit_generative(train, undertrained_generator(), spec.clip_lo, spec.clip_hi);
    Rng rng(9);
    const auto m = collapse_metrics(model.sample(50000, rng), spec);
    CHECK(m.tv_to_p > 0.05);
    CHECK(m.central_mass > 0.0228);
}

TEST_CASE("fitting with shrinkage contracts toward the center") {
    const auto spec = MixtureSpec::bimodal_default();
    const auto train = sample_mixture(spec, 5000, std::uint64_t{2});
    const auto model = fit_generative(train, 0.1, -4.0, 4.0, 0.8, 0.0);
    CHECK(var_of(model.points()) == doctest::Approx(0.64 * var_of(train)).epsilon(1e-9));
    CHECK_THROWS_AS(fit_generative(train, 0.1, -4.0, 4.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(fit_generative(train, 0.1, -4.0, 4.0, 1.5), std::invalid_argument);
}

TEST_CASE("retraining on own output shrinks the spread") {
    const auto spec = MixtureSpec::bimodal_default();
    std::vector<double> data = sample_mixture(spec, 5000, std::uint64_t{4});
    const double v0 = var_of(data);
    Rng rng(4);
    for (int t = 0; t < 5; ++t) {
        const auto model = fit_generative(data, retrained_generator(), spec.clip_lo, spec.clip_hi);
        data = model.sample(5000, rng);
    }
    CHECK(var_of(data) < v0);
}

TEST_CASE("silverman bandwidth") {
    const auto xs = sample_mixture(MixtureSpec{{{1.0, 0.0, 1.0}}, -10.0, 10.0}, 100000, std::uint64_t{8});
    CHECK(silverman_bandwidth(xs) == doctest::Approx(0.9 * std::pow(1e5, -0.2)).epsilon(0.02));
    CHECK_THROWS_AS(silverman_bandwidth({1.0}), std::invalid_argument);
}

TEST_CASE("bin engagement") {
    CHECK(bin_revenue(100, 25) == doctest::Approx(50.0));
    CHECK(bin_revenue(0, 25) == 0.0);
    CHECK(bin_revenue(25, 0) == 0.0);
    CHECK_THROWS_AS(bin_revenue(-1, 2), std::invalid_argument);
    CHECK(content_share(100, 25, MarketParams{0.5, 0.9, 0.1}) == doctest::Approx(0.2));
    CHECK(content_share(5, 0, MarketParams{0.5, 0.9, 0.1}) == 0.0);
}

TEST_CASE("configuration checks") {
    ABMConfig cfg;
    cfg.n_agents = 10;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = ABMConfig{};
    cfg.scheme.w = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("single period runs") {
    ABMConfig cfg;
    cfg.n_agents = 5000;
    const auto spec = MixtureSpec::bimodal_default();
    const auto a = run_single_period(cfg, spec, {});
    const auto b = run_single_period(cfg, spec, {});
    CHECK(a.R == b.R);
    CHECK(a.contents == b.contents);
    CHECK(a.contents.size() == 5000);
    CHECK(a.R >= a.Pi);
    CHECK(a.Pi <= cfg.params.gamma + 0.02);
    CHECK(a.manual_fraction > 0.0);
    CHECK(a.manual_fraction < 1.0);
    std::size_t total = 0;
    for (auto h : a.content_hist) total += h;
    CHECK(total == 5000);

    ABMConfig paid = cfg;
    paid.scheme = {0.105, 0.15};
    const auto c = run_single_period(paid, spec, {});
    CHECK(c.R > c.Pi);
    CHECK(c.manual_fraction > a.manual_fraction);
}

TEST_CASE("many empty bins do not break a period") {
    ABMConfig cfg;
    cfg.n_agents = 500;
    cfg.n_bins = 400;
    const auto rec = run_single_period(cfg, MixtureSpec::bimodal_default(), {});
    CHECK(std::isfinite(rec.R));
    CHECK(std::isfinite(rec.Pi));
}

TEST_CASE("a generator equal to demand leaves revenue near the commission") {
    ABMConfig cfg;
    cfg.n_agents = 100000;
    const auto spec = MixtureSpec::bimodal_default();
    Rng rng(21);
    const auto train = sample_mixture(spec, 100000, rng);
    const GenerativeModel model(train, 1e-6, spec.clip_lo, spec.clip_hi);
    const auto start = sample_mixture(spec, cfg.n_agents, rng);
    const auto rec = run_period(cfg, spec, model, start, rng);
    CHECK(std::abs(rec.R - cfg.params.gamma) <= 0.02);
}

TEST_CASE("collapse metrics") {
    const auto spec = MixtureSpec::bimodal_default();
    const auto zero = collapse_metrics(std::vector<double>(100, 0.0), spec);
    CHECK(zero.central_mass == 1.0);
    CHECK(zero.modal_mass == 0.0);
    CHECK(zero.std_dev == 0.0);
    const auto human = collapse_metrics(sample_mixture(spec, 400000, std::uint64_t{12}), spec);
    CHECK(human.central_mass == doctest::Approx(0.02275).epsilon(0.05));
    CHECK(human.modal_mass == doctest::Approx(0.9545).epsilon(0.01));
    CHECK(human.tv_to_p < 0.05);
    CHECK_THROWS_AS(collapse_metrics({}, spec), std::invalid_argument);
    const auto prob = mixture_bin_probabilities(spec, 100);
    CHECK(std::accumulate(prob.begin(), prob.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("multi-period drift away from demand") {
    ABMConfig cfg;
    cfg.n_agents = 10000;
    MultiPeriodOptions opts;
    opts.periods = 6;
    const auto spec = MixtureSpec::bimodal_default();
    const auto recs = run_multiperiod(cfg, spec, opts);
    REQUIRE(recs.size() == 6);
    const auto first = collapse_metrics(recs.front().contents, spec);
    const auto last = collapse_metrics(recs.back().contents, spec);
    CHECK(last.tv_to_p > first.tv_to_p);
    CHECK(last.central_mass > first.central_mass);
    MultiPeriodOptions bad = opts;
    bad.train_frac = 0.0;
    CHECK_THROWS_AS(run_multiperiod(cfg, spec, bad), std::invalid_argument);
}
