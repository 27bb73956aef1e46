#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "platcomp/domain.hpp"
#include "platcomp/market.hpp"

namespace platcomp {

using Rng = std::mt19937_64;

struct MixtureComponent {
    double weight = 1.0;
    double mean = 0.0;
    double scale = 1.0;  // standard deviation
};

struct MixtureSpec {
    std::vector<MixtureComponent> components;
    double clip_lo = -4.0;
    double clip_hi = 4.0;

    void validate() const;
    //! 0.4 N(-2, 0.5) + 0.6 N(2, 0.5) clipped to [-4, 4].
    static MixtureSpec bimodal_default();
    //! Distribution function of the clipped mixture.
    double cdf(double x) const;
    double mean() const;
};

std::vector<double> sample_mixture(const MixtureSpec& spec, std::size_t n, Rng& rng);
std::vector<double> sample_mixture(const MixtureSpec& spec, std::size_t n, std::uint64_t seed);

//! Kernel-smoothed resampler with optional contraction toward a center.
class GenerativeModel {
public:
    GenerativeModel(std::vector<double> points, double bandwidth, double clip_lo, double clip_hi);

    const std::vector<double>& points() const { return points_; }
    double bandwidth() const { return bandwidth_; }
    double clip_lo() const { return clip_lo_; }
    double clip_hi() const { return clip_hi_; }

    double sample(Rng& rng) const;
    std::vector<double> sample(std::size_t n, Rng& rng) const;
    //! Per-cell density of the clipped sampler on grid (floored and normalized).
    DensityField density_on(const Grid& grid, double floor = kDefaultFloor) const;

private:
    std::vector<double> points_;
    double bandwidth_;
    double clip_lo_;
    double clip_hi_;
};

struct GenerativeOptions {
    double bandwidth_multiplier = 1.0;   // applied to the Silverman bandwidth
    std::optional<double> bandwidth;     // overrides the rule when set
    double shrink = 1.0;                 // 1 keeps the training spread
    std::optional<double> center;        // contraction center, training mean when unset
};

//! Generator for a model fitted on a small human sample (2650 draws).
GenerativeOptions undertrained_generator();
//! Generator refitted each period on that period's contents.
GenerativeOptions retrained_generator();

//! Silverman's rule 0.9 min(sd, IQR/1.34) n^(-1/5).
double silverman_bandwidth(const std::vector<double>& samples);

GenerativeModel fit_generative(const std::vector<double>& samples, double bandwidth, double clip_lo, double clip_hi,
                               double shrink = 1.0, std::optional<double> center = std::nullopt);
GenerativeModel fit_generative(const std::vector<double>& samples, const GenerativeOptions& opts, double clip_lo,
                               double clip_hi);

//! Cobb-Douglas engagement of one bin.
double bin_revenue(double n_consumers, double n_contents, double alpha = 0.5);
//! Creator share of one content's engagement, (1-gamma)(n_c/n_k)^alpha; zero when the bin is empty.
double content_share(double n_consumers, double n_contents, const MarketParams& params);

struct ABMConfig {
    std::size_t n_agents = 26500;
    std::size_t n_bins = 100;
    MarketParams params{0.5, 0.9, 0.1};
    RevenueThresholdScheme scheme{0.110, 0.0};
    std::uint64_t seed = 1;
    std::size_t max_rounds = 50;
    double convergence_tv = 0.01;
    //! Add the multinomial noise level of the histogram to the stopping tolerance.
    bool noise_floor = true;
    //! Also pay GenAI content that clears the threshold.
    bool pay_genai_content = false;

    void validate() const;
};

struct PeriodRecord {
    std::vector<double> consumers;
    std::vector<double> contents;
    std::vector<std::uint8_t> manual;  // 1 where the content was created manually
    std::vector<std::size_t> consumer_hist;
    std::vector<std::size_t> content_hist;
    double manual_fraction = 0.0;
    double genai_expected_revenue = 0.0;
    double R = 0.0;
    double Pi = 0.0;
    std::size_t rounds_used = 0;
    bool converged = false;
};

//! One period of creator entry, iterated until the content histogram settles.
PeriodRecord run_period(const ABMConfig& cfg, const MixtureSpec& spec, const GenerativeModel& model,
                        const std::vector<double>& initial_contents, Rng& rng);

struct SinglePeriodOptions {
    std::size_t n_train = 2650;
    GenerativeOptions generative = undertrained_generator();
};

//! Fits a model on n_train human samples and runs one period from a fresh human population.
PeriodRecord run_single_period(const ABMConfig& cfg, const MixtureSpec& spec, const SinglePeriodOptions& opts);

struct MultiPeriodOptions {
    std::size_t periods = 10;
    double train_frac = 1.0;  // share of N used to fit each model
    GenerativeOptions generative = retrained_generator();
};

//! Period t+1 uses a model fitted on the contents of period t; the first model sees human samples.
std::vector<PeriodRecord> run_multiperiod(const ABMConfig& cfg, const MixtureSpec& spec,
                                          const MultiPeriodOptions& opts);

struct CollapseMetrics {
    double central_mass = 0.0;  // share with |x| < 1
    double modal_mass = 0.0;    // share within 1 of a component mean
    double std_dev = 0.0;
    double tv_to_p = 0.0;       // on n_bins equal bins over the clip range
};

CollapseMetrics collapse_metrics(const std::vector<double>& contents, const MixtureSpec& spec, std::size_t n_bins = 100);

//! Bin probabilities of the clipped mixture on n_bins equal bins.
std::vector<double> mixture_bin_probabilities(const MixtureSpec& spec, std::size_t n_bins);

}  // namespace platcomp
