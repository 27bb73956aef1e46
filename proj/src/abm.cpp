#include "platcomp/abm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "platcomp/numeric.hpp"

namespace platcomp {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::size_t bin_of(double x, double lo, double hi, std::size_t n_bins) {
    const double pos = (x - lo) / (hi - lo) * static_cast<double>(n_bins);
    if (!(pos > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(pos), n_bins - 1);
}

std::vector<std::size_t> histogram(const std::vector<double>& xs, double lo, double hi, std::size_t n_bins) {
    std::vector<std::size_t> h(n_bins, 0);
    for (double x : xs) ++h[bin_of(x, lo, hi, n_bins)];
    return h;
}

}  // namespace

void MixtureSpec::validate() const {
    if (components.empty()) throw std::invalid_argument("mixture: no components");
    double total = 0.0;
    for (const auto& c : components) {
        if (!(c.weight >= 0.0)) throw std::invalid_argument("mixture: weights must be nonnegative");
        if (!(c.scale > 0.0) || !std::isfinite(c.mean)) throw std::invalid_argument("mixture: scale must be positive");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture: weights must sum to one");
    if (!(clip_hi >= clip_lo)) throw std::invalid_argument("mixture: clip_hi must be at least clip_lo");
}

MixtureSpec MixtureSpec::bimodal_default() { return MixtureSpec{{{0.4, -2.0, 0.5}, {0.6, 2.0, 0.5}}, -4.0, 4.0}; }

double MixtureSpec::cdf(double x) const {
    if (x < clip_lo) return 0.0;
    if (x >= clip_hi) return 1.0;
    double s = 0.0;
    for (const auto& c : components) s += c.weight * normal_cdf((x - c.mean) / c.scale);
    return s;
}

double MixtureSpec::mean() const {
    double s = 0.0;
    for (const auto& c : components) s += c.weight * c.mean;
    return s;
}

std::vector<double> sample_mixture(const MixtureSpec& spec, std::size_t n, Rng& rng) {
    spec.validate();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> out(n);
    for (double& x : out) {
        const double u = unif(rng);
        std::size_t k = 0;
        double acc = spec.components[0].weight;
        while (u >= acc && k + 1 < spec.components.size()) acc += spec.components[++k].weight;
        const auto& c = spec.components[k];
        x = std::clamp(c.mean + c.scale * normal(rng), spec.clip_lo, spec.clip_hi);
    }
    return out;
}

std::vector<double> sample_mixture(const MixtureSpec& spec, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return sample_mixture(spec, n, rng);
}

GenerativeModel::GenerativeModel(std::vector<double> points, double bandwidth, double clip_lo, double clip_hi)
    : points_(std::move(points)), bandwidth_(bandwidth), clip_lo_(clip_lo), clip_hi_(clip_hi) {
    if (points_.size() < 2) throw std::invalid_argument("generative model: need at least two training samples");
    if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) throw std::invalid_argument("generative model: bandwidth must be positive");
    if (!(clip_hi_ >= clip_lo_)) throw std::invalid_argument("generative model: bad clip range");
}

double GenerativeModel::sample(Rng& rng) const {
    std::uniform_int_distribution<std::size_t> pick(0, points_.size() - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double x = points_[pick(rng)];
    return std::clamp(x + bandwidth_ * normal(rng), clip_lo_, clip_hi_);
}

std::vector<double> GenerativeModel::sample(std::size_t n, Rng& rng) const {
    std::uniform_int_distribution<std::size_t> pick(0, points_.size() - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> out(n);
    for (double& x : out) {
        const double base = points_[pick(rng)];
        x = std::clamp(base + bandwidth_ * normal(rng), clip_lo_, clip_hi_);
    }
    return out;
}

DensityField GenerativeModel::density_on(const Grid& grid, double floor) const {
    const std::size_t n = grid.n_cells;
    std::vector<double> mass(n, 0.0);
    // clamped draws pile up at the clip points, so the cells holding them absorb the tails
    const std::size_t lo_cell = clip_lo_ >= grid.lo && clip_lo_ < grid.hi ? grid.locate(clip_lo_) : n;
    const std::size_t hi_cell = clip_hi_ > grid.lo && clip_hi_ <= grid.hi ? grid.locate(clip_hi_) : n;
    std::vector<double> edge_cdf(n + 1);
    for (double x : points_) {
        for (std::size_t i = 0; i <= n; ++i) edge_cdf[i] = normal_cdf((grid.cell_lo(i) - x) / bandwidth_);
        for (std::size_t i = 0; i < n; ++i) {
            const double left = i == lo_cell ? 0.0 : edge_cdf[i];
            const double right = i == hi_cell ? 1.0 : edge_cdf[i + 1];
            mass[i] += right - left;
        }
    }
    for (double& m : mass) m /= static_cast<double>(points_.size()) * grid.width();
    return density_from_values(grid, mass, floor);
}

GenerativeOptions undertrained_generator() {
    GenerativeOptions o;
    o.bandwidth_multiplier = 1.5;
    o.shrink = 0.7;
    return o;
}

GenerativeOptions retrained_generator() {
    GenerativeOptions o;
    o.bandwidth_multiplier = 0.5;
    o.shrink = 0.85;
    return o;
}

double silverman_bandwidth(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("silverman_bandwidth: need at least two samples");
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    std::vector<double> sorted(samples);
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(n - 1);
        const auto i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        return i + 1 < n ? sorted[i] + frac * (sorted[i + 1] - sorted[i]) : sorted[i];
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd > 0.0 ? sd : 1.0;
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

GenerativeModel fit_generative(const std::vector<double>& samples, double bandwidth, double clip_lo, double clip_hi,
                               double shrink, std::optional<double> center) {
    if (samples.size() < 2) throw std::invalid_argument("fit_generative: need at least two samples");
    if (!(shrink > 0.0 && shrink <= 1.0)) throw std::invalid_argument("fit_generative: shrink must lie in (0,1]");
    const double mid = center ? *center
                              : std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    std::vector<double> pts(samples.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double x = std::clamp(samples[i], clip_lo, clip_hi);
        pts[i] = mid + shrink * (x - mid);
    }
    return GenerativeModel(std::move(pts), bandwidth, clip_lo, clip_hi);
}

GenerativeModel fit_generative(const std::vector<double>& samples, const GenerativeOptions& opts, double clip_lo,
                               double clip_hi) {
    if (!(opts.bandwidth_multiplier > 0.0)) throw std::invalid_argument("fit_generative: bandwidth multiplier must be positive");
    const double h = opts.bandwidth ? *opts.bandwidth : silverman_bandwidth(samples) * opts.bandwidth_multiplier;
    return fit_generative(samples, h, clip_lo, clip_hi, opts.shrink, opts.center);
}

double bin_revenue(double n_consumers, double n_contents, double alpha) {
    if (n_consumers < 0.0 || n_contents < 0.0) throw std::invalid_argument("bin_revenue: negative count");
    if (n_consumers == 0.0 || n_contents == 0.0) return 0.0;
    return std::pow(n_consumers, alpha) * std::pow(n_contents, 1.0 - alpha);
}

double content_share(double n_consumers, double n_contents, const MarketParams& params) {
    if (!(n_contents > 0.0)) return 0.0;
    return (1.0 - params.gamma) * std::pow(n_consumers / n_contents, params.alpha);
}

void ABMConfig::validate() const {
    params.validate();
    scheme.validate();
    if (n_bins < 1) throw std::invalid_argument("abm: n_bins must be positive");
    if (n_agents < n_bins) throw std::invalid_argument("abm: n_agents must be at least n_bins");
    if (max_rounds < 1) throw std::invalid_argument("abm: max_rounds must be positive");
    if (!(convergence_tv > 0.0)) throw std::invalid_argument("abm: convergence_tv must be positive");
}

PeriodRecord run_period(const ABMConfig& cfg, const MixtureSpec& spec, const GenerativeModel& model,
                        const std::vector<double>& initial_contents, Rng& rng) {
    cfg.validate();
    spec.validate();
    if (initial_contents.empty()) throw std::invalid_argument("run_period: no initial contents");
    const std::size_t N = cfg.n_agents, B = cfg.n_bins;
    const double lo = spec.clip_lo, hi = spec.clip_hi;
    if (!(hi > lo)) throw std::invalid_argument("run_period: degenerate preference range");
    const double keep = 1.0 - cfg.params.gamma, a = cfg.params.alpha, c = cfg.params.cost;
    const double v_bar = cfg.scheme.v_bar, w = cfg.scheme.w;

    PeriodRecord rec;
    rec.consumers = sample_mixture(spec, N, rng);
    rec.consumer_hist = histogram(rec.consumers, lo, hi, B);
    std::vector<double> nc(B);
    for (std::size_t b = 0; b < B; ++b) nc[b] = static_cast<double>(rec.consumer_hist[b]);

    // the population always holds N contents; shorter or longer starts are resampled cyclically
    rec.contents.resize(N);
    for (std::size_t i = 0; i < N; ++i) rec.contents[i] = initial_contents[i % initial_contents.size()];
    rec.manual.assign(N, 1);
    std::vector<std::size_t> cell(N);
    std::vector<long> hist(B, 0);
    for (std::size_t i = 0; i < N; ++i) {
        cell[i] = bin_of(rec.contents[i], lo, hi, B);
        ++hist[cell[i]];
    }

    // prospective-entry belief about raw revenue in bin b
    auto raw_of = [&](std::size_t b) { return keep * std::pow(nc[b] / (static_cast<double>(hist[b]) + 1.0), a); };
    auto genai_value = [&](double raw) { return cfg.pay_genai_content && raw >= v_bar ? raw + w : raw; };

    std::vector<double> raw(B), gen_prob(B), prev(B);
    std::vector<double> creators, generated, probe;
    std::size_t manual_count = 0;
    double e_ai = 0.0;
    for (std::size_t round = 0; round < cfg.max_rounds; ++round) {
        probe = model.sample(N, rng);
        std::fill(gen_prob.begin(), gen_prob.end(), 0.0);
        for (double x : probe) gen_prob[bin_of(x, lo, hi, B)] += 1.0 / static_cast<double>(N);
        creators = sample_mixture(spec, N, rng);
        generated = model.sample(N, rng);
        for (std::size_t b = 0; b < B; ++b) prev[b] = static_cast<double>(hist[b]);

        CompensatedSum acc;
        for (std::size_t b = 0; b < B; ++b) {
            raw[b] = raw_of(b);
            acc += gen_prob[b] * genai_value(raw[b]);
        }
        e_ai = acc.value();
        auto refresh = [&](std::size_t b) {
            const double nv = raw_of(b);
            e_ai += gen_prob[b] * (genai_value(nv) - genai_value(raw[b]));
            raw[b] = nv;
        };

        manual_count = 0;
        for (std::size_t i = 0; i < N; ++i) {
            --hist[cell[i]];
            refresh(cell[i]);
            const std::size_t home = bin_of(creators[i], lo, hi, B);
            const double belief = raw[home] + (raw[home] >= v_bar ? w : 0.0) - c;
            if (belief > e_ai) {
                rec.contents[i] = creators[i];
                rec.manual[i] = 1;
                ++manual_count;
            } else {
                rec.contents[i] = generated[i];
                rec.manual[i] = 0;
            }
            cell[i] = bin_of(rec.contents[i], lo, hi, B);
            ++hist[cell[i]];
            refresh(cell[i]);
        }
        rec.rounds_used = round + 1;

        double tv = 0.0, noise = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            tv += std::abs(static_cast<double>(hist[b]) - prev[b]);
            noise += std::sqrt(static_cast<double>(hist[b]) / std::numbers::pi);
        }
        tv *= 0.5 / static_cast<double>(N);
        noise /= static_cast<double>(N);
        if (tv <= cfg.convergence_tv + (cfg.noise_floor ? noise : 0.0)) {
            rec.converged = true;
            break;
        }
    }

    rec.content_hist.assign(B, 0);
    std::vector<double> paid_count(B, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        ++rec.content_hist[cell[i]];
        if (rec.manual[i] || cfg.pay_genai_content) paid_count[cell[i]] += 1.0;
    }
    CompensatedSum revenue, paid;
    for (std::size_t b = 0; b < B; ++b) {
        const double nk = static_cast<double>(rec.content_hist[b]);
        revenue += bin_revenue(nc[b], nk, a);
        if (nk > 0.0 && content_share(nc[b], nk, cfg.params) >= v_bar) paid += w * paid_count[b];
    }
    rec.R = cfg.params.gamma * revenue.value() / static_cast<double>(N);
    rec.Pi = rec.R - paid.value() / static_cast<double>(N);
    rec.manual_fraction = static_cast<double>(manual_count) / static_cast<double>(N);
    rec.genai_expected_revenue = e_ai;
    return rec;
}

PeriodRecord run_single_period(const ABMConfig& cfg, const MixtureSpec& spec, const SinglePeriodOptions& opts) {
    cfg.validate();
    if (opts.n_train < 2) throw std::invalid_argument("run_single_period: need at least two training samples");
    Rng rng(cfg.seed);
    const std::vector<double> training = sample_mixture(spec, opts.n_train, rng);
    const GenerativeModel model = fit_generative(training, opts.generative, spec.clip_lo, spec.clip_hi);
    const std::vector<double> start = sample_mixture(spec, cfg.n_agents, rng);
    return run_period(cfg, spec, model, start, rng);
}

std::vector<PeriodRecord> run_multiperiod(const ABMConfig& cfg, const MixtureSpec& spec, const MultiPeriodOptions& opts) {
    cfg.validate();
    spec.validate();
    if (opts.periods < 1) throw std::invalid_argument("run_multiperiod: need at least one period");
    if (!(opts.train_frac > 0.0 && opts.train_frac <= 1.0)) throw std::invalid_argument("run_multiperiod: train_frac must lie in (0,1]");
    const std::size_t n_train =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(opts.train_frac * static_cast<double>(cfg.n_agents))));

    Rng rng(cfg.seed);
    std::vector<double> training = sample_mixture(spec, n_train, rng);
    std::vector<PeriodRecord> out;
    out.reserve(opts.periods);
    for (std::size_t t = 0; t < opts.periods; ++t) {
        const GenerativeModel model = fit_generative(training, opts.generative, spec.clip_lo, spec.clip_hi);
        const std::vector<double> start = sample_mixture(spec, cfg.n_agents, rng);
        out.push_back(run_period(cfg, spec, model, start, rng));
        const auto& contents = out.back().contents;
        training.assign(contents.begin(), contents.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, contents.size())));
    }
    return out;
}

std::vector<double> mixture_bin_probabilities(const MixtureSpec& spec, std::size_t n_bins) {
    spec.validate();
    if (n_bins < 1) throw std::invalid_argument("mixture_bin_probabilities: need at least one bin");
    std::vector<double> prob(n_bins);
    const double width = (spec.clip_hi - spec.clip_lo) / static_cast<double>(n_bins);
    double prev = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
        const double next = b + 1 == n_bins ? 1.0 : spec.cdf(spec.clip_lo + width * static_cast<double>(b + 1));
        prob[b] = next - prev;
        prev = next;
    }
    return prob;
}

CollapseMetrics collapse_metrics(const std::vector<double>& contents, const MixtureSpec& spec, std::size_t n_bins) {
    if (contents.empty()) throw std::invalid_argument("collapse_metrics: no contents");
    spec.validate();
    const double n = static_cast<double>(contents.size());
    CollapseMetrics m;
    double sum = 0.0;
    for (double x : contents) {
        sum += x;
        if (std::abs(x) < 1.0) m.central_mass += 1.0;
        bool near_mode = false;
        for (const auto& c : spec.components) near_mode = near_mode || std::abs(x - c.mean) < 1.0;
        if (near_mode) m.modal_mass += 1.0;
    }
    m.central_mass /= n;
    m.modal_mass /= n;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : contents) ss += (x - mean) * (x - mean);
    m.std_dev = contents.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    const auto hist = histogram(contents, spec.clip_lo, spec.clip_hi, n_bins);
    const auto prob = mixture_bin_probabilities(spec, n_bins);
    double tv = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) tv += std::abs(static_cast<double>(hist[b]) / n - prob[b]);
    m.tv_to_p = 0.5 * tv;
    return m;
}

}  // namespace platcomp
