#include "platcomp/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "platcomp/numeric.hpp"

namespace platcomp {

std::size_t Grid::locate(double x) const {
    double pos = (x - lo) / width();
    if (!(pos > 0.0)) return 0;
    auto i = static_cast<std::size_t>(pos);
    return std::min(i, n_cells - 1);
}

bool Grid::same_as(const Grid& other) const {
    return n_cells == other.n_cells && lo == other.lo && hi == other.hi;
}

Grid build_grid(double lo, double hi, std::size_t n_cells) {
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("build_grid: bounds must be finite");
    if (!(hi > lo)) throw std::invalid_argument("build_grid: require hi > lo");
    if (n_cells < 2) throw std::invalid_argument("build_grid: n_cells must be at least 2");
    return Grid{lo, hi, n_cells};
}

double DensityField::total_mass() const {
    CompensatedSum s;
    for (double v : values) s += v;
    return s.value() * grid.width();
}

DensityField density_from_values(const Grid& grid, const std::vector<double>& raw, double floor) {
    if (!(floor > 0.0) || !std::isfinite(floor))
        throw std::invalid_argument("density_from_values: floor must be positive");
    if (raw.size() != grid.n_cells)
        throw std::invalid_argument("density_from_values: length does not match grid");
    bool any_positive = false;
    for (double v : raw) {
        if (!std::isfinite(v)) throw std::invalid_argument("density_from_values: non-finite entry");
        if (v > 0.0) any_positive = true;
    }
    if (!any_positive) throw std::invalid_argument("density_from_values: input is identically zero");

    DensityField d;
    d.grid = grid;
    d.floor = floor;
    d.values.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) d.values[i] = std::max(raw[i], floor);
    double scale = 1.0 / d.total_mass();
    for (double& v : d.values) v *= scale;
    // one corrective pass so the sum matches to the last few ulps
    double resid = d.total_mass();
    if (resid != 1.0) {
        for (double& v : d.values) v /= resid;
    }
    d.normalized = true;
    return d;
}

DensityField density_exact(const Grid& grid, std::vector<double> values, bool normalized) {
    if (values.size() != grid.n_cells)
        throw std::invalid_argument("density_exact: length does not match grid");
    for (double v : values)
        if (!std::isfinite(v) || !(v > 0.0))
            throw std::invalid_argument("density_exact: heights must be positive and finite");
    DensityField d;
    d.grid = grid;
    d.values = std::move(values);
    d.floor = *std::min_element(d.values.begin(), d.values.end());
    d.normalized = normalized;
    return d;
}

double round_sig12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.11e", x);
    return std::strtod(buf, nullptr);
}

RatioDistribution RatioDistribution::from_densities(const DensityField& p, const DensityField& g) {
    if (!p.grid.same_as(g.grid))
        throw std::invalid_argument("ratio_distribution: p and g live on different grids");
    const std::size_t n = p.size();
    RatioDistribution rd;
    rd.cell_ratio_.resize(n);
    std::vector<double> key(n);
    for (std::size_t i = 0; i < n; ++i) {
        rd.cell_ratio_[i] = p.values[i] / g.values[i];
        key[i] = round_sig12(rd.cell_ratio_[i]);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

    const double dx = p.grid.width();
    rd.cell_entry_.assign(n, 0);
    std::size_t k = 0;
    while (k < n) {
        std::size_t j = k;
        RatioEntry e;
        // accumulate in index order within the group so the result does not depend on input order
        std::vector<std::size_t> group;
        while (j < n && key[order[j]] == key[order[k]]) group.push_back(order[j++]);
        std::sort(group.begin(), group.end());
        CompensatedSum ps, gs;
        for (std::size_t c : group) {
            ps += p.values[c];
            gs += g.values[c];
            rd.cell_entry_[c] = rd.entries_.size();
        }
        e.p_mass = ps.value() * dx;
        e.g_mass = gs.value() * dx;
        e.r_value = e.p_mass / e.g_mass;
        e.n_cells = group.size();
        rd.entries_.push_back(e);
        k = j;
    }
    return rd;
}

RatioDistribution RatioDistribution::from_atoms(const std::vector<std::pair<double, double>>& atoms) {
    if (atoms.empty()) throw std::invalid_argument("from_atoms: no atoms given");
    RatioDistribution rd;
    for (const auto& [r, pm] : atoms) {
        if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("from_atoms: ratio must be positive");
        if (!(pm > 0.0)) throw std::invalid_argument("from_atoms: p-mass must be positive");
        rd.entries_.push_back(RatioEntry{r, pm, pm / r, 0});
    }
    std::sort(rd.entries_.begin(), rd.entries_.end(),
              [](const RatioEntry& a, const RatioEntry& b) { return a.r_value < b.r_value; });
    // merge exact duplicates
    std::vector<RatioEntry> merged;
    for (const auto& e : rd.entries_) {
        if (!merged.empty() && round_sig12(merged.back().r_value) == round_sig12(e.r_value)) {
            merged.back().p_mass += e.p_mass;
            merged.back().g_mass += e.g_mass;
        } else {
            merged.push_back(e);
        }
    }
    rd.entries_ = std::move(merged);
    double sp = 0.0, sg = 0.0;
    for (const auto& e : rd.entries_) {
        sp += e.p_mass;
        sg += e.g_mass;
    }
    if (std::abs(sp - 1.0) > 1e-12 || std::abs(sg - 1.0) > 1e-12)
        throw std::invalid_argument("from_atoms: p and g masses must each sum to one");
    return rd;
}

double RatioDistribution::g_moment(double a) const {
    CompensatedSum s;
    for (const auto& e : entries_) s += std::pow(e.r_value, a) * e.g_mass;
    return s.value();
}

bool RatioDistribution::top_is_atom() const {
    const auto& e = entries_.back();
    return e.n_cells == 0 || e.n_cells >= 2;
}

double RatioDistribution::threshold_lhs(double t) const {
    CompensatedSum s;
    for (const auto& e : entries_) s += e.p_mass * std::max(t / e.r_value, 1.0);
    return s.value();
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Grid grid_from_centers(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("density csv: need at least two rows");
    const double dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    if (!(dx > 0.0)) throw std::invalid_argument("density csv: centers must increase");
    for (std::size_t i = 1; i < xs.size(); ++i) {
        double step = xs[i] - xs[i - 1];
        if (std::abs(step - dx) > 1e-6 * dx)
            throw std::invalid_argument("density csv: centers are not uniformly spaced");
    }
    return build_grid(xs.front() - 0.5 * dx, xs.back() + 0.5 * dx, xs.size());
}

}  // namespace

std::string density_to_csv(const DensityField& d) {
    std::ostringstream os;
    os << "x,value\n";
    for (std::size_t i = 0; i < d.size(); ++i) os << fmt17(d.grid.center(i)) << ',' << fmt17(d.values[i]) << '\n';
    return os.str();
}

DensityField density_from_csv(const std::string& text, double floor) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("density csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,value") throw std::invalid_argument("density csv: expected header 'x,value'");
    std::vector<double> xs, vs;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("density csv: malformed row '" + line + "'");
        try {
            xs.push_back(std::stod(line.substr(0, comma)));
            vs.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::logic_error&) {
            throw std::invalid_argument("density csv: malformed row '" + line + "'");
        }
    }
    return density_from_values(grid_from_centers(xs), vs, floor);
}

std::string density_to_json(const DensityField& d) {
    nlohmann::json j;
    j["grid"] = {{"lo", d.grid.lo}, {"hi", d.grid.hi}, {"n_cells", d.grid.n_cells}};
    j["values"] = d.values;
    return j.dump();
}

DensityField density_from_json(const std::string& text, double floor) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        Grid grid = build_grid(j.at("grid").at("lo").get<double>(), j.at("grid").at("hi").get<double>(),
                               j.at("grid").at("n_cells").get<std::size_t>());
        return density_from_values(grid, j.at("values").get<std::vector<double>>(), floor);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("density json: ") + e.what());
    }
}

DensityField load_density(const std::string& path, double floor) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open density file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    return is_json ? density_from_json(ss.str(), floor) : density_from_csv(ss.str(), floor);
}

void save_density(const DensityField& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write density file: " + path);
    bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    out << (is_json ? density_to_json(d) : density_to_csv(d));
}

double total_variation(const DensityField& a, const DensityField& b) {
    if (!a.grid.same_as(b.grid)) throw std::invalid_argument("total_variation: grid mismatch");
    CompensatedSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.values[i] - b.values[i]);
    return 0.5 * s.value() * a.grid.width();
}

}  // namespace platcomp
