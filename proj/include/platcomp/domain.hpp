#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace platcomp {

//! Uniform partition of a 1-D interval into cells.
struct Grid {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n_cells = 2;

    double width() const { return (hi - lo) / static_cast<double>(n_cells); }
    double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * width(); }
    double cell_lo(std::size_t i) const { return lo + static_cast<double>(i) * width(); }
    //! Cell index holding x; points outside the range go to the nearest end cell.
    std::size_t locate(double x) const;
    bool same_as(const Grid& other) const;
};

Grid build_grid(double lo, double hi, std::size_t n_cells);

//! Piecewise-constant density, one height per grid cell.
struct DensityField {
    Grid grid;
    std::vector<double> values;
    double floor = 1e-9;
    bool normalized = true;

    std::size_t size() const { return values.size(); }
    double mass(std::size_t i) const { return values[i] * grid.width(); }
    double total_mass() const;
};

constexpr double kDefaultFloor = 1e-9;

//! Clamp at the floor, then rescale to unit mass.
DensityField density_from_values(const Grid& grid, const std::vector<double>& raw,
                                 double floor = kDefaultFloor);

//! Wrap already-normalized heights without rescaling (used for equilibrium content densities).
DensityField density_exact(const Grid& grid, std::vector<double> values, bool normalized = true);

struct RatioEntry {
    double r_value = 1.0;
    double p_mass = 0.0;
    double g_mass = 0.0;
    std::size_t n_cells = 0;  // 0 for entries supplied directly as atoms
};

//! Distribution of r = p/g under p, with equal-r cells merged into atoms.
class RatioDistribution {
public:
    static RatioDistribution from_densities(const DensityField& p, const DensityField& g);
    //! Entries given as (r, p_mass); g_mass is derived as p_mass / r.
    static RatioDistribution from_atoms(const std::vector<std::pair<double, double>>& atoms);

    const std::vector<RatioEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    const RatioEntry& operator[](std::size_t k) const { return entries_[k]; }
    double r_min() const { return entries_.front().r_value; }
    double r_max() const { return entries_.back().r_value; }

    //! Entry index of each grid cell; empty for atom-built distributions.
    const std::vector<std::size_t>& cell_entry() const { return cell_entry_; }
    //! Per-cell ratio p_i/g_i (unmerged); empty for atom-built distributions.
    const std::vector<double>& cell_ratio() const { return cell_ratio_; }

    //! E_g[r^a] = sum of r^a * g_mass.
    double g_moment(double a) const;
    //! Whether the top entry carries a point mass (merged cells or an explicit atom).
    bool top_is_atom() const;
    //! sum of p_mass * max(t/r, 1)
    double threshold_lhs(double t) const;

private:
    std::vector<RatioEntry> entries_;
    std::vector<std::size_t> cell_entry_;
    std::vector<double> cell_ratio_;
};

//! Round to 12 significant digits; used as the merge key for equal ratios.
double round_sig12(double x);

// Serialization: CSV with header "x,value" and JSON {grid:{lo,hi,n_cells}, values:[...]}.
std::string density_to_csv(const DensityField& d);
DensityField density_from_csv(const std::string& text, double floor = kDefaultFloor);
std::string density_to_json(const DensityField& d);
DensityField density_from_json(const std::string& text, double floor = kDefaultFloor);
//! Dispatch on extension (.json or anything else as CSV).
DensityField load_density(const std::string& path, double floor = kDefaultFloor);
void save_density(const DensityField& d, const std::string& path);

double total_variation(const DensityField& a, const DensityField& b);

}  // namespace platcomp
