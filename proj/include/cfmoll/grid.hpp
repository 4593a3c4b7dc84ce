#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cfmoll {

struct Axis {
    double min;
    double max;
    int count;

    double spacing() const { return (max - min) / double(count - 1); }
    /// Lattice coordinate i; the last point is exactly max.
    double point(int i) const { return i == count - 1 ? max : min + double(i) * spacing(); }

    bool operator==(const Axis&) const = default;
};

/// Rectangular lattice in R^d with uniform spacing per axis. Points are
/// enumerated in row-major order: the last axis varies fastest.
class Grid {
public:
    explicit Grid(std::vector<Axis> axes);

    int dimension() const { return int(axes_.size()); }
    const std::vector<Axis>& axes() const { return axes_; }
    const Axis& axis(int j) const { return axes_[std::size_t(j)]; }
    std::size_t size() const { return size_; }

    /// Product of per-axis spacings, the Riemann-sum weight of one lattice point.
    double cell_volume() const;
    /// Per-axis lattice indices of flat index `flat`.
    std::vector<int> unravel(std::size_t flat) const;
    std::vector<double> point(std::size_t flat) const;

    bool operator==(const Grid&) const = default;

private:
    std::vector<Axis> axes_;
    std::size_t size_;
};

/// Parses "min:max:count[,min:max:count...]".
Grid parse_grid(const std::string& text);
std::string format_grid(const Grid& grid);

inline constexpr double default_negativity_tol = 1e-6;
inline constexpr double normalization_window = 1e-3;

/// Density samples on a Grid.
struct DensityField {
    Grid grid;
    std::vector<double> values;
    /// Claim that the Riemann sum lies within 1 +- normalization_window.
    bool normalized = false;

    /// sum(values) * cell_volume.
    double riemann_sum() const;
};

/// Throws ValidationError when values are below -negativity_tol, have the
/// wrong length, or the normalized claim fails the Riemann-sum window.
void check_field(const DensityField& field, double negativity_tol = default_negativity_tol);

} // namespace cfmoll
