#include "cfmoll/grid.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cfmoll/errors.hpp"

namespace cfmoll {

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes)), size_(1)
{
    if (axes_.empty())
        throw ValidationError("grid: needs at least one axis");
    for (const auto& a : axes_) {
        if (!std::isfinite(a.min) || !std::isfinite(a.max) || !(a.max > a.min))
            throw ValidationError("grid: each axis needs finite min < max");
        if (a.count < 2)
            throw ValidationError("grid: each axis needs at least 2 points");
        size_ *= std::size_t(a.count);
    }
}

double Grid::cell_volume() const
{
    double v = 1.0;
    for (const auto& a : axes_)
        v *= a.spacing();
    return v;
}

std::vector<int> Grid::unravel(std::size_t flat) const
{
    std::vector<int> idx(axes_.size());
    for (std::size_t j = axes_.size(); j-- > 0;) {
        const auto n = std::size_t(axes_[j].count);
        idx[j] = int(flat % n);
        flat /= n;
    }
    return idx;
}

std::vector<double> Grid::point(std::size_t flat) const
{
    const auto idx = unravel(flat);
    std::vector<double> z(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j)
        z[j] = axes_[j].point(idx[j]);
    return z;
}

Grid parse_grid(const std::string& text)
{
    std::vector<Axis> axes;
    std::stringstream all(text);
    std::string part;
    if (!text.empty() && text.back() == ',')
        throw ValidationError("grid: trailing comma in \"" + text + "\"");
    while (std::getline(all, part, ',')) {
        Axis a{};
        char extra = 0;
        // "%lf:%lf:%d" alone would accept "1:2:3.5"; the trailing %c catches that.
        if (std::sscanf(part.c_str(), " %lf : %lf : %d %c", &a.min, &a.max, &a.count, &extra) != 3)
            throw ValidationError("grid: cannot parse axis \"" + part + "\" (want min:max:count)");
        axes.push_back(a);
    }
    return Grid(std::move(axes));
}

std::string format_grid(const Grid& grid)
{
    std::string out;
    char buf[96];
    for (const auto& a : grid.axes()) {
        std::snprintf(buf, sizeof buf, "%.17g:%.17g:%d", a.min, a.max, a.count);
        if (!out.empty())
            out += ',';
        out += buf;
    }
    return out;
}

double DensityField::riemann_sum() const
{
    double total = 0.0;
    for (double v : values)
        total += v;
    return total * grid.cell_volume();
}

void check_field(const DensityField& field, double negativity_tol)
{
    if (field.values.size() != field.grid.size())
        throw ValidationError("density field: " + std::to_string(field.values.size()) +
                              " values for a grid of " + std::to_string(field.grid.size()) + " points");
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        const double v = field.values[i];
        if (!std::isfinite(v) || v < -negativity_tol)
            throw ValidationError("density field: value " + std::to_string(v) + " at index " +
                                  std::to_string(i) + " breaks the negativity tolerance");
    }
    if (field.normalized) {
        const double mass = field.riemann_sum();
        if (std::abs(mass - 1.0) > normalization_window)
            throw ValidationError("density field claims normalization but its Riemann sum is " +
                                  std::to_string(mass));
    }
}

} // namespace cfmoll
