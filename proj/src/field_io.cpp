#include "cfmoll/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfmoll/errors.hpp"

namespace cfmoll {

using nlohmann::json;

std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string with_extension(const std::string& path, const std::string& ext)
{
    return std::filesystem::path(path).replace_extension(ext).string();
}

json to_json(const Grid& grid)
{
    json axes = json::array();
    for (const auto& a : grid.axes())
        axes.push_back({{"min", a.min}, {"max", a.max}, {"count", a.count}});
    return axes;
}

Grid grid_from_json(const json& j)
{
    if (!j.is_array())
        throw ValidationError("grid: expected an array of axes");
    std::vector<Axis> axes;
    try {
        for (const auto& a : j)
            axes.push_back({a.at("min").get<double>(), a.at("max").get<double>(), a.at("count").get<int>()});
    } catch (const json::exception& e) {
        throw ValidationError(std::string("grid: ") + e.what());
    }
    return Grid(std::move(axes));
}

json to_json(const MollificationParams& p)
{
    return {{"truncation_radius", p.truncation_radius},
            {"nodes_per_axis", p.nodes_per_axis},
            {"tail_tol", p.tail_tol},
            {"negativity_tol", p.negativity_tol},
            {"max_frequency_step", p.max_frequency_step},
            {"max_inversion_radius", p.max_inversion_radius},
            {"allow_unknown_integrability", p.allow_unknown_integrability}};
}

void write_density_csv(std::ostream& out, const DensityField& field)
{
    const int d = field.grid.dimension();
    for (int j = 0; j < d; ++j)
        out << 'z' << (j + 1) << ',';
    out << "density\n";
    std::vector<int> idx(std::size_t(d), 0);
    for (double value : field.values) {
        for (int j = 0; j < d; ++j)
            out << format_number(field.grid.axis(j).point(idx[std::size_t(j)])) << ',';
        out << format_number(value) << '\n';
        for (int j = d; j-- > 0;) {
            if (++idx[std::size_t(j)] < field.grid.axis(j).count)
                break;
            idx[std::size_t(j)] = 0;
        }
    }
}

json density_sidecar(const DensityField& field, const json& extra)
{
    const double mass = field.riemann_sum();
    json doc = {{"schema", "cfmoll.density_field/1"},
                {"grid", to_json(field.grid)},
                {"grid_spec", format_grid(field.grid)},
                {"normalized", field.normalized},
                {"riemann_sum", mass},
                {"normalization_residual", mass - 1.0}};
    if (extra.is_object())
        for (const auto& [key, value] : extra.items())
            doc[key] = value;
    return doc;
}

void write_density_field(const DensityField& field, const std::string& csv_path, const json& extra)
{
    std::ofstream csv(csv_path);
    if (!csv)
        throw ValidationError("cannot write " + csv_path);
    write_density_csv(csv, field);
    std::ofstream side(with_extension(csv_path, ".json"));
    if (!side)
        throw ValidationError("cannot write sidecar for " + csv_path);
    side << density_sidecar(field, extra).dump(2) << '\n';
}

namespace {

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        cells.push_back(cell);
    return cells;
}

double parse_number(const std::string& cell, std::size_t row)
{
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0')
        throw ValidationError("density csv: bad number \"" + cell + "\" on data row " + std::to_string(row));
    return v;
}

} // namespace

DensityField read_density_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw ValidationError("density csv: empty input");
    const auto header = split(line);
    if (header.size() < 2 || header.back() != "density")
        throw ValidationError("density csv: header must be z1,...,zd,density");
    const std::size_t d = header.size() - 1;
    for (std::size_t j = 0; j < d; ++j)
        if (header[j] != "z" + std::to_string(j + 1))
            throw ValidationError("density csv: unexpected column \"" + header[j] + "\"");

    std::vector<std::vector<double>> coords(d);
    std::vector<double> values;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        ++row;
        const auto cells = split(line);
        if (cells.size() != d + 1)
            throw ValidationError("density csv: wrong column count on data row " + std::to_string(row));
        for (std::size_t j = 0; j < d; ++j)
            coords[j].push_back(parse_number(cells[j], row));
        values.push_back(parse_number(cells[d], row));
    }

    std::vector<Axis> axes;
    for (const auto& c : coords) {
        std::vector<double> unique = c;
        std::sort(unique.begin(), unique.end());
        unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
        if (unique.size() < 2)
            throw ValidationError("density csv: every axis needs at least 2 distinct coordinates");
        axes.push_back({unique.front(), unique.back(), int(unique.size())});
    }
    DensityField field{Grid(std::move(axes)), std::move(values), false};
    if (field.values.size() != field.grid.size())
        throw ValidationError("density csv: rows do not form a complete rectangular lattice");
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        const auto z = field.grid.point(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double tol = 1e-12 * std::max(1.0, std::abs(z[j]));
            if (std::abs(z[j] - coords[j][i]) > tol)
                throw ValidationError("density csv: row " + std::to_string(i + 1) +
                                      " is off the uniform lattice or out of row-major order");
        }
    }
    check_field(field);
    return field;
}

DensityField read_density_field(const std::string& csv_path)
{
    std::ifstream in(csv_path);
    if (!in)
        throw ValidationError("cannot open " + csv_path);
    DensityField field = read_density_csv(in);

    const auto sidecar = with_extension(csv_path, ".json");
    if (std::ifstream side(sidecar); side) {
        json doc;
        try {
            side >> doc;
        } catch (const json::exception& e) {
            throw ValidationError("sidecar " + sidecar + " is not valid JSON: " + e.what());
        }
        const Grid declared = grid_from_json(doc.at("grid"));
        if (declared.size() != field.grid.size())
            throw ValidationError("sidecar grid does not match the csv lattice");
        for (int j = 0; j < declared.dimension(); ++j) {
            const auto& a = declared.axis(j);
            const auto& b = field.grid.axis(j);
            if (a.count != b.count || std::abs(a.min - b.min) > 1e-12 * std::max(1.0, std::abs(a.min)) ||
                std::abs(a.max - b.max) > 1e-12 * std::max(1.0, std::abs(a.max)))
                throw ValidationError("sidecar grid does not match the csv lattice");
        }
        field.grid = declared;
        field.normalized = doc.value("normalized", false);
        const double neg = doc.contains("params") ? doc["params"].value("negativity_tol", default_negativity_tol)
                                                  : default_negativity_tol;
        check_field(field, neg);
    }
    return field;
}

} // namespace cfmoll
