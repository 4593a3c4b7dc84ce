#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "cfmoll/grid.hpp"
#include "cfmoll/mollify.hpp"

namespace cfmoll {

/// "%.17g"; every double written by this library goes through here.
std::string format_number(double v);

/// Replaces the extension of `path` (or appends one).
std::string with_extension(const std::string& path, const std::string& ext);

nlohmann::json to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MollificationParams& params);

/// CSV with header z1,...,zd,density; one row per lattice point in row-major
/// order; 17 significant digits.
void write_density_csv(std::ostream& out, const DensityField& field);

/// Sidecar document: grid, normalization claim and residual, plus `extra`
/// (command, spec, quadrature parameters).
nlohmann::json density_sidecar(const DensityField& field, const nlohmann::json& extra = {});

/// Writes `csv_path` and its ".json" sidecar.
void write_density_field(const DensityField& field, const std::string& csv_path,
                         const nlohmann::json& extra = {});

/// Reads a density CSV, rebuilding the grid from the coordinates. The
/// normalized flag is false; the result passes check_field.
DensityField read_density_csv(std::istream& in);

/// Reads `csv_path`, takes the normalized claim from the sidecar when one
/// exists, checks that the sidecar grid matches, and runs check_field.
DensityField read_density_field(const std::string& csv_path);

} // namespace cfmoll
