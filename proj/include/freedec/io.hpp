#pragma once

#include <optional>
#include <string>
#include <vector>

#include "freedec/decompress.hpp"
#include "freedec/density_fit.hpp"
#include "freedec/metrics.hpp"
#include "freedec/stieltjes.hpp"

namespace freedec {

struct ModelFile {
    DensityModel model;
    std::optional<GlueFunction> glue;
};

constexpr int kModelSchemaVersion = 1;

std::string model_to_json(const DensityModel& m, const std::optional<GlueFunction>& glue);
ModelFile model_from_json(const std::string& text);

// Header `x,density`, one row per grid point, %.17g.
std::string density_csv(const std::vector<double>& x, const std::vector<double>& density);
GridDensity parse_density_csv(const std::string& text);

std::string eigenvalues_text(const std::vector<double>& values);
// Whitespace-separated reals; '#' starts a comment.
std::vector<double> parse_eigenvalues(const std::string& text);

std::string decompression_diagnostics_json(const DecompressionResult& r, const std::string& method);

// "auto" gives nullopt; "lo:hi:count" a uniform grid with both ends included.
std::optional<std::vector<double>> parse_grid_spec(const std::string& spec);

std::string read_text_file(const std::string& path);
// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace freedec
