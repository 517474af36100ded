#pragma once

// Binary grid container: u32 dim, f64 origin[dim], f64 spacing,
// u64 shape[dim], then f64 masses in row-major order. All little-endian.
// A JSON sidecar "<path>.json" repeats the header.

#include <string>

#include "json.hpp"
#include "kpent/grid.hpp"

namespace kpent {

void write_grid(const std::string& path, const DensityGrid& grid);
DensityGrid read_grid(const std::string& path);

nlohmann::json spec_to_json(const GridSpec& spec);
GridSpec spec_from_json(const nlohmann::json& j);

}  // namespace kpent
