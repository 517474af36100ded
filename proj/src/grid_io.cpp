#include "kpent/grid_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "kpent/errors.hpp"

namespace kpent {

static_assert(std::endian::native == std::endian::little, "grid container assumes a little-endian host");

namespace {

template <class T>
void put(std::ofstream& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (!in) throw ConfigError("grid file truncated");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

nlohmann::json spec_to_json(const GridSpec& spec) {
  return {{"dim", spec.dim}, {"origin", spec.origin}, {"spacing", spec.spacing}, {"shape", spec.shape}};
}

GridSpec spec_from_json(const nlohmann::json& j) {
  GridSpec spec;
  try {
    spec.dim = j.at("dim").get<int>();
    spec.origin = j.at("origin").get<Point>();
    spec.spacing = j.at("spacing").get<double>();
    spec.shape = j.at("shape").get<std::vector<std::int64_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad grid header: ") + e.what());
  }
  spec.validate();
  return spec;
}

void write_grid(const std::string& path, const DensityGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  const GridSpec& s = grid.spec();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.dim));
  for (double o : s.origin) put<double>(out, o);
  put<double>(out, s.spacing);
  for (std::int64_t n : s.shape) put<std::uint64_t>(out, static_cast<std::uint64_t>(n));
  for (double m : grid.masses()) put<double>(out, m);
  if (!out) throw ConfigError("write failed: " + path);

  std::ofstream side(path + ".json");
  if (!side) throw ConfigError("cannot open sidecar for " + path);
  side << spec_to_json(s).dump(2) << '\n';
}

DensityGrid read_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open grid file " + path);
  GridSpec s;
  const auto dim = get<std::uint32_t>(in);
  if (dim < 1 || dim > 3) throw ConfigError("grid file has unsupported dim " + std::to_string(dim));
  s.dim = static_cast<int>(dim);
  s.origin.resize(dim);
  for (auto& o : s.origin) o = get<double>(in);
  s.spacing = get<double>(in);
  s.shape.resize(dim);
  for (auto& n : s.shape) {
    const auto v = get<std::uint64_t>(in);
    if (v == 0 || v > static_cast<std::uint64_t>(kMaxCells)) throw ConfigError("grid file has a bad shape entry");
    n = static_cast<std::int64_t>(v);
  }
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("grid file header invalid: ") + e.what());
  }
  std::vector<double> masses(s.cell_count());
  for (auto& m : masses) m = get<double>(in);
  return DensityGrid(std::move(s), std::move(masses));
}

}  // namespace kpent
