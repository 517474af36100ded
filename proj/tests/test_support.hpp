#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "kpent/grid.hpp"

namespace testsupport {

// Random normalized grid with `cells_per_axis` cells per axis (1 to max).
// About a third of the cells are empty when `sparse` is set.
inline kpent::DensityGrid random_grid(std::mt19937_64& rng, int dim, int max_per_axis, bool sparse = true) {
  std::uniform_int_distribution<int> n_dist(1, max_per_axis);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  kpent::GridSpec s;
  s.dim = dim;
  s.spacing = 0.25;
  for (int a = 0; a < dim; ++a) {
    s.origin.push_back(std::floor(u(rng) * 8.0 - 4.0) * s.spacing);
    s.shape.push_back(n_dist(rng));
  }
  std::vector<double> m(s.cell_count());
  double total = 0.0;
  for (double& x : m) {
    x = (sparse && u(rng) < 0.3) ? 0.0 : u(rng);
    total += x;
  }
  if (total == 0.0) m[0] = total = 1.0;
  for (double& x : m) x /= total;
  return kpent::DensityGrid(s, m).normalized();
}

inline double gaussian_pdf(std::span<const double> x, double sigma = 1.0) {
  double q = 0.0;
  for (double v : x) q += v * v;
  const double d = static_cast<double>(x.size());
  return std::exp(-0.5 * q / (sigma * sigma)) / std::pow(2.0 * M_PI * sigma * sigma, 0.5 * d);
}

inline kpent::GridSpec centered_spec(int dim, double half_width, std::int64_t cells) {
  kpent::GridSpec s;
  s.dim = dim;
  s.spacing = 2.0 * half_width / static_cast<double>(cells);
  s.origin.assign(dim, -half_width);
  s.shape.assign(dim, cells);
  return s;
}

}  // namespace testsupport
