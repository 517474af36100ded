#pragma once

// Grid discretization budget eps_grid = C_d * spacing. C_d is measured once
// per dimension by halving the spacing on references with closed-form
// entropies, and cached.

namespace kpent {

struct CalibrationResult {
  int dim = 1;
  double constant = 0.0;    // C_d
  double worst_ratio = 0.0; // max |error| / spacing over all references
};

CalibrationResult calibrate_grid_error(int dim);
double grid_error_constant(int dim);
double grid_tolerance(int dim, double spacing);

}  // namespace kpent
