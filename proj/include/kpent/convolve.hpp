#pragma once

#include "kpent/grid.hpp"

namespace kpent {

// Law of X + W for independent X ~ f, W ~ g. Both grids must share dim and
// spacing. The output lattice is the Minkowski sum of the two lattices with
// empty (< 1e-16) boundary slabs trimmed, renormalized.

// O(n_f * n_g) pairwise accumulation in double-double arithmetic.
DensityGrid convolve_direct(const DensityGrid& f, const DensityGrid& g);

// Zero-padded FFT path, also in double-double arithmetic. Cells whose value
// lies below the transform's rounding floor (1e-28) come out as exact zeros.
DensityGrid convolve(const DensityGrid& f, const DensityGrid& g);

}  // namespace kpent
