#pragma once

#include "kpent/grid.hpp"

namespace kpent {

struct MajorizationVerdict {
  bool holds = false;
  double worst_radius = 0.0;
  double worst_deficit = 0.0;  // > 0 means f's cumulative exceeds g's
  double tolerance_used = 0.0;
};

// Symmetric decreasing rearrangement. Masses are sorted by decreasing value
// (equal values keep their original flat order) and placed on lattice
// offsets k * spacing sorted by |k|^2; equal |k|^2 go in descending
// lexicographic order of k. The output is the smallest odd centered cube
// [-(R+1/2) h, (R+1/2) h]^d holding every positive cell.
DensityGrid rearrange(const DensityGrid& f);

// Mass of the rearrangement inside the closed ball of radius r about the
// origin, as a fraction of the total.
double ball_cumulative(const DensityGrid& f, double r);

// Whether f is majorized by g: ball_cumulative(f, r) <= ball_cumulative(g, r)
// + tolerance at every radius where a lattice shell completes.
MajorizationVerdict majorizes(const DensityGrid& g, const DensityGrid& f, double tolerance);

// Lattice offsets of Z^d ordered as used by rearrange, restricted to the cube
// of half-width `radius`. Each entry is (|k|^2, k).
struct LatticeOffset {
  std::int64_t norm2;
  std::vector<std::int64_t> k;
};
std::vector<LatticeOffset> ordered_offsets(int dim, std::int64_t radius);

}  // namespace kpent
