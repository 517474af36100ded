#pragma once

// Piecewise-constant probability densities on regular lattices in R^d,
// d in {1, 2, 3}, and the functionals computed from them.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "kpent/linalg.hpp"

namespace kpent {

using Point = std::vector<double>;

inline constexpr double kInfiniteOrder = std::numeric_limits<double>::infinity();
// |sum of masses - 1| allowed for a grid to count as normalized.
inline constexpr double kNormalizationTolerance = 1e-10;
inline constexpr std::int64_t kMaxCells = std::int64_t{1} << 31;

struct GridSpec {
  int dim = 1;
  Point origin;                    // lower corner of cell 0
  double spacing = 1.0;            // uniform cell edge
  std::vector<std::int64_t> shape; // cells per axis

  // Throws DomainError if any invariant is broken.
  void validate() const;

  std::size_t cell_count() const;
  double cell_volume() const;
  // Row-major: last axis varies fastest.
  std::vector<std::int64_t> strides() const;
  std::vector<std::int64_t> unflatten(std::size_t flat) const;
  std::size_t flatten(std::span<const std::int64_t> index) const;
  Point cell_center(std::size_t flat) const;
  // Cell containing x, or -1 when x lies outside [origin, origin + shape*spacing).
  std::int64_t locate(std::span<const double> x) const;

  // Smallest spec with origin `lo` and the given spacing whose cells cover [lo, hi].
  static GridSpec covering(std::span<const double> lo, std::span<const double> hi, double spacing);

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

class DensityGrid {
 public:
  // Masses must be finite and nonnegative; they are not rescaled.
  DensityGrid(GridSpec spec, std::vector<double> masses);

  const GridSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }
  double spacing() const { return spec_.spacing; }
  std::span<const double> masses() const { return masses_; }
  double mass(std::size_t flat) const { return masses_[flat]; }
  double density(std::size_t flat) const { return masses_[flat] / spec_.cell_volume(); }

  double total_mass() const;
  bool is_normalized(double tol = kNormalizationTolerance) const;
  std::size_t support_size() const;

  // Rescaled copy with unit total mass. Throws EmptySupportError if all masses
  // vanish.
  DensityGrid normalized() const;
  // Same masses with the origin shifted by `shift`.
  DensityGrid translated(std::span<const double> shift) const;

 private:
  GridSpec spec_;
  std::vector<double> masses_;
};

using DensityFunction = std::function<double(std::span<const double>)>;

// Cell mass = f(center) * spacing^d, then normalized.
DensityGrid make_grid(const GridSpec& spec, const DensityFunction& density);
// Cell mass = fraction of the in-grid samples that land in the cell.
DensityGrid make_grid(const GridSpec& spec, std::span<const Point> samples);

// Renyi entropy in nats. alpha in [0, inf]; pass kInfiniteOrder for h_inf.
double renyi_entropy(const DensityGrid& f, double alpha);
// exp(2 h_1 / d).
double entropy_power(const DensityGrid& f);

struct CovarianceSummary {
  Vec mean;
  Matrix cov;
};

CovarianceSummary covariance(const DensityGrid& f);

// Max cell density.
double max_density(const DensityGrid& f);

}  // namespace kpent
