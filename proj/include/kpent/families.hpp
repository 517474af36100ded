#pragma once

// Test distributions with known structural properties, and random
// contraction generators. All randomness comes from the counter-based RNG so
// generated instances are identical on every platform.

#include <optional>
#include <string>

#include "json.hpp"
#include "kpent/contract.hpp"
#include "kpent/grid.hpp"
#include "kpent/rng.hpp"

namespace kpent {

// Families:
//   gaussian          independent N(center_i, scale_i^2)
//   uniform_box       uniform on prod [center_i - scale_i, center_i + scale_i]
//   laplace           independent Laplace(center_i, scale_i)
//   radial            exp(-(|x - center| / scale_0)^power), power in [1, 2]
//   uniform_ball      uniform on the ball of radius scale_0
//   gaussian_mixture  (N(-s e_0, I) + N(s e_0, I)) / 2 scaled by scale, s = separation
struct LawSpec {
  std::string family = "gaussian";
  int dim = 1;
  Vec scale;
  Vec center;
  double power = 2.0;
  double separation = 0.0;

  static LawSpec gaussian(Vec sigma, Vec center = {});
  static LawSpec uniform_box(Vec half_width, Vec center = {});
  static LawSpec laplace(Vec scale, Vec center = {});
  static LawSpec radial(int dim, double scale, double power);
  static LawSpec uniform_ball(int dim, double radius);
  static LawSpec gaussian_mixture(int dim, double scale, double separation);

  void validate() const;
  // Unnormalized density.
  double density(std::span<const double> x) const;
  // Half-width around the center outside which the mass is < 1e-14.
  double extent() const;
  // Half-width of a centered cube holding all but `tail` of the mass
  // (never more than extent()).
  double core_extent(double tail) const;
  bool log_concave() const;
  bool unconditional() const;
  bool radially_symmetric() const;
  bool unimodal() const;
  // Draw one sample (used by Monte Carlo checks).
  Point sample(SampleStream& s) const;
  // Closed-form Shannon entropy when available.
  std::optional<double> entropy() const;
};

nlohmann::json to_json(const LawSpec& law);
LawSpec law_from_json(const nlohmann::json& j);

// Grid of `law` with the given spacing on a box centered at the law's center.
// With tail > 0 the box is cut to core_extent(tail) and renormalized.
DensityGrid grid_law(const LawSpec& law, double spacing, double tail = 0.0);
// Spacing that puts `cells` cells across the widest of the given laws.
double common_spacing(std::span<const LawSpec> laws, std::int64_t cells, double tail = 0.0);

// Second difference of log-masses <= tol on a 1-D grid (interior of the support).
bool grid_is_log_concave_1d(const DensityGrid& f, double tol = 1e-9);

// Random generators; `s` is advanced sequentially.
LawSpec random_log_concave_law(SampleStream& s, int dim, bool centered);
LawSpec random_radial_law(SampleStream& s, int dim);

Matrix random_orthogonal(SampleStream& s, int dim);
// Q1 diag(sv) Q2 with singular values uniform in [lo, hi], plus a shift in
// [-shift, shift]^d.
ContractionSpec random_affine_contraction(SampleStream& s, int dim, double lo = 0.0, double hi = 1.0, double shift = 0.0);
ContractionSpec random_diagonal_contraction(SampleStream& s, int dim);
ContractionSpec random_coordinatewise_contraction(SampleStream& s, int dim);
ContractionSpec random_gradient_contraction(SampleStream& s, int dim);
// Black-box map x -> Q sigma(A x + b) with ||A|| <= 1, sigma a coordinatewise
// soft clamp, Q orthogonal.
ContractionSpec random_sampled_contraction(SampleStream& s, int dim);
// Dispatch by kind name: affine, diagonal, coordinatewise, gradient_convex, sampled.
ContractionSpec random_contraction(SampleStream& s, int dim, const std::string& kind);

}  // namespace kpent
