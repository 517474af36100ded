#pragma once

// Contraction maps T: R^d -> R^d, their Lipschitz constants, and the
// pushforward of grid densities through them.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "kpent/grid.hpp"
#include "kpent/linalg.hpp"

namespace kpent {

// A one-dimensional map used as a coordinate component.
struct ScalarMap {
  enum class Kind { Linear, SoftClamp, Clamp, Sine, Abs, Compose };
  Kind kind = Kind::Linear;
  double a = 1.0;
  double b = 0.0;
  std::vector<ScalarMap> parts;  // Compose: applied first to last

  static ScalarMap linear(double slope, double shift = 0.0) { return {Kind::Linear, slope, shift, {}}; }
  // a * tanh(x / a)
  static ScalarMap soft_clamp(double a) { return {Kind::SoftClamp, a, 0.0, {}}; }
  static ScalarMap clamp(double lo, double hi) { return {Kind::Clamp, lo, hi, {}}; }
  // amp * sin(freq * x)
  static ScalarMap sine(double amp, double freq) { return {Kind::Sine, amp, freq, {}}; }
  static ScalarMap abs() { return {Kind::Abs, 0.0, 0.0, {}}; }
  static ScalarMap compose(std::vector<ScalarMap> parts) { return {Kind::Compose, 0.0, 0.0, std::move(parts)}; }

  double operator()(double x) const;
  // Analytic Lipschitz constant.
  double lipschitz() const;
};

struct AffineMap {
  Matrix a;
  Vec b;
};

struct DiagonalMap {
  Vec lambda;
};

struct CoordinatewiseMap {
  std::vector<ScalarMap> components;
};

// T = grad(phi) for a convex phi.
struct GradientConvexMap {
  enum class Kind { Quadratic, BallProjection, Custom };
  Kind kind = Kind::Quadratic;
  Matrix q;        // Quadratic: phi = x'Qx/2 + shift'x
  Vec shift;       // Quadratic shift, or BallProjection center
  double radius = 1.0;
  std::function<Point(std::span<const double>)> gradient;  // Custom
  std::string name;
};

struct SampledMap {
  std::function<Point(std::span<const double>)> map;
  std::string name;
};

struct ContractionSpec {
  int dim = 1;
  std::variant<AffineMap, DiagonalMap, CoordinatewiseMap, GradientConvexMap, SampledMap> kind;
  std::optional<double> declared_lip;

  static ContractionSpec identity(int dim);
  static ContractionSpec affine(Matrix a, Vec b = {});
  static ContractionSpec scaling(int dim, double factor);
  static ContractionSpec diagonal(Vec lambda);
  static ContractionSpec coordinatewise(std::vector<ScalarMap> components);
  static ContractionSpec quadratic_gradient(Matrix q, Vec shift = {});
  static ContractionSpec ball_projection(int dim, double radius, Vec center = {});
  static ContractionSpec gradient(int dim, std::function<Point(std::span<const double>)> grad, std::string name);
  static ContractionSpec sampled(int dim, std::function<Point(std::span<const double>)> map, std::string name);

  Point apply(std::span<const double> x) const;
  std::string kind_name() const;
  bool is_affine() const { return std::holds_alternative<AffineMap>(kind) || std::holds_alternative<DiagonalMap>(kind); }
  // Affine or diagonal kinds as a matrix and shift.
  AffineMap as_affine() const;
  // Throws DomainError when an analytic invariant is broken.
  void validate() const;
  // Sampled maps and custom gradients cannot be serialized.
  bool ephemeral() const;
};

struct LipschitzEstimate {
  double value = 0.0;
  bool exact = false;          // false: sampled lower bound
  std::uint64_t probes = 0;
};

struct ProbeOptions {
  std::uint64_t pairs = 20000;
  std::uint64_t seed = 1;
  double box = 4.0;            // pairs drawn in [-box, box]^d
};

// Affine: power iteration on A'A (Jacobi SVD if it stalls). Diagonal: max
// |lambda_i|. Other kinds: sampled max ratio, flagged as an estimate.
LipschitzEstimate lipschitz_constant(const ContractionSpec& t, const ProbeOptions& probe = {});

// Lipschitz value to use in a bound: declared_lip if present, else the
// exact constant; throws PreconditionError when only an estimate exists.
double certified_lipschitz(const ContractionSpec& t);

struct StrongContractionProbe {
  double max_coordinate_ratio = 0.0;  // max_i |T_i(x)-T_i(y)| / |x_i-y_i|
  double max_ratio = 0.0;             // max |T(x)-T(y)| / |x-y|
  std::uint64_t pairs = 0;
  bool strong(double slack = 1e-9) const { return max_coordinate_ratio <= 1.0 + slack; }
  bool contraction(double slack = 1e-9) const { return max_ratio <= 1.0 + slack; }
};

// Probes both the per-coordinate and the overall contraction property.
StrongContractionProbe probe_contraction(const ContractionSpec& t, const ProbeOptions& probe = {});

std::vector<Point> apply_map(const ContractionSpec& t, std::span<const Point> points);

// Affine composition outer(inner(x)).
ContractionSpec compose_affine(const ContractionSpec& outer, const ContractionSpec& inner);

// Each cell is split into substeps^d sub-cells whose centers carry equal
// shares of its mass; images are binned into `target`. Throws CoverageError
// when more than 1e-6 of the mass lands outside.
DensityGrid pushforward_grid(const ContractionSpec& t, const DensityGrid& f, const GridSpec& target, int substeps = 4);

// Smallest spec on f's lattice (same spacing, origin shifted by whole cells)
// covering the images of all sub-cell centers of positive cells, plus
// `margin` cells on each side.
GridSpec image_spec(const ContractionSpec& t, const DensityGrid& f, int substeps = 4, int margin = 1);

struct PolarDiagonal {
  Matrix q1;
  Vec lambda;  // descending, nonnegative
  Matrix q2;
};

// A = q1 * diag(lambda) * q2.
PolarDiagonal polar_diagonal_factor(const Matrix& a);

nlohmann::json to_json(const ContractionSpec& t);
ContractionSpec contraction_from_json(const nlohmann::json& j);

}  // namespace kpent
