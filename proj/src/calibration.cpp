#include "kpent/calibration.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

#include "kpent/contract.hpp"
#include "kpent/convolve.hpp"
#include "kpent/errors.hpp"
#include "kpent/families.hpp"

namespace kpent {

namespace {

constexpr double kOrders[] = {0.5, 1.0, 2.0};
constexpr double kSafety = 2.0;
constexpr double kFloor = 0.05;

double gaussian_renyi(int d, double sigma, double alpha) {
  const double base = 0.5 * d * std::log(2.0 * std::numbers::pi) + d * std::log(sigma);
  if (alpha == 1.0) return base + 0.5 * d;
  return base + 0.5 * d * std::log(alpha) / (alpha - 1.0);
}

// Per-axis triangle on [0, 2a] (sum of two uniforms on [0, a]).
double triangle_renyi(int d, double a, double alpha) {
  const double one = alpha == 1.0 ? std::log(a) + 0.5
                                  : std::log(a) + std::log(2.0 / (alpha + 1.0)) / (1.0 - alpha);
  return d * one;
}

double worst_ratio_at(int dim, double h) {
  double worst = 0.0;
  auto track = [&](const DensityGrid& g, auto exact) {
    for (double a : kOrders) worst = std::max(worst, std::abs(renyi_entropy(g, a) - exact(a)) / h);
  };

  const LawSpec gauss = LawSpec::gaussian(Vec(dim, 1.0));
  const DensityGrid g = grid_law(gauss, h);
  track(g, [&](double a) { return gaussian_renyi(dim, 1.0, a); });

  // Box whose edges fall between lattice points.
  const double side = 1.0 + 0.37 * h;
  const LawSpec box = LawSpec::uniform_box(Vec(dim, 0.5 * side), Vec(dim, 0.123 * h));
  GridSpec s;
  s.dim = dim;
  s.spacing = h;
  for (int i = 0; i < dim; ++i) {
    s.origin.push_back(-std::ceil(side / h) * h);
    s.shape.push_back(2 * static_cast<std::int64_t>(std::ceil(side / h)));
  }
  const DensityGrid u = make_grid(s, [&](std::span<const double> x) { return box.density(x); });
  track(u, [&](double) { return dim * std::log(side); });

  // Pipeline references: convolution of boxes and pushforward by a scaling.
  track(convolve(u, u), [&](double a) { return triangle_renyi(dim, side, a); });
  const ContractionSpec half = ContractionSpec::scaling(dim, 0.5);
  const DensityGrid pushed = pushforward_grid(half, g, image_spec(half, g));
  track(pushed, [&](double a) { return gaussian_renyi(dim, 0.5, a); });
  return worst;
}

}  // namespace

CalibrationResult calibrate_grid_error(int dim) {
  if (dim < 1 || dim > 3) throw DomainError("calibration dim must be 1, 2 or 3");
  static constexpr std::array<double, 3> base{0.1, 0.2, 0.4};
  const double h0 = base[dim - 1];
  CalibrationResult r;
  r.dim = dim;
  r.worst_ratio = std::max(worst_ratio_at(dim, h0), worst_ratio_at(dim, 0.5 * h0));
  r.constant = std::max(kFloor, kSafety * r.worst_ratio);
  return r;
}

double grid_error_constant(int dim) {
  static std::once_flag once[3];
  static double value[3];
  if (dim < 1 || dim > 3) throw DomainError("calibration dim must be 1, 2 or 3");
  std::call_once(once[dim - 1], [dim] { value[dim - 1] = calibrate_grid_error(dim).constant; });
  return value[dim - 1];
}

double grid_tolerance(int dim, double spacing) { return grid_error_constant(dim) * spacing; }

}  // namespace kpent
