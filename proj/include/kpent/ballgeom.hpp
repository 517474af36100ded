#pragma once

// Unions and intersections of congruent balls and the Kneser-Poulsen checks.

#include <functional>
#include <vector>

#include "json.hpp"
#include "kpent/contract.hpp"
#include "kpent/mc.hpp"
#include "kpent/report.hpp"

namespace kpent {

struct PointConfiguration {
  std::vector<Point> centers;
  double radius = 1.0;

  int dim() const { return centers.empty() ? 0 : static_cast<int>(centers.front().size()); }
  int k() const { return static_cast<int>(centers.size()); }
  void validate() const;
};

nlohmann::json to_json(const PointConfiguration& cfg);
PointConfiguration configuration_from_json(const nlohmann::json& j);

// Every pairwise distance in y is at most the matching one in x (+1e-12).
bool is_contractive_pair(const PointConfiguration& x, const PointConfiguration& y);

PointConfiguration map_configuration(const PointConfiguration& x, const ContractionSpec& t);

double ball_volume(int d, double r);
// Area of the intersection of two radius-r disks with centers `dist` apart.
double lens_area(double dist, double r);
// Volume of the intersection of two radius-r balls in R^d (cap formula).
double two_ball_intersection_volume(double dist, double r, int d);

// Hit-or-miss estimates. Union: over the tight bounding box of all balls.
// Intersection: over the bounding box of the first ball.
MCEstimate union_volume(const PointConfiguration& cfg, const MCParams& mc);
MCEstimate intersection_volume(const PointConfiguration& cfg, const MCParams& mc);

// Paired hit-or-miss estimate of two box integrals sharing sample points.
struct PairedEstimate {
  MCEstimate first;
  MCEstimate second;
  double difference_variance = 0.0;
};

// integrand(point, out) writes the two integrand values at `point`.
// With mc.escalate, the sample count grows tenfold (up to mc.max_samples)
// while |first - second| < 3 (se_first + se_second) and the paired
// difference is not identically zero.
PairedEstimate paired_box_integral(const Point& lo, const Point& hi, std::uint32_t stream, const MCParams& mc,
                                   const std::function<void(const double*, double*)>& integrand);

// Vol(union B(T x_i, r)) <= Vol(union B(x_i, r)).
CheckReport kp_union_check(const PointConfiguration& x, const ContractionSpec& t, const MCParams& mc);
// Vol(intersection B(T x_i, r)) >= Vol(intersection B(x_i, r)).
CheckReport kp_intersection_check(const PointConfiguration& x, const ContractionSpec& t, const MCParams& mc);
// Closed-form version for k = 2.
CheckReport kp_two_ball_intersection_check(const PointConfiguration& x, const ContractionSpec& t);

// h_n(T(X) + W) <= h_n(X + W) for X discrete on the centers with `weights`
// and W uniform on the ball of the configuration's radius; integer n >= 2.
CheckReport integer_renyi_check(const PointConfiguration& x, std::span<const double> weights, const ContractionSpec& t,
                                int order, const MCParams& mc);

}  // namespace kpent
