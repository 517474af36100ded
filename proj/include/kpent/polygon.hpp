#pragma once

#include <array>
#include <span>
#include <vector>

#include "kpent/linalg.hpp"

namespace kpent {

using Vec2 = std::array<double, 2>;

// Convex polygon with counterclockwise vertices and no collinear triples.
class ConvexPolygon {
 public:
  // Throws DomainError on fewer than 3 vertices, clockwise order, a
  // reflex vertex, or a turn whose cross product is below 1e-10.
  explicit ConvexPolygon(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  double area() const;
  double perimeter() const;
  bool contains(const Vec2& p, double slack = 0.0) const;

 private:
  std::vector<Vec2> vertices_;
};

inline constexpr double kCollinearTolerance = 1e-10;

// Andrew's monotone chain. Throws DegenerateError when the points do not
// span a region of positive area.
ConvexPolygon convex_hull(std::span<const Vec2> points);

struct IntrinsicVolumes2 {
  double v0 = 0.0;  // Euler characteristic
  double v1 = 0.0;  // half perimeter
  double v2 = 0.0;  // area
};

IntrinsicVolumes2 intrinsic_volumes_2d(const ConvexPolygon& k);

// Intrinsic volumes of conv(A K) for any 2x2 matrix A, including images that
// collapse to a segment or a point.
IntrinsicVolumes2 intrinsic_volumes_of_image(const ConvexPolygon& k, const Matrix& a);

ConvexPolygon linear_image(const ConvexPolygon& k, const Matrix& a);

// Shadow system along coordinate `axis`: each chord [t1, t2] in that
// direction becomes [-(t2-t1)/2, (t2-t1)/2] + lambda (t1+t2)/2.
ConvexPolygon shadow_system(const ConvexPolygon& k, int axis, double lambda);

// Area of K + rB (Steiner formula).
double parallel_body_area(const ConvexPolygon& k, double r);

}  // namespace kpent
