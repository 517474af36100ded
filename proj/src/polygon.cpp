#include "kpent/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kpent/errors.hpp"

namespace kpent {

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double edge_length(const Vec2& a, const Vec2& b) { return std::hypot(b[0] - a[0], b[1] - a[1]); }

}  // namespace

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw DomainError("polygon needs at least 3 vertices");
  for (const auto& v : vertices_)
    if (!std::isfinite(v[0]) || !std::isfinite(v[1])) throw DomainError("polygon vertex is not finite");
  for (std::size_t i = 0; i < n; ++i) {
    const double c = cross(vertices_[i], vertices_[(i + 1) % n], vertices_[(i + 2) % n]);
    if (std::abs(c) < kCollinearTolerance) throw DomainError("polygon has a (near-)collinear vertex");
    if (c < 0.0) throw DomainError("polygon is not convex and counterclockwise");
  }
  // A star polygon can turn left at every vertex; the winding must be one.
  double turn = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    const Vec2& c = vertices_[(i + 2) % n];
    const double h1 = std::atan2(b[1] - a[1], b[0] - a[0]);
    const double h2 = std::atan2(c[1] - b[1], c[0] - b[0]);
    double t = h2 - h1;
    while (t <= -std::numbers::pi) t += 2.0 * std::numbers::pi;
    while (t > std::numbers::pi) t -= 2.0 * std::numbers::pi;
    turn += t;
  }
  if (std::abs(turn - 2.0 * std::numbers::pi) > 1e-6) throw DomainError("polygon winds more than once");
}

double ConvexPolygon::area() const {
  double s = 0.0;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    s += a[0] * b[1] - a[1] * b[0];
  }
  return 0.5 * s;
}

double ConvexPolygon::perimeter() const {
  double s = 0.0;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) s += edge_length(vertices_[i], vertices_[(i + 1) % n]);
  return s;
}

bool ConvexPolygon::contains(const Vec2& p, double slack) const {
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    if (cross(a, b, p) < -slack * edge_length(a, b)) return false;
  }
  return true;
}

namespace {

std::vector<Vec2> hull_points(std::span<const Vec2> points) {
  std::vector<Vec2> p(points.begin(), points.end());
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  std::vector<Vec2> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= kCollinearTolerance) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= kCollinearTolerance) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return h;
}

}  // namespace

ConvexPolygon convex_hull(std::span<const Vec2> points) {
  auto h = hull_points(points);
  if (h.size() < 3) throw DegenerateError("convex hull has no interior");
  return ConvexPolygon(std::move(h));
}

IntrinsicVolumes2 intrinsic_volumes_2d(const ConvexPolygon& k) { return {1.0, 0.5 * k.perimeter(), k.area()}; }

IntrinsicVolumes2 intrinsic_volumes_of_image(const ConvexPolygon& k, const Matrix& a) {
  std::vector<Vec2> img;
  for (const auto& v : k.vertices()) img.push_back({a(0, 0) * v[0] + a(0, 1) * v[1], a(1, 0) * v[0] + a(1, 1) * v[1]});
  const auto h = hull_points(img);
  if (h.size() >= 3) return intrinsic_volumes_2d(ConvexPolygon(h));
  // Segment or point: half perimeter of a segment is its length.
  double diam = 0.0;
  for (const auto& p : img)
    for (const auto& q : img) diam = std::max(diam, edge_length(p, q));
  return {1.0, diam, 0.0};
}

ConvexPolygon linear_image(const ConvexPolygon& k, const Matrix& a) {
  std::vector<Vec2> img;
  for (const auto& v : k.vertices()) img.push_back({a(0, 0) * v[0] + a(0, 1) * v[1], a(1, 0) * v[0] + a(1, 1) * v[1]});
  return convex_hull(img);
}

ConvexPolygon shadow_system(const ConvexPolygon& k, int axis, double lambda) {
  if (axis != 0 && axis != 1) throw DomainError("shadow_system: axis must be 0 or 1");
  if (!(lambda >= -1.0 && lambda <= 1.0)) throw DomainError("shadow_system: lambda must lie in [-1, 1]");
  const int along = axis;
  const int across = 1 - axis;
  const auto& v = k.vertices();
  const std::size_t n = v.size();
  std::vector<Vec2> out;
  for (const auto& level_vertex : v) {
    const double y = level_vertex[across];
    double t1 = std::numeric_limits<double>::infinity();
    double t2 = -t1;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& p = v[i];
      const Vec2& q = v[(i + 1) % n];
      const double lo = std::min(p[across], q[across]);
      const double hi = std::max(p[across], q[across]);
      if (y < lo || y > hi) continue;
      if (p[across] == q[across]) {
        t1 = std::min({t1, p[along], q[along]});
        t2 = std::max({t2, p[along], q[along]});
        continue;
      }
      double t;
      if (y == p[across]) t = p[along];
      else if (y == q[across]) t = q[along];
      else t = p[along] + (y - p[across]) * (q[along] - p[along]) / (q[across] - p[across]);
      t1 = std::min(t1, t);
      t2 = std::max(t2, t);
    }
    const double lower = t1 * (1.0 + lambda) / 2.0 + t2 * (lambda - 1.0) / 2.0;
    const double upper = t2 * (1.0 + lambda) / 2.0 + t1 * (lambda - 1.0) / 2.0;
    Vec2 a{};
    Vec2 b{};
    a[along] = lower;
    a[across] = y;
    b[along] = upper;
    b[across] = y;
    out.push_back(a);
    out.push_back(b);
  }
  return convex_hull(out);
}

double parallel_body_area(const ConvexPolygon& k, double r) {
  if (r < 0.0) throw DomainError("parallel_body_area: radius must be nonnegative");
  return k.area() + k.perimeter() * r + std::numbers::pi * r * r;
}

}  // namespace kpent
