#include "kpent/ballgeom.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <chrono>
#include <cmath>
#include <numbers>

#include "kpent/errors.hpp"
#include "kpent/numeric.hpp"
#include "kpent/rng.hpp"

namespace kpent {

namespace {

constexpr std::uint32_t kUnionStream = 1;
constexpr std::uint32_t kIntersectionStream = 2;
constexpr std::uint32_t kRenyiStream = 3;

void bounding_box(const PointConfiguration& cfg, Point& lo, Point& hi) {
  const int d = cfg.dim();
  if (lo.empty()) {
    lo.assign(d, std::numeric_limits<double>::infinity());
    hi.assign(d, -std::numeric_limits<double>::infinity());
  }
  for (const auto& c : cfg.centers) {
    for (int a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], c[a] - cfg.radius);
      hi[a] = std::max(hi[a], c[a] + cfg.radius);
    }
  }
}

double box_volume(const Point& lo, const Point& hi) {
  double v = 1.0;
  for (std::size_t a = 0; a < lo.size(); ++a) v *= hi[a] - lo[a];
  return v;
}

bool inside(const double* p, const Point& c, double r2) {
  double s = 0.0;
  for (std::size_t a = 0; a < c.size(); ++a) {
    const double t = p[a] - c[a];
    s += t * t;
  }
  return s <= r2;
}

bool in_union(const double* p, const PointConfiguration& cfg, double r2) {
  for (const auto& c : cfg.centers)
    if (inside(p, c, r2)) return true;
  return false;
}

bool in_intersection(const double* p, const PointConfiguration& cfg, double r2) {
  for (const auto& c : cfg.centers)
    if (!inside(p, c, r2)) return false;
  return true;
}

ChannelMoments box_moments(const Point& lo, const Point& hi, std::uint32_t stream, std::uint64_t seed,
                           std::uint64_t begin, std::uint64_t end, int channels,
                           const std::function<void(const double*, double*)>& integrand) {
  const std::size_t d = lo.size();
  return mc_moments(begin, end, channels, [&](std::uint64_t i, double* out) {
    SampleStream s(seed, stream, i);
    double p[8];
    for (std::size_t a = 0; a < d; ++a) p[a] = s.uniform(lo[a], hi[a]);
    integrand(p, out);
  });
}

MCEstimate single_box_estimate(const Point& lo, const Point& hi, std::uint32_t stream, const MCParams& mc,
                               const std::function<bool(const double*)>& hit) {
  if (mc.samples < 10'000) throw DomainError("Monte Carlo volume estimates need at least 1e4 samples");
  const auto m = box_moments(lo, hi, stream, mc.seed, 0, mc.samples, 1, [&](const double* p, double* out) {
    out[0] = hit(p) ? 1.0 : 0.0;
  });
  const double v = box_volume(lo, hi);
  return {v * m.mean(0), v * m.std_error(0), m.n, mc.seed};
}

}  // namespace

void PointConfiguration::validate() const {
  if (centers.empty()) throw DomainError("configuration needs at least one center");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("configuration radius must be positive");
  const std::size_t d = centers.front().size();
  if (d < 1 || d > 8) throw DomainError("configuration dimension must be in 1..8");
  for (const auto& c : centers) {
    if (c.size() != d) throw DomainError("configuration centers differ in dimension");
    for (double v : c)
      if (!std::isfinite(v)) throw DomainError("configuration center is not finite");
  }
}

nlohmann::json to_json(const PointConfiguration& cfg) {
  return {{"dim", cfg.dim()}, {"radius", cfg.radius}, {"centers", cfg.centers}};
}

PointConfiguration configuration_from_json(const nlohmann::json& j) {
  PointConfiguration cfg;
  try {
    cfg.radius = j.at("radius").get<double>();
    cfg.centers = j.at("centers").get<std::vector<Point>>();
    if (j.contains("dim") && j.at("dim").get<int>() != cfg.dim()) throw ConfigError("configuration dim does not match centers");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad configuration JSON: ") + e.what());
  }
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

bool is_contractive_pair(const PointConfiguration& x, const PointConfiguration& y) {
  if (x.k() != y.k() || x.dim() != y.dim()) throw DomainError("configurations differ in size or dimension");
  for (int i = 0; i < x.k(); ++i)
    for (int j = i + 1; j < x.k(); ++j)
      if (distance(y.centers[i], y.centers[j]) > distance(x.centers[i], x.centers[j]) + 1e-12) return false;
  return true;
}

PointConfiguration map_configuration(const PointConfiguration& x, const ContractionSpec& t) {
  return {apply_map(t, x.centers), x.radius};
}

double ball_volume(int d, double r) { return unit_ball_volume(d) * std::pow(r, d); }

double lens_area(double dist, double r) {
  if (dist < 0.0 || !(r > 0.0)) throw DomainError("lens_area: need dist >= 0 and r > 0");
  if (dist >= 2.0 * r) return 0.0;
  return 2.0 * r * r * std::acos(dist / (2.0 * r)) - 0.5 * dist * std::sqrt(4.0 * r * r - dist * dist);
}

double two_ball_intersection_volume(double dist, double r, int d) {
  if (dist < 0.0 || !(r > 0.0) || d < 1) throw DomainError("two_ball_intersection_volume: bad arguments");
  if (dist >= 2.0 * r) return 0.0;
  if (dist == 0.0) return ball_volume(d, r);
  // Two caps of height r - dist/2: V_cap = V_ball/2 * I_{1 - (a/r)^2}((d+1)/2, 1/2).
  const double a = dist / 2.0;
  const double x = 1.0 - (a / r) * (a / r);
  return ball_volume(d, r) * boost::math::ibeta(0.5 * (d + 1), 0.5, x);
}

MCEstimate union_volume(const PointConfiguration& cfg, const MCParams& mc) {
  cfg.validate();
  Point lo, hi;
  bounding_box(cfg, lo, hi);
  const double r2 = cfg.radius * cfg.radius;
  return single_box_estimate(lo, hi, kUnionStream, mc, [&](const double* p) { return in_union(p, cfg, r2); });
}

MCEstimate intersection_volume(const PointConfiguration& cfg, const MCParams& mc) {
  cfg.validate();
  const PointConfiguration first{{cfg.centers.front()}, cfg.radius};
  Point lo, hi;
  bounding_box(first, lo, hi);
  const double r2 = cfg.radius * cfg.radius;
  return single_box_estimate(lo, hi, kIntersectionStream, mc,
                             [&](const double* p) { return in_intersection(p, cfg, r2); });
}

PairedEstimate paired_box_integral(const Point& lo, const Point& hi, std::uint32_t stream, const MCParams& mc,
                                   const std::function<void(const double*, double*)>& integrand) {
  if (mc.samples < 10'000) throw DomainError("paired Monte Carlo needs at least 1e4 samples");
  const double v = box_volume(lo, hi);
  std::uint64_t n = mc.samples;
  ChannelMoments m = box_moments(lo, hi, stream, mc.seed, 0, n, 2, integrand);
  while (true) {
    const double se = v * (m.std_error(0) + m.std_error(1));
    const double gap = v * std::abs(m.mean(0) - m.mean(1));
    const bool tight = gap < 3.0 * se;
    if (!mc.escalate || !tight || m.difference_variance(0, 1) == 0.0 || n >= mc.max_samples) break;
    const std::uint64_t next = std::min(n * 10, mc.max_samples);
    m.merge(box_moments(lo, hi, stream, mc.seed, n, next, 2, integrand));
    n = next;
  }
  PairedEstimate out;
  out.first = {v * m.mean(0), v * m.std_error(0), m.n, mc.seed};
  out.second = {v * m.mean(1), v * m.std_error(1), m.n, mc.seed};
  out.difference_variance = v * v * m.difference_variance(0, 1);
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

PointConfiguration checked_image(const PointConfiguration& x, const ContractionSpec& t) {
  x.validate();
  if (t.dim != x.dim()) throw DomainError("map dimension does not match the configuration");
  PointConfiguration y = map_configuration(x, t);
  if (!is_contractive_pair(x, y)) throw PreconditionError("mapped centers are not a contraction of the originals");
  return y;
}

CheckReport paired_report(const char* id, Relation rel, const PairedEstimate& e, const PointConfiguration& x,
                          std::uint64_t seed) {
  ToleranceBudget budget;
  budget.mc_stderr = e.first.std_error + e.second.std_error;
  CheckReport r = make_report(id, rel, e.first.value, e.second.value, budget, "mc/mc");
  r.k = x.k();
  r.d = x.dim();
  r.samples = e.first.samples;
  r.seed = seed;
  return r;
}

}  // namespace

CheckReport kp_union_check(const PointConfiguration& x, const ContractionSpec& t, const MCParams& mc) {
  const auto t0 = Clock::now();
  const PointConfiguration y = checked_image(x, t);
  Point lo, hi;
  bounding_box(x, lo, hi);
  bounding_box(y, lo, hi);
  const double r2 = x.radius * x.radius;
  const auto e = paired_box_integral(lo, hi, kUnionStream, mc, [&](const double* p, double* out) {
    out[0] = in_union(p, y, r2) ? 1.0 : 0.0;
    out[1] = in_union(p, x, r2) ? 1.0 : 0.0;
  });
  CheckReport r = paired_report("K1.1-kp-union", Relation::LessEq, e, x, mc.seed);
  r.runtime_ms = elapsed_ms(t0);
  return r;
}

CheckReport kp_intersection_check(const PointConfiguration& x, const ContractionSpec& t, const MCParams& mc) {
  const auto t0 = Clock::now();
  const PointConfiguration y = checked_image(x, t);
  Point lo, hi;
  bounding_box(PointConfiguration{{x.centers.front()}, x.radius}, lo, hi);
  bounding_box(PointConfiguration{{y.centers.front()}, x.radius}, lo, hi);
  const double r2 = x.radius * x.radius;
  const auto e = paired_box_integral(lo, hi, kIntersectionStream, mc, [&](const double* p, double* out) {
    out[0] = in_intersection(p, y, r2) ? 1.0 : 0.0;
    out[1] = in_intersection(p, x, r2) ? 1.0 : 0.0;
  });
  CheckReport r = paired_report("K1.3-kp-intersection", Relation::GreaterEq, e, x, mc.seed);
  r.runtime_ms = elapsed_ms(t0);
  return r;
}

CheckReport kp_two_ball_intersection_check(const PointConfiguration& x, const ContractionSpec& t) {
  const auto t0 = Clock::now();
  if (x.k() != 2) throw DomainError("closed-form intersection check needs exactly two balls");
  const PointConfiguration y = checked_image(x, t);
  const int d = x.dim();
  const double lhs = two_ball_intersection_volume(distance(y.centers[0], y.centers[1]), x.radius, d);
  const double rhs = two_ball_intersection_volume(distance(x.centers[0], x.centers[1]), x.radius, d);
  ToleranceBudget budget;
  budget.grid = 1e-12 * ball_volume(d, x.radius);
  CheckReport r = make_report("K1.3-kp-intersection", Relation::GreaterEq, lhs, rhs, budget, "closed-form/closed-form");
  r.k = 2;
  r.d = d;
  r.runtime_ms = elapsed_ms(t0);
  return r;
}

CheckReport integer_renyi_check(const PointConfiguration& x, std::span<const double> weights, const ContractionSpec& t,
                                int order, const MCParams& mc) {
  const auto t0 = Clock::now();
  if (order < 2) throw DomainError("integer Renyi check needs order >= 2");
  if (weights.size() != x.centers.size()) throw DomainError("one weight per center is required");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("weights must be nonnegative");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12) throw DomainError("weights must sum to 1");
  const PointConfiguration y = checked_image(x, t);
  const int d = x.dim();
  const double vb = ball_volume(d, x.radius);
  const double r2 = x.radius * x.radius;
  Point lo, hi;
  bounding_box(x, lo, hi);
  bounding_box(y, lo, hi);
  auto density = [&](const double* p, const PointConfiguration& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.centers.size(); ++i)
      if (inside(p, c.centers[i], r2)) s += weights[i];
    return s / vb;
  };
  const auto e = paired_box_integral(lo, hi, kRenyiStream, mc, [&](const double* p, double* out) {
    out[0] = std::pow(density(p, y), order);
    out[1] = std::pow(density(p, x), order);
  });
  // h_n = log(I) / (1 - n); its standard error by the delta method.
  const double n1 = static_cast<double>(order - 1);
  const double lhs = -std::log(e.first.value) / n1;
  const double rhs = -std::log(e.second.value) / n1;
  ToleranceBudget budget;
  budget.mc_stderr = e.first.std_error / (n1 * e.first.value) + e.second.std_error / (n1 * e.second.value);
  CheckReport r = make_report("C1.1-intenttrue", Relation::LessEq, lhs, rhs, budget, "mc/mc");
  r.k = x.k();
  r.d = d;
  r.param = "alpha=" + std::to_string(order);
  r.samples = e.first.samples;
  r.seed = mc.seed;
  r.runtime_ms = elapsed_ms(t0);
  return r;
}

}  // namespace kpent
