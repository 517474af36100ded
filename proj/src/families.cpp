#include "kpent/families.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "kpent/errors.hpp"
#include "kpent/numeric.hpp"

namespace kpent {

namespace {

Vec or_zero(Vec v, std::size_t d) {
  if (v.empty()) v.assign(d, 0.0);
  return v;
}

LawSpec make(std::string family, Vec scale, Vec center) {
  LawSpec l;
  l.family = std::move(family);
  l.dim = static_cast<int>(scale.size());
  l.center = or_zero(std::move(center), scale.size());
  l.scale = std::move(scale);
  l.validate();
  return l;
}

double norm_from(std::span<const double> x, const Vec& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
  return std::sqrt(s);
}

}  // namespace

LawSpec LawSpec::gaussian(Vec sigma, Vec center) { return make("gaussian", std::move(sigma), std::move(center)); }
LawSpec LawSpec::uniform_box(Vec half_width, Vec center) {
  return make("uniform_box", std::move(half_width), std::move(center));
}
LawSpec LawSpec::laplace(Vec scale, Vec center) { return make("laplace", std::move(scale), std::move(center)); }

LawSpec LawSpec::radial(int dim, double scale, double power) {
  LawSpec l = make("radial", Vec(dim, scale), {});
  l.power = power;
  l.validate();
  return l;
}

LawSpec LawSpec::uniform_ball(int dim, double radius) { return make("uniform_ball", Vec(dim, radius), {}); }

LawSpec LawSpec::gaussian_mixture(int dim, double scale, double separation) {
  LawSpec l = make("gaussian_mixture", Vec(dim, scale), {});
  l.separation = separation;
  return l;
}

void LawSpec::validate() const {
  static const char* known[] = {"gaussian", "uniform_box", "laplace", "radial", "uniform_ball", "gaussian_mixture"};
  if (std::find(std::begin(known), std::end(known), family) == std::end(known)) {
    throw ConfigError("unknown distribution family '" + family + "'");
  }
  if (dim < 1 || dim > 3) throw ConfigError("distribution dim must be 1, 2 or 3");
  if (scale.size() != static_cast<std::size_t>(dim) || center.size() != static_cast<std::size_t>(dim)) {
    throw ConfigError("distribution scale/center length must equal dim");
  }
  for (double s : scale)
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("distribution scales must be positive");
  if (family == "radial" && !(power >= 1.0 && power <= 2.0)) throw ConfigError("radial power must lie in [1, 2]");
}

double LawSpec::density(std::span<const double> x) const {
  if (family == "gaussian") {
    double q = 0.0;
    for (int i = 0; i < dim; ++i) q += std::pow((x[i] - center[i]) / scale[i], 2);
    return std::exp(-0.5 * q);
  }
  if (family == "uniform_box") {
    for (int i = 0; i < dim; ++i)
      if (std::abs(x[i] - center[i]) > scale[i]) return 0.0;
    return 1.0;
  }
  if (family == "laplace") {
    double q = 0.0;
    for (int i = 0; i < dim; ++i) q += std::abs(x[i] - center[i]) / scale[i];
    return std::exp(-q);
  }
  if (family == "radial") return std::exp(-std::pow(norm_from(x, center) / scale[0], power));
  if (family == "uniform_ball") return norm_from(x, center) <= scale[0] ? 1.0 : 0.0;
  // gaussian_mixture
  double q0 = 0.0;
  for (int i = 1; i < dim; ++i) q0 += std::pow((x[i] - center[i]) / scale[i], 2);
  const double u = (x[0] - center[0]) / scale[0];
  return std::exp(-0.5 * (q0 + (u - separation) * (u - separation))) +
         std::exp(-0.5 * (q0 + (u + separation) * (u + separation)));
}

double LawSpec::extent() const {
  double s = 0.0;
  for (double v : scale) s = std::max(s, v);
  if (family == "gaussian") return 8.0 * s;
  if (family == "uniform_box" || family == "uniform_ball") return s;
  if (family == "laplace") return 33.0 * s;
  if (family == "radial") return s * std::pow(36.0, 1.0 / power);
  return s * (8.0 + separation);
}

double LawSpec::core_extent(double tail) const {
  if (!(tail > 0.0 && tail < 1.0)) return extent();
  double s = 0.0;
  for (double v : scale) s = std::max(s, v);
  const double per_axis = tail / dim;
  double r = extent();
  if (family == "gaussian") r = s * std::numbers::sqrt2 * boost::math::erfc_inv(per_axis);
  else if (family == "laplace") r = s * std::log(1.0 / per_axis);
  else if (family == "radial") r = s * std::pow(boost::math::gamma_q_inv(dim / power, tail), 1.0 / power);
  else if (family == "gaussian_mixture") r = s * (separation + std::numbers::sqrt2 * boost::math::erfc_inv(per_axis));
  return std::min(r, extent());
}

bool LawSpec::log_concave() const { return family != "gaussian_mixture" || separation <= 1.0; }

bool LawSpec::unconditional() const {
  for (double c : center)
    if (c != 0.0) return false;
  return true;
}

bool LawSpec::radially_symmetric() const {
  if (!unconditional()) return false;
  if (family == "radial" || family == "uniform_ball") return true;
  if (family == "gaussian") {
    for (double v : scale)
      if (v != scale[0]) return false;
    return true;
  }
  return dim == 1 && family != "gaussian_mixture";
}

bool LawSpec::unimodal() const { return log_concave(); }

Point LawSpec::sample(SampleStream& s) const {
  Point x(dim);
  if (family == "gaussian") {
    for (int i = 0; i < dim; ++i) x[i] = center[i] + scale[i] * s.normal();
  } else if (family == "uniform_box") {
    for (int i = 0; i < dim; ++i) x[i] = center[i] + scale[i] * (2.0 * s.uniform() - 1.0);
  } else if (family == "laplace") {
    for (int i = 0; i < dim; ++i) {
      const double e = -std::log(s.uniform());
      x[i] = center[i] + scale[i] * (s.uniform() < 0.5 ? -e : e);
    }
  } else if (family == "uniform_ball" || family == "radial") {
    double r2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      x[i] = s.normal();
      r2 += x[i] * x[i];
    }
    const double r = std::sqrt(r2);
    double radius;
    if (family == "uniform_ball") {
      radius = scale[0] * std::pow(s.uniform(), 1.0 / dim);
    } else {
      // |X|/scale has density r^(d-1) exp(-r^p): (|X|/scale)^p ~ Gamma(d/p).
      const double shape = static_cast<double>(dim) / power;
      double g;
      // Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
      const double a = shape < 1.0 ? shape + 1.0 : shape;
      const double dd = a - 1.0 / 3.0;
      const double c = 1.0 / std::sqrt(9.0 * dd);
      while (true) {
        const double z = s.normal();
        const double v0 = 1.0 + c * z;
        if (v0 <= 0.0) continue;
        const double v = v0 * v0 * v0;
        const double u = s.uniform();
        if (std::log(u) < 0.5 * z * z + dd - dd * v + dd * std::log(v)) {
          g = dd * v;
          break;
        }
      }
      if (shape < 1.0) g *= std::pow(s.uniform(), 1.0 / shape);
      radius = scale[0] * std::pow(g, 1.0 / power);
    }
    for (int i = 0; i < dim; ++i) x[i] = center[i] + radius * x[i] / r;
  } else {
    const double sign = s.uniform() < 0.5 ? -1.0 : 1.0;
    for (int i = 0; i < dim; ++i) x[i] = center[i] + scale[i] * (s.normal() + (i == 0 ? sign * separation : 0.0));
  }
  return x;
}

std::optional<double> LawSpec::entropy() const {
  double logdet = 0.0;
  for (double v : scale) logdet += std::log(v);
  const double d = static_cast<double>(dim);
  if (family == "gaussian") return 0.5 * d * std::log(2.0 * std::numbers::pi * std::numbers::e) + logdet;
  if (family == "uniform_box") return d * std::log(2.0) + logdet;
  if (family == "laplace") return d * (1.0 + std::log(2.0)) + logdet;
  if (family == "uniform_ball") return std::log(unit_ball_volume(dim)) + d * std::log(scale[0]);
  if (family == "radial") {
    // Normalizer Z = s^d * d * omega_d * Gamma(d/p) / p; h = log Z + d/p.
    const double logz = d * std::log(scale[0]) + std::log(d * unit_ball_volume(dim)) + std::lgamma(d / power) - std::log(power);
    return logz + d / power;
  }
  return std::nullopt;
}

nlohmann::json to_json(const LawSpec& law) {
  nlohmann::json j{{"family", law.family}, {"dim", law.dim}, {"scale", law.scale}, {"center", law.center}};
  if (law.family == "radial") j["power"] = law.power;
  if (law.family == "gaussian_mixture") j["separation"] = law.separation;
  return j;
}

LawSpec law_from_json(const nlohmann::json& j) {
  LawSpec l;
  try {
    l.family = j.at("family").get<std::string>();
    l.dim = j.value("dim", 1);
    l.scale = j.value("scale", Vec(l.dim, 1.0));
    l.center = j.value("center", Vec(l.dim, 0.0));
    l.power = j.value("power", 2.0);
    l.separation = j.value("separation", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad distribution: ") + e.what());
  }
  l.validate();
  return l;
}

DensityGrid grid_law(const LawSpec& law, double spacing, double tail) {
  law.validate();
  GridSpec s;
  s.dim = law.dim;
  s.spacing = spacing;
  for (int i = 0; i < law.dim; ++i) {
    const double half = law.family == "uniform_box" ? law.scale[i] : law.core_extent(tail);
    const auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(2.0 * half / spacing)));
    s.origin.push_back(law.center[i] - 0.5 * static_cast<double>(n) * spacing);
    s.shape.push_back(n);
  }
  return make_grid(s, [&law](std::span<const double> x) { return law.density(x); });
}

double common_spacing(std::span<const LawSpec> laws, std::int64_t cells, double tail) {
  if (cells < 2) throw ConfigError("grid needs at least 2 cells per axis");
  double w = 0.0;
  for (const auto& l : laws) w = std::max(w, 2.0 * l.core_extent(tail));
  return w / static_cast<double>(cells);
}

bool grid_is_log_concave_1d(const DensityGrid& f, double tol) {
  if (f.dim() != 1) throw DomainError("log-concavity test is 1-D only");
  const auto m = f.masses();
  std::size_t first = 0;
  while (first < m.size() && m[first] == 0.0) ++first;
  std::size_t last = m.size();
  while (last > first && m[last - 1] == 0.0) --last;
  for (std::size_t i = first; i < last; ++i)
    if (m[i] == 0.0) return false;  // support must be an interval
  for (std::size_t i = first + 1; i + 1 < last; ++i) {
    if (std::log(m[i - 1]) - 2.0 * std::log(m[i]) + std::log(m[i + 1]) > tol) return false;
  }
  return true;
}

LawSpec random_log_concave_law(SampleStream& s, int dim, bool centered) {
  static const char* families[] = {"gaussian", "uniform_box", "laplace", "radial"};
  const std::string fam = families[s.next_u64() % 4];
  Vec scale(dim), center(dim, 0.0);
  for (auto& v : scale) v = s.uniform(0.5, 2.0);
  if (!centered)
    for (auto& c : center) c = s.uniform(-1.0, 1.0);
  if (fam == "radial") {
    LawSpec l = LawSpec::radial(dim, scale[0], s.uniform(1.0, 2.0));
    l.center = center;
    return l;
  }
  return make(fam, scale, center);
}

LawSpec random_radial_law(SampleStream& s, int dim) {
  if (s.uniform() < 0.25) return LawSpec::uniform_ball(dim, s.uniform(0.5, 2.0));
  return LawSpec::radial(dim, s.uniform(0.5, 2.0), s.uniform(1.0, 2.0));
}

Matrix random_orthogonal(SampleStream& s, int dim) {
  Matrix q(dim, dim);
  while (true) {
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) q(i, j) = s.normal();
    bool ok = true;
    // Gram-Schmidt on columns.
    for (int j = 0; j < dim && ok; ++j) {
      for (int k = 0; k < j; ++k) {
        double p = 0.0;
        for (int i = 0; i < dim; ++i) p += q(i, j) * q(i, k);
        for (int i = 0; i < dim; ++i) q(i, j) -= p * q(i, k);
      }
      double n = 0.0;
      for (int i = 0; i < dim; ++i) n += q(i, j) * q(i, j);
      n = std::sqrt(n);
      if (n < 1e-8) ok = false;
      for (int i = 0; i < dim && ok; ++i) q(i, j) /= n;
    }
    if (ok) return q;
  }
}

ContractionSpec random_affine_contraction(SampleStream& s, int dim, double lo, double hi, double shift) {
  Vec sv(dim);
  for (auto& v : sv) v = s.uniform(lo, hi);
  const Matrix a = random_orthogonal(s, dim) * Matrix::diagonal(sv) * random_orthogonal(s, dim);
  // Rounding can push the top singular value a hair above 1.
  const double top = svd(a).singular.front();
  const Matrix scaled = top > 1.0 ? (1.0 / top) * a : a;
  Vec b(dim);
  for (auto& v : b) v = shift > 0.0 ? s.uniform(-shift, shift) : 0.0;
  return ContractionSpec::affine(scaled, b);
}

ContractionSpec random_diagonal_contraction(SampleStream& s, int dim) {
  Vec l(dim);
  for (auto& v : l) v = s.uniform(-1.0, 1.0);
  return ContractionSpec::diagonal(l);
}

namespace {

ScalarMap random_component(SampleStream& s) {
  switch (s.next_u64() % 5) {
    case 0: return ScalarMap::linear(s.uniform(-1.0, 1.0), s.uniform(-0.5, 0.5));
    case 1: return ScalarMap::soft_clamp(s.uniform(0.5, 3.0));
    case 2: return ScalarMap::compose({ScalarMap::linear(s.uniform(0.3, 1.0), s.uniform(-0.5, 0.5)), ScalarMap::soft_clamp(s.uniform(0.5, 3.0))});
    case 3: {
      const double lo = s.uniform(-3.0, -0.5);
      return ScalarMap::clamp(lo, lo + s.uniform(1.0, 5.0));
    }
    default: {
      const double amp = s.uniform(0.3, 2.0);
      return ScalarMap::sine(amp, s.uniform(0.1, 1.0) / amp);
    }
  }
}

}  // namespace

ContractionSpec random_coordinatewise_contraction(SampleStream& s, int dim) {
  std::vector<ScalarMap> comps;
  for (int i = 0; i < dim; ++i) comps.push_back(random_component(s));
  ContractionSpec t = ContractionSpec::coordinatewise(std::move(comps));
  double lip = 0.0;
  for (const auto& c : std::get<CoordinatewiseMap>(t.kind).components) lip = std::max(lip, c.lipschitz());
  if (lip > 0.0) t.declared_lip = std::min(1.0, lip);
  return t;
}

ContractionSpec random_gradient_contraction(SampleStream& s, int dim) {
  if (s.uniform() < 0.5) {
    const Matrix q = random_orthogonal(s, dim);
    Vec ev(dim);
    for (auto& v : ev) v = s.uniform(0.0, 1.0);
    Matrix sym = q * Matrix::diagonal(ev) * q.transposed();
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < i; ++j) sym(i, j) = sym(j, i);
    const double top = symmetric_eigen(sym).values.front();
    if (top > 1.0) sym = (1.0 / top) * sym;
    return ContractionSpec::quadratic_gradient(sym);
  }
  return ContractionSpec::ball_projection(dim, s.uniform(0.5, 3.0));
}

ContractionSpec random_sampled_contraction(SampleStream& s, int dim) {
  const ContractionSpec inner = random_affine_contraction(s, dim, 0.3, 1.0, 0.5);
  const AffineMap a = inner.as_affine();
  const Matrix q = random_orthogonal(s, dim);
  Vec widths(dim);
  for (auto& w : widths) w = s.uniform(0.5, 3.0);
  auto map = [a, q, widths](std::span<const double> x) {
    Point y = a.a * x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = widths[i] * std::tanh((y[i] + a.b[i]) / widths[i]);
    return q * std::span<const double>(y);
  };
  ContractionSpec t = ContractionSpec::sampled(dim, map, "rotated_soft_clamp");
  t.declared_lip = 1.0;
  return t;
}

ContractionSpec random_contraction(SampleStream& s, int dim, const std::string& kind) {
  if (kind == "affine") return random_affine_contraction(s, dim);
  if (kind == "diagonal") return random_diagonal_contraction(s, dim);
  if (kind == "coordinatewise") return random_coordinatewise_contraction(s, dim);
  if (kind == "gradient_convex") return random_gradient_contraction(s, dim);
  if (kind == "sampled") return random_sampled_contraction(s, dim);
  throw ConfigError("unknown map kind '" + kind + "'");
}

}  // namespace kpent
