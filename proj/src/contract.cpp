#include "kpent/contract.hpp"

#include <algorithm>
#include <cmath>

#include "kpent/errors.hpp"
#include "kpent/numeric.hpp"
#include "kpent/rng.hpp"

namespace kpent {

// --- ScalarMap -----------------------------------------------------------------

double ScalarMap::operator()(double x) const {
  switch (kind) {
    case Kind::Linear: return a * x + b;
    case Kind::SoftClamp: return a * std::tanh(x / a);
    case Kind::Clamp: return std::clamp(x, a, b);
    case Kind::Sine: return a * std::sin(b * x);
    case Kind::Abs: return std::abs(x);
    case Kind::Compose:
      for (const auto& p : parts) x = p(x);
      return x;
  }
  return x;
}

double ScalarMap::lipschitz() const {
  switch (kind) {
    case Kind::Linear: return std::abs(a);
    case Kind::SoftClamp: return 1.0;
    case Kind::Clamp: return 1.0;
    case Kind::Sine: return std::abs(a * b);
    case Kind::Abs: return 1.0;
    case Kind::Compose: {
      double l = 1.0;
      for (const auto& p : parts) l *= p.lipschitz();
      return l;
    }
  }
  return 1.0;
}

namespace {

const char* scalar_kind_name(ScalarMap::Kind k) {
  switch (k) {
    case ScalarMap::Kind::Linear: return "linear";
    case ScalarMap::Kind::SoftClamp: return "soft_clamp";
    case ScalarMap::Kind::Clamp: return "clamp";
    case ScalarMap::Kind::Sine: return "sine";
    case ScalarMap::Kind::Abs: return "abs";
    case ScalarMap::Kind::Compose: return "compose";
  }
  return "?";
}

nlohmann::json scalar_to_json(const ScalarMap& m) {
  nlohmann::json j{{"kind", scalar_kind_name(m.kind)}};
  if (m.kind == ScalarMap::Kind::Compose) {
    j["parts"] = nlohmann::json::array();
    for (const auto& p : m.parts) j["parts"].push_back(scalar_to_json(p));
  } else if (m.kind != ScalarMap::Kind::Abs) {
    j["a"] = m.a;
    j["b"] = m.b;
  }
  return j;
}

ScalarMap scalar_from_json(const nlohmann::json& j) {
  const std::string k = j.at("kind").get<std::string>();
  const double a = j.value("a", 1.0);
  const double b = j.value("b", 0.0);
  if (k == "linear") return ScalarMap::linear(a, b);
  if (k == "soft_clamp") return ScalarMap::soft_clamp(a);
  if (k == "clamp") return ScalarMap::clamp(a, b);
  if (k == "sine") return ScalarMap::sine(a, b);
  if (k == "abs") return ScalarMap::abs();
  if (k == "compose") {
    std::vector<ScalarMap> parts;
    for (const auto& p : j.at("parts")) parts.push_back(scalar_from_json(p));
    return ScalarMap::compose(std::move(parts));
  }
  throw ConfigError("unknown scalar map kind '" + k + "'");
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const std::size_t n = j.size();
  Matrix m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    if (j[r].size() != n) throw ConfigError("matrix must be square");
    for (std::size_t c = 0; c < n; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

double largest_singular_value(const Matrix& a) {
  const std::size_t n = a.rows();
  const Matrix ata = a.transposed() * a;
  Vec v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i);
  double nv = norm(v);
  for (auto& x : v) x /= nv;
  double prev = -1.0;
  for (int it = 0; it < 20000; ++it) {
    Vec w = ata * std::span<const double>(v);
    const double rq = dot(v, w);
    const double nw = norm(w);
    if (nw == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
    if (std::abs(rq - prev) <= 1e-15 * std::max(1.0, rq) && it > 2) {
      // Confirm it is an eigenvector: residual of A'A v - rq v.
      Vec r = ata * std::span<const double>(v);
      double res = 0.0;
      const double rq2 = dot(v, r);
      for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(r[i] - rq2 * v[i]));
      if (res <= 1e-10 * std::max(1.0, rq2)) return std::sqrt(std::max(0.0, rq2));
    }
    prev = rq;
  }
  return svd(a).singular.front();
}

}  // namespace

// --- ContractionSpec -------------------------------------------------------------

ContractionSpec ContractionSpec::identity(int dim) { return affine(Matrix::identity(dim)); }

ContractionSpec ContractionSpec::affine(Matrix a, Vec b) {
  if (!a.square() || a.rows() < 1) throw DomainError("affine map needs a square matrix");
  const int d = static_cast<int>(a.rows());
  if (b.empty()) b.assign(d, 0.0);
  if (b.size() != a.rows()) throw DomainError("affine shift has the wrong length");
  ContractionSpec t;
  t.dim = d;
  t.kind = AffineMap{std::move(a), std::move(b)};
  t.validate();
  return t;
}

ContractionSpec ContractionSpec::scaling(int dim, double factor) {
  return diagonal(Vec(dim, factor));
}

ContractionSpec ContractionSpec::diagonal(Vec lambda) {
  ContractionSpec t;
  t.dim = static_cast<int>(lambda.size());
  t.kind = DiagonalMap{std::move(lambda)};
  t.validate();
  return t;
}

ContractionSpec ContractionSpec::coordinatewise(std::vector<ScalarMap> components) {
  ContractionSpec t;
  t.dim = static_cast<int>(components.size());
  t.kind = CoordinatewiseMap{std::move(components)};
  t.validate();
  return t;
}

ContractionSpec ContractionSpec::quadratic_gradient(Matrix q, Vec shift) {
  const int d = static_cast<int>(q.rows());
  if (shift.empty()) shift.assign(d, 0.0);
  GradientConvexMap g;
  g.kind = GradientConvexMap::Kind::Quadratic;
  g.q = std::move(q);
  g.shift = std::move(shift);
  g.name = "quadratic";
  ContractionSpec t;
  t.dim = d;
  t.kind = std::move(g);
  t.validate();
  return t;
}

ContractionSpec ContractionSpec::ball_projection(int dim, double radius, Vec center) {
  if (center.empty()) center.assign(dim, 0.0);
  GradientConvexMap g;
  g.kind = GradientConvexMap::Kind::BallProjection;
  g.radius = radius;
  g.shift = std::move(center);
  g.name = "ball_projection";
  ContractionSpec t;
  t.dim = dim;
  t.kind = std::move(g);
  t.validate();
  return t;
}

ContractionSpec ContractionSpec::gradient(int dim, std::function<Point(std::span<const double>)> grad, std::string name) {
  GradientConvexMap g;
  g.kind = GradientConvexMap::Kind::Custom;
  g.gradient = std::move(grad);
  g.name = std::move(name);
  ContractionSpec t;
  t.dim = dim;
  t.kind = std::move(g);
  return t;
}

ContractionSpec ContractionSpec::sampled(int dim, std::function<Point(std::span<const double>)> map, std::string name) {
  ContractionSpec t;
  t.dim = dim;
  t.kind = SampledMap{std::move(map), std::move(name)};
  return t;
}

Point ContractionSpec::apply(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dim)) throw DomainError("apply: point dimension does not match the map");
  return std::visit(
      [&](const auto& k) -> Point {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, AffineMap>) {
          Point y = k.a * x;
          for (int i = 0; i < dim; ++i) y[i] += k.b[i];
          return y;
        } else if constexpr (std::is_same_v<K, DiagonalMap>) {
          Point y(dim);
          for (int i = 0; i < dim; ++i) y[i] = k.lambda[i] * x[i];
          return y;
        } else if constexpr (std::is_same_v<K, CoordinatewiseMap>) {
          Point y(dim);
          for (int i = 0; i < dim; ++i) y[i] = k.components[i](x[i]);
          return y;
        } else if constexpr (std::is_same_v<K, GradientConvexMap>) {
          switch (k.kind) {
            case GradientConvexMap::Kind::Quadratic: {
              Point y = k.q * x;
              for (int i = 0; i < dim; ++i) y[i] += k.shift[i];
              return y;
            }
            case GradientConvexMap::Kind::BallProjection: {
              Point y(dim);
              double r2 = 0.0;
              for (int i = 0; i < dim; ++i) {
                y[i] = x[i] - k.shift[i];
                r2 += y[i] * y[i];
              }
              const double r = std::sqrt(r2);
              const double s = r > k.radius ? k.radius / r : 1.0;
              for (int i = 0; i < dim; ++i) y[i] = k.shift[i] + s * y[i];
              return y;
            }
            case GradientConvexMap::Kind::Custom: {
              Point y = k.gradient(x);
              if (y.size() != static_cast<std::size_t>(dim)) throw DomainError("gradient returned wrong dimension");
              return y;
            }
          }
          return Point(x.begin(), x.end());
        } else {
          Point y = k.map(x);
          if (y.size() != static_cast<std::size_t>(dim)) throw DomainError("sampled map returned wrong dimension");
          return y;
        }
      },
      kind);
}

std::string ContractionSpec::kind_name() const {
  switch (kind.index()) {
    case 0: return "affine";
    case 1: return "diagonal";
    case 2: return "coordinatewise";
    case 3: return "gradient_convex";
    default: return "sampled";
  }
}

AffineMap ContractionSpec::as_affine() const {
  if (const auto* a = std::get_if<AffineMap>(&kind)) return *a;
  if (const auto* d = std::get_if<DiagonalMap>(&kind)) return {Matrix::diagonal(d->lambda), Vec(dim, 0.0)};
  if (const auto* g = std::get_if<GradientConvexMap>(&kind); g && g->kind == GradientConvexMap::Kind::Quadratic) {
    return {g->q, g->shift};
  }
  throw PreconditionError("map of kind " + kind_name() + " is not affine");
}

void ContractionSpec::validate() const {
  if (dim < 1) throw DomainError("map dimension must be positive");
  if (declared_lip && !(*declared_lip > 0.0 && *declared_lip <= 1.0)) {
    throw DomainError("declared Lipschitz constant must lie in (0, 1]");
  }
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, AffineMap>) {
          if (k.a.rows() != static_cast<std::size_t>(dim) || !k.a.square()) throw DomainError("affine matrix has the wrong shape");
          if (svd(k.a).singular.front() > 1.0 + 1e-12) throw DomainError("affine map is not a contraction");
        } else if constexpr (std::is_same_v<K, DiagonalMap>) {
          for (double l : k.lambda)
            if (!(std::abs(l) <= 1.0)) throw DomainError("diagonal entries must satisfy |lambda| <= 1");
        } else if constexpr (std::is_same_v<K, CoordinatewiseMap>) {
          for (const auto& c : k.components)
            if (c.lipschitz() > 1.0 + 1e-12) throw DomainError("coordinate component is not 1-Lipschitz");
        } else if constexpr (std::is_same_v<K, GradientConvexMap>) {
          if (k.kind == GradientConvexMap::Kind::Quadratic) {
            if (k.q.rows() != static_cast<std::size_t>(dim) || !is_symmetric(k.q, 1e-12)) {
              throw DomainError("quadratic potential needs a symmetric matrix");
            }
            const auto eig = symmetric_eigen(k.q);
            if (eig.values.back() < -1e-12) throw DomainError("quadratic potential is not convex");
            if (eig.values.front() > 1.0 + 1e-12) throw DomainError("quadratic gradient is not a contraction");
          } else if (k.kind == GradientConvexMap::Kind::BallProjection) {
            if (!(k.radius > 0.0)) throw DomainError("projection radius must be positive");
          }
        }
      },
      kind);
}

bool ContractionSpec::ephemeral() const {
  if (std::holds_alternative<SampledMap>(kind)) return true;
  if (const auto* g = std::get_if<GradientConvexMap>(&kind)) return g->kind == GradientConvexMap::Kind::Custom;
  return false;
}

// --- Lipschitz constants -------------------------------------------------------

namespace {

template <class Visit>
void for_probe_pairs(const ContractionSpec& t, const ProbeOptions& probe, Visit&& visit) {
  const int d = t.dim;
  Point x(d), y(d);
  for (std::uint64_t i = 0; i < probe.pairs; ++i) {
    SampleStream s(probe.seed, 0x11u, i);
    // Alternate far pairs and near pairs to catch local slopes.
    const double scale = (i % 2 == 0) ? probe.box : probe.box * 1e-3;
    for (int a = 0; a < d; ++a) x[a] = s.uniform(-probe.box, probe.box);
    for (int a = 0; a < d; ++a) y[a] = (i % 2 == 0) ? s.uniform(-probe.box, probe.box) : x[a] + s.uniform(-scale, scale);
    // Every fourth near pair differs in a single coordinate only.
    if (i % 4 == 1) {
      const int keep = static_cast<int>(s.next_u64() % static_cast<std::uint64_t>(d));
      for (int a = 0; a < d; ++a)
        if (a != keep) y[a] = x[a];
    }
    visit(x, y);
  }
}

}  // namespace

LipschitzEstimate lipschitz_constant(const ContractionSpec& t, const ProbeOptions& probe) {
  if (const auto* d = std::get_if<DiagonalMap>(&t.kind)) {
    double m = 0.0;
    for (double l : d->lambda) m = std::max(m, std::abs(l));
    return {m, true, 0};
  }
  if (const auto* a = std::get_if<AffineMap>(&t.kind)) return {largest_singular_value(a->a), true, 0};
  if (probe.pairs < 2) throw DomainError("Lipschitz probe needs at least 2 pairs");
  double best = 0.0;
  std::uint64_t used = 0;
  for_probe_pairs(t, probe, [&](const Point& x, const Point& y) {
    const double dx = distance(x, y);
    if (dx == 0.0) return;
    const double dy = distance(t.apply(x), t.apply(y));
    best = std::max(best, dy / dx);
    ++used;
  });
  if (used == 0) throw NumericError("Lipschitz probe: every pair was degenerate");
  return {best, false, used};
}

double certified_lipschitz(const ContractionSpec& t) {
  if (t.declared_lip) return *t.declared_lip;
  if (t.is_affine()) return lipschitz_constant(t).value;
  if (const auto* c = std::get_if<CoordinatewiseMap>(&t.kind)) {
    double m = 0.0;
    for (const auto& s : c->components) m = std::max(m, s.lipschitz());
    return m;
  }
  if (const auto* g = std::get_if<GradientConvexMap>(&t.kind)) {
    if (g->kind == GradientConvexMap::Kind::Quadratic) return symmetric_eigen(g->q).values.front();
    if (g->kind == GradientConvexMap::Kind::BallProjection) return 1.0;
  }
  throw PreconditionError("map of kind " + t.kind_name() + " has no certified Lipschitz constant; set declared_lip");
}

StrongContractionProbe probe_contraction(const ContractionSpec& t, const ProbeOptions& probe) {
  StrongContractionProbe out;
  for_probe_pairs(t, probe, [&](const Point& x, const Point& y) {
    const double dx = distance(x, y);
    if (dx == 0.0) return;
    const Point tx = t.apply(x);
    const Point ty = t.apply(y);
    out.max_ratio = std::max(out.max_ratio, distance(tx, ty) / dx);
    for (int a = 0; a < t.dim; ++a) {
      const double num = std::abs(tx[a] - ty[a]);
      const double den = std::abs(x[a] - y[a]);
      if (den == 0.0) {
        if (num > 1e-12) out.max_coordinate_ratio = std::numeric_limits<double>::infinity();
      } else {
        out.max_coordinate_ratio = std::max(out.max_coordinate_ratio, num / den);
      }
    }
    ++out.pairs;
  });
  if (out.pairs == 0) throw NumericError("contraction probe: every pair was degenerate");
  return out;
}

std::vector<Point> apply_map(const ContractionSpec& t, std::span<const Point> points) {
  std::vector<Point> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(t.apply(p));
  return out;
}

ContractionSpec compose_affine(const ContractionSpec& outer, const ContractionSpec& inner) {
  if (outer.dim != inner.dim) throw DomainError("compose: dimension mismatch");
  const AffineMap o = outer.as_affine();
  const AffineMap i = inner.as_affine();
  Vec b = o.a * std::span<const double>(i.b);
  for (std::size_t k = 0; k < b.size(); ++k) b[k] += o.b[k];
  ContractionSpec t;
  t.dim = outer.dim;
  t.kind = AffineMap{o.a * i.a, std::move(b)};
  return t;
}

// --- Pushforward ---------------------------------------------------------------

namespace {

template <class Visit>
void for_sub_centers(const DensityGrid& f, int substeps, Visit&& visit) {
  const GridSpec& s = f.spec();
  const int d = s.dim;
  std::size_t per_cell = 1;
  for (int a = 0; a < d; ++a) per_cell *= static_cast<std::size_t>(substeps);
  const double inv = 1.0 / static_cast<double>(substeps);
  Point p(d);
  std::vector<int> sub(d);
  for (std::size_t i = 0; i < f.masses().size(); ++i) {
    const double m = f.mass(i);
    if (m == 0.0) continue;
    const auto idx = s.unflatten(i);
    const double share = m / static_cast<double>(per_cell);
    for (std::size_t j = 0; j < per_cell; ++j) {
      std::size_t r = j;
      for (int a = d - 1; a >= 0; --a) {
        sub[a] = static_cast<int>(r % static_cast<std::size_t>(substeps));
        r /= static_cast<std::size_t>(substeps);
      }
      for (int a = 0; a < d; ++a) {
        p[a] = s.origin[a] + (static_cast<double>(idx[a]) + (static_cast<double>(sub[a]) + 0.5) * inv) * s.spacing;
      }
      visit(p, share);
    }
  }
}

}  // namespace

DensityGrid pushforward_grid(const ContractionSpec& t, const DensityGrid& f, const GridSpec& target, int substeps) {
  if (substeps < 1) throw DomainError("pushforward: substeps must be >= 1");
  if (t.dim != f.dim() || target.dim != f.dim()) throw DomainError("pushforward: dimension mismatch");
  target.validate();
  std::vector<double> out(target.cell_count(), 0.0);
  CompensatedSum lost;
  for_sub_centers(f, substeps, [&](const Point& p, double share) {
    const Point y = t.apply(p);
    const std::int64_t cell = target.locate(y);
    if (cell < 0) {
      lost.add(share);
      return;
    }
    out[static_cast<std::size_t>(cell)] += share;
  });
  if (lost.value() > 1e-6) {
    throw CoverageError("pushforward: target grid misses mass " + std::to_string(lost.value()));
  }
  return DensityGrid(target, std::move(out)).normalized();
}

GridSpec image_spec(const ContractionSpec& t, const DensityGrid& f, int substeps, int margin) {
  const int d = f.dim();
  Point lo(d, std::numeric_limits<double>::infinity());
  Point hi(d, -std::numeric_limits<double>::infinity());
  for_sub_centers(f, substeps, [&](const Point& p, double) {
    const Point y = t.apply(p);
    for (int a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], y[a]);
      hi[a] = std::max(hi[a], y[a]);
    }
  });
  const GridSpec& s = f.spec();
  GridSpec out;
  out.dim = d;
  out.spacing = s.spacing;
  out.origin.resize(d);
  out.shape.resize(d);
  for (int a = 0; a < d; ++a) {
    const double first = std::floor((lo[a] - s.origin[a]) / s.spacing) - margin;
    const double last = std::floor((hi[a] - s.origin[a]) / s.spacing) + margin;
    out.origin[a] = s.origin[a] + first * s.spacing;
    out.shape[a] = static_cast<std::int64_t>(last - first) + 1;
  }
  out.validate();
  return out;
}

PolarDiagonal polar_diagonal_factor(const Matrix& a) {
  if (!a.square() || a.rows() > 3) throw DomainError("polar_diagonal_factor: need a square matrix of size <= 3");
  Svd s = svd(a);
  return {std::move(s.u), std::move(s.singular), std::move(s.vt)};
}

// --- JSON ---------------------------------------------------------------------

nlohmann::json to_json(const ContractionSpec& t) {
  if (t.ephemeral()) throw ConfigError("map of kind " + t.kind_name() + " is ephemeral and cannot be serialized");
  nlohmann::json j{{"kind", t.kind_name()}, {"dim", t.dim}};
  if (t.declared_lip) j["declared_lip"] = *t.declared_lip;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, AffineMap>) {
          j["A"] = matrix_to_json(k.a);
          j["b"] = k.b;
        } else if constexpr (std::is_same_v<K, DiagonalMap>) {
          j["lambda"] = k.lambda;
        } else if constexpr (std::is_same_v<K, CoordinatewiseMap>) {
          j["components"] = nlohmann::json::array();
          for (const auto& c : k.components) j["components"].push_back(scalar_to_json(c));
        } else if constexpr (std::is_same_v<K, GradientConvexMap>) {
          if (k.kind == GradientConvexMap::Kind::Quadratic) {
            j["potential"] = "quadratic";
            j["Q"] = matrix_to_json(k.q);
            j["shift"] = k.shift;
          } else {
            j["potential"] = "ball_projection";
            j["radius"] = k.radius;
            j["center"] = k.shift;
          }
        }
      },
      t.kind);
  return j;
}

ContractionSpec contraction_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    ContractionSpec t;
    if (kind == "affine") {
      t = ContractionSpec::affine(matrix_from_json(j.at("A")), j.value("b", Vec{}));
    } else if (kind == "diagonal") {
      t = ContractionSpec::diagonal(j.at("lambda").get<Vec>());
    } else if (kind == "coordinatewise") {
      std::vector<ScalarMap> comps;
      for (const auto& c : j.at("components")) comps.push_back(scalar_from_json(c));
      t = ContractionSpec::coordinatewise(std::move(comps));
    } else if (kind == "gradient_convex") {
      const std::string pot = j.at("potential").get<std::string>();
      if (pot == "quadratic") {
        t = ContractionSpec::quadratic_gradient(matrix_from_json(j.at("Q")), j.value("shift", Vec{}));
      } else if (pot == "ball_projection") {
        t = ContractionSpec::ball_projection(j.at("dim").get<int>(), j.at("radius").get<double>(), j.value("center", Vec{}));
      } else {
        throw ConfigError("unknown potential '" + pot + "'");
      }
    } else {
      throw ConfigError("cannot deserialize map kind '" + kind + "'");
    }
    if (j.contains("declared_lip")) {
      t.declared_lip = j.at("declared_lip").get<double>();
      t.validate();
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad contraction JSON: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid contraction: ") + e.what());
  }
}

}  // namespace kpent
