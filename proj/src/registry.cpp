#include "kpent/registry.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "kpent/ballgeom.hpp"
#include "kpent/calibration.hpp"
#include "kpent/contract.hpp"
#include "kpent/convolve.hpp"
#include "kpent/diversity.hpp"
#include "kpent/errors.hpp"
#include "kpent/families.hpp"
#include "kpent/gauss_epi.hpp"
#include "kpent/numeric.hpp"
#include "kpent/polygon.hpp"
#include "kpent/rearrange.hpp"
#include "kpent/rng.hpp"

namespace kpent {

namespace {

constexpr std::uint32_t kGeneratorStream = 16;
constexpr std::uint32_t kParallelBodyStream = 7;
// Tail mass cut from analytic laws before gridding.
constexpr double kTail = 1e-9;
constexpr double kClosedFormRelative = 1e-12;

using Clock = std::chrono::steady_clock;
using Rows = std::vector<RowResult>;
using json = nlohmann::json;

std::int64_t since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

std::string fmt(double x) { return format_real(x); }

const std::vector<std::string> kLogConcave{"gaussian", "uniform_box", "laplace", "radial"};
const std::vector<std::string> kRadial{"gaussian", "radial", "uniform_ball"};
const std::vector<std::string> kAnyLaw{"gaussian", "uniform_box", "laplace", "radial", "gaussian_mixture"};
const std::vector<std::string> kGeneralMaps{"affine", "coordinatewise", "gradient_convex", "sampled"};

int dimension(const HarnessConfig& c, const std::string& id, int def, int lo, int hi) {
  const int d = c.d.value_or(def);
  if (d < lo || d > hi) {
    throw ConfigError(id + ": d must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " +
                      std::to_string(d));
  }
  return d;
}

std::int64_t cells_per_axis(const HarnessConfig& c, int d) {
  if (c.grid > 0) return c.grid;
  return d == 1 ? 2048 : d == 2 ? 128 : 32;
}

double grid_budget(const HarnessConfig& c, int d, double spacing) {
  return c.tol ? *c.tol : grid_tolerance(d, spacing);
}

double closed_form_budget(double lhs, double rhs) {
  return kClosedFormRelative * std::max(std::abs(lhs), std::abs(rhs));
}

void require(bool ok, const std::string& id, const std::string& hypothesis) {
  if (!ok) throw HypothesisError(id, hypothesis);
}

// ---- random laws and maps ----

std::string pick(const HarnessConfig& c, SampleStream& s, const std::vector<std::string>& menu, int instance, int slot) {
  if (!c.families.empty()) return c.families[static_cast<std::size_t>(instance + slot) % c.families.size()];
  return menu[s.next_u64() % menu.size()];
}

// Law of the given family with per-coordinate standard deviation in
// [0.5, 1.5]; isotropic laws use one deviation for every axis.
LawSpec draw_law(SampleStream& s, const std::string& family, int d, bool centered, bool isotropic) {
  Vec sigma(d);
  sigma[0] = s.uniform(0.5, 1.5);
  for (int i = 1; i < d; ++i) sigma[i] = isotropic ? sigma[0] : s.uniform(0.5, 1.5);
  Vec center(d, 0.0);
  if (!centered)
    for (auto& c : center) c = s.uniform(-1.0, 1.0);
  LawSpec law;
  if (family == "gaussian") {
    law = LawSpec::gaussian(sigma, center);
  } else if (family == "uniform_box") {
    for (auto& v : sigma) v *= std::numbers::sqrt3;
    law = LawSpec::uniform_box(sigma, center);
  } else if (family == "laplace") {
    for (auto& v : sigma) v /= std::numbers::sqrt2;
    law = LawSpec::laplace(sigma, center);
  } else if (family == "radial") {
    const double p = s.uniform(1.0, 2.0);
    const double unit_sd = std::sqrt(std::tgamma((d + 2.0) / p) / (d * std::tgamma(d / p)));
    law = LawSpec::radial(d, sigma[0] / unit_sd, p);
    law.center = center;
  } else if (family == "uniform_ball") {
    law = LawSpec::uniform_ball(d, sigma[0] * std::sqrt(d + 2.0));
    law.center = center;
  } else if (family == "gaussian_mixture") {
    law = LawSpec::gaussian_mixture(d, sigma[0], 2.0);
    law.center = center;
  } else {
    throw ConfigError("unknown law family '" + family + "'");
  }
  law.validate();
  return law;
}

std::string map_kind(const HarnessConfig& c, const std::vector<std::string>& cycle, int instance) {
  if (!c.map_kind.empty()) return c.map_kind;
  return cycle[static_cast<std::size_t>(instance) % cycle.size()];
}

void require_kind(const std::string& id, const std::string& kind, const std::vector<std::string>& allowed,
                  const std::string& hypothesis) {
  if (std::find(allowed.begin(), allowed.end(), kind) == allowed.end()) throw HypothesisError(id, hypothesis);
}

double map_lipschitz(const ContractionSpec& t) {
  try {
    return certified_lipschitz(t);
  } catch (const PreconditionError&) {
    return lipschitz_constant(t).value;
  }
}

// Rescales T so that its Lipschitz constant equals `lip`.
ContractionSpec with_lipschitz(const ContractionSpec& t, double lip) {
  const double l = map_lipschitz(t);
  if (!(l > 0.0)) return t;
  const double c = lip / l;
  if (const auto* a = std::get_if<AffineMap>(&t.kind)) {
    Vec b = a->b;
    for (auto& v : b) v *= c;
    return ContractionSpec::affine(c * a->a, b);
  }
  if (const auto* g = std::get_if<DiagonalMap>(&t.kind)) {
    Vec l2 = g->lambda;
    for (auto& v : l2) v *= c;
    return ContractionSpec::diagonal(l2);
  }
  if (const auto* cw = std::get_if<CoordinatewiseMap>(&t.kind)) {
    std::vector<ScalarMap> comps;
    for (const auto& m : cw->components) comps.push_back(ScalarMap::compose({m, ScalarMap::linear(c)}));
    ContractionSpec out = ContractionSpec::coordinatewise(std::move(comps));
    out.declared_lip = lip;
    return out;
  }
  if (const auto* gc = std::get_if<GradientConvexMap>(&t.kind); gc && gc->kind == GradientConvexMap::Kind::Quadratic) {
    Vec shift = gc->shift;
    for (auto& v : shift) v *= c;
    return ContractionSpec::quadratic_gradient(c * gc->q, shift);
  }
  auto scaled = [t, c](std::span<const double> x) {
    Point y = t.apply(x);
    for (auto& v : y) v *= c;
    return y;
  };
  ContractionSpec out = std::holds_alternative<GradientConvexMap>(t.kind)
                            ? ContractionSpec::gradient(t.dim, scaled, "scaled_" + t.kind_name())
                            : ContractionSpec::sampled(t.dim, scaled, "scaled_" + t.kind_name());
  out.declared_lip = lip;
  return out;
}

ContractionSpec draw_map(const HarnessConfig& c, SampleStream& s, int d, const std::string& kind) {
  ContractionSpec t = random_contraction(s, d, kind);
  if (c.lip) t = with_lipschitz(t, *c.lip);
  return t;
}

json map_json(const ContractionSpec& t) {
  if (t.ephemeral()) return {{"kind", t.kind_name()}, {"ephemeral", true}};
  return to_json(t);
}

json base_inputs(std::uint64_t seed, int instance) { return {{"seed", seed}, {"instance", instance}}; }

std::vector<double> alphas(const HarnessConfig& c, const std::string& id, std::vector<double> defaults) {
  if (!c.alpha) return defaults;
  require(*c.alpha > 0.0, id, "alpha must lie in (0, inf]");
  return {*c.alpha};
}

Rows finish(std::vector<CheckReport> reports, const json& inputs, std::uint64_t seed, Clock::time_point t0) {
  Rows rows;
  const auto ms = since(t0);
  for (auto& r : reports) {
    r.seed = seed;
    r.runtime_ms = ms;
    rows.push_back({std::move(r), inputs});
  }
  return rows;
}

// ---- majorization-form pipeline ----

// Rows for f_{X+W} majorized by f_{T(X)+W} and h_alpha(T(X)+W) <= h_alpha(X+W).
Rows majorization_rows(const HarnessConfig& c, const std::string& id, std::uint64_t seed, int instance,
                       const LawSpec& x, const LawSpec& w, const ContractionSpec& t, const std::string& prefix,
                       const std::vector<double>& orders) {
  const auto t0 = Clock::now();
  const int d = x.dim;
  const std::vector<LawSpec> laws{x, w};
  const double h = common_spacing(laws, cells_per_axis(c, d), kTail);
  const DensityGrid fx = grid_law(x, h, kTail);
  const DensityGrid fw = grid_law(w, h, kTail);
  const DensityGrid ft = pushforward_grid(t, fx, image_spec(t, fx));
  const DensityGrid plain = convolve(fx, fw);
  const DensityGrid mapped = convolve(ft, fw);
  const double eps = grid_budget(c, d, h);

  json inputs = base_inputs(seed, instance);
  inputs["x"] = to_json(x);
  inputs["w"] = to_json(w);
  inputs["map"] = map_json(t);
  inputs["spacing"] = h;

  std::vector<CheckReport> out;
  const MajorizationVerdict v = majorizes(mapped, plain, eps);
  CheckReport m = make_report(id, Relation::LessEq, v.worst_deficit, 0.0, {eps, 0.0}, "grid/grid");
  m.param = prefix + "majorization";
  m.note = "worst_radius=" + fmt(v.worst_radius) + " spacing=" + fmt(h);
  out.push_back(m);
  for (double a : orders) {
    CheckReport r =
        make_report(id, Relation::LessEq, renyi_entropy(mapped, a), renyi_entropy(plain, a), {eps, 0.0}, "grid/grid");
    r.param = prefix + "alpha=" + fmt(a);
    r.note = "spacing=" + fmt(h);
    out.push_back(r);
  }
  for (auto& r : out) r.d = d;
  return finish(std::move(out), inputs, seed, t0);
}

const std::vector<double> kDefaultOrders{0.5, 1.0, 2.0};

Rows run_lambda(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "T2.1-lambdaX";
  const int d = dimension(c, id, 1, 1, 3);
  SampleStream s(seed, kGeneratorStream, 0);
  const LawSpec x = draw_law(s, pick(c, s, kLogConcave, i, 0), d, false, false);
  const LawSpec w = draw_law(s, pick(c, s, kLogConcave, i, 1), d, false, false);
  require(x.log_concave(), id, "X must be log-concave");
  require(w.log_concave(), id, "W must be log-concave");
  if (!c.map_kind.empty() && c.map_kind != "scaling") throw HypothesisError(id, "T must be the scaling x -> lambda x");
  static const double cycle[] = {0.25, 0.5, 0.75};
  const double lambda = c.lambda.value_or(cycle[i % 3]);
  return majorization_rows(c, id, seed, i, x, w, ContractionSpec::scaling(d, lambda), "lambda=" + fmt(lambda) + ";",
                           alphas(c, id, kDefaultOrders));
}

void require_probed_contraction(const std::string& id, const ContractionSpec& t, std::uint64_t seed, bool strong) {
  ProbeOptions p;
  p.seed = seed;
  const StrongContractionProbe probe = probe_contraction(t, p);
  require(probe.contraction(), id, "T must be a contraction (probe ratio " + fmt(probe.max_ratio) + ")");
  if (strong) {
    require(probe.strong(), id,
            "T must be a strong contraction (coordinate ratio " + fmt(probe.max_coordinate_ratio) + ")");
  }
}

Rows run_radsym(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "T2.2-radsymunimodXW";
  const int d = dimension(c, id, 2, 1, 3);
  SampleStream s(seed, kGeneratorStream, 0);
  const LawSpec x = draw_law(s, pick(c, s, kRadial, i, 0), d, true, true);
  const LawSpec w = draw_law(s, pick(c, s, kRadial, i, 1), d, true, true);
  require(x.radially_symmetric() && x.unimodal(), id, "X must be radially symmetric and unimodal");
  require(w.radially_symmetric() && w.unimodal(), id, "W must be radially symmetric and unimodal");
  const std::string kind = map_kind(c, {"sampled"}, i);
  const ContractionSpec t = draw_map(c, s, d, kind);
  require_probed_contraction(id, t, seed, false);
  return majorization_rows(c, id, seed, i, x, w, t, "map=" + kind + ";", alphas(c, id, kDefaultOrders));
}

Rows run_diagonal(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "T2.3-lcXunconditionalWdiagT";
  const int d = dimension(c, id, 2, 1, 3);
  SampleStream s(seed, kGeneratorStream, 0);
  const LawSpec x = draw_law(s, pick(c, s, kLogConcave, i, 0), d, false, false);
  const LawSpec w = draw_law(s, pick(c, s, kLogConcave, i, 1), d, true, false);
  require(x.log_concave(), id, "X must be log-concave");
  require(w.log_concave() && w.unconditional(), id, "W must be unconditional and log-concave");
  const std::string kind = map_kind(c, {"diagonal"}, i);
  require_kind(id, kind, {"diagonal"}, "T must be a diagonal linear contraction");
  return majorization_rows(c, id, seed, i, x, w, draw_map(c, s, d, kind), "map=diagonal;",
                           alphas(c, id, kDefaultOrders));
}

Rows run_affine(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "C2.2-lcXradsymWaffineT";
  const int d = dimension(c, id, 2, 1, 3);
  SampleStream s(seed, kGeneratorStream, 0);
  const LawSpec x = draw_law(s, pick(c, s, kLogConcave, i, 0), d, false, false);
  const LawSpec w = draw_law(s, pick(c, s, kRadial, i, 1), d, true, true);
  require(x.log_concave(), id, "X must be log-concave");
  require(w.log_concave() && w.radially_symmetric(), id, "W must be radially symmetric and log-concave");
  const std::string kind = map_kind(c, {"affine"}, i);
  require_kind(id, kind, {"affine", "diagonal"}, "T must be an affine contraction");
  return majorization_rows(c, id, seed, i, x, w, draw_map(c, s, d, kind), "map=" + kind + ";",
                           alphas(c, id, kDefaultOrders));
}

Rows run_strong(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "T2.4-unconditionalXWstrongT";
  const int d = dimension(c, id, 2, 1, 3);
  SampleStream s(seed, kGeneratorStream, 0);
  const LawSpec x = draw_law(s, pick(c, s, kLogConcave, i, 0), d, true, false);
  const LawSpec w = draw_law(s, pick(c, s, kLogConcave, i, 1), d, true, false);
  require(x.log_concave() && x.unconditional(), id, "X must be unconditional and log-concave");
  require(w.log_concave() && w.unconditional(), id, "W must be unconditional and log-concave");
  const std::string kind = map_kind(c, {"coordinatewise", "diagonal"}, i);
  const ContractionSpec t = draw_map(c, s, d, kind);
  require_probed_contraction(id, t, seed, true);
  return majorization_rows(c, id, seed, i, x, w, t, "map=" + kind + ";", alphas(c, id, kDefaultOrders));
}

Rows run_gradient(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "C2.5-unconditionallcXradsymlcWBrennierT";
  const int d = dimension(c, id, 2, 1, 3);
  SampleStream s(seed, kGeneratorStream, 0);
  const LawSpec x = draw_law(s, pick(c, s, kLogConcave, i, 0), d, true, false);
  const LawSpec w = draw_law(s, pick(c, s, kRadial, i, 1), d, true, true);
  require(x.log_concave() && x.unconditional(), id, "X must be unconditional and log-concave");
  require(w.log_concave() && w.radially_symmetric(), id, "W must be radially symmetric and log-concave");
  const std::string kind = map_kind(c, {"gradient_convex"}, i);
  require_kind(id, kind, {"gradient_convex"}, "T must be the gradient of a convex function");
  const ContractionSpec t = draw_map(c, s, d, kind);
  require_probed_contraction(id, t, seed, false);
  return majorization_rows(c, id, seed, i, x, w, t, "map=gradient_convex;", alphas(c, id, kDefaultOrders));
}

Rows run_big_question(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "Q1.1-big-question";
  const int d = dimension(c, id, 1, 1, 3);
  SampleStream s(seed, kGeneratorStream, 0);
  const LawSpec x = draw_law(s, pick(c, s, kAnyLaw, i, 0), d, false, false);
  const LawSpec w = draw_law(s, pick(c, s, kLogConcave, i, 1), d, true, false);
  const std::string kind = map_kind(c, kGeneralMaps, i);
  const ContractionSpec t = draw_map(c, s, d, kind);
  Rows rows = majorization_rows(c, id, seed, i, x, w, t, "map=" + kind + ";", alphas(c, id, kDefaultOrders));
  for (auto& r : rows) r.report.note += " x=" + x.family + " w=" + w.family;
  return rows;
}

// ---- discrete lemmas ----

DensityGrid random_mass_grid(SampleStream& s, int d, int max_per_axis) {
  GridSpec spec;
  spec.dim = d;
  spec.spacing = 0.25;
  for (int a = 0; a < d; ++a) {
    spec.origin.push_back(std::floor(s.uniform(-8.0, 8.0)) * spec.spacing);
    spec.shape.push_back(2 + static_cast<std::int64_t>(s.next_u64() % static_cast<std::uint64_t>(max_per_axis - 1)));
  }
  std::vector<double> m(spec.cell_count());
  for (auto& v : m) v = s.uniform() < 0.3 ? 0.0 : s.uniform();
  m[s.next_u64() % m.size()] += 0.5;
  return DensityGrid(spec, std::move(m)).normalized();
}

double phi_integral(const DensityGrid& f, const std::function<double(double)>& phi) {
  const double v = f.spec().cell_volume();
  std::vector<double> terms;
  for (double m : f.masses())
    if (m > 0.0) terms.push_back(phi(m / v) * v);
  std::sort(terms.begin(), terms.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  return compensated_sum(terms);
}

Rows run_convex_integral(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "L2.1-majorization-convex";
  const int d = dimension(c, id, 1, 1, 3);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const int cap = d == 1 ? 64 : d == 2 ? 12 : 6;
  const DensityGrid g = random_mass_grid(s, d, cap);
  const DensityGrid kernel = random_mass_grid(s, d, 4);
  const DensityGrid f = convolve(g, kernel);

  std::vector<CheckReport> out;
  const MajorizationVerdict v = majorizes(g, f, 0.0);
  CheckReport m = make_report(id, Relation::LessEq, v.worst_deficit, 0.0, {1e-12, 0.0}, "grid/grid");
  m.param = "majorization";
  out.push_back(m);
  const std::vector<std::pair<std::string, std::function<double(double)>>> phis{
      {"x^2", [](double x) { return x * x; }},
      {"x^3", [](double x) { return x * x * x; }},
      {"x*log(x)", [](double x) { return x * std::log(x); }},
      {"-x^0.5", [](double x) { return -std::sqrt(x); }}};
  for (const auto& [name, phi] : phis) {
    const double lhs = phi_integral(f, phi);
    const double rhs = phi_integral(g, phi);
    CheckReport r = make_report(id, Relation::LessEq, lhs, rhs,
                                {kClosedFormRelative * std::max({1.0, std::abs(lhs), std::abs(rhs)}), 0.0}, "grid/grid");
    r.param = "phi=" + name;
    out.push_back(r);
  }
  for (auto& r : out) r.d = d;
  json inputs = base_inputs(seed, i);
  inputs["g_cells"] = g.spec().cell_count();
  inputs["kernel_cells"] = kernel.spec().cell_count();
  return finish(std::move(out), inputs, seed, t0);
}

Rows run_central_integral(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "L2.2-central-integral";
  const int d = dimension(c, id, 2, 1, 3);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const DensityGrid f = random_mass_grid(s, d, d == 1 ? 64 : d == 2 ? 12 : 6);
  const std::size_t cells = f.spec().cell_count();
  const double h = f.spacing();
  const auto offsets = ordered_offsets(d, static_cast<std::int64_t>(std::ceil(std::pow(cells, 1.0 / d))) + 2);
  // Radius of a random completed shell inside the first `cells` offsets.
  const std::size_t j = 1 + s.next_u64() % (cells - 1);
  const std::int64_t norm2 = offsets[j].norm2;
  const double r = h * std::sqrt(static_cast<double>(norm2));
  std::size_t n = 0;
  while (n < offsets.size() && offsets[n].norm2 <= norm2) ++n;
  const double cumulative = ball_cumulative(f, r);

  std::vector<double> sorted(f.masses().begin(), f.masses().end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t take = std::min(n, cells);
  const double top = compensated_sum(std::span<const double>(sorted).first(take));

  std::vector<CheckReport> out;
  CheckReport eq = make_report(id, Relation::LessEq, std::abs(top - cumulative), 0.0, {1e-12, 0.0}, "grid/grid");
  eq.param = "superlevel-set";
  out.push_back(eq);

  std::vector<std::size_t> idx(cells);
  double best = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    for (std::size_t q = 0; q < cells; ++q) idx[q] = q;
    for (std::size_t q = 0; q < take; ++q) std::swap(idx[q], idx[q + s.next_u64() % (cells - q)]);
    std::vector<double> picked;
    for (std::size_t q = 0; q < take; ++q) picked.push_back(f.mass(idx[q]));
    best = std::max(best, compensated_sum(picked));
  }
  CheckReport sets = make_report(id, Relation::LessEq, best, cumulative, {1e-12, 0.0}, "grid/grid");
  sets.param = "random-sets";
  out.push_back(sets);
  for (auto& x : out) {
    x.d = d;
    x.note = "radius=" + fmt(r) + " cells=" + std::to_string(n);
  }
  json inputs = base_inputs(seed, i);
  inputs["radius"] = r;
  return finish(std::move(out), inputs, seed, t0);
}

// ---- planar convex bodies ----

ConvexPolygon random_polygon(SampleStream& s, double radius = 1.0) {
  const double cx = s.uniform(-1.0, 1.0), cy = s.uniform(-1.0, 1.0);
  while (true) {
    const int n = 4 + static_cast<int>(s.next_u64() % 6);
    std::vector<Vec2> pts;
    for (int k = 0; k < n; ++k) {
      const double a = s.uniform(0.0, 2.0 * std::numbers::pi);
      const double rr = radius * s.uniform(0.5, 1.5);
      pts.push_back({cx + rr * std::cos(a), cy + rr * std::sin(a)});
    }
    try {
      return convex_hull(pts);
    } catch (const DegenerateError&) {
    }
  }
}

ConvexPolygon random_unconditional_polygon(SampleStream& s) {
  while (true) {
    const int n = 1 + static_cast<int>(s.next_u64() % 4);
    std::vector<Vec2> pts;
    for (int k = 0; k < n; ++k) {
      const double a = s.uniform(0.1, 2.0), b = s.uniform(0.1, 2.0);
      for (double sx : {-1.0, 1.0})
        for (double sy : {-1.0, 1.0}) pts.push_back({sx * a, sy * b});
    }
    try {
      return convex_hull(pts);
    } catch (const DegenerateError&) {
    }
  }
}

json polygon_json(const ConvexPolygon& k) {
  json v = json::array();
  for (const auto& p : k.vertices()) v.push_back({p[0], p[1]});
  return v;
}

// Convex piece of a planar set: a counterclockwise polygon, a segment or a point.
using Piece = std::vector<Vec2>;

Piece image_piece(const ConvexPolygon& k, const AffineMap& t) {
  std::vector<Vec2> pts;
  for (const auto& v : k.vertices()) {
    const Point y = t.a * std::span<const double>(v.data(), 2);
    pts.push_back({y[0] + (t.b.empty() ? 0.0 : t.b[0]), y[1] + (t.b.empty() ? 0.0 : t.b[1])});
  }
  try {
    return convex_hull(pts).vertices();
  } catch (const DegenerateError&) {
  }
  // Collapsed image: the extreme points along the direction of largest spread.
  std::size_t a = 0, b = 0;
  double best = -1.0;
  for (std::size_t p = 0; p < pts.size(); ++p)
    for (std::size_t q = p; q < pts.size(); ++q) {
      const double dd = std::hypot(pts[p][0] - pts[q][0], pts[p][1] - pts[q][1]);
      if (dd > best) best = dd, a = p, b = q;
    }
  if (best == 0.0) return {pts[a]};
  return {pts[a], pts[b]};
}

double segment_dist2(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double ux = b[0] - a[0], uy = b[1] - a[1];
  const double wx = p[0] - a[0], wy = p[1] - a[1];
  const double len2 = ux * ux + uy * uy;
  const double t = len2 > 0.0 ? std::clamp((wx * ux + wy * uy) / len2, 0.0, 1.0) : 0.0;
  const double dx = wx - t * ux, dy = wy - t * uy;
  return dx * dx + dy * dy;
}

bool near_piece(const double* p, const Piece& v, double r2) {
  const Vec2 q{p[0], p[1]};
  if (v.size() >= 3) {
    bool in = true;
    for (std::size_t e = 0; e < v.size() && in; ++e) {
      const Vec2& a = v[e];
      const Vec2& b = v[(e + 1) % v.size()];
      in = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]) >= 0.0;
    }
    if (in) return true;
  }
  if (v.size() == 1) return segment_dist2(q, v[0], v[0]) <= r2;
  const std::size_t edges = v.size() == 2 ? 1 : v.size();
  for (std::size_t e = 0; e < edges; ++e)
    if (segment_dist2(q, v[e], v[(e + 1) % v.size()]) <= r2) return true;
  return false;
}

bool near_set(const double* p, const std::vector<Piece>& set, double r2) {
  for (const auto& piece : set)
    if (near_piece(p, piece, r2)) return true;
  return false;
}

// Paired hit-or-miss areas of (image + rB) and (set + rB).
PairedEstimate parallel_body_areas(const std::vector<Piece>& image, const std::vector<Piece>& set, double r,
                                   const MCParams& mc) {
  Point lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const auto* s : {&image, &set})
    for (const auto& piece : *s)
      for (const auto& v : piece)
        for (int a = 0; a < 2; ++a) {
          lo[a] = std::min(lo[a], v[a] - r);
          hi[a] = std::max(hi[a], v[a] + r);
        }
  const double r2 = r * r;
  return paired_box_integral(lo, hi, kParallelBodyStream, mc, [&](const double* p, double* out) {
    out[0] = near_set(p, image, r2) ? 1.0 : 0.0;
    out[1] = near_set(p, set, r2) ? 1.0 : 0.0;
  });
}

CheckReport paired_area_report(const std::string& id, const PairedEstimate& e, std::uint64_t seed) {
  ToleranceBudget b;
  b.mc_stderr = e.first.std_error + e.second.std_error;
  CheckReport r = make_report(id, Relation::LessEq, e.first.value, e.second.value, b, "mc/mc");
  r.samples = e.first.samples;
  r.std_error = std::sqrt(e.difference_variance / static_cast<double>(std::max<std::uint64_t>(1, e.first.samples)));
  r.seed = seed;
  return r;
}

ContractionSpec planar_affine(const HarnessConfig& c, SampleStream& s, const std::string& id, int instance,
                              bool linear) {
  const std::string kind = map_kind(c, {"affine"}, instance);
  require_kind(id, kind, {"affine", "diagonal"}, "T must be an affine contraction");
  ContractionSpec t = draw_map(c, s, 2, kind);
  if (linear) t = ContractionSpec::affine(t.as_affine().a);
  return t;
}

Rows run_convex_body(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "C2.1-convexKlinearT";
  dimension(c, id, 2, 2, 2);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const ConvexPolygon k = random_polygon(s);
  const ContractionSpec t = planar_affine(c, s, id, i, false);
  const AffineMap a = t.as_affine();
  const double r = 1.0;
  const IntrinsicVolumes2 iv = intrinsic_volumes_of_image(k, a.a);
  const double lhs = iv.v2 + 2.0 * iv.v1 * r + std::numbers::pi * r * r * iv.v0;
  const double rhs = parallel_body_area(k, r);
  std::vector<CheckReport> out;
  CheckReport closed = make_report(id, Relation::LessEq, lhs, rhs, {closed_form_budget(lhs, rhs), 0.0},
                                   "closed-form/closed-form");
  closed.param = "route=steiner";
  out.push_back(closed);
  CheckReport mc = paired_area_report(id, parallel_body_areas({image_piece(k, a)}, {k.vertices()}, r, c.mc(seed)), seed);
  mc.param = "route=mc";
  mc.note = "closed_form_lhs=" + fmt(lhs) + " closed_form_rhs=" + fmt(rhs);
  out.push_back(mc);
  for (auto& x : out) x.d = 2;
  json inputs = base_inputs(seed, i);
  inputs["K"] = polygon_json(k);
  inputs["map"] = map_json(t);
  inputs["r"] = r;
  return finish(std::move(out), inputs, seed, t0);
}

Rows run_intrinsic(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "C2.3-intrinsicvolumeslinearcontractions";
  dimension(c, id, 2, 2, 2);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const ConvexPolygon k = random_polygon(s);
  const ContractionSpec t = planar_affine(c, s, id, i, true);
  const IntrinsicVolumes2 img = intrinsic_volumes_of_image(k, t.as_affine().a);
  const IntrinsicVolumes2 orig = intrinsic_volumes_2d(k);
  const double lv[] = {img.v0, img.v1, img.v2};
  const double rv[] = {orig.v0, orig.v1, orig.v2};
  std::vector<CheckReport> out;
  for (int q = 0; q < 3; ++q) {
    CheckReport r = make_report(id, Relation::LessEq, lv[q], rv[q], {closed_form_budget(lv[q], rv[q]), 0.0},
                                "closed-form/closed-form");
    r.param = "i=" + std::to_string(q);
    r.d = 2;
    out.push_back(r);
  }
  json inputs = base_inputs(seed, i);
  inputs["K"] = polygon_json(k);
  inputs["map"] = map_json(t);
  return finish(std::move(out), inputs, seed, t0);
}

// Largest distance by which a point lies outside a convex polygon.
double outside_distance(const ConvexPolygon& k, const Vec2& p) {
  const auto& v = k.vertices();
  double worst = 0.0;
  for (std::size_t e = 0; e < v.size(); ++e) {
    const Vec2& a = v[e];
    const Vec2& b = v[(e + 1) % v.size()];
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    // Outward distance from the supporting line of edge e.
    const double out = -((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / len;
    worst = std::max(worst, out);
  }
  return worst;
}

Rows run_shadow(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "S2.1-shadow-system";
  dimension(c, id, 2, 2, 2);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const ConvexPolygon k = random_polygon(s);
  const int axis = static_cast<int>(s.next_u64() % 2);
  const double la = s.uniform(-1.0, 1.0), lb = s.uniform(-1.0, 1.0);
  const double lambda = c.lambda.value_or(s.uniform(0.0, 1.0));
  const double base_v1 = intrinsic_volumes_2d(k).v1;
  auto v1 = [&](double l) { return intrinsic_volumes_2d(shadow_system(k, axis, l)).v1; };

  std::vector<CheckReport> out;
  const double mid = v1(0.5 * (la + lb));
  const double chord = 0.5 * (v1(la) + v1(lb));
  CheckReport conv = make_report(id, Relation::LessEq, mid, chord, {closed_form_budget(mid, chord), 0.0},
                                 "closed-form/closed-form");
  conv.param = "v1-midpoint-convexity";
  out.push_back(conv);

  const ConvexPolygon shadow = shadow_system(k, axis, lambda);
  const double vl = intrinsic_volumes_2d(shadow).v1;
  CheckReport bound = make_report(id, Relation::LessEq, vl, base_v1, {closed_form_budget(vl, base_v1), 0.0},
                                  "closed-form/closed-form");
  bound.param = "v1-bound";
  out.push_back(bound);

  CheckReport area = make_report(id, Relation::LessEq, std::abs(shadow.area() - k.area()), 0.0,
                                 {kClosedFormRelative * k.area(), 0.0}, "closed-form/closed-form");
  area.param = "area-preserved";
  out.push_back(area);

  double worst = 0.0;
  for (auto v : k.vertices()) {
    v[axis] *= lambda;
    worst = std::max(worst, outside_distance(shadow, v));
  }
  CheckReport contain = make_report(id, Relation::LessEq, worst, 0.0, {kClosedFormRelative * (1.0 + base_v1), 0.0},
                                    "closed-form/closed-form");
  contain.param = "containment";
  out.push_back(contain);
  for (auto& r : out) {
    r.d = 2;
    r.note = "axis=" + std::to_string(axis) + " lambda=" + fmt(lambda);
  }
  json inputs = base_inputs(seed, i);
  inputs["K"] = polygon_json(k);
  inputs["axis"] = axis;
  inputs["lambda"] = {la, lb, lambda};
  return finish(std::move(out), inputs, seed, t0);
}

double minkowski_area(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  std::vector<Vec2> sums;
  for (const auto& p : a)
    for (const auto& q : b) sums.push_back({p[0] + q[0], p[1] + q[1]});
  return convex_hull(sums).area();
}

Rows run_unconditional_bodies(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "C2.4-unconditionalconvexKL";
  dimension(c, id, 2, 2, 2);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const ConvexPolygon k = random_unconditional_polygon(s);
  const ConvexPolygon l = random_unconditional_polygon(s);
  const std::string kind = map_kind(c, {"diagonal"}, i);
  if (kind != "diagonal") throw ConfigError(id + ": only diagonal strong contractions are evaluated (got " + kind + ")");
  const ContractionSpec t = draw_map(c, s, 2, kind);
  std::vector<Vec2> tk;
  for (const auto& v : k.vertices()) {
    const Point y = t.apply(std::span<const double>(v.data(), 2));
    tk.push_back({y[0], y[1]});
  }
  const double lhs = minkowski_area(tk, l.vertices());
  const double rhs = minkowski_area(k.vertices(), l.vertices());
  CheckReport r = make_report(id, Relation::LessEq, lhs, rhs, {closed_form_budget(lhs, rhs), 0.0},
                              "closed-form/closed-form");
  r.d = 2;
  r.param = "map=diagonal";
  json inputs = base_inputs(seed, i);
  inputs["K"] = polygon_json(k);
  inputs["L"] = polygon_json(l);
  inputs["map"] = map_json(t);
  return finish({r}, inputs, seed, t0);
}

// ---- ball configurations ----

PointConfiguration random_configuration(SampleStream& s, int d, int k, double box) {
  PointConfiguration x;
  x.radius = 1.0;
  for (int q = 0; q < k; ++q) {
    Point p(d);
    for (auto& v : p) v = s.uniform(-box, box);
    x.centers.push_back(p);
  }
  return x;
}

int draw_k(const HarnessConfig& c, SampleStream& s, int lo, int hi) {
  const int k = static_cast<int>(lo + s.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  return c.k.value_or(k);
}

json configuration_inputs(std::uint64_t seed, int i, const PointConfiguration& x, const ContractionSpec& t) {
  json inputs = base_inputs(seed, i);
  inputs["configuration"] = to_json(x);
  inputs["map"] = map_json(t);
  inputs["images"] = apply_map(t, x.centers);
  return inputs;
}

Rows run_kp_union(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "K1.1-kp-union";
  const int d = dimension(c, id, 2, 1, 8);
  SampleStream s(seed, kGeneratorStream, 0);
  const int k = draw_k(c, s, 2, 8);
  const PointConfiguration x = random_configuration(s, d, k, 2.0);
  const ContractionSpec t = draw_map(c, s, d, map_kind(c, {"affine"}, i));
  CheckReport r = kp_union_check(x, t, c.mc(seed));
  return {{r, configuration_inputs(seed, i, x, t)}};
}

Rows run_kp_intersection(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "K1.3-kp-intersection";
  const int d = dimension(c, id, 2, 1, 8);
  SampleStream s(seed, kGeneratorStream, 0);
  const int k = draw_k(c, s, 2, 5);
  const PointConfiguration x = random_configuration(s, d, k, 0.6);
  const ContractionSpec t = draw_map(c, s, d, map_kind(c, {"affine"}, i));
  CheckReport r = kp_intersection_check(x, t, c.mc(seed));
  return {{r, configuration_inputs(seed, i, x, t)}};
}

Rows run_integer_orders(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "C1.1-intenttrue";
  const int d = dimension(c, id, 2, 1, 8);
  const double alpha = c.alpha.value_or(2.0);
  require(alpha == std::floor(alpha) && alpha >= 2.0 && alpha <= d + 3.0, id,
          "alpha must be an integer in 2.." + std::to_string(d + 3) + " (got " + fmt(alpha) + ")");
  SampleStream s(seed, kGeneratorStream, 0);
  const int k = draw_k(c, s, 2, 5);
  const PointConfiguration x = random_configuration(s, d, k, 1.5);
  std::vector<double> w(k);
  double total = 0.0;
  for (auto& v : w) total += (v = s.uniform(0.1, 1.0));
  for (auto& v : w) v /= total;
  const ContractionSpec t = draw_map(c, s, d, map_kind(c, {"affine"}, i));
  CheckReport r = integer_renyi_check(x, w, t, static_cast<int>(alpha), c.mc(seed));
  json inputs = configuration_inputs(seed, i, x, t);
  inputs["weights"] = w;
  return {{r, inputs}};
}

Rows run_kp_compact(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "K1.2-kp-compact";
  dimension(c, id, 2, 2, 2);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const int pieces = 1 + static_cast<int>(s.next_u64() % 3);
  std::vector<ConvexPolygon> parts;
  for (int q = 0; q < pieces; ++q) parts.push_back(random_polygon(s, 0.6));
  const std::string kind = map_kind(c, {"affine"}, i);
  if (kind != "affine" && kind != "diagonal") {
    throw ConfigError(id + ": only affine maps are evaluated on compact sets (got " + kind + ")");
  }
  const ContractionSpec t = draw_map(c, s, 2, kind);
  const AffineMap a = t.as_affine();
  std::vector<Piece> set, image;
  for (const auto& p : parts) {
    set.push_back(p.vertices());
    image.push_back(image_piece(p, a));
  }
  const double r = 0.5;
  CheckReport rep = paired_area_report(id, parallel_body_areas(image, set, r, c.mc(seed)), seed);
  rep.d = 2;
  rep.k = pieces;
  rep.param = "map=" + kind;
  json inputs = base_inputs(seed, i);
  inputs["K"] = json::array();
  for (const auto& p : parts) inputs["K"].push_back(polygon_json(p));
  inputs["map"] = map_json(t);
  inputs["r"] = r;
  return finish({rep}, inputs, seed, t0);
}

// ---- Gaussian perturbation ----

Matrix random_spd(SampleStream& s, int d) {
  Matrix b(d, d);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q) b(p, q) = s.normal();
  Matrix m = b * b.transposed() + 0.1 * Matrix::identity(d);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < p; ++q) m(p, q) = m(q, p);
  return m;
}

GaussianLaw random_gaussian(SampleStream& s, int d) {
  GaussianLaw g;
  g.mean.resize(d);
  for (auto& v : g.mean) v = s.uniform(-1.0, 1.0);
  g.cov = random_spd(s, d);
  return g;
}

DensityGrid law_grid(const HarnessConfig& c, const LawSpec& x) {
  const std::vector<LawSpec> laws{x};
  return grid_law(x, common_spacing(laws, cells_per_axis(c, x.dim), kTail), kTail);
}

double eps_or_default(const HarnessConfig& c) { return c.tol.value_or(-1.0); }

Rows run_vector_epi(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "T3.1-vectorepi";
  const int d = dimension(c, id, 1, 1, 3);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const Matrix q = random_orthogonal(s, d);
  Vec sv(d), sg(d);
  for (auto& v : sv) v = s.uniform(0.05, 0.95);
  for (auto& v : sg) v = s.uniform(0.5, 2.0);
  auto sym = [&](const Vec& diag) {
    Matrix m = q * Matrix::diagonal(diag) * q.transposed();
    for (int p = 0; p < d; ++p)
      for (int r = 0; r < p; ++r) m(p, r) = m(r, p);
    return m;
  };
  const Matrix sm = sym(sv), sigma = sym(sg);
  const GaussianLaw g = random_gaussian(s, d);
  std::vector<CheckReport> out{check_vector_epi(g, sm, sigma)};
  out.back().param = "x=gaussian";
  json inputs = base_inputs(seed, i);
  inputs["gaussian"] = to_json(g);
  inputs["S_eigen"] = sv;
  inputs["Sigma_eigen"] = sg;
  if (d <= 2) {
    const LawSpec x = draw_law(s, pick(c, s, kLogConcave, i, 0), d, false, false);
    out.push_back(check_vector_epi(law_grid(c, x), sm, sigma, eps_or_default(c)));
    out.back().param = "x=" + x.family;
    inputs["x"] = to_json(x);
  }
  return finish(std::move(out), inputs, seed, t0);
}

Rows run_linear_epi(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "T3.2-linearT";
  const int d = dimension(c, id, 1, 1, 3);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const std::string kind = map_kind(c, {"affine"}, i);
  require_kind(id, kind, {"affine", "diagonal"}, "T must be linear (affine)");
  const GaussianLaw g = random_gaussian(s, d);
  const ContractionSpec t = draw_map(c, s, d, kind);
  std::vector<CheckReport> out{check_linear_epi(g, t)};
  out.back().param += ";x=gaussian";
  json inputs = base_inputs(seed, i);
  inputs["gaussian"] = to_json(g);
  inputs["map"] = map_json(t);
  if (d <= 2) {
    const LawSpec x = draw_law(s, pick(c, s, kLogConcave, i, 0), d, false, false);
    out.push_back(check_linear_epi(law_grid(c, x), t, eps_or_default(c)));
    out.back().param += ";x=" + x.family;
    inputs["x"] = to_json(x);
  }
  return finish(std::move(out), inputs, seed, t0);
}

Rows run_gaussian_strong(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "T3.3-gaussianGZstrongT";
  const int d = dimension(c, id, 2, 1, 3);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const std::string kind = map_kind(c, {"coordinatewise", "diagonal"}, i);
  const bool strong = kind == "coordinatewise" || kind == "diagonal";
  Vec mean(d), lambda(d);
  for (auto& v : mean) v = s.uniform(-1.0, 1.0);
  lambda[0] = s.uniform(0.25, 2.0);
  for (int q = 1; q < d; ++q) lambda[q] = strong ? s.uniform(0.25, 2.0) : lambda[0];
  const ContractionSpec t = draw_map(c, s, d, kind);
  CheckReport r = check_gaussian_strong(mean, lambda, t, c.mc(seed));
  r.param += ";map=" + kind;
  json inputs = base_inputs(seed, i);
  inputs["mean"] = mean;
  inputs["lambda"] = lambda;
  inputs["map"] = map_json(t);
  return finish({r}, inputs, seed, t0);
}

LawSpec isotropic_lc_law(const HarnessConfig& c, SampleStream& s, const std::string& id, int d, int i) {
  const LawSpec x = draw_law(s, pick(c, s, kLogConcave, i, 0), d, false, true);
  require(x.log_concave(), id, "X must be log-concave");
  return x;
}

Rows run_isotropic_lc(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "T3.4-isotropiclcXgaussianZ";
  const int d = dimension(c, id, 1, 1, 2);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const LawSpec x = isotropic_lc_law(c, s, id, d, i);
  const std::string kind = map_kind(c, kGeneralMaps, i);
  const ContractionSpec t = draw_map(c, s, d, kind);
  CheckReport r = check_isotropic_lc(law_grid(c, x), t, eps_or_default(c));
  r.param += ";map=" + kind + ";x=" + x.family;
  json inputs = base_inputs(seed, i);
  inputs["x"] = to_json(x);
  inputs["map"] = map_json(t);
  return finish({r}, inputs, seed, t0);
}

Rows run_delta_bound(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "B3.1-delta-lx-bound";
  const int d = dimension(c, id, 1, 1, 2);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const LawSpec x = draw_law(s, pick(c, s, kLogConcave, i, 0), d, false, false);
  require(x.log_concave(), id, "X must be log-concave");
  CheckReport r = check_delta_isotropic_bound(law_grid(c, x), eps_or_default(c));
  r.param = "x=" + x.family;
  json inputs = base_inputs(seed, i);
  inputs["x"] = to_json(x);
  return finish({r}, inputs, seed, t0);
}

Rows run_isotropic_threshold(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "C3.1-isotropic-lip";
  const int d = dimension(c, id, 1, 1, 2);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const LawSpec x = isotropic_lc_law(c, s, id, d, i);
  const DensityGrid fx = law_grid(c, x);
  const double threshold = isotropic_lipschitz_threshold(isotropic_constant(fx));
  const std::string kind = map_kind(c, {"affine", "coordinatewise", "diagonal"}, i);
  const double lip = c.lip.value_or(threshold * s.uniform(0.25, 1.0));
  const ContractionSpec t = with_lipschitz(random_contraction(s, d, kind), lip);
  CheckReport r = check_isotropic_threshold(fx, t, eps_or_default(c));
  r.param += ";map=" + kind + ";x=" + x.family;
  json inputs = base_inputs(seed, i);
  inputs["x"] = to_json(x);
  inputs["map"] = map_json(t);
  return finish({r}, inputs, seed, t0);
}

Rows run_open_gaussian(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "Q3.1-open-question";
  const int d = dimension(c, id, 1, 1, 2);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const LawSpec x = draw_law(s, pick(c, s, kAnyLaw, i, 0), d, false, false);
  const std::string kind = map_kind(c, {"coordinatewise", "sampled", "gradient_convex", "affine"}, i);
  const ContractionSpec t = draw_map(c, s, d, kind);
  CheckReport r = open_question_report(law_grid(c, x), t, eps_or_default(c));
  r.param += ";map=" + kind + ";x=" + x.family;
  json inputs = base_inputs(seed, i);
  inputs["x"] = to_json(x);
  inputs["map"] = map_json(t);
  return finish({r}, inputs, seed, t0);
}

// ---- diversity ----

Rows run_scaling_limit(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "L4.1-scaling-limit";
  const int d = dimension(c, id, 1, 1, 2);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const LawSpec x = draw_law(s, pick(c, s, {"uniform_box", "gaussian", "laplace"}, i, 0), d, false, false);
  const std::vector<LawSpec> laws{x};
  const std::int64_t cells = c.grid > 0 ? c.grid : (d == 1 ? 1024 : 40);
  const DensityGrid f = grid_law(x, common_spacing(laws, cells, kTail), kTail);
  ScalingLimitResult res = scaling_limit_check(f, c.t_ladder);
  res.report.param += ";x=" + x.family;
  json inputs = base_inputs(seed, i);
  inputs["x"] = to_json(x);
  inputs["t_ladder"] = c.t_ladder;
  inputs["ratios"] = res.ratio;
  return finish({res.report}, inputs, seed, t0);
}

Rows run_h2(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "T4.2-h2";
  const int d = dimension(c, id, 2, 1, 3);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const int k = c.k.value_or(5);
  if (k < 1) throw ConfigError(id + ": k must be >= 1");
  std::vector<Point> points(k, Point(d));
  std::vector<double> weights(k);
  double total = 0.0;
  for (auto& p : points)
    for (auto& v : p) v = s.uniform(-2.0, 2.0);
  for (auto& w : weights) total += (w = s.uniform(0.1, 1.0));
  for (auto& w : weights) w /= total;
  const std::string family = c.families.empty() ? (i % 2 == 0 ? "gaussian" : "uniform_ball")
                                                : c.families[static_cast<std::size_t>(i) % c.families.size()];
  const LawSpec w = draw_law(s, family, d, true, true);
  require(w.radially_symmetric() && w.log_concave(), id, "W must be radially symmetric and log-concave");
  const std::string kind = map_kind(c, kGeneralMaps, i);
  const ContractionSpec t = draw_map(c, s, d, kind);
  const std::vector<double> ts = c.t ? std::vector<double>{*c.t} : c.t_list;
  std::vector<CheckReport> out = check_h2_contraction(weights, points, w, t, ts, c.mc(seed));
  for (auto& r : out) r.param += ";map=" + kind + ";w=" + family;
  json inputs = base_inputs(seed, i);
  inputs["points"] = points;
  inputs["weights"] = weights;
  inputs["w"] = to_json(w);
  inputs["map"] = map_json(t);
  return finish(std::move(out), inputs, seed, t0);
}

Rows run_lc_comparison(const HarnessConfig& c, std::uint64_t seed, int i) {
  const std::string id = "C4.3-lccomparison";
  const int d = dimension(c, id, 1, 1, 2);
  const auto t0 = Clock::now();
  SampleStream s(seed, kGeneratorStream, 0);
  const LawSpec x = draw_law(s, pick(c, s, kLogConcave, i, 0), d, false, false);
  const LawSpec w = draw_law(s, pick(c, s, kRadial, i, 1), d, true, true);
  require(x.log_concave(), id, "X must be log-concave");
  require(w.log_concave() && w.radially_symmetric(), id, "W must be radially symmetric and log-concave");
  const std::string kind = map_kind(c, kGeneralMaps, i);
  const ContractionSpec t = draw_map(c, s, d, kind);
  const std::vector<LawSpec> laws{x, w};
  const double h = common_spacing(laws, cells_per_axis(c, d), kTail);
  const DensityGrid fx = grid_law(x, h, kTail), fw = grid_law(w, h, kTail);
  std::vector<CheckReport> out;
  for (double a : alphas(c, id, {0.5, 1.0, 3.0})) {
    out.push_back(check_lc_comparison(fx, fw, t, a, eps_or_default(c)));
    out.back().param += ";map=" + kind;
  }
  json inputs = base_inputs(seed, i);
  inputs["x"] = to_json(x);
  inputs["w"] = to_json(w);
  inputs["map"] = map_json(t);
  return finish(std::move(out), inputs, seed, t0);
}

std::vector<TheoremEntry> build_registry() {
  using K = EntryKind;
  const std::vector<std::string> grid_knobs{"alpha", "lip", "d"};
  const std::vector<std::string> mc_knobs{"lip", "k", "d", "samples"};
  return {
      {"K1.1-kp-union", K::Conjecture, "Vol(union B(T x_i, r)) <= Vol(union B(x_i, r)) for any contraction T",
       mc_knobs, run_kp_union},
      {"K1.2-kp-compact", K::Conjecture, "Vol(T[K] + rB) <= Vol(K + rB) for compact K and any contraction T",
       {"lip", "samples"}, run_kp_compact},
      {"K1.3-kp-intersection", K::Conjecture,
       "Vol(intersection B(T x_i, r)) >= Vol(intersection B(x_i, r)) for any contraction T", mc_knobs,
       run_kp_intersection},
      {"C1.1-intenttrue", K::Corollary,
       "h_alpha(T(X) + W) <= h_alpha(X + W) for W uniform on a ball and alpha = 2, ..., d + 3",
       {"alpha", "lip", "k", "d", "samples"}, run_integer_orders},
      {"Q1.1-big-question", K::Question, "h_alpha(T(X) + W) <= h_alpha(X + W) with no hypothesis on X", grid_knobs,
       run_big_question},
      {"L2.1-majorization-convex", K::Lemma, "f majorized by g implies int phi(f) <= int phi(g) for convex phi",
       {"d"}, run_convex_integral},
      {"L2.2-central-integral", K::Lemma, "int_{B(0,r)} f* = sup over equal-volume C of int_C f", {"d"},
       run_central_integral},
      {"T2.1-lambdaX", K::Theorem, "f_{X+W} majorized by f_{lambda X + W} for log-concave X, W and lambda in [0, 1]",
       {"alpha", "lambda", "d"}, run_lambda},
      {"T2.2-radsymunimodXW", K::Theorem,
       "f_{X+W} majorized by f_{T(X)+W} for radially symmetric unimodal X, W and any contraction T", grid_knobs,
       run_radsym},
      {"T2.3-lcXunconditionalWdiagT", K::Theorem,
       "f_{X+W} majorized by f_{T(X)+W} for log-concave X, unconditional log-concave W, diagonal T", grid_knobs,
       run_diagonal},
      {"C2.1-convexKlinearT", K::Corollary, "Vol(T(K) + rB) <= Vol(K + rB) for convex K and affine contractions",
       {"lip", "samples"}, run_convex_body},
      {"C2.2-lcXradsymWaffineT", K::Corollary,
       "f_{X+W} majorized by f_{T(X)+W} for log-concave X, radially symmetric log-concave W, affine T", grid_knobs,
       run_affine},
      {"C2.3-intrinsicvolumeslinearcontractions", K::Corollary, "V_i(T[K]) <= V_i(K) for linear contractions",
       {"lip"}, run_intrinsic},
      {"C2.4-unconditionalconvexKL", K::Corollary,
       "Vol(T(K) + L) <= Vol(K + L) for unconditional convex K, L and strong contractions", {"lip"},
       run_unconditional_bodies},
      {"S2.1-shadow-system", K::Lemma,
       "V_1 of a shadow system is convex in lambda, bounded by V_1(K), and contains the diagonal image",
       {"lambda"}, run_shadow},
      {"T2.4-unconditionalXWstrongT", K::Theorem,
       "f_{X+W} majorized by f_{T(X)+W} for unconditional log-concave X, W and strong contractions", grid_knobs,
       run_strong},
      {"C2.5-unconditionallcXradsymlcWBrennierT", K::Corollary,
       "f_{X+W} majorized by f_{T(X)+W} for unconditional log-concave X, radial log-concave W, T = grad phi",
       grid_knobs, run_gradient},
      {"T3.1-vectorepi", K::Theorem,
       "N(X + S^(1/2) Z_Sigma) >= det(I-S)^(1/d) N(X) + det(S)^(1/d) N(X + Z_Sigma)", {"d"}, run_vector_epi},
      {"T3.2-linearT", K::Theorem, "N(X+Z) >= N(T(X)+Z) + (1 - Lip^2) N(X) for linear contractions",
       {"lip", "d"}, run_linear_epi},
      {"T3.3-gaussianGZstrongT", K::Theorem,
       "N(G+Z) >= N(T(G)+Z) + (1 - Lip^2) N(G) for Gaussian G with diagonal covariance and strong T",
       {"lip", "d", "samples"}, run_gaussian_strong},
      {"T3.4-isotropiclcXgaussianZ", K::Theorem,
       "N(X+Z) >= N(T(X)+Z) + (1 - (e^Delta Lip)^2) N(X) for isotropic log-concave X", {"lip", "d"},
       run_isotropic_lc},
      {"B3.1-delta-lx-bound", K::Bound, "log(sqrt(2 pi / e) L_X) <= Delta(X)", {"d"}, run_delta_bound},
      {"C3.1-isotropic-lip", K::Corollary, "h(T(X)+Z) <= h(X+Z) when Lip(T) <= 1/(sqrt(2 pi e) L_X)",
       {"lip", "d"}, run_isotropic_threshold},
      {"Q3.1-open-question", K::Question, "N(X+Z) >= N(T(X)+Z) + (1 - Lip^2) N(X) for any contraction T",
       {"lip", "d"}, run_open_gaussian},
      {"L4.1-scaling-limit", K::Lemma, "C_d D_2^t(X) / t^d -> e^(h_2(X)) as t -> infinity", {"d"},
       run_scaling_limit},
      {"T4.2-h2", K::Theorem, "D_2^t(T(X) + W) <= D_2^t(X + W) for radially symmetric log-concave W",
       {"lip", "t", "k", "d", "samples"}, run_h2},
      {"C4.3-lccomparison", K::Corollary,
       "h_alpha(T(X)+W) <= h_alpha(X+W) + sgn(2-alpha)(log alpha/(alpha-1) - log 2) d", {"alpha", "lip", "d"},
       run_lc_comparison},
  };
}

}  // namespace

const char* kind_name(EntryKind k) {
  switch (k) {
    case EntryKind::Theorem: return "theorem";
    case EntryKind::Corollary: return "corollary";
    case EntryKind::Lemma: return "lemma";
    case EntryKind::Bound: return "bound";
    case EntryKind::Conjecture: return "conjecture";
    case EntryKind::Question: return "question";
  }
  return "unknown";
}

const std::vector<TheoremEntry>& registry() {
  static const std::vector<TheoremEntry> entries = build_registry();
  return entries;
}

const TheoremEntry& find_entry(const std::string& id) {
  for (const auto& e : registry())
    if (e.id == id) return e;
  throw ConfigError("unknown theorem id '" + id + "'");
}

const std::vector<std::string>& theorem_manifest() {
  static const std::vector<std::string> ids{
      "K1.1-kp-union",
      "K1.2-kp-compact",
      "K1.3-kp-intersection",
      "C1.1-intenttrue",
      "Q1.1-big-question",
      "L2.1-majorization-convex",
      "L2.2-central-integral",
      "T2.1-lambdaX",
      "T2.2-radsymunimodXW",
      "T2.3-lcXunconditionalWdiagT",
      "C2.1-convexKlinearT",
      "C2.2-lcXradsymWaffineT",
      "C2.3-intrinsicvolumeslinearcontractions",
      "C2.4-unconditionalconvexKL",
      "S2.1-shadow-system",
      "T2.4-unconditionalXWstrongT",
      "C2.5-unconditionallcXradsymlcWBrennierT",
      "T3.1-vectorepi",
      "T3.2-linearT",
      "T3.3-gaussianGZstrongT",
      "T3.4-isotropiclcXgaussianZ",
      "B3.1-delta-lx-bound",
      "C3.1-isotropic-lip",
      "Q3.1-open-question",
      "L4.1-scaling-limit",
      "T4.2-h2",
      "C4.3-lccomparison",
  };
  return ids;
}

}  // namespace kpent
