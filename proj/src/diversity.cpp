#include "kpent/diversity.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kpent/calibration.hpp"
#include "kpent/convolve.hpp"
#include "kpent/errors.hpp"
#include "kpent/numeric.hpp"

namespace kpent {

namespace {

using Clock = std::chrono::steady_clock;
constexpr std::uint32_t kDiversityStream = 5;
constexpr std::uint32_t kPairedStream = 6;

std::int64_t elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

void require_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("scale t must be positive");
}

void require_weights(std::span<const double> w, std::size_t n) {
  if (w.size() != n || n == 0) throw DomainError("one weight per point is required");
  double s = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw DomainError("weights must be nonnegative");
    s += x;
  }
  if (std::abs(s - 1.0) > 1e-12) throw DomainError("weights must sum to 1");
}

std::size_t pick(std::span<const double> cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

// 1-D quadrature rule for the density of u = y - x with x, y uniform on cells
// k apart: the tent (h - |u - kh|) / h^2 on [(k-1)h, (k+1)h].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

void add_gauss(Rule& r, double a, double b, double center, double h) {
  using G = boost::math::quadrature::gauss<double, 10>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int sgn : {-1, 1}) {
      if (i == 0 && x[0] == 0.0 && sgn == 1) continue;
      const double u = mid + sgn * half * x[i];
      r.nodes.push_back(u);
      r.weights.push_back(half * w[i] * (h - std::abs(u - center)) / (h * h));
    }
  }
}

// Piece [a, b] with the kernel cusp at `cusp` (a or b) is split geometrically
// toward the cusp until the innermost piece is below 0.05 / t.
void add_piece(Rule& r, double a, double b, double center, double h, double t, bool graded_at_a, bool graded_at_b) {
  if (!graded_at_a && !graded_at_b) {
    add_gauss(r, a, b, center, h);
    return;
  }
  const double len = b - a;
  double inner = len;
  std::vector<double> cuts;
  while (inner > 0.05 / t && cuts.size() < 40) {
    inner *= 0.25;
    cuts.push_back(inner);
  }
  if (graded_at_a) {
    double lo = a;
    for (auto it = cuts.rbegin(); it != cuts.rend(); ++it) {
      add_gauss(r, lo, a + *it, center, h);
      lo = a + *it;
    }
    add_gauss(r, lo, b, center, h);
  } else {
    double hi = b;
    for (auto it = cuts.rbegin(); it != cuts.rend(); ++it) {
      add_gauss(r, b - *it, hi, center, h);
      hi = b - *it;
    }
    add_gauss(r, a, hi, center, h);
  }
}

Rule tent_rule(std::int64_t k, double h, double t) {
  Rule r;
  const double c = static_cast<double>(k) * h;
  // The kernel exp(-t|u|) has its cusp at u = 0, an endpoint only for |k| <= 1.
  add_piece(r, c - h, c, c, h, t, false, k == 1 || k == 0);
  add_piece(r, c, c + h, c, h, t, k == 0 || k == -1, false);
  return r;
}

// Average of exp(-t |y - x|) over x in cell 0 and y in cell k, k >= 0 per axis.
double cell_kernel_1d(std::int64_t k, double h, double t) {
  const double th = t * h;
  if (k == 0) return 2.0 * (th - (-std::expm1(-th))) / (th * th);
  const double a = -std::expm1(-th);
  return std::exp(-th * static_cast<double>(k - 1)) * a * a / (th * th);
}

double cell_kernel_2d(std::int64_t k0, std::int64_t k1, double h, double t) {
  const Rule r0 = tent_rule(k0, h, t);
  const Rule r1 = tent_rule(k1, h, t);
  CompensatedSum s;
  for (std::size_t i = 0; i < r0.nodes.size(); ++i) {
    const double u2 = r0.nodes[i] * r0.nodes[i];
    for (std::size_t j = 0; j < r1.nodes.size(); ++j) {
      s.add(r0.weights[i] * r1.weights[j] * std::exp(-t * std::sqrt(u2 + r1.nodes[j] * r1.nodes[j])));
    }
  }
  return s.value();
}

// K mu averaged over each positive cell, returned alongside the cell masses.
struct CellPotential {
  std::vector<double> mass;
  std::vector<double> potential;
};

CellPotential cell_potential(const DensityGrid& f, double t) {
  require_t(t);
  const int d = f.dim();
  if (d > 2) throw DomainError("grid diversity supports d <= 2");
  const GridSpec& s = f.spec();
  const double h = s.spacing;
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < f.masses().size(); ++i)
    if (f.mass(i) > 0.0) cells.push_back(i);
  // Kernel table over |offset| per axis.
  const std::int64_t n0 = s.shape[0];
  const std::int64_t n1 = d == 2 ? s.shape[1] : 1;
  std::vector<double> table(static_cast<std::size_t>(n0 * n1));
  for (std::int64_t a = 0; a < n0; ++a)
    for (std::int64_t b = 0; b < n1; ++b)
      table[a * n1 + b] = d == 1 ? cell_kernel_1d(a, h, t) : cell_kernel_2d(a, b, h, t);

  CellPotential out;
  out.mass.reserve(cells.size());
  out.potential.reserve(cells.size());
  std::vector<std::int64_t> idx0(cells.size()), idx1(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto ix = s.unflatten(cells[c]);
    idx0[c] = ix[0];
    idx1[c] = d == 2 ? ix[1] : 0;
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CompensatedSum p;
    for (std::size_t e = 0; e < cells.size(); ++e) {
      const std::int64_t a = std::abs(idx0[c] - idx0[e]);
      const std::int64_t b = std::abs(idx1[c] - idx1[e]);
      p.add(f.mass(cells[e]) * table[a * n1 + b]);
    }
    out.mass.push_back(f.mass(cells[c]));
    out.potential.push_back(p.value());
  }
  return out;
}

}  // namespace

double diversity_constant(int d) {
  if (d < 1) throw DomainError("dimension must be >= 1");
  return std::tgamma(d + 1.0) * unit_ball_volume(d);
}

double diversity2_discrete(std::span<const double> weights, std::span<const Point> points, double t) {
  require_t(t);
  require_weights(weights, points.size());
  CompensatedSum s;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < points.size(); ++j) s.add(weights[i] * weights[j] * std::exp(-t * distance(points[i], points[j])));
  return 1.0 / s.value();
}

PointSampler discrete_sampler(std::vector<double> weights, std::vector<Point> points) {
  require_weights(weights, points.size());
  std::vector<double> cum(weights.size());
  double run = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) cum[i] = run += weights[i];
  return [cum = std::move(cum), points = std::move(points)](SampleStream& s, double* out) {
    const Point& p = points[pick(cum, s.uniform() * cum.back())];
    std::copy(p.begin(), p.end(), out);
  };
}

PointSampler law_sampler(LawSpec law) {
  law.validate();
  return [law = std::move(law)](SampleStream& s, double* out) {
    const Point p = law.sample(s);
    std::copy(p.begin(), p.end(), out);
  };
}

MCEstimate diversity2_mc(const PointSampler& sampler, int dim, double t, const MCParams& mc) {
  require_t(t);
  if (mc.samples < 10'000) throw DomainError("diversity Monte Carlo needs at least 1e4 pairs");
  const ChannelMoments m = mc_moments(0, mc.samples, 1, [&](std::uint64_t i, double* out) {
    SampleStream s(mc.seed, kDiversityStream, i);
    std::vector<double> y(dim), z(dim);
    sampler(s, y.data());
    sampler(s, z.data());
    out[0] = std::exp(-t * distance(y, z));
  });
  const double e = m.mean(0);
  return {1.0 / e, m.std_error(0) / (e * e), m.n, mc.seed};
}

double diversity_grid(const DensityGrid& f, double alpha, double t) {
  if (!(alpha >= 0.0)) throw DomainError("diversity order must be >= 0");
  const CellPotential cp = cell_potential(f, t);
  if (std::isinf(alpha)) return 1.0 / *std::max_element(cp.potential.begin(), cp.potential.end());
  CompensatedSum s;
  if (alpha == 1.0) {
    for (std::size_t i = 0; i < cp.mass.size(); ++i) s.add(cp.mass[i] * std::log(cp.potential[i]));
    return std::exp(-s.value());
  }
  for (std::size_t i = 0; i < cp.mass.size(); ++i) s.add(cp.mass[i] * std::pow(cp.potential[i], alpha - 1.0));
  return std::pow(s.value(), 1.0 / (1.0 - alpha));
}

ScalingLimitResult scaling_limit_check(const DensityGrid& f, std::span<const double> t_ladder, double rel_tol) {
  const auto t0 = Clock::now();
  if (t_ladder.empty()) throw DomainError("t ladder is empty");
  for (std::size_t i = 0; i < t_ladder.size(); ++i) {
    require_t(t_ladder[i]);
    if (i > 0 && !(t_ladder[i] > t_ladder[i - 1])) throw DomainError("t ladder must be increasing");
  }
  const int d = f.dim();
  ScalingLimitResult out;
  out.target = std::exp(renyi_entropy(f, 2.0));
  const double cd = diversity_constant(d);
  for (double t : t_ladder) {
    out.t.push_back(t);
    out.ratio.push_back(cd * diversity_grid(f, 2.0, t) / std::pow(t, d));
  }
  out.monotone = true;
  for (std::size_t i = 1; i < out.ratio.size(); ++i) {
    if (std::abs(out.ratio[i] - out.target) > std::abs(out.ratio[i - 1] - out.target) * (1.0 + 1e-12)) out.monotone = false;
  }
  const auto ev = symmetric_eigen(covariance(f).cov).values;
  const double sigma_min = std::sqrt(std::max(ev.back(), 0.0) + f.spacing() * f.spacing() / 12.0);
  out.conclusive = t_ladder.back() * sigma_min >= 50.0;
  const double gap = std::abs(out.ratio.back() / out.target - 1.0);
  CheckReport r = make_report("L4.1-scaling-limit", Relation::LessEq, gap, rel_tol, ToleranceBudget{}, "grid/closed-form");
  r.d = d;
  r.param = "t=" + format_real(t_ladder.back());
  std::string verdict = r.pass ? "converged" : "not-converged";
  if (!out.conclusive) {
    verdict = "inconclusive";
    r.pass = true;
  }
  std::ostringstream note;
  note << "verdict=" << verdict << " ratio=" << format_real(out.ratio.back()) << " target=" << format_real(out.target)
       << " monotone=" << (out.monotone ? "true" : "false");
  r.note = note.str();
  r.runtime_ms = elapsed_ms(t0);
  out.report = r;
  return out;
}

std::vector<CheckReport> check_h2_contraction(std::span<const double> weights, std::span<const Point> points,
                                              const LawSpec& w, const ContractionSpec& t, std::span<const double> t_list,
                                              const MCParams& mc) {
  const auto t0 = Clock::now();
  require_weights(weights, points.size());
  w.validate();
  const int d = w.dim;
  for (const auto& p : points)
    if (p.size() != static_cast<std::size_t>(d)) throw DomainError("point dimension does not match W");
  if (t.dim != d) throw DomainError("map dimension does not match W");
  if (!w.radially_symmetric() || !w.log_concave()) throw HypothesisError("T4.2-h2", "W must be radially symmetric and log-concave");
  if (t_list.empty()) throw DomainError("t list is empty");
  for (double s : t_list) require_t(s);
  if (mc.samples < 10'000) throw DomainError("diversity Monte Carlo needs at least 1e4 pairs");

  const std::vector<Point> mapped = apply_map(t, points);
  std::vector<double> cum(weights.size());
  double run = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) cum[i] = run += weights[i];
  const int nt = static_cast<int>(t_list.size());
  auto sample = [&](std::uint64_t i, double* out) {
    SampleStream s(mc.seed, kPairedStream, i);
    const std::size_t a = pick(cum, s.uniform() * cum.back());
    const std::size_t b = pick(cum, s.uniform() * cum.back());
    const Point wa = w.sample(s);
    const Point wb = w.sample(s);
    double dt = 0.0, dx = 0.0;
    for (int c = 0; c < d; ++c) {
      const double noise = wa[c] - wb[c];
      dt += std::pow(mapped[a][c] - mapped[b][c] + noise, 2);
      dx += std::pow(points[a][c] - points[b][c] + noise, 2);
    }
    dt = std::sqrt(dt);
    dx = std::sqrt(dx);
    for (int k = 0; k < nt; ++k) {
      out[2 * k] = std::exp(-t_list[k] * dt);
      out[2 * k + 1] = std::exp(-t_list[k] * dx);
    }
  };

  std::uint64_t n = mc.samples;
  ChannelMoments m = mc_moments(0, n, 2 * nt, sample);
  auto tight = [&](int k) {
    const double et = m.mean(2 * k), ex = m.mean(2 * k + 1);
    const double se = m.std_error(2 * k) / (et * et) + m.std_error(2 * k + 1) / (ex * ex);
    return std::abs(1.0 / et - 1.0 / ex) < 3.0 * se && m.difference_variance(2 * k, 2 * k + 1) > 0.0;
  };
  while (mc.escalate && n < mc.max_samples) {
    bool any = false;
    for (int k = 0; k < nt; ++k) any = any || tight(k);
    if (!any) break;
    const std::uint64_t next = std::min(n * 10, mc.max_samples);
    m.merge(mc_moments(n, next, 2 * nt, sample));
    n = next;
  }

  std::vector<CheckReport> rows;
  const double cd = diversity_constant(d);
  for (int k = 0; k < nt; ++k) {
    const double et = m.mean(2 * k), ex = m.mean(2 * k + 1);
    ToleranceBudget b;
    const double se_t = m.std_error(2 * k) / (et * et);
    const double se_x = m.std_error(2 * k + 1) / (ex * ex);
    b.mc_stderr = se_t + se_x;
    CheckReport r = make_report("T4.2-h2", Relation::LessEq, 1.0 / et, 1.0 / ex, b, "mc/mc");
    r.d = d;
    r.k = static_cast<int>(points.size());
    r.param = "t=" + format_real(t_list[k]);
    r.samples = m.n;
    r.seed = mc.seed;
    const double scale = cd / std::pow(t_list[k], d);
    r.note = "h2_route=" + format_real(std::log(scale / et)) + "<=" + format_real(std::log(scale / ex));
    rows.push_back(std::move(r));
  }
  const auto ms = elapsed_ms(t0);
  for (auto& r : rows) r.runtime_ms = ms;
  return rows;
}

const CheckReport& worst_row(const std::vector<CheckReport>& rows) {
  if (rows.empty()) throw DomainError("no rows");
  auto slack = [](const CheckReport& r) {
    const double scale = std::max(std::abs(r.lhs) + std::abs(r.rhs), 1e-300);
    return (r.margin + r.tolerance) / scale;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (slack(rows[i]) < slack(rows[best])) best = i;
  return rows[best];
}

double renyi_gap_bound(double alpha) {
  if (!(alpha > 0.0) || std::isinf(alpha)) throw DomainError("order must be a positive real");
  if (alpha == 1.0) return 1.0 - std::numbers::ln2;
  const double sgn = alpha < 2.0 ? 1.0 : (alpha > 2.0 ? -1.0 : 0.0);
  return sgn * (std::log(alpha) / (alpha - 1.0) - std::numbers::ln2);
}

CheckReport check_lc_comparison(const DensityGrid& x, const DensityGrid& w, const ContractionSpec& t, double alpha,
                                double eps_grid) {
  const auto t0 = Clock::now();
  if (x.dim() != w.dim() || t.dim != x.dim()) throw DomainError("dimension mismatch");
  if (x.dim() == 1 && !grid_is_log_concave_1d(x)) throw HypothesisError("C4.3-lccomparison", "X must be log-concave");
  if (w.dim() == 1 && !grid_is_log_concave_1d(w)) throw HypothesisError("C4.3-lccomparison", "W must be log-concave");
  const double eps = eps_grid >= 0.0 ? eps_grid : grid_tolerance(x.dim(), x.spacing());
  const DensityGrid tx = pushforward_grid(t, x, image_spec(t, x));
  const double lhs = renyi_entropy(convolve(tx, w), alpha);
  const double rhs = renyi_entropy(convolve(x, w), alpha) + x.dim() * renyi_gap_bound(alpha);
  ToleranceBudget b;
  b.grid = 2.0 * eps;
  CheckReport r = make_report("C4.3-lccomparison", Relation::LessEq, lhs, rhs, b, "grid/grid");
  r.d = x.dim();
  r.param = "alpha=" + format_real(alpha);
  r.runtime_ms = elapsed_ms(t0);
  return r;
}

}  // namespace kpent
