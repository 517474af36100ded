#include "kpent/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kpent/errors.hpp"

namespace kpent {

namespace {

void require_normalized(const DensityGrid& f, const char* what) {
  if (!f.is_normalized()) throw PreconditionError(std::string(what) + ": grid is not normalized");
}

// Positive masses, largest first; equal masses keep flat-index order.
std::vector<double> descending_masses(const DensityGrid& f) {
  const auto m = f.masses();
  std::vector<std::size_t> idx;
  idx.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] > 0.0) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return m[a] > m[b]; });
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = m[idx[i]];
  return out;
}

// Distinct squared lattice norms in increasing order with the number of
// lattice points at or inside each, until at least `min_count` are covered.
struct Shell {
  std::int64_t norm2;
  std::int64_t count;
};

std::vector<Shell> shells(int dim, std::int64_t min_count) {
  const double ball = std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
  auto r = static_cast<std::int64_t>(std::ceil(std::pow(static_cast<double>(min_count) / ball, 1.0 / dim))) + 2;
  while (true) {
    std::vector<std::int64_t> norms;
    std::vector<std::int64_t> k(dim, -r);
    while (true) {
      std::int64_t n2 = 0;
      for (auto v : k) n2 += v * v;
      if (n2 <= r * r) norms.push_back(n2);
      int a = dim - 1;
      while (a >= 0 && k[a] == r) k[a--] = -r;
      if (a < 0) break;
      ++k[a];
    }
    std::sort(norms.begin(), norms.end());
    std::vector<Shell> out;
    for (std::size_t i = 0; i < norms.size(); ++i) {
      if (i + 1 < norms.size() && norms[i + 1] == norms[i]) continue;
      out.push_back({norms[i], static_cast<std::int64_t>(i + 1)});
      if (out.back().count >= min_count) return out;
    }
    r *= 2;
  }
}

// Number of lattice points with |k|^2 <= n2.
std::int64_t points_within(int dim, std::int64_t n2) {
  const auto r = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(n2)))) + 1;
  std::int64_t count = 0;
  std::vector<std::int64_t> k(dim, -r);
  while (true) {
    std::int64_t s = 0;
    for (auto v : k) s += v * v;
    if (s <= n2) ++count;
    int a = dim - 1;
    while (a >= 0 && k[a] == r) k[a--] = -r;
    if (a < 0) break;
    ++k[a];
  }
  return count;
}

struct Cumulative {
  std::vector<double> prefix;  // prefix[n] = mass of the n largest cells
  double total = 0.0;
  double fraction(std::int64_t n) const {
    if (n <= 0) return 0.0;
    const auto i = static_cast<std::size_t>(std::min<std::int64_t>(n, static_cast<std::int64_t>(prefix.size()) - 1));
    return prefix[i] / total;
  }
};

Cumulative cumulative(const DensityGrid& f) {
  const auto m = descending_masses(f);
  Cumulative c;
  c.prefix.resize(m.size() + 1, 0.0);
  double run = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    run += m[i];
    c.prefix[i + 1] = run;
  }
  c.total = run;
  return c;
}

std::int64_t norm2_for_radius(double r, double spacing) {
  const double q = r / spacing;
  return static_cast<std::int64_t>(std::floor(q * q * (1.0 + 1e-12)));
}

}  // namespace

std::vector<LatticeOffset> ordered_offsets(int dim, std::int64_t radius) {
  std::vector<LatticeOffset> out;
  std::vector<std::int64_t> k(dim, -radius);
  while (true) {
    std::int64_t n2 = 0;
    for (auto v : k) n2 += v * v;
    out.push_back({n2, k});
    int a = dim - 1;
    while (a >= 0 && k[a] == radius) k[a--] = -radius;
    if (a < 0) break;
    ++k[a];
  }
  std::sort(out.begin(), out.end(), [](const LatticeOffset& x, const LatticeOffset& y) {
    if (x.norm2 != y.norm2) return x.norm2 < y.norm2;
    return x.k > y.k;
  });
  return out;
}

DensityGrid rearrange(const DensityGrid& f) {
  require_normalized(f, "rearrange");
  const auto masses = descending_masses(f);
  if (masses.empty()) throw EmptySupportError("rearrange: no positive mass");
  const int d = f.dim();
  const auto p = static_cast<double>(masses.size());
  const double ball = std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
  auto radius = static_cast<std::int64_t>(std::floor(std::pow(p / ball, 1.0 / d)));
  std::vector<LatticeOffset> order;
  while (true) {
    order = ordered_offsets(d, radius);
    if (order.size() >= masses.size() && order[masses.size() - 1].norm2 <= radius * radius) break;
    ++radius;
  }
  std::int64_t cube = 0;
  for (std::size_t i = 0; i < masses.size(); ++i)
    for (auto v : order[i].k) cube = std::max<std::int64_t>(cube, std::abs(v));

  GridSpec s;
  s.dim = d;
  s.spacing = f.spacing();
  s.origin.assign(d, -(static_cast<double>(cube) + 0.5) * s.spacing);
  s.shape.assign(d, 2 * cube + 1);
  std::vector<double> out(s.cell_count(), 0.0);
  std::vector<std::int64_t> idx(d);
  for (std::size_t i = 0; i < masses.size(); ++i) {
    for (int a = 0; a < d; ++a) idx[a] = order[i].k[a] + cube;
    out[s.flatten(idx)] = masses[i];
  }
  return DensityGrid(std::move(s), std::move(out));
}

double ball_cumulative(const DensityGrid& f, double r) {
  if (!(r > 0.0)) throw DomainError("ball_cumulative: radius must be positive");
  require_normalized(f, "ball_cumulative");
  const Cumulative c = cumulative(f);
  const auto support = static_cast<std::int64_t>(c.prefix.size()) - 1;
  const std::int64_t n2 = norm2_for_radius(r, f.spacing());
  // Any ball wider than the support cube already holds every cell.
  const double side = std::ceil(std::pow(static_cast<double>(support), 1.0 / f.dim())) + 1.0;
  if (static_cast<double>(n2) >= side * side * f.dim()) return c.fraction(support);
  return c.fraction(points_within(f.dim(), n2));
}

MajorizationVerdict majorizes(const DensityGrid& g, const DensityGrid& f, double tolerance) {
  if (f.dim() != g.dim() || f.spacing() != g.spacing()) {
    throw IncompatibleGridError("majorizes: grids must share dimension and spacing");
  }
  require_normalized(f, "majorizes");
  require_normalized(g, "majorizes");
  const Cumulative cf = cumulative(f);
  const Cumulative cg = cumulative(g);
  const auto need = static_cast<std::int64_t>(std::max(cf.prefix.size(), cg.prefix.size())) - 1;

  MajorizationVerdict v;
  v.tolerance_used = tolerance;
  v.worst_deficit = -std::numeric_limits<double>::infinity();
  for (const Shell& sh : shells(f.dim(), need)) {
    const double deficit = cf.fraction(sh.count) - cg.fraction(sh.count);
    if (deficit > v.worst_deficit) {
      v.worst_deficit = deficit;
      v.worst_radius = std::sqrt(static_cast<double>(sh.norm2)) * f.spacing();
    }
  }
  v.holds = v.worst_deficit <= tolerance;
  return v;
}

}  // namespace kpent
