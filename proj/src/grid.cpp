#include "kpent/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kpent/errors.hpp"
#include "kpent/numeric.hpp"

namespace kpent {

void GridSpec::validate() const {
  if (dim < 1 || dim > 3) throw DomainError("grid dim must be 1, 2 or 3, got " + std::to_string(dim));
  if (origin.size() != static_cast<std::size_t>(dim) || shape.size() != static_cast<std::size_t>(dim)) {
    throw DomainError("grid origin/shape length must equal dim");
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw DomainError("grid spacing must be positive");
  std::int64_t total = 1;
  for (std::int64_t n : shape) {
    if (n < 1) throw DomainError("every grid shape entry must be >= 1");
    if (total > kMaxCells / n) throw DomainError("grid exceeds 2^31 cells");
    total *= n;
  }
  if (total > kMaxCells) throw DomainError("grid exceeds 2^31 cells");
  for (double o : origin)
    if (!std::isfinite(o)) throw DomainError("grid origin must be finite");
}

std::size_t GridSpec::cell_count() const {
  std::size_t n = 1;
  for (std::int64_t s : shape) n *= static_cast<std::size_t>(s);
  return n;
}

double GridSpec::cell_volume() const { return std::pow(spacing, dim); }

std::vector<std::int64_t> GridSpec::strides() const {
  std::vector<std::int64_t> st(dim, 1);
  for (int a = dim - 2; a >= 0; --a) st[a] = st[a + 1] * shape[a + 1];
  return st;
}

std::vector<std::int64_t> GridSpec::unflatten(std::size_t flat) const {
  std::vector<std::int64_t> idx(dim);
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<std::int64_t>(flat % static_cast<std::size_t>(shape[a]));
    flat /= static_cast<std::size_t>(shape[a]);
  }
  return idx;
}

std::size_t GridSpec::flatten(std::span<const std::int64_t> index) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim; ++a) flat = flat * static_cast<std::size_t>(shape[a]) + static_cast<std::size_t>(index[a]);
  return flat;
}

Point GridSpec::cell_center(std::size_t flat) const {
  Point c(dim);
  for (int a = dim - 1; a >= 0; --a) {
    const auto i = static_cast<double>(flat % static_cast<std::size_t>(shape[a]));
    flat /= static_cast<std::size_t>(shape[a]);
    c[a] = origin[a] + (i + 0.5) * spacing;
  }
  return c;
}

std::int64_t GridSpec::locate(std::span<const double> x) const {
  std::int64_t flat = 0;
  for (int a = 0; a < dim; ++a) {
    const double u = std::floor((x[a] - origin[a]) / spacing);
    if (!(u >= 0.0) || u >= static_cast<double>(shape[a])) return -1;
    flat = flat * shape[a] + static_cast<std::int64_t>(u);
  }
  return flat;
}

GridSpec GridSpec::covering(std::span<const double> lo, std::span<const double> hi, double spacing) {
  if (lo.size() != hi.size()) throw DomainError("covering: lo/hi dimension mismatch");
  GridSpec spec;
  spec.dim = static_cast<int>(lo.size());
  spec.origin.assign(lo.begin(), lo.end());
  spec.spacing = spacing;
  spec.shape.resize(lo.size());
  for (std::size_t a = 0; a < lo.size(); ++a) {
    const double cells = std::ceil((hi[a] - lo[a]) / spacing - 1e-9);
    spec.shape[a] = std::max<std::int64_t>(1, static_cast<std::int64_t>(cells));
  }
  spec.validate();
  return spec;
}

DensityGrid::DensityGrid(GridSpec spec, std::vector<double> masses) : spec_(std::move(spec)), masses_(std::move(masses)) {
  spec_.validate();
  if (masses_.size() != spec_.cell_count()) throw DomainError("mass vector length does not match grid shape");
  for (double m : masses_) {
    if (!std::isfinite(m) || m < 0.0) throw DomainError("cell masses must be finite and nonnegative");
  }
}

double DensityGrid::total_mass() const { return compensated_sum(masses_); }

bool DensityGrid::is_normalized(double tol) const { return std::abs(total_mass() - 1.0) <= tol; }

std::size_t DensityGrid::support_size() const {
  return static_cast<std::size_t>(std::count_if(masses_.begin(), masses_.end(), [](double m) { return m > 0.0; }));
}

DensityGrid DensityGrid::normalized() const {
  const double total = total_mass();
  if (!(total > 0.0)) throw EmptySupportError("cannot normalize a grid with zero total mass");
  // Rescaling within a few ulps of 1 would only perturb the last bits.
  if (std::abs(total - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) return *this;
  std::vector<double> m(masses_);
  for (double& x : m) x /= total;
  return DensityGrid(spec_, std::move(m));
}

DensityGrid DensityGrid::translated(std::span<const double> shift) const {
  if (shift.size() != static_cast<std::size_t>(spec_.dim)) throw DomainError("translation dimension mismatch");
  GridSpec s = spec_;
  for (int a = 0; a < s.dim; ++a) s.origin[a] += shift[a];
  return DensityGrid(std::move(s), masses_);
}

DensityGrid make_grid(const GridSpec& spec, const DensityFunction& density) {
  spec.validate();
  const std::size_t n = spec.cell_count();
  const double vol = spec.cell_volume();
  std::vector<double> masses(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point c = spec.cell_center(i);
    const double v = density(c);
    if (std::isnan(v) || v < 0.0) throw DomainError("density function returned a negative or NaN value");
    if (!std::isfinite(v)) throw DomainError("density function returned an infinite value");
    masses[i] = v * vol;
  }
  DensityGrid raw(spec, std::move(masses));
  if (!(raw.total_mass() > 0.0)) throw EmptySupportError("density vanishes at every cell center");
  return raw.normalized();
}

DensityGrid make_grid(const GridSpec& spec, std::span<const Point> samples) {
  spec.validate();
  if (samples.empty()) throw PreconditionError("make_grid needs at least one sample");
  std::vector<double> counts(spec.cell_count(), 0.0);
  std::size_t inside = 0;
  for (const Point& p : samples) {
    if (p.size() != static_cast<std::size_t>(spec.dim)) throw DomainError("sample dimension mismatch");
    const std::int64_t cell = spec.locate(p);
    if (cell < 0) continue;
    counts[static_cast<std::size_t>(cell)] += 1.0;
    ++inside;
  }
  if (inside == 0) throw EmptySupportError("every sample lies outside the grid");
  for (double& c : counts) c /= static_cast<double>(inside);
  return DensityGrid(spec, std::move(counts)).normalized();
}

namespace {

void require_normalized(const DensityGrid& f) {
  if (!f.is_normalized()) {
    throw PreconditionError("grid is not normalized (total mass " + std::to_string(f.total_mass()) + ")");
  }
}

std::vector<double> sorted_positive_masses(const DensityGrid& f) {
  std::vector<double> m;
  m.reserve(f.masses().size());
  for (double x : f.masses())
    if (x > 0.0) m.push_back(x);
  std::sort(m.begin(), m.end());
  return m;
}

}  // namespace

double renyi_entropy(const DensityGrid& f, double alpha) {
  if (std::isnan(alpha) || alpha < 0.0) throw DomainError("Renyi order must be >= 0");
  require_normalized(f);
  const std::vector<double> m = sorted_positive_masses(f);
  if (m.empty()) throw EmptySupportError("grid has no positive mass");
  const double log_cell = f.dim() * std::log(f.spacing());

  if (alpha == 0.0) return std::log(static_cast<double>(m.size())) + log_cell;
  if (std::isinf(alpha)) return -std::log(m.back()) + log_cell;
  if (alpha == 1.0) {
    CompensatedSum s;
    CompensatedSum total;
    for (double x : m) {
      s.add(-x * std::log(x));
      total.add(x);
    }
    return s.value() + log_cell * total.value();
  }
  // (1/(1-a)) log sum m^a + d log h, with the max factored out.
  const double top = m.back();
  CompensatedSum s;
  for (double x : m) s.add(std::pow(x / top, alpha));
  const double log_sum = alpha * std::log(top) + std::log(s.value());
  return log_sum / (1.0 - alpha) + log_cell;
}

double entropy_power(const DensityGrid& f) { return std::exp(2.0 * renyi_entropy(f, 1.0) / f.dim()); }

CovarianceSummary covariance(const DensityGrid& f) {
  require_normalized(f);
  const int d = f.dim();
  CovarianceSummary out{Vec(d, 0.0), Matrix(d, d)};
  const auto masses = f.masses();
  std::vector<CompensatedSum> mean(d);
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (masses[i] == 0.0) continue;
    const Point c = f.spec().cell_center(i);
    for (int a = 0; a < d; ++a) mean[a].add(masses[i] * c[a]);
  }
  const double total = f.total_mass();
  for (int a = 0; a < d; ++a) out.mean[a] = mean[a].value() / total;
  std::vector<CompensatedSum> second(d * d);
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (masses[i] == 0.0) continue;
    const Point c = f.spec().cell_center(i);
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) second[a * d + b].add(masses[i] * (c[a] - out.mean[a]) * (c[b] - out.mean[b]));
  }
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) out.cov(a, b) = out.cov(b, a) = second[a * d + b].value() / total;
  return out;
}

double max_density(const DensityGrid& f) {
  double m = 0.0;
  for (double x : f.masses()) m = std::max(m, x);
  return m / f.spec().cell_volume();
}

}  // namespace kpent
