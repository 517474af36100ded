#include "kpent/gauss_epi.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kpent/calibration.hpp"
#include "kpent/convolve.hpp"
#include "kpent/errors.hpp"
#include "kpent/families.hpp"
#include "kpent/rng.hpp"

namespace kpent {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;
constexpr double kClosedFormRelative = 1e-12;
constexpr double kIsotropyTolerance = 1e-2;
constexpr std::uint32_t kStrongStream = 4;

std::int64_t elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

Matrix symmetrize(const Matrix& m) {
  Matrix s = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) s(i, j) = s(j, i) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

double det_root(const Matrix& m) {
  const double det = determinant(m);
  return std::pow(std::max(det, 0.0), 1.0 / static_cast<double>(m.rows()));
}

Matrix spd_inverse(const Matrix& m) {
  const SymmetricEigen e = symmetric_eigen(m);
  const std::size_t n = m.rows();
  Matrix inv(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(e.values[k] > 0.0)) throw DegenerateError("matrix is not positive definite");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) inv(i, j) += e.vectors(i, k) * e.vectors(j, k) / e.values[k];
  }
  return inv;
}

double eps_or_default(const DensityGrid& f, double eps) { return eps >= 0.0 ? eps : default_grid_budget(f); }

// Relative error of an entropy power whose entropy is off by at most eps.
double power_slack(double eps, int d) { return std::expm1(2.0 * eps / d); }

double grid_power(const DensityGrid& f) { return entropy_power(f); }

DensityGrid plus_gaussian(const DensityGrid& f, const Matrix& cov) {
  GaussianLaw z{Vec(f.dim(), 0.0), cov};
  return convolve(f, grid_gaussian(z, f.spacing()));
}

DensityGrid plus_standard(const DensityGrid& f) { return plus_gaussian(f, Matrix::identity(f.dim())); }

DensityGrid image_of(const ContractionSpec& t, const DensityGrid& f) {
  if (t.dim != f.dim()) throw DomainError("map dimension does not match the grid");
  return pushforward_grid(t, f, image_spec(t, f));
}

// Covariance of the piecewise-constant density: cell-center covariance plus
// the within-cell variance h^2/12 on every axis.
Matrix density_covariance(const DensityGrid& f) {
  Matrix c = covariance(f).cov;
  for (int i = 0; i < f.dim(); ++i) c(i, i) += f.spacing() * f.spacing() / 12.0;
  return c;
}

double lipschitz_for_bound(const ContractionSpec& t) {
  try {
    return certified_lipschitz(t);
  } catch (const PreconditionError&) {
    return lipschitz_constant(t).value;
  }
}

void require_contraction(double lip, const char* id) {
  if (lip > 1.0 + 1e-9) throw PreconditionError(std::string(id) + ": map is not a contraction (Lip " + std::to_string(lip) + ")");
}

bool is_strong_kind(const ContractionSpec& t) {
  if (std::holds_alternative<DiagonalMap>(t.kind) || std::holds_alternative<CoordinatewiseMap>(t.kind)) return true;
  if (const auto* a = std::get_if<AffineMap>(&t.kind)) {
    for (std::size_t i = 0; i < a->a.rows(); ++i)
      for (std::size_t j = 0; j < a->a.cols(); ++j)
        if (i != j && a->a(i, j) != 0.0) return false;
    return true;
  }
  return false;
}

void require_log_concave_1d(const DensityGrid& f, const char* id) {
  if (f.dim() == 1 && !grid_is_log_concave_1d(f)) throw HypothesisError(id, "X must be log-concave");
}

std::string fmt(double x) { return format_real(x); }

}  // namespace

GaussianLaw GaussianLaw::standard(int dim) { return {Vec(dim, 0.0), Matrix::identity(dim)}; }

void GaussianLaw::validate() const {
  const std::size_t d = mean.size();
  if (d < 1) throw DomainError("Gaussian law needs dimension >= 1");
  if (cov.rows() != d || cov.cols() != d) throw DomainError("Gaussian covariance has the wrong shape");
  if (!is_symmetric(cov, 1e-12)) throw DomainError("Gaussian covariance must be symmetric");
  if (!is_psd(cov, 1e-12)) throw DomainError("Gaussian covariance must be positive semi-definite");
}

nlohmann::json to_json(const GaussianLaw& g) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < g.cov.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (std::size_t j = 0; j < g.cov.cols(); ++j) r.push_back(g.cov(i, j));
    rows.push_back(r);
  }
  return {{"mean", g.mean}, {"cov", rows}};
}

GaussianLaw gaussian_from_json(const nlohmann::json& j) {
  GaussianLaw g;
  try {
    g.mean = j.at("mean").get<Vec>();
    const auto rows = j.at("cov").get<std::vector<Vec>>();
    g.cov = Matrix(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != g.cov.cols()) throw ConfigError("ragged covariance rows");
      for (std::size_t k = 0; k < rows[i].size(); ++k) g.cov(i, k) = rows[i][k];
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad Gaussian law: ") + e.what());
  }
  try {
    g.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return g;
}

double gaussian_entropy(const GaussianLaw& g) {
  g.validate();
  const double det = determinant(g.cov);
  if (!(det > 1e-300)) throw DegenerateError("Gaussian covariance is singular; entropy is -infinity");
  return 0.5 * std::log(det) + 0.5 * g.dim() * std::log(kTwoPiE);
}

double gaussian_entropy_power(const Matrix& cov) { return kTwoPiE * det_root(cov); }

DensityGrid grid_gaussian(const GaussianLaw& g, double spacing) {
  g.validate();
  const int d = g.dim();
  if (d > 3) throw DomainError("grids support dim <= 3");
  const Matrix inv = spd_inverse(g.cov);
  GridSpec s;
  s.dim = d;
  s.spacing = spacing;
  for (int i = 0; i < d; ++i) {
    const double half = 8.0 * std::sqrt(g.cov(i, i));
    const auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(2.0 * half / spacing)));
    s.origin.push_back(g.mean[i] - 0.5 * static_cast<double>(n) * spacing);
    s.shape.push_back(n);
  }
  return make_grid(s, [&](std::span<const double> x) {
    double q = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) q += (x[i] - g.mean[i]) * inv(i, j) * (x[j] - g.mean[j]);
    return std::exp(-0.5 * q);
  });
}

double delta_gap(const DensityGrid& f) {
  const Matrix c = density_covariance(f);
  const double det = determinant(c);
  if (!(det > 1e-300)) throw DegenerateError("grid covariance is singular");
  const double matched = 0.5 * std::log(det) + 0.5 * f.dim() * std::log(kTwoPiE);
  return (matched - renyi_entropy(f, 1.0)) / f.dim();
}

double isotropic_constant(const DensityGrid& f) {
  const Matrix c = density_covariance(f);
  const double det = determinant(c);
  if (!(det > 1e-300)) throw DegenerateError("grid covariance is singular");
  const double d = f.dim();
  return std::pow(max_density(f), 1.0 / d) * std::pow(det, 1.0 / (2.0 * d));
}

double isotropic_lipschitz_threshold(double isotropic_const) {
  return 1.0 / (std::sqrt(kTwoPiE) * isotropic_const);
}

double quoted_lipschitz_threshold(double isotropic_const) {
  return std::sqrt(std::numbers::e / (2.0 * std::numbers::pi * isotropic_const * isotropic_const));
}

double default_grid_budget(const DensityGrid& f) { return grid_tolerance(f.dim(), f.spacing()); }

void require_isotropic(const DensityGrid& f) {
  const Matrix c = density_covariance(f);
  const int d = f.dim();
  double lo = c(0, 0), hi = c(0, 0), mean = 0.0;
  for (int i = 0; i < d; ++i) {
    lo = std::min(lo, c(i, i));
    hi = std::max(hi, c(i, i));
    mean += c(i, i) / d;
  }
  double off = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j) off = std::max(off, std::abs(c(i, j)));
  if ((hi - lo) > kIsotropyTolerance * mean || off > kIsotropyTolerance * mean) {
    throw PreconditionError("covariance is not within 1e-2 of a multiple of the identity");
  }
}

// --- vector EPI -------------------------------------------------------------

namespace {

struct VectorEpiParts {
  Matrix noise;  // S^(1/2) Sigma S^(1/2)
  double det_rest = 0.0;
  double det_s = 0.0;
};

VectorEpiParts vector_epi_parts(const Matrix& s, const Matrix& sigma, int d) {
  if (s.rows() != static_cast<std::size_t>(d) || sigma.rows() != static_cast<std::size_t>(d) || !s.square() ||
      !sigma.square()) {
    throw DomainError("S and Sigma must be d x d");
  }
  if (!is_symmetric(s, 1e-12) || !is_psd(s, 1e-12)) throw PreconditionError("S must be positive semi-definite");
  const Matrix rest = Matrix::identity(d) - s;
  if (!is_psd(rest, 1e-12)) throw PreconditionError("I - S must be positive semi-definite");
  if (!is_symmetric(sigma, 1e-12) || !is_psd(sigma, 1e-12)) throw PreconditionError("Sigma must be positive semi-definite");
  if ((s * sigma - sigma * s).max_abs() > 1e-10) throw PreconditionError("S must commute with Sigma");
  const Matrix root = psd_sqrt(s);
  return {symmetrize(root * sigma * root), det_root(rest), det_root(s)};
}

}  // namespace

CheckReport check_vector_epi(const GaussianLaw& x, const Matrix& s, const Matrix& sigma) {
  const auto t0 = Clock::now();
  x.validate();
  const int d = x.dim();
  const VectorEpiParts p = vector_epi_parts(s, sigma, d);
  const double lhs = gaussian_entropy_power(x.cov + p.noise);
  const double rhs = p.det_rest * gaussian_entropy_power(x.cov) + p.det_s * gaussian_entropy_power(x.cov + sigma);
  ToleranceBudget b;
  b.grid = kClosedFormRelative * std::max(std::abs(lhs), std::abs(rhs));
  CheckReport r = make_report("T3.1-vectorepi", Relation::GreaterEq, lhs, rhs, b, "closed-form/closed-form");
  r.d = d;
  r.runtime_ms = elapsed_ms(t0);
  return r;
}

CheckReport check_vector_epi(const DensityGrid& x, const Matrix& s, const Matrix& sigma, double eps_grid) {
  const auto t0 = Clock::now();
  const int d = x.dim();
  if (d > 2) throw DomainError("grid vector EPI supports d <= 2");
  const VectorEpiParts p = vector_epi_parts(s, sigma, d);
  const double eps = eps_or_default(x, eps_grid);
  if (!(determinant(sigma) > 1e-300)) throw DomainError("grid path needs a nonsingular Sigma");
  const bool no_noise = p.noise.max_abs() == 0.0;
  if (!no_noise && !(determinant(p.noise) > 1e-300)) throw DomainError("grid path needs S = 0 or a nonsingular S");
  const double n_noisy = no_noise ? grid_power(x) : grid_power(plus_gaussian(x, p.noise));
  const double n_x = grid_power(x);
  const double n_full = grid_power(plus_gaussian(x, sigma));
  const double lhs = n_noisy;
  const double rhs = p.det_rest * n_x + p.det_s * n_full;
  ToleranceBudget b;
  b.grid = power_slack(eps, d) * (n_noisy + p.det_rest * n_x + p.det_s * n_full);
  CheckReport r = make_report("T3.1-vectorepi", Relation::GreaterEq, lhs, rhs, b, "grid/grid");
  r.d = d;
  r.runtime_ms = elapsed_ms(t0);
  return r;
}

// --- linear contractions ----------------------------------------------------

CheckReport check_linear_epi(const GaussianLaw& x, const ContractionSpec& t) {
  const auto t0 = Clock::now();
  x.validate();
  const int d = x.dim();
  if (t.dim != d) throw DomainError("map dimension does not match the law");
  if (!t.is_affine()) throw PreconditionError("T3.2-linearT: T must be affine");
  if (!(determinant(x.cov) > 1e-300)) throw DegenerateError("X must have a density (nonsingular covariance)");
  const double lip = lipschitz_constant(t).value;
  require_contraction(lip, "T3.2-linearT");
  const Matrix a = t.as_affine().a;
  const Matrix id = Matrix::identity(d);
  const double lhs = gaussian_entropy_power(x.cov + id);
  const double n_t = gaussian_entropy_power(symmetrize(a * x.cov * a.transposed()) + id);
  const double rhs = n_t + (1.0 - lip * lip) * gaussian_entropy_power(x.cov);
  ToleranceBudget b;
  b.grid = kClosedFormRelative * std::max(std::abs(lhs), std::abs(rhs));
  CheckReport r = make_report("T3.2-linearT", Relation::GreaterEq, lhs, rhs, b, "closed-form/closed-form");
  r.d = d;
  r.param = "lip=" + fmt(lip);
  r.runtime_ms = elapsed_ms(t0);
  return r;
}

CheckReport check_linear_epi(const DensityGrid& x, const ContractionSpec& t, double eps_grid) {
  const auto t0 = Clock::now();
  if (!t.is_affine()) throw PreconditionError("T3.2-linearT: T must be affine");
  const double lip = lipschitz_constant(t).value;
  require_contraction(lip, "T3.2-linearT");
  const double eps = eps_or_default(x, eps_grid);
  const int d = x.dim();
  const double n_xz = grid_power(plus_standard(x));
  const double n_txz = grid_power(plus_standard(image_of(t, x)));
  const double n_x = grid_power(x);
  const double c = 1.0 - lip * lip;
  ToleranceBudget b;
  b.grid = power_slack(eps, d) * (n_xz + n_txz + std::abs(c) * n_x);
  CheckReport r = make_report("T3.2-linearT", Relation::GreaterEq, n_xz, n_txz + c * n_x, b, "grid/grid");
  r.d = d;
  r.param = "lip=" + fmt(lip);
  r.runtime_ms = elapsed_ms(t0);
  return r;
}

// --- Gaussian input, strong contraction -------------------------------------

CheckReport check_gaussian_strong(const Vec& mean, const Vec& lambda, const ContractionSpec& t, const MCParams& mc) {
  const auto t0 = Clock::now();
  const int d = static_cast<int>(lambda.size());
  if (d < 1 || mean.size() != lambda.size()) throw DomainError("mean and lambda must have the same positive length");
  if (t.dim != d) throw DomainError("map dimension does not match the law");
  for (double l : lambda)
    if (!(l >= 0.0) || !std::isfinite(l)) throw DomainError("lambda entries must be nonnegative");
  bool isotropic = true;
  for (double l : lambda) isotropic = isotropic && l == lambda[0];
  if (!is_strong_kind(t) && !isotropic) {
    throw PreconditionError("T3.3-gaussianGZstrongT: T must be a strong contraction unless Lambda = alpha I");
  }
  if (mc.samples < 2) throw DomainError("Monte Carlo needs at least 2 samples");
  const double lip = lipschitz_for_bound(t);
  require_contraction(lip, "T3.3-gaussianGZstrongT");

  const int pairs = d * (d + 1) / 2;
  Vec sd(d);
  for (int i = 0; i < d; ++i) sd[i] = std::sqrt(lambda[i]);
  const ChannelMoments m = mc_moments(0, mc.samples, d + pairs, [&](std::uint64_t i, double* out) {
    SampleStream s(mc.seed, kStrongStream, i);
    Point g(d);
    for (int a = 0; a < d; ++a) g[a] = mean[a] + sd[a] * s.normal();
    const Point y = t.apply(g);
    int c = d;
    for (int a = 0; a < d; ++a) {
      out[a] = y[a];
      for (int b2 = a; b2 < d; ++b2) out[c++] = y[a] * y[b2];
    }
  });

  Vec mu(d);
  for (int a = 0; a < d; ++a) mu[a] = m.mean(a);
  Matrix cov(d, d);
  {
    int c = d;
    for (int a = 0; a < d; ++a)
      for (int b2 = a; b2 < d; ++b2, ++c) cov(a, b2) = cov(b2, a) = m.mean(c) - mu[a] * mu[b2];
  }
  cov = symmetrize(project_psd(symmetrize(cov)));
  const Matrix plus = cov + Matrix::identity(d);
  const double root = det_root(plus);
  const double bound = kTwoPiE * root;

  // Delta-method standard error of det(I + Cov)^(1/d) through the channel means.
  const Matrix gsig = (root / d) * spd_inverse(plus);
  Vec grad(d + pairs, 0.0);
  for (int a = 0; a < d; ++a) {
    double gm = 0.0;
    for (int b2 = 0; b2 < d; ++b2) gm += gsig(a, b2) * mu[b2];
    grad[a] = -2.0 * gm;
  }
  {
    int c = d;
    for (int a = 0; a < d; ++a)
      for (int b2 = a; b2 < d; ++b2, ++c) grad[c] = a == b2 ? gsig(a, a) : 2.0 * gsig(a, b2);
  }
  double var = 0.0;
  for (int i = 0; i < d + pairs; ++i)
    for (int j = 0; j < d + pairs; ++j) var += grad[i] * grad[j] * m.covariance(i, j);
  const double se = kTwoPiE * std::sqrt(std::max(var, 0.0) / static_cast<double>(m.n));

  const Matrix lam = Matrix::diagonal(lambda);
  const double lhs = gaussian_entropy_power(lam + Matrix::identity(d));
  const double rhs = bound + (1.0 - lip * lip) * gaussian_entropy_power(lam);
  ToleranceBudget b;
  b.grid = kClosedFormRelative * std::max(lhs, rhs);
  b.mc_stderr = se;
  CheckReport r = make_report("T3.3-gaussianGZstrongT", Relation::GreaterEq, lhs, rhs, b, "closed-form/mc");
  r.d = d;
  r.samples = m.n;
  r.seed = mc.seed;
  r.param = "lip=" + fmt(lip);
  std::ostringstream note;
  note << "maxent_bound=" << fmt(bound) << " closed_form_target=" << fmt(kTwoPiE * det_root(Matrix::identity(d) + lip * lip * lam));
  if (d <= 2) {
    try {
      const GaussianLaw g{mean, lam};
      const double h = 16.0 * std::sqrt(*std::max_element(lambda.begin(), lambda.end())) / 96.0;
      const DensityGrid gg = grid_gaussian(g, h);
      note << " grid_N(T(G)+Z)=" << fmt(grid_power(plus_standard(image_of(t, gg))));
    } catch (const Error&) {
      // Reporting extra only.
    }
  }
  r.note = note.str();
  r.runtime_ms = elapsed_ms(t0);
  return r;
}

// --- isotropic log-concave input --------------------------------------------

CheckReport check_isotropic_lc(const DensityGrid& x, const ContractionSpec& t, double eps_grid) {
  const auto t0 = Clock::now();
  require_isotropic(x);
  require_log_concave_1d(x, "T3.4-isotropiclcXgaussianZ");
  const double lip = lipschitz_for_bound(t);
  require_contraction(lip, "T3.4-isotropiclcXgaussianZ");
  const double eps = eps_or_default(x, eps_grid);
  const int d = x.dim();
  const double delta = delta_gap(x);
  const double n_xz = grid_power(plus_standard(x));
  const DensityGrid tx = image_of(t, x);
  const double n_txz = grid_power(plus_standard(tx));
  const double n_x = grid_power(x);
  const double c = 1.0 - std::exp(2.0 * delta) * lip * lip;
  ToleranceBudget b;
  // Delta shares the entropy error of N(X), hence the doubled N(X) share.
  b.grid = power_slack(eps, d) * (n_xz + n_txz + 2.0 * std::abs(c) * n_x + std::exp(2.0 * delta) * lip * lip * n_x);
  CheckReport r = make_report("T3.4-isotropiclcXgaussianZ", Relation::GreaterEq, n_xz, n_txz + c * n_x, b, "grid/grid");
  r.d = d;
  r.param = "lip=" + fmt(lip);
  const double alpha = density_covariance(x).trace() / d;
  const double maxent = kTwoPiE * det_root(density_covariance(tx) + Matrix::identity(d));
  std::ostringstream note;
  note << "delta=" << fmt(delta) << " maxent_N(T(X)+Z)=" << fmt(maxent)
       << " proof_bound=" << fmt(kTwoPiE * (1.0 + alpha * lip * lip));
  r.note = note.str();
  r.runtime_ms = elapsed_ms(t0);
  return r;
}

CheckReport check_isotropic_threshold(const DensityGrid& x, const ContractionSpec& t, double eps_grid) {
  const auto t0 = Clock::now();
  require_isotropic(x);
  require_log_concave_1d(x, "C3.1-isotropic-lip");
  const double lip = lipschitz_for_bound(t);
  const double l = isotropic_constant(x);
  const double threshold = isotropic_lipschitz_threshold(l);
  if (lip > threshold * (1.0 + 1e-12)) {
    throw HypothesisError("C3.1-isotropic-lip", "Lip(T) <= 1/(sqrt(2 pi e) L_X) = " + fmt(threshold));
  }
  const double eps = eps_or_default(x, eps_grid);
  const double lhs = renyi_entropy(plus_standard(image_of(t, x)), 1.0);
  const double rhs = renyi_entropy(plus_standard(x), 1.0);
  ToleranceBudget b;
  b.grid = 2.0 * eps;
  CheckReport r = make_report("C3.1-isotropic-lip", Relation::LessEq, lhs, rhs, b, "grid/grid");
  r.d = x.dim();
  r.param = "lip=" + fmt(lip);
  r.note = "threshold=" + fmt(threshold) + " quoted_threshold=" + fmt(quoted_lipschitz_threshold(l));
  r.runtime_ms = elapsed_ms(t0);
  return r;
}

CheckReport check_delta_isotropic_bound(const DensityGrid& x, double eps_grid) {
  const auto t0 = Clock::now();
  require_log_concave_1d(x, "B3.1-delta-lx-bound");
  const double eps = eps_or_default(x, eps_grid);
  const double l = isotropic_constant(x);
  const double lhs = std::log(std::sqrt(2.0 * std::numbers::pi / std::numbers::e) * l);
  ToleranceBudget b;
  b.grid = eps;
  CheckReport r = make_report("B3.1-delta-lx-bound", Relation::LessEq, lhs, delta_gap(x), b, "grid/grid");
  r.d = x.dim();
  r.note = "L_X=" + fmt(l);
  r.runtime_ms = elapsed_ms(t0);
  return r;
}

// --- open question ----------------------------------------------------------

CheckReport open_question_report(const DensityGrid& x, const ContractionSpec& t, double eps_grid) {
  const auto t0 = Clock::now();
  const double lip = lipschitz_for_bound(t);
  require_contraction(lip, "Q3.1-open-question");
  const double eps = eps_or_default(x, eps_grid);
  const int d = x.dim();
  const double n_xz = grid_power(plus_standard(x));
  const double n_txz = grid_power(plus_standard(image_of(t, x)));
  const double n_x = grid_power(x);
  const double c = 1.0 - lip * lip;
  ToleranceBudget b;
  b.grid = power_slack(eps, d) * (n_xz + n_txz + std::abs(c) * n_x);
  CheckReport r = make_report("Q3.1-open-question", Relation::GreaterEq, n_xz, n_txz + c * n_x, b, "grid/grid");
  r.d = d;
  r.param = "lip=" + fmt(lip);
  r.note = "map=" + t.kind_name();
  r.runtime_ms = elapsed_ms(t0);
  return r;
}

StressSummary stress_open_question(const DensityGrid& x, const std::function<ContractionSpec(int)>& generator,
                                   int trials, double eps_grid) {
  if (trials < 1) throw DomainError("stress run needs at least one trial");
  StressSummary out;
  const double eps = eps_or_default(x, eps_grid);
  for (int i = 0; i < trials; ++i) {
    ContractionSpec t = generator(i);
    CheckReport r = open_question_report(x, t, eps);
    if (r.margin < -5.0 * r.tolerance) {
      ++out.flagged;
      r.note += " flagged=candidate";
    }
    out.reports.push_back(std::move(r));
    out.maps.push_back(std::move(t));
    ++out.trials;
  }
  return out;
}

}  // namespace kpent
