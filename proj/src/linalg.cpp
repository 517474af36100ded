#include "kpent/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kpent/errors.hpp"

namespace kpent {

namespace {

constexpr double kJacobiTolerance = 1e-12;
constexpr int kMaxSweeps = 100;

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DomainError("matrix shape mismatch");
  }
}

}  // namespace

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw DomainError("ragged matrix initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Matrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DomainError("matrix product shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b);
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += b(i, j);
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b);
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) -= b(i, j);
  return out;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) *= s;
  return out;
}

Vec operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DomainError("matrix-vector shape mismatch");
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double determinant(const Matrix& a) {
  if (!a.square()) throw DomainError("determinant of non-square matrix");
  const std::size_t n = a.rows();
  Matrix m = a;
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
    if (m(pivot, col) == 0.0) return 0.0;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m(pivot, c), m(col, c));
      det = -det;
    }
    det *= m(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m(r, col) / m(col, col);
      for (std::size_t c = col; c < n; ++c) m(r, c) -= f * m(col, c);
    }
  }
  return det;
}

SymmetricEigen symmetric_eigen(const Matrix& sym) {
  if (!sym.square()) throw DomainError("eigen: non-square matrix");
  const std::size_t n = sym.rows();
  Matrix a = sym;
  Matrix v = Matrix::identity(n);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  double scale = 0.0;
  for (double x : sym.data()) scale += x * x;
  scale = std::sqrt(scale);

  int sweep = 0;
  bool polished = false;
  while (true) {
    if (off_norm() <= kJacobiTolerance * scale) {
      if (polished) break;
      polished = true;
    }
    if (++sweep > kMaxSweeps) throw NumericError("symmetric_eigen: Jacobi sweeps did not converge");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  SymmetricEigen out{Vec(n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = v(k, order[j]);
  }
  return out;
}

Svd svd(const Matrix& a) {
  if (!a.square()) throw DomainError("svd: only square matrices are supported");
  const std::size_t n = a.rows();
  Matrix w = a;
  Matrix v = Matrix::identity(n);

  int sweep = 0;
  bool polished = false;
  while (true) {
    double worst = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        for (std::size_t k = 0; k < n; ++k) {
          alpha += w(k, p) * w(k, p);
          beta += w(k, q) * w(k, q);
          gamma += w(k, p) * w(k, q);
        }
        if (gamma == 0.0 || alpha == 0.0 || beta == 0.0) continue;
        worst = std::max(worst, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < n; ++k) {
          const double wp = w(k, p), wq = w(k, q);
          w(k, p) = c * wp - s * wq;
          w(k, q) = s * wp + c * wq;
          const double vp = v(k, p), vq = v(k, q);
          v(k, p) = c * vp - s * vq;
          v(k, q) = s * vp + c * vq;
        }
      }
    }
    if (worst <= kJacobiTolerance) {
      if (polished) break;
      polished = true;
    }
    if (++sweep > kMaxSweeps) {
      throw NumericError("svd: one-sided Jacobi did not converge after " + std::to_string(kMaxSweeps) +
                         " sweeps (last off-diagonal ratio " + std::to_string(worst) + ")");
    }
  }

  Vec sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0;
    for (std::size_t k = 0; k < n; ++k) s += w(k, j) * w(k, j);
    sigma[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

  Svd out{Matrix(n, n), Vec(n), Matrix(n, n)};
  const double cutoff = (sigma.empty() ? 0.0 : sigma[order[0]]) * 1e-14;
  std::vector<bool> filled(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.singular[j] = sigma[src];
    for (std::size_t k = 0; k < n; ++k) out.vt(j, k) = v(k, src);
    if (sigma[src] > cutoff && sigma[src] > 0.0) {
      for (std::size_t k = 0; k < n; ++k) out.u(k, j) = w(k, src) / sigma[src];
      filled[j] = true;
    }
  }
  // Complete U with an orthonormal basis for the null directions.
  for (std::size_t j = 0; j < n; ++j) {
    if (filled[j]) continue;
    for (std::size_t e = 0; e < n && !filled[j]; ++e) {
      Vec cand(n, 0.0);
      cand[e] = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!filled[i]) continue;
        double proj = 0;
        for (std::size_t k = 0; k < n; ++k) proj += out.u(k, i) * cand[k];
        for (std::size_t k = 0; k < n; ++k) cand[k] -= proj * out.u(k, i);
      }
      const double len = norm(cand);
      if (len > 1e-6) {
        for (std::size_t k = 0; k < n; ++k) out.u(k, j) = cand[k] / len;
        filled[j] = true;
      }
    }
  }
  return out;
}

bool is_symmetric(const Matrix& a, double tol) {
  if (!a.square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

bool is_psd(const Matrix& a, double tol) {
  if (!is_symmetric(a, 1e-12 * std::max(1.0, a.max_abs()))) return false;
  const auto eig = symmetric_eigen(a);
  return eig.values.empty() || eig.values.back() >= -tol;
}

namespace {
Matrix spectral_map(const Matrix& sym, double (*fn)(double)) {
  const auto eig = symmetric_eigen(sym);
  const std::size_t n = sym.rows();
  Matrix out(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double lam = fn(eig.values[j]);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) out(r, c) += lam * eig.vectors(r, j) * eig.vectors(c, j);
  }
  // Symmetrize away rounding.
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c) {
      const double m = 0.5 * (out(r, c) + out(c, r));
      out(r, c) = out(c, r) = m;
    }
  return out;
}
}  // namespace

Matrix project_psd(const Matrix& sym) {
  return spectral_map(sym, [](double x) { return std::max(x, 0.0); });
}

Matrix psd_sqrt(const Matrix& sym) {
  return spectral_map(sym, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

}  // namespace kpent
