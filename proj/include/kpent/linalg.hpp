#pragma once

// Small dense linear algebra for dimensions 1..3 (occasionally a few more in
// tests). Everything is value-typed and row-major.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace kpent {

using Vec = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> data() const { return data_; }

  Matrix transposed() const;
  double max_abs() const;
  double trace() const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(double s, const Matrix& a);
  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Vec operator*(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b);

// Determinant by partial-pivot elimination.
double determinant(const Matrix& a);

struct SymmetricEigen {
  Vec values;        // descending
  Matrix vectors;    // column j is the eigenvector for values[j]
};

// Cyclic Jacobi rotations; stops once the off-diagonal Frobenius norm drops
// below 1e-12 times the matrix norm.
SymmetricEigen symmetric_eigen(const Matrix& sym);

struct Svd {
  Matrix u;          // orthogonal
  Vec singular;      // descending, nonnegative
  Matrix vt;         // orthogonal
};

// One-sided Jacobi SVD of a square matrix. u * diag(singular) * vt == a.
Svd svd(const Matrix& a);

bool is_symmetric(const Matrix& a, double tol);
bool is_psd(const Matrix& a, double tol);

// Clip negative eigenvalues at zero.
Matrix project_psd(const Matrix& sym);
// Principal square root of a PSD matrix (negative eigenvalues clipped).
Matrix psd_sqrt(const Matrix& sym);

}  // namespace kpent
