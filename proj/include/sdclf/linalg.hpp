#pragma once

#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "sdclf/errors.hpp"

namespace sdclf {

using Vector = std::vector<double>;

// Dense real matrix, row-major. Sized for control problems (n of order 10),
// not for scale.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> entries);
  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vector operator*(const Matrix& a, const Vector& x);
Matrix transpose(const Matrix& a);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);
double norm_inf(const Vector& v);
double max_abs(const Matrix& a);

// LU with partial pivoting plus one iterative-refinement pass.
// Throws SingularMatrix when a pivot falls below 1e-12 times the largest
// magnitude of the input matrix.
Vector solve_linear(const Matrix& A, const Vector& b);

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // column i pairs with values[i]
};

// Cyclic Jacobi rotations. Input must be symmetric to within
// 1e-12 * max|S_ij|; it is symmetrized before iterating.
SymmetricEigen sym_eig(const Matrix& S);
std::pair<double, double> sym_eig_extremes(const Matrix& S);

// Solves A_cl' P + P A_cl = -Q by Kronecker vectorization to an n^2 x n^2
// linear system. Returns the symmetrized P; throws NotPositiveDefinite when
// the solution is not positive definite (A_cl not Hurwitz is surfaced either
// that way or as SingularMatrix from the solve).
Matrix solve_continuous_lyapunov(const Matrix& A_cl, const Matrix& Q);

}  // namespace sdclf
