#include "sdclf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sdclf {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw BadParameter(msg);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double value)
    : rows_(rows), cols_(cols), data_(rows * cols, value) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> entries)
    : rows_(rows), cols_(cols), data_(entries) {
  require(data_.size() == rows * cols, "matrix entry count does not match dimensions");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix shape mismatch in +");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) + b(i, j);
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix shape mismatch in -");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) - b(i, j);
  return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matrix shape mismatch in *");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = s * a(i, j);
  return out;
}

Vector operator*(const Matrix& a, const Vector& x) {
  require(a.cols() == x.size(), "matrix-vector shape mismatch");
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    out[i] = acc;
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

double dot(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), "vector length mismatch in dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

double norm_inf(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j)));
  return m;
}

namespace {

struct LuFactors {
  Matrix lu;
  std::vector<std::size_t> perm;
};

LuFactors lu_factorize(const Matrix& A) {
  const std::size_t n = A.rows();
  LuFactors f{A, std::vector<std::size_t>(n)};
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  const double scale = max_abs(A);
  if (scale == 0.0) throw SingularMatrix("zero matrix in solve_linear");
  const double tiny = 1e-12 * scale;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(f.lu(i, k)) > std::abs(f.lu(p, k))) p = i;
    if (std::abs(f.lu(p, k)) < tiny)
      throw SingularMatrix("pivot below singularity threshold in solve_linear");
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(p, j));
      std::swap(f.perm[k], f.perm[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      f.lu(i, k) /= f.lu(k, k);
      const double lik = f.lu(i, k);
      for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= lik * f.lu(k, j);
    }
  }
  return f;
}

Vector lu_solve(const LuFactors& f, const Vector& b) {
  const std::size_t n = f.perm.size();
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (std::size_t i = 1; i < n; ++i) {
    double acc = x[i];
    for (std::size_t j = 0; j < i; ++j) acc -= f.lu(i, j) * x[j];
    x[i] = acc;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= f.lu(ii, j) * x[j];
    x[ii] = acc / f.lu(ii, ii);
  }
  return x;
}

}  // namespace

Vector solve_linear(const Matrix& A, const Vector& b) {
  require(A.rows() == A.cols(), "solve_linear needs a square matrix");
  require(A.rows() == b.size(), "solve_linear right-hand side length mismatch");
  if (A.rows() == 0) return {};
  const LuFactors f = lu_factorize(A);
  Vector x = lu_solve(f, b);
  Vector r(b.size());
  const Vector ax = A * x;
  for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - ax[i];
  const Vector d = lu_solve(f, r);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += d[i];
  return x;
}

namespace {

double off_diag_frobenius(const Matrix& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) acc += a(i, j) * a(i, j);
  return std::sqrt(acc);
}

double frobenius(const Matrix& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * a(i, j);
  return std::sqrt(acc);
}

}  // namespace

SymmetricEigen sym_eig(const Matrix& S) {
  require(S.rows() == S.cols(), "sym_eig needs a square matrix");
  const std::size_t n = S.rows();
  const double scale = max_abs(S);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(S(i, j) - S(j, i)) > 1e-12 * scale)
        throw NotSymmetric("sym_eig input is not symmetric");

  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (S(i, j) + S(j, i));
  Matrix v = Matrix::identity(n);

  const double threshold = 1e-14 * std::max(1.0, frobenius(a));
  bool converged = n < 2;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    if (off_diag_frobenius(a) <= threshold) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p < n - 1; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double apj = a(p, j);
          const double aqj = a(q, j);
          a(p, j) = c * apj - s * aqj;
          a(q, j) = s * apj + c * aqj;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  if (!converged && off_diag_frobenius(a) > threshold)
    throw IterationLimit("Jacobi eigensolver did not converge in 100 sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&a](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

std::pair<double, double> sym_eig_extremes(const Matrix& S) {
  const SymmetricEigen e = sym_eig(S);
  require(!e.values.empty(), "sym_eig_extremes needs a non-empty matrix");
  return {e.values.front(), e.values.back()};
}

namespace {

// Kronecker product, used only to assemble the Lyapunov system.
Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double xij = x(i, j);
      if (xij == 0.0) continue;
      for (std::size_t k = 0; k < y.rows(); ++k)
        for (std::size_t l = 0; l < y.cols(); ++l)
          out(i * y.rows() + k, j * y.cols() + l) = xij * y(k, l);
    }
  return out;
}

}  // namespace

Matrix solve_continuous_lyapunov(const Matrix& A_cl, const Matrix& Q) {
  require(A_cl.rows() == A_cl.cols(), "Lyapunov solve needs a square A_cl");
  require(Q.rows() == A_cl.rows() && Q.cols() == A_cl.cols(),
          "Lyapunov solve Q shape mismatch");
  const std::size_t n = A_cl.rows();
  const Matrix at = transpose(A_cl);
  const Matrix m = kron(Matrix::identity(n), at) + kron(at, Matrix::identity(n));
  // Column-major stacking on both sides of M vec(P) = vec(-Q).
  Vector rhs(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) rhs[j * n + i] = -Q(i, j);
  const Vector vp = solve_linear(m, rhs);
  Matrix p(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) p(i, j) = vp[j * n + i];
  Matrix sym(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sym(i, j) = 0.5 * (p(i, j) + p(j, i));
  if (sym_eig_extremes(sym).first <= 0.0)
    throw NotPositiveDefinite("Lyapunov solution is not positive definite");
  return sym;
}

}  // namespace sdclf
