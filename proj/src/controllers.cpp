#include "sdclf/controllers.hpp"

#include <cmath>

namespace sdclf {

Vector fbl_controller(const ClfDesign& design, const NormalFormSystem& sys,
                      const NormalState& xi) {
  sys.require_in_domain(xi.xi);
  const Vector eta = xi.eta();
  const Vector f = sys.f_eta(xi.xi);
  const Matrix g = sys.g_eta(xi.xi);
  const Vector a_eta = sys.A() * eta;
  const Vector bk_eta = sys.B() * (design.K * eta);
  Vector rhs(eta.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a_eta[i] - bk_eta[i] - f[i];

  Vector u;
  try {
    if (g.rows() == g.cols()) {
      u = solve_linear(g, rhs);
    } else if (g.cols() > g.rows()) {
      // Wide g: minimum-norm solution through the Gram matrix g g'.
      const Vector y = solve_linear(g * transpose(g), rhs);
      u = transpose(g) * y;
    } else {
      // Tall g: least-squares via normal equations.
      const Matrix gt = transpose(g);
      u = solve_linear(gt * g, gt * rhs);
    }
  } catch (const SingularMatrix&) {
    throw InconsistentLinearization("input matrix too degenerate to match the linear model");
  }

  const Vector gu = g * u;
  double res = 0.0;
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    const double d = gu[i] - rhs[i];
    res += d * d;
  }
  if (std::sqrt(res) > 1e-8 * (1.0 + norm2(rhs)))
    throw InconsistentLinearization("output block cannot be matched to the linear model");
  return u;
}

ControlResult clf_qp_controller(const ClfDesign& design, const NormalFormSystem& sys,
                                const NormalState& xi) {
  sys.require_in_domain(xi.xi);
  const Vector eta = xi.eta();
  const Vector f = sys.f_eta(xi.xi);
  const Matrix g = sys.g_eta(xi.xi);
  const Vector grad = grad_v_eta(design, eta);
  const Vector a = transpose(g) * grad;
  const double b = -design.lambda_min_Q * dot(eta, eta) - dot(grad, f);

  ControlResult out;
  out.u = Vector(sys.m(), 0.0);
  if (b >= 0.0) {
    out.constraint_residual = -b;
    out.status = SolverStatus::Interior;
    return out;
  }
  const double a_norm2 = dot(a, a);
  if (std::sqrt(a_norm2) <= 1e-12) {
    out.constraint_residual = -b;
    out.status = SolverStatus::Infeasible;
    return out;
  }
  for (std::size_t i = 0; i < out.u.size(); ++i) out.u[i] = b / a_norm2 * a[i];
  out.constraint_residual = dot(a, out.u) - b;
  out.status = SolverStatus::Active;
  return out;
}

namespace {

double constraint_value(const QcqpCoefficients& c, const Vector& u) {
  return dot(u, c.Lambda * u) + 2.0 * dot(c.lambda_vec, u) + c.l;
}

ControlResult solve_scalar_qcqp(const QcqpCoefficients& coeffs) {
  const double lam = coeffs.Lambda(0, 0);
  const double lin = coeffs.lambda_vec[0];
  const double l = coeffs.l;
  ControlResult out;
  if (lam <= 1e-14) {
    // Affine constraint 2 lin u + l <= 0.
    if (std::abs(lin) <= 1e-12) {
      out.u = {0.0};
      out.constraint_residual = l;
      out.status = SolverStatus::Infeasible;
      return out;
    }
    out.u = {-l / (2.0 * lin)};
    out.constraint_residual = constraint_value(coeffs, out.u);
    out.status = SolverStatus::Active;
    return out;
  }
  const double disc = lin * lin - lam * l;
  if (disc < 0.0) {
    out.u = {-lin / lam};  // unconstrained minimizer of the constraint quadratic
    out.constraint_residual = constraint_value(coeffs, out.u);
    out.status = SolverStatus::Infeasible;
    return out;
  }
  const double q = -(lin + std::copysign(std::sqrt(disc), lin));
  const double root_big = q / lam;
  const double root_small = l / q;
  double u;
  if (std::abs(std::abs(root_big) - std::abs(root_small)) <= 1e-14)
    u = std::min(root_big, root_small);
  else
    u = std::abs(root_small) <= std::abs(root_big) ? root_small : root_big;
  out.u = {u};
  out.constraint_residual = constraint_value(coeffs, out.u);
  out.status = SolverStatus::Active;
  return out;
}

}  // namespace

ControlResult solve_min_norm_qcqp(const QcqpCoefficients& coeffs) {
  const std::size_t m = coeffs.lambda_vec.size();
  if (coeffs.Lambda.rows() != m || coeffs.Lambda.cols() != m)
    throw BadParameter("QCQP coefficient dimensions disagree");
  if (m == 0) throw BadParameter("QCQP needs at least one input dimension");

  if (coeffs.l <= 0.0) {
    ControlResult out;
    out.u = Vector(m, 0.0);
    out.constraint_residual = coeffs.l;
    out.status = SolverStatus::Interior;
    return out;
  }
  if (m == 1) return solve_scalar_qcqp(coeffs);

  const SymmetricEigen eig = sym_eig(coeffs.Lambda);
  const double d_max = std::max(0.0, eig.values.back());
  if (eig.values.front() < -1e-10 * std::max(1.0, d_max))
    throw BadParameter("QCQP quadratic coefficient must be positive semidefinite");
  const double d_tiny = 1e-14 * std::max(1.0, d_max);
  Vector d = eig.values;
  for (double& x : d) x = x <= d_tiny ? 0.0 : x;
  const Vector lam_t = transpose(eig.vectors) * coeffs.lambda_vec;

  bool unbounded_direction = false;
  double limit = coeffs.l;
  for (std::size_t i = 0; i < m; ++i) {
    if (d[i] == 0.0) {
      if (std::abs(lam_t[i]) > 1e-12) unbounded_direction = true;
    } else {
      limit -= lam_t[i] * lam_t[i] / d[i];
    }
  }
  if (!unbounded_direction) {
    bool all_zero_dirs = true;
    for (double x : d)
      if (x != 0.0) all_zero_dirs = false;
    if (all_zero_dirs) {
      // Lambda vanishes entirely: affine constraint 2 lambda'u + l <= 0.
      const double ln2 = dot(coeffs.lambda_vec, coeffs.lambda_vec);
      ControlResult out;
      if (std::sqrt(ln2) <= 1e-12) {
        out.u = Vector(m, 0.0);
        out.constraint_residual = coeffs.l;
        out.status = SolverStatus::Infeasible;
        return out;
      }
      out.u = Vector(m);
      for (std::size_t i = 0; i < m; ++i)
        out.u[i] = -coeffs.l / (2.0 * ln2) * coeffs.lambda_vec[i];
      out.constraint_residual = constraint_value(coeffs, out.u);
      out.status = SolverStatus::Active;
      return out;
    }
    if (limit > 0.0) {
      // Constraint minimum over the reachable subspace stays positive.
      ControlResult out;
      out.u = Vector(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        if (d[i] == 0.0) continue;
        for (std::size_t r = 0; r < m; ++r)
          out.u[r] -= eig.vectors(r, i) * lam_t[i] / d[i];
      }
      out.constraint_residual = constraint_value(coeffs, out.u);
      out.status = SolverStatus::Infeasible;
      return out;
    }
  }

  // Active constraint: u(mu) = -mu (I + mu Lambda)^{-1} lambda_vec with the
  // multiplier fixed by the secular equation psi(mu) = 0; psi is strictly
  // decreasing from l > 0.
  const auto psi = [&](double mu) {
    double acc = coeffs.l;
    for (std::size_t i = 0; i < m; ++i) {
      const double denom = 1.0 + mu * d[i];
      const double t = mu / denom;
      acc -= lam_t[i] * lam_t[i] * t * (1.0 + 1.0 / denom);
    }
    return acc;
  };

  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (psi(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200)
      throw IterationLimit("QCQP multiplier bracket did not close");
  }
  int iters = 0;
  while (hi - lo > 1e-12 * hi) {
    if (++iters > 200) throw IterationLimit("QCQP multiplier bisection did not converge");
    const double mid = 0.5 * (lo + hi);
    if (psi(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double mu = hi;  // psi(hi) <= 0, so the returned point is feasible
  ControlResult out;
  out.u = Vector(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double coef = mu * lam_t[i] / (1.0 + mu * d[i]);
    for (std::size_t r = 0; r < m; ++r) out.u[r] -= eig.vectors(r, i) * coef;
  }
  out.constraint_residual = constraint_value(coeffs, out.u);
  out.status = SolverStatus::Active;
  return out;
}

ControlResult clf_qcqp_controller(const ClfDesign& design, const NormalFormSystem& sys,
                                  const NormalState& xi, double h) {
  return solve_min_norm_qcqp(qcqp_coefficients(design, sys, xi, h));
}

}  // namespace sdclf
