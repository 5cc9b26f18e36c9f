#pragma once

#include "sdclf/clf.hpp"

namespace sdclf {

enum class SolverStatus { Interior, Active, Infeasible };

struct ControlResult {
  Vector u;
  double constraint_residual = 0.0;  // constraint value at u; <= 0 when feasible
  SolverStatus status = SolverStatus::Interior;
};

// Minimum-norm u matching the output block to its linear model:
//   g_eta(xi) u = A eta + B (-K eta) - f_eta(xi).
// Exact solve when square, least-squares / minimum-norm via normal equations
// otherwise. Throws InconsistentLinearization when the match residual exceeds
// 1e-8 (1 + ||rhs||).
Vector fbl_controller(const ClfDesign& design, const NormalFormSystem& sys,
                      const NormalState& xi);

// Min-norm input under the affine continuous-time decrease constraint
//   grad V_eta'(f + g u) <= -lambda_min(Q_eta) ||eta||^2.
ControlResult clf_qp_controller(const ClfDesign& design, const NormalFormSystem& sys,
                                const NormalState& xi);

// Unique minimizer of ||u||^2 subject to u'Lambda u + 2 lambda_vec'u + l <= 0.
// Scalar inputs use the closed-form boundary roots (smaller-magnitude root,
// negative on a tie, affine fallback when Lambda vanishes); larger input
// dimensions reduce the active constraint to a secular equation in the KKT
// multiplier, solved by bracketing plus bisection.
ControlResult solve_min_norm_qcqp(const QcqpCoefficients& coeffs);

// qcqp_coefficients followed by solve_min_norm_qcqp.
ControlResult clf_qcqp_controller(const ClfDesign& design, const NormalFormSystem& sys,
                                  const NormalState& xi, double h);

}  // namespace sdclf
