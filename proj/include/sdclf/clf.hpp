#pragma once

#include "sdclf/system.hpp"

namespace sdclf {

// Quadratic Lyapunov certificate for the output block: V_eta(eta) = eta'P_eta eta,
// valid decrease margin c, and the sample-period bound under which the
// feedback-linearizing input keeps the Euler-model decrease.
struct ClfDesign {
  Matrix K;
  Matrix A_cl;
  Matrix P_eta;
  Matrix Q_eta;
  double c = 0.5;
  double h_star_eta = 0.0;
  double lambda_min_Q = 0.0;
};

// Solves A_cl' P + P A_cl = -Q_eta for A_cl = A - B K and computes
// h_star_eta = (1 - c) lambda_min(Q_eta) / lambda_max(A_cl' P A_cl).
ClfDesign design_output_clf(const NormalFormSystem& sys, const Matrix& K,
                            const Matrix& Q_eta, double c);

double v_eta(const ClfDesign& design, const Vector& eta);
Vector grad_v_eta(const ClfDesign& design, const Vector& eta);

// Coefficients of the sampled-data decrease constraint
//   u'Lambda u + 2 lambda_vec'u + l <= 0.
struct QcqpCoefficients {
  Matrix Lambda;
  Vector lambda_vec;
  double l = 0.0;
};

// Lambda = h g'Pg, lambda_vec = g'P(eta + h f), l = f'P(2 eta + h f)
// + c lambda_min(Q_eta) ||eta||^2, all at f = f_eta(xi), g = g_eta(xi).
// Warns (once per process) when h exceeds design.h_star_eta.
QcqpCoefficients qcqp_coefficients(const ClfDesign& design, const NormalFormSystem& sys,
                                   const NormalState& xi, double h);

// Zero-dynamics certificate from the linearization of q(0, z) at the origin.
struct ZeroClf {
  Matrix P_z;
  Matrix Q_z;
  double d = 0.5;
  double decay = 0.0;  // d * lambda_min(Q_z)
};

ZeroClf design_zero_clf(const NormalFormSystem& sys, const Matrix& Q_z, double d);

// Weighted sum V = sigma V_eta + V_z with the certificate matrix
//   Omega(h) = [[sigma c lmin(Q_eta) - h lmax(P_z) L_q,  -lmax(P_z) L_q],
//               [-lmax(P_z) L_q,  d lmin(Q_z) - h lmax(P_z) L_q]].
struct CompositeLyapunov {
  Matrix P_z;
  Matrix Q_z;
  double d = 0.5;
  double L_q = 0.0;
  double sigma = 0.0;
  double sigma_bound = 0.0;  // strict lower bound sigma must exceed
  double h2_star = 0.0;
};

// Picks sigma = 1.01 * its strict lower bound and certifies Omega(h) > 0 at
// h = 0, h = h2_star, and 10 interior samples. Requires
// h2_star < d lmin(Q_z) / (lmax(P_z) L_q).
CompositeLyapunov compose_lyapunov(const ClfDesign& design, const ZeroClf& zero,
                                   double L_q, double h2_star);

Matrix omega_matrix(const CompositeLyapunov& comp, const ClfDesign& design, double h);

double v_composite(const CompositeLyapunov& comp, const ClfDesign& design,
                   const NormalState& xi);

// Samples ||q(eta, z) - q(0, z)|| / ||eta|| on a lattice over the cube
// [-radius, radius]^n and multiplies the largest ratio by safety factor 1.5.
double estimate_lipschitz_q(const NormalFormSystem& sys, double radius);

}  // namespace sdclf
