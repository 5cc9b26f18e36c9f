#include "sdclf/clf.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>

namespace sdclf {

ClfDesign design_output_clf(const NormalFormSystem& sys, const Matrix& K,
                            const Matrix& Q_eta, double c) {
  if (!(c > 0.0 && c < 1.0)) throw BadParameter("decrease margin c must lie in (0, 1)");
  const std::size_t gamma = sys.gamma();
  if (K.rows() != sys.k() || K.cols() != gamma) throw BadParameter("K must be k x gamma");
  if (Q_eta.rows() != gamma || Q_eta.cols() != gamma)
    throw BadParameter("Q_eta must be gamma x gamma");
  const auto [q_lo, q_hi] = sym_eig_extremes(Q_eta);
  (void)q_hi;
  if (!(q_lo > 0.0)) throw NotPositiveDefinite("Q_eta must be positive definite");

  ClfDesign design;
  design.K = K;
  design.Q_eta = Q_eta;
  design.c = c;
  design.lambda_min_Q = q_lo;
  design.A_cl = sys.A() - sys.B() * K;
  try {
    design.P_eta = solve_continuous_lyapunov(design.A_cl, Q_eta);
  } catch (const SingularMatrix&) {
    throw NotHurwitz("closed-loop matrix A - B K is not Hurwitz");
  } catch (const NotPositiveDefinite&) {
    throw NotHurwitz("closed-loop matrix A - B K is not Hurwitz");
  }
  const Matrix m = transpose(design.A_cl) * design.P_eta * design.A_cl;
  const double lam_max = sym_eig_extremes(m).second;
  design.h_star_eta = (1.0 - c) * q_lo / lam_max;
  return design;
}

double v_eta(const ClfDesign& design, const Vector& eta) {
  return dot(eta, design.P_eta * eta);
}

Vector grad_v_eta(const ClfDesign& design, const Vector& eta) {
  Vector g = design.P_eta * eta;
  for (double& x : g) x *= 2.0;
  return g;
}

QcqpCoefficients qcqp_coefficients(const ClfDesign& design, const NormalFormSystem& sys,
                                   const NormalState& xi, double h) {
  if (!(h > 0.0)) throw BadParameter("qcqp_coefficients needs h > 0");
  if (h > design.h_star_eta) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true))
      std::fprintf(stderr,
                   "warning: h=%g exceeds the certified bound h_star_eta=%g; "
                   "the decrease constraint may become infeasible\n",
                   h, design.h_star_eta);
  }
  sys.require_in_domain(xi.xi);
  const Vector eta = xi.eta();
  const Vector f = sys.f_eta(xi.xi);
  const Matrix g = sys.g_eta(xi.xi);
  const Matrix gt = transpose(g);

  QcqpCoefficients out;
  out.Lambda = h * (gt * design.P_eta * g);
  Vector eta_hf = eta;
  for (std::size_t i = 0; i < eta_hf.size(); ++i) eta_hf[i] += h * f[i];
  out.lambda_vec = gt * (design.P_eta * eta_hf);
  Vector two_eta_hf = eta;
  for (std::size_t i = 0; i < two_eta_hf.size(); ++i)
    two_eta_hf[i] = 2.0 * eta[i] + h * f[i];
  out.l = dot(f, design.P_eta * two_eta_hf) +
          design.c * design.lambda_min_Q * dot(eta, eta);
  return out;
}

ZeroClf design_zero_clf(const NormalFormSystem& sys, const Matrix& Q_z, double d) {
  if (!(d > 0.0 && d < 1.0)) throw BadParameter("decrease margin d must lie in (0, 1)");
  const std::size_t nz = sys.n() - sys.gamma();
  if (nz < 1) throw BadParameter("system has no zero-dynamics block");
  if (Q_z.rows() != nz || Q_z.cols() != nz) throw BadParameter("Q_z dimension mismatch");
  const auto [q_lo, q_hi] = sym_eig_extremes(Q_z);
  (void)q_hi;
  if (!(q_lo > 0.0)) throw NotPositiveDefinite("Q_z must be positive definite");

  const Matrix jac = jacobian_zero_dynamics(sys, Vector(nz, 0.0));
  ZeroClf zero;
  zero.Q_z = Q_z;
  zero.d = d;
  zero.decay = d * q_lo;
  try {
    zero.P_z = solve_continuous_lyapunov(jac, Q_z);
  } catch (const SingularMatrix&) {
    throw NotHurwitz("zero-dynamics linearization is not Hurwitz");
  } catch (const NotPositiveDefinite&) {
    throw NotHurwitz("zero-dynamics linearization is not Hurwitz");
  }
  return zero;
}

CompositeLyapunov compose_lyapunov(const ClfDesign& design, const ZeroClf& zero,
                                   double L_q, double h2_star) {
  if (!(L_q > 0.0)) throw BadParameter("L_q must be positive");
  if (!(h2_star > 0.0)) throw BadParameter("h2_star must be positive");
  const double lmax_pz = sym_eig_extremes(zero.P_z).second;
  const double omega_x = lmax_pz * L_q;
  const double h_limit = zero.decay / omega_x;
  if (!(h2_star < h_limit))
    throw BadParameter("h2_star must stay below d lambda_min(Q_z) / (lambda_max(P_z) L_q)");

  const double omega_z_h2 = zero.decay - h2_star * omega_x;
  CompositeLyapunov comp;
  comp.P_z = zero.P_z;
  comp.Q_z = zero.Q_z;
  comp.d = zero.d;
  comp.L_q = L_q;
  comp.h2_star = h2_star;
  comp.sigma_bound = (omega_x * omega_x / omega_z_h2 + h2_star * lmax_pz * L_q) /
                     (design.c * design.lambda_min_Q);
  comp.sigma = 1.01 * comp.sigma_bound;

  for (int i = 0; i <= 11; ++i) {
    const double h = h2_star * static_cast<double>(i) / 11.0;
    const Matrix omega = omega_matrix(comp, design, h);
    if (!(sym_eig_extremes(omega).first > 0.0))
      throw CertificateFailed("composite certificate matrix is not positive definite");
  }
  return comp;
}

Matrix omega_matrix(const CompositeLyapunov& comp, const ClfDesign& design, double h) {
  const double lmax_pz = sym_eig_extremes(comp.P_z).second;
  const double lmin_qz = sym_eig_extremes(comp.Q_z).first;
  const double omega_x = lmax_pz * comp.L_q;
  const double omega_eta = comp.sigma * design.c * design.lambda_min_Q - h * omega_x;
  const double omega_z = comp.d * lmin_qz - h * omega_x;
  return Matrix(2, 2, {omega_eta, -omega_x, -omega_x, omega_z});
}

double v_composite(const CompositeLyapunov& comp, const ClfDesign& design,
                   const NormalState& xi) {
  const Vector eta = xi.eta();
  const Vector z = xi.z();
  return comp.sigma * dot(eta, design.P_eta * eta) + dot(z, comp.P_z * z);
}

double estimate_lipschitz_q(const NormalFormSystem& sys, double radius) {
  if (!(radius > 0.0)) throw BadParameter("radius must be positive");
  const std::size_t n = sys.n();
  const std::size_t gamma = sys.gamma();
  const std::size_t points = n <= 4 ? 9 : 5;
  std::vector<std::size_t> idx(n, 0);
  double worst = 0.0;
  bool any = false;
  while (true) {
    Vector xi(n);
    for (std::size_t i = 0; i < n; ++i)
      xi[i] = -radius + 2.0 * radius * static_cast<double>(idx[i]) /
                            static_cast<double>(points - 1);
    Vector xi0 = xi;
    for (std::size_t i = 0; i < gamma; ++i) xi0[i] = 0.0;
    double eta_norm = 0.0;
    for (std::size_t i = 0; i < gamma; ++i) eta_norm += xi[i] * xi[i];
    eta_norm = std::sqrt(eta_norm);
    if (eta_norm > 1e-9) {
      const Vector qa = sys.q(xi);
      const Vector qb = sys.q(xi0);
      double diff = 0.0;
      for (std::size_t i = 0; i < qa.size(); ++i)
        diff += (qa[i] - qb[i]) * (qa[i] - qb[i]);
      worst = std::max(worst, std::sqrt(diff) / eta_norm);
      any = true;
    }
    std::size_t pos = 0;
    while (pos < n && ++idx[pos] == points) idx[pos++] = 0;
    if (pos == n) break;
  }
  if (!any) throw DegenerateData("no sample with a nonzero output block");
  return 1.5 * worst;
}

}  // namespace sdclf
