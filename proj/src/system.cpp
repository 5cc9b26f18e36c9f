#include "sdclf/system.hpp"

#include <cmath>
#include <utility>

namespace sdclf {

NormalFormSystem::NormalFormSystem(std::size_t n, std::size_t gamma, std::size_t m,
                                   std::size_t k, EtaDriftFn f_eta, EtaInputFn g_eta,
                                   ZeroFn q, Matrix A, Matrix B, double domain_radius)
    : n_(n),
      gamma_(gamma),
      m_(m),
      k_(k),
      f_eta_(std::move(f_eta)),
      g_eta_(std::move(g_eta)),
      q_(std::move(q)),
      A_(std::move(A)),
      B_(std::move(B)),
      domain_radius_(domain_radius) {
  if (gamma_ < 1 || gamma_ > n_) throw BadParameter("need 1 <= gamma <= n");
  if (m_ < 1) throw BadParameter("need at least one input");
  if (k_ < 1 || k_ > m_) throw BadParameter("need 1 <= k <= m");
  if (!f_eta_ || !g_eta_ || !q_) throw BadParameter("system callbacks must be set");
  if (A_.rows() != gamma_ || A_.cols() != gamma_) throw BadParameter("A must be gamma x gamma");
  if (B_.rows() != gamma_ || B_.cols() != k_) throw BadParameter("B must be gamma x k");
  if (!(domain_radius_ > 0.0)) throw BadParameter("domain_radius must be positive");

  // Controllability matrix [B, AB, ..., A^(gamma-1) B], rank checked through
  // the spectrum of its Gram matrix.
  Matrix ctrl(gamma_, gamma_ * k_);
  Matrix block = B_;
  for (std::size_t j = 0; j < gamma_; ++j) {
    for (std::size_t r = 0; r < gamma_; ++r)
      for (std::size_t c = 0; c < k_; ++c) ctrl(r, j * k_ + c) = block(r, c);
    block = A_ * block;
  }
  const Matrix gram = ctrl * transpose(ctrl);
  const auto [lo, hi] = sym_eig_extremes(gram);
  if (!(lo > 1e-18 * std::max(1.0, hi)))
    throw BadParameter("(A, B) is not a controllable pair");
}

Vector NormalFormSystem::f_eta(const Vector& xi) const { return f_eta_(xi); }
Matrix NormalFormSystem::g_eta(const Vector& xi) const { return g_eta_(xi); }
Vector NormalFormSystem::q(const Vector& xi) const { return q_(xi); }

void NormalFormSystem::require_in_domain(const Vector& xi) const {
  if (xi.size() != n_) throw BadParameter("state dimension mismatch");
  if (!(norm2(xi) <= domain_radius_))
    throw DomainViolation("state left the guarded domain");
}

Vector eval_dynamics(const NormalFormSystem& sys, const NormalState& xi, const Vector& u) {
  sys.require_in_domain(xi.xi);
  if (xi.gamma != sys.gamma()) throw BadParameter("state gamma mismatch");
  if (u.size() != sys.m()) throw BadParameter("input dimension mismatch");
  const Vector f = sys.f_eta(xi.xi);
  const Matrix g = sys.g_eta(xi.xi);
  if (f.size() != sys.gamma() || g.rows() != sys.gamma() || g.cols() != sys.m())
    throw BadParameter("system callback returned wrong dimensions");
  const Vector gu = g * u;
  const Vector qv = sys.q(xi.xi);
  if (qv.size() != sys.n() - sys.gamma())
    throw BadParameter("system callback returned wrong dimensions");
  Vector out(sys.n());
  for (std::size_t i = 0; i < sys.gamma(); ++i) out[i] = f[i] + gu[i];
  for (std::size_t i = 0; i < qv.size(); ++i) out[sys.gamma() + i] = qv[i];
  for (double v : out)
    if (!std::isfinite(v)) throw DomainViolation("dynamics evaluated to a non-finite value");
  return out;
}

Vector eval_zero_dynamics(const NormalFormSystem& sys, const Vector& z) {
  if (z.size() != sys.n() - sys.gamma()) throw BadParameter("z dimension mismatch");
  Vector xi(sys.n(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) xi[sys.gamma() + i] = z[i];
  sys.require_in_domain(xi);
  return sys.q(xi);
}

Matrix jacobian_zero_dynamics(const NormalFormSystem& sys, const Vector& z0) {
  const std::size_t nz = sys.n() - sys.gamma();
  if (z0.size() != nz) throw BadParameter("z dimension mismatch");
  const double eps = 1e-6 * std::max(1.0, norm_inf(z0));
  Matrix jac(nz, nz);
  for (std::size_t j = 0; j < nz; ++j) {
    Vector zp = z0;
    Vector zm = z0;
    zp[j] += eps;
    zm[j] -= eps;
    const Vector qp = eval_zero_dynamics(sys, zp);
    const Vector qm = eval_zero_dynamics(sys, zm);
    for (std::size_t i = 0; i < nz; ++i) jac(i, j) = (qp[i] - qm[i]) / (2.0 * eps);
  }
  return jac;
}

NormalFormSystem make_benchmark() {
  auto f_eta = [](const Vector& xi) { return Vector{xi[1], 10.0 * std::sin(xi[0])}; };
  auto g_eta = [](const Vector&) { return Matrix(2, 1, {0.0, 1.0}); };
  auto q = [](const Vector& xi) { return Vector{xi[0] * xi[0] - xi[2]}; };
  return NormalFormSystem(3, 2, 1, 1, f_eta, g_eta, q,
                          Matrix(2, 2, {0.0, 1.0, 0.0, 0.0}), Matrix(2, 1, {0.0, 1.0}),
                          100.0);
}

}  // namespace sdclf
