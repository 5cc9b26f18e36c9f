#pragma once

#include <functional>

#include "sdclf/linalg.hpp"

namespace sdclf {

// State of a normal-form system: xi stacks the output block eta (first gamma
// entries) over the zero-coordinates z.
struct NormalState {
  Vector xi;
  std::size_t gamma = 0;

  Vector eta() const { return Vector(xi.begin(), xi.begin() + gamma); }
  Vector z() const { return Vector(xi.begin() + gamma, xi.end()); }
};

// Control-affine system already in normal form:
//   eta_dot = f_eta(xi) + g_eta(xi) u,   z_dot = q(xi).
// (A, B) is the linear model the output block is matched against; it is
// checked for controllability once at construction. The admissible region is
// approximated by a norm ball of radius domain_radius.
class NormalFormSystem {
 public:
  using EtaDriftFn = std::function<Vector(const Vector&)>;
  using EtaInputFn = std::function<Matrix(const Vector&)>;
  using ZeroFn = std::function<Vector(const Vector&)>;

  NormalFormSystem(std::size_t n, std::size_t gamma, std::size_t m, std::size_t k,
                   EtaDriftFn f_eta, EtaInputFn g_eta, ZeroFn q,
                   Matrix A, Matrix B, double domain_radius = 100.0);

  std::size_t n() const { return n_; }
  std::size_t gamma() const { return gamma_; }
  std::size_t m() const { return m_; }
  std::size_t k() const { return k_; }
  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  double domain_radius() const { return domain_radius_; }

  Vector f_eta(const Vector& xi) const;
  Matrix g_eta(const Vector& xi) const;
  Vector q(const Vector& xi) const;

  // Throws DomainViolation when ||xi|| exceeds the guard radius.
  void require_in_domain(const Vector& xi) const;

 private:
  std::size_t n_, gamma_, m_, k_;
  EtaDriftFn f_eta_;
  EtaInputFn g_eta_;
  ZeroFn q_;
  Matrix A_, B_;
  double domain_radius_;
};

// Stacked right-hand side [f_eta + g_eta u ; q] evaluated inside the guard.
Vector eval_dynamics(const NormalFormSystem& sys, const NormalState& xi, const Vector& u);

// q evaluated with the output block pinned to zero.
Vector eval_zero_dynamics(const NormalFormSystem& sys, const Vector& z);

// Central finite-difference Jacobian of z -> q(0, z), step 1e-6 * max(1, ||z0||_inf).
Matrix jacobian_zero_dynamics(const NormalFormSystem& sys, const Vector& z0);

// Inverted-pendulum-style benchmark:
//   eta1_dot = eta2,  eta2_dot = 10 sin(eta1) + u,  z_dot = eta1^2 - z.
NormalFormSystem make_benchmark();

}  // namespace sdclf
