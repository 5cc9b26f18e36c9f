#pragma once

#include "sdclf/system.hpp"

namespace sdclf {

struct StepConfig {
  double h = 0.2;
  std::size_t substeps = 64;
};

using Controller = std::function<Vector(const NormalState&)>;

// One step of the first-order approximate map: xi + h * (f_xi + g_xi u).
NormalState euler_step(const NormalFormSystem& sys, const NormalState& xi,
                       const Vector& u, double h);

// High-accuracy stand-in for the true flow over one sample period with the
// input held constant: classical RK4 with cfg.substeps equal substeps. Throws
// DomainViolation when any substep leaves the guard.
NormalState exact_step(const NormalFormSystem& sys, const NormalState& xi,
                       const Vector& u, const StepConfig& cfg);

// ||exact_step - euler_step||_2 under u = controller(xi).
double one_step_error(const NormalFormSystem& sys, const Controller& controller,
                      const NormalState& xi, const StepConfig& cfg);

// Max-over-states one-step errors at h0, h0/2, ..., h0/2^(levels-1).
std::vector<double> consistency_errors(const NormalFormSystem& sys,
                                       const Controller& controller,
                                       const std::vector<NormalState>& states,
                                       double h0, std::size_t levels);

// Least-squares slope of log(error) against log(h); approximately 2 for
// smooth dynamics. Throws DegenerateData when every level's error is below
// 1e-14.
double estimate_consistency_order(const NormalFormSystem& sys,
                                  const Controller& controller,
                                  const std::vector<NormalState>& states,
                                  double h0, std::size_t levels);

}  // namespace sdclf
