#include "sdclf/discretization.hpp"

#include <cmath>

namespace sdclf {

NormalState euler_step(const NormalFormSystem& sys, const NormalState& xi,
                       const Vector& u, double h) {
  if (!(h > 0.0)) throw BadParameter("euler_step needs h > 0");
  const Vector rhs = eval_dynamics(sys, xi, u);
  NormalState out{xi.xi, xi.gamma};
  for (std::size_t i = 0; i < rhs.size(); ++i) out.xi[i] += h * rhs[i];
  return out;
}

NormalState exact_step(const NormalFormSystem& sys, const NormalState& xi,
                       const Vector& u, const StepConfig& cfg) {
  if (!(cfg.h > 0.0)) throw BadParameter("exact_step needs h > 0");
  if (cfg.substeps < 1) throw BadParameter("exact_step needs at least one substep");
  sys.require_in_domain(xi.xi);
  const std::size_t n = sys.n();
  const double dt = cfg.h / static_cast<double>(cfg.substeps);
  NormalState cur{xi.xi, xi.gamma};
  NormalState stage{xi.xi, xi.gamma};
  for (std::size_t s = 0; s < cfg.substeps; ++s) {
    const Vector k1 = eval_dynamics(sys, cur, u);
    for (std::size_t i = 0; i < n; ++i) stage.xi[i] = cur.xi[i] + 0.5 * dt * k1[i];
    const Vector k2 = eval_dynamics(sys, stage, u);
    for (std::size_t i = 0; i < n; ++i) stage.xi[i] = cur.xi[i] + 0.5 * dt * k2[i];
    const Vector k3 = eval_dynamics(sys, stage, u);
    for (std::size_t i = 0; i < n; ++i) stage.xi[i] = cur.xi[i] + dt * k3[i];
    const Vector k4 = eval_dynamics(sys, stage, u);
    for (std::size_t i = 0; i < n; ++i)
      cur.xi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    sys.require_in_domain(cur.xi);
  }
  return cur;
}

double one_step_error(const NormalFormSystem& sys, const Controller& controller,
                      const NormalState& xi, const StepConfig& cfg) {
  const Vector u = controller(xi);
  const NormalState exact = exact_step(sys, xi, u, cfg);
  const NormalState euler = euler_step(sys, xi, u, cfg.h);
  double acc = 0.0;
  for (std::size_t i = 0; i < exact.xi.size(); ++i) {
    const double d = exact.xi[i] - euler.xi[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

std::vector<double> consistency_errors(const NormalFormSystem& sys,
                                       const Controller& controller,
                                       const std::vector<NormalState>& states,
                                       double h0, std::size_t levels) {
  if (!(h0 > 0.0)) throw BadParameter("consistency check needs h0 > 0");
  if (levels < 2) throw BadParameter("consistency check needs at least 2 levels");
  if (states.empty()) throw BadParameter("consistency check needs at least one state");
  std::vector<double> errors(levels, 0.0);
  double h = h0;
  for (std::size_t lvl = 0; lvl < levels; ++lvl) {
    const StepConfig cfg{h, 64};
    double worst = 0.0;
    for (const NormalState& s : states)
      worst = std::max(worst, one_step_error(sys, controller, s, cfg));
    errors[lvl] = worst;
    h *= 0.5;
  }
  return errors;
}

double estimate_consistency_order(const NormalFormSystem& sys,
                                  const Controller& controller,
                                  const std::vector<NormalState>& states,
                                  double h0, std::size_t levels) {
  const std::vector<double> errors = consistency_errors(sys, controller, states, h0, levels);
  std::vector<double> lx, ly;
  double h = h0;
  for (double e : errors) {
    if (e >= 1e-14) {
      lx.push_back(std::log(h));
      ly.push_back(std::log(e));
    }
    h *= 0.5;
  }
  if (lx.size() < 2)
    throw DegenerateData("one-step errors too small to estimate an order");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double np = static_cast<double>(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  return (np * sxy - sx * sy) / (np * sxx - sx * sx);
}

}  // namespace sdclf
