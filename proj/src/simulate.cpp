#include "sdclf/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace sdclf {

Trajectory run_closed_loop(const NormalFormSystem& sys, const ClfDesign& design,
                           const LoopController& controller, const NormalState& xi0,
                           double h, double T, std::size_t substeps,
                           const CompositeLyapunov* comp) {
  if (!(h > 0.0)) throw BadParameter("run_closed_loop needs h > 0");
  if (!(T >= h)) throw BadParameter("run_closed_loop needs T >= h");
  if (substeps < 1) throw BadParameter("run_closed_loop needs at least one substep");

  Trajectory traj;
  traj.h = h;
  traj.m = sys.m();
  const auto steps = static_cast<std::size_t>(std::llround(T / h));
  const StepConfig cfg{h, substeps};

  NormalState state = xi0;
  traj.times.push_back(0.0);
  traj.states.push_back(state);
  traj.v_eta.push_back(v_eta(design, state.eta()));
  if (comp) traj.v_composite.push_back(v_composite(*comp, design, state));

  for (std::size_t k = 0; k < steps; ++k) {
    try {
      const ControlResult res = controller(state);
      if (res.status == SolverStatus::Infeasible) {
        traj.terminated_early = true;
        traj.termination_reason = "controller constraint infeasible";
        break;
      }
      const NormalState next = exact_step(sys, state, res.u, cfg);
      traj.inputs.push_back(res.u);
      traj.residuals.push_back(res.constraint_residual);
      state = next;
      traj.times.push_back(static_cast<double>(k + 1) * h);
      traj.states.push_back(state);
      traj.v_eta.push_back(v_eta(design, state.eta()));
      if (comp) traj.v_composite.push_back(v_composite(*comp, design, state));
    } catch (const Error& e) {
      traj.terminated_early = true;
      traj.termination_reason = e.what();
      break;
    }
  }
  return traj;
}

std::optional<double> settled_time(const Trajectory& traj, double R_target) {
  std::size_t first_settled = traj.states.size();
  for (std::size_t k = traj.states.size(); k-- > 0;) {
    if (norm2(traj.states[k].xi) <= R_target)
      first_settled = k;
    else
      break;
  }
  if (first_settled == traj.states.size()) return std::nullopt;
  return traj.times[first_settled];
}

SweepRecord make_sweep_record(const Trajectory& traj, double R_target) {
  SweepRecord rec;
  rec.h = traj.h;
  rec.R_target = R_target;
  rec.terminal_norm = norm2(traj.states.back().xi);
  for (const NormalState& s : traj.states)
    rec.peak_norm = std::max(rec.peak_norm, norm2(s.xi));
  rec.settled_time = settled_time(traj, R_target);
  rec.terminated_early = traj.terminated_early;
  return rec;
}

SweepSummary practical_stability_sweep(const NormalFormSystem& sys,
                                       const ClfDesign& design,
                                       const ControllerFamily& family,
                                       const NormalState& xi0, std::vector<double> hs,
                                       double T, double R_target, std::size_t substeps) {
  if (hs.empty()) throw BadParameter("sweep needs at least one sample period");
  for (double h : hs)
    if (!(h > 0.0)) throw BadParameter("sweep sample periods must be positive");
  std::sort(hs.begin(), hs.end(), std::greater<double>());

  SweepSummary summary;
  summary.R_target = R_target;
  for (double h : hs) {
    const LoopController controller = [&family, h](const NormalState& s) {
      return family(h, s);
    };
    const Trajectory traj =
        run_closed_loop(sys, design, controller, xi0, h, T, substeps);
    summary.records.push_back(make_sweep_record(traj, R_target));
  }
  return summary;
}

bool terminal_trend_holds(const SweepSummary& summary, double slack) {
  for (std::size_t i = 1; i < summary.records.size(); ++i)
    if (summary.records[i].terminal_norm >
        slack * summary.records[i - 1].terminal_norm)
      return false;
  return true;
}

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out << content;
    if (!out) throw IoError("failed while writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp + " to " + path + ": " + ec.message());
}

void export_trajectory(const Trajectory& traj, const std::string& path) {
  if (traj.states.empty()) throw BadParameter("trajectory has no states");
  const std::size_t n = traj.states.front().xi.size();
  const std::size_t m = traj.m;

  std::string out = "t";
  for (std::size_t i = 1; i <= n; ++i) out += ",xi_" + std::to_string(i);
  for (std::size_t i = 1; i <= m; ++i) out += ",u_" + std::to_string(i);
  out += ",V_eta,residual\n";

  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out += format_double(traj.times[k]);
    for (double x : traj.states[k].xi) out += "," + format_double(x);
    const bool has_input = k < traj.inputs.size();
    for (std::size_t i = 0; i < m; ++i)
      out += has_input ? "," + format_double(traj.inputs[k][i]) : ",";
    out += "," + format_double(traj.v_eta[k]);
    out += has_input ? "," + format_double(traj.residuals[k]) : ",";
    out += "\n";
  }
  write_text_atomic(path, out);
}

}  // namespace sdclf
