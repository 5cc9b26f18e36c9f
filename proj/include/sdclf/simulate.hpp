#pragma once

#include <optional>
#include <string>

#include "sdclf/controllers.hpp"
#include "sdclf/discretization.hpp"

namespace sdclf {

// Sampled closed-loop record. states has one more entry than inputs and
// residuals; v_eta (and v_composite when requested) align with states.
struct Trajectory {
  double h = 0.0;
  std::size_t m = 0;
  std::vector<double> times;
  std::vector<NormalState> states;
  std::vector<Vector> inputs;
  std::vector<double> v_eta;
  std::vector<double> v_composite;
  std::vector<double> residuals;
  bool terminated_early = false;
  std::string termination_reason;
};

using LoopController = std::function<ControlResult(const NormalState&)>;
using ControllerFamily = std::function<ControlResult(double, const NormalState&)>;

// Zero-order-hold recursion: round(T/h) steps, each holding the controller
// output constant while the state advances through exact_step. Failures
// (domain violations, infeasibility) end the run early and are recorded on
// the trajectory instead of being thrown.
Trajectory run_closed_loop(const NormalFormSystem& sys, const ClfDesign& design,
                           const LoopController& controller, const NormalState& xi0,
                           double h, double T, std::size_t substeps = 64,
                           const CompositeLyapunov* comp = nullptr);

struct SweepRecord {
  double h = 0.0;
  double terminal_norm = 0.0;
  double peak_norm = 0.0;
  std::optional<double> settled_time;
  double R_target = 0.0;
  bool terminated_early = false;
};

// Records sorted by h descending.
struct SweepSummary {
  std::vector<SweepRecord> records;
  double R_target = 0.0;
};

// First sample instant from which the state norm stays at or below R_target.
std::optional<double> settled_time(const Trajectory& traj, double R_target);

SweepRecord make_sweep_record(const Trajectory& traj, double R_target);

// One closed loop per sample period; the family callback receives the h it is
// being run at.
SweepSummary practical_stability_sweep(const NormalFormSystem& sys,
                                       const ClfDesign& design,
                                       const ControllerFamily& family,
                                       const NormalState& xi0, std::vector<double> hs,
                                       double T, double R_target,
                                       std::size_t substeps = 64);

// Terminal norms may not exceed slack times the value at the next larger
// sample period, scanning records from large h to small.
bool terminal_trend_holds(const SweepSummary& summary, double slack = 1.5);

// CSV with header t,xi_1..xi_n,u_1..u_m,V_eta,residual; one row per sample
// instant, inputs and residual blank on the final row, 17 significant digits.
void export_trajectory(const Trajectory& traj, const std::string& path);

// Writes content to path via a temporary file plus rename.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace sdclf
