#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "sdclf/simulate.hpp"
#include "test_util.hpp"

using namespace sdclf;

namespace {

const double kSqrt3 = std::sqrt(3.0);

struct Bench {
  NormalFormSystem sys = make_benchmark();
  ClfDesign design = design_output_clf(sys, Matrix(1, 2, {0.5, kSqrt3 / 2.0}),
                                       Matrix::identity(2), 0.5);
};

LoopController qcqp_loop(const Bench& b, double h) {
  return [&b, h](const NormalState& s) { return clf_qcqp_controller(b.design, b.sys, s, h); };
}

// Settling in the reference sense: no blow-up, bounded peak, and the norm
// stays inside the target ball from t = 15 onward.
bool settles(const Trajectory& traj, double R, double from, double peak_cap) {
  if (traj.terminated_early) return false;
  double peak = 0.0;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double n = norm2(traj.states[k].xi);
    peak = std::max(peak, n);
    if (traj.times[k] >= from && n > R) return false;
  }
  return peak <= peak_cap;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("reference closed loop: sampled-data constraint stabilizes, affine one does not") {
  const Bench b;
  const NormalState x0{{1, 0, 1}, 2};

  const Trajectory qcqp = run_closed_loop(b.sys, b.design, qcqp_loop(b, 0.2), x0, 0.2, 20.0);
  CHECK(qcqp.states.size() == 101);
  CHECK(qcqp.inputs.size() == 100);
  CHECK_FALSE(qcqp.terminated_early);
  CHECK(settles(qcqp, 0.25, 15.0, 5.0));

  const LoopController qp = [&b](const NormalState& s) {
    return clf_qp_controller(b.design, b.sys, s);
  };
  const Trajectory qp_traj = run_closed_loop(b.sys, b.design, qp, x0, 0.2, 20.0);
  CHECK_FALSE(settles(qp_traj, 0.25, 15.0, 5.0));
}

TEST_CASE("equilibrium start under zero input stays put") {
  const Bench b;
  const LoopController zero = [](const NormalState&) {
    return ControlResult{{0.0}, 0.0, SolverStatus::Interior};
  };
  const Trajectory traj = run_closed_loop(b.sys, b.design, zero, {{0, 0, 0}, 2}, 0.5, 5.0);
  CHECK(traj.states.size() == 11);
  for (const NormalState& s : traj.states) CHECK(s.xi == Vector{0, 0, 0});
}

TEST_CASE("trajectory bookkeeping is internally consistent") {
  const Bench b;
  const Trajectory traj =
      run_closed_loop(b.sys, b.design, qcqp_loop(b, 0.2), {{1, 0, 1}, 2}, 0.2, 20.0);

  REQUIRE(traj.times.size() == traj.states.size());
  REQUIRE(traj.inputs.size() + 1 == traj.states.size());
  REQUIRE(traj.residuals.size() == traj.inputs.size());
  REQUIRE(traj.v_eta.size() == traj.states.size());
  CHECK(traj.h == 0.2);
  CHECK(traj.m == 1);

  for (std::size_t k = 0; k < traj.times.size(); ++k)
    CHECK(traj.times[k] == doctest::Approx(0.2 * k).epsilon(1e-13));

  // Recorded transitions replay exactly through the integrator.
  for (std::size_t k : {std::size_t{0}, std::size_t{17}, std::size_t{63}}) {
    const NormalState replay = exact_step(b.sys, traj.states[k], traj.inputs[k], {0.2, 64});
    CHECK(replay.xi == traj.states[k + 1].xi);
  }

  for (std::size_t k = 0; k < traj.states.size(); ++k)
    CHECK(traj.v_eta[k] == v_eta(b.design, traj.states[k].eta()));
}

TEST_CASE("recorded inputs satisfy the per-step certificate on the design model") {
  const Bench b;
  const Trajectory traj =
      run_closed_loop(b.sys, b.design, qcqp_loop(b, 0.2), {{1, 0, 1}, 2}, 0.2, 20.0);
  for (std::size_t k = 0; k < traj.inputs.size(); ++k) {
    const Vector eta = traj.states[k].eta();
    const NormalState predicted = euler_step(b.sys, traj.states[k], traj.inputs[k], 0.2);
    const double drop = v_eta(b.design, predicted.eta()) - v_eta(b.design, eta);
    CHECK(drop <= -0.2 * 0.5 * 1.0 * dot(eta, eta) + 1e-8);
    CHECK(traj.residuals[k] <= 1e-8);
  }
}

TEST_CASE("early termination is recorded, not thrown") {
  const Bench b;

  const LoopController kick = [](const NormalState&) {
    return ControlResult{{1e9}, 0.0, SolverStatus::Active};
  };
  const Trajectory blown = run_closed_loop(b.sys, b.design, kick, {{1, 0, 1}, 2}, 0.2, 20.0);
  CHECK(blown.terminated_early);
  CHECK_FALSE(blown.termination_reason.empty());
  CHECK(blown.states.size() == blown.inputs.size() + 1);

  const LoopController refuse = [](const NormalState&) {
    return ControlResult{{0.0}, 1.0, SolverStatus::Infeasible};
  };
  const Trajectory stuck = run_closed_loop(b.sys, b.design, refuse, {{1, 0, 1}, 2}, 0.2, 20.0);
  CHECK(stuck.terminated_early);
  CHECK(stuck.termination_reason == "controller constraint infeasible");
  CHECK(stuck.states.size() == 1);
  CHECK(stuck.inputs.empty());
}

TEST_CASE("run validation") {
  const Bench b;
  const LoopController zero = [](const NormalState&) {
    return ControlResult{{0.0}, 0.0, SolverStatus::Interior};
  };
  CHECK_THROWS_AS(run_closed_loop(b.sys, b.design, zero, {{1, 0, 1}, 2}, 0.0, 20.0),
                  BadParameter);
  CHECK_THROWS_AS(run_closed_loop(b.sys, b.design, zero, {{1, 0, 1}, 2}, 0.5, 0.2),
                  BadParameter);
  CHECK_THROWS_AS(run_closed_loop(b.sys, b.design, zero, {{1, 0, 1}, 2}, 0.2, 20.0, 0),
                  BadParameter);
}

TEST_CASE("settled time scans from the tail") {
  const Bench b;
  const Trajectory traj =
      run_closed_loop(b.sys, b.design, qcqp_loop(b, 0.2), {{1, 0, 1}, 2}, 0.2, 20.0);

  const std::optional<double> t = settled_time(traj, 0.25);
  REQUIRE(t.has_value());
  // Defining property: inside the ball from t onward, outside just before.
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    if (traj.times[k] >= *t) CHECK(norm2(traj.states[k].xi) <= 0.25);
  }
  bool outside_before = false;
  for (std::size_t k = 0; k < traj.states.size(); ++k)
    if (traj.times[k] < *t && norm2(traj.states[k].xi) > 0.25) outside_before = true;
  CHECK(outside_before);

  CHECK_FALSE(settled_time(traj, 1e-6).has_value());
  const std::optional<double> always = settled_time(traj, 10.0);
  REQUIRE(always.has_value());
  CHECK(*always == traj.times.front());
}

TEST_CASE("sample-period sweep records and orders results") {
  const Bench b;
  const ControllerFamily family = [&b](double h, const NormalState& s) {
    return clf_qcqp_controller(b.design, b.sys, s, h);
  };
  const SweepSummary sweep = practical_stability_sweep(
      b.sys, b.design, family, {{1, 0, 1}, 2}, {0.05, 0.2, 0.1, 0.025}, 20.0, 0.25);

  REQUIRE(sweep.records.size() == 4);
  CHECK(sweep.R_target == 0.25);
  for (std::size_t i = 0; i + 1 < 4; ++i) CHECK(sweep.records[i].h > sweep.records[i + 1].h);

  for (const SweepRecord& rec : sweep.records) {
    CHECK_FALSE(rec.terminated_early);
    REQUIRE(rec.settled_time.has_value());
    CHECK(*rec.settled_time <= 15.0);
    CHECK(rec.peak_norm <= 5.0);
  }

  // Measured reality on this benchmark: the shortest-period loop is the
  // least contractive per unit time, so terminal norms grow as h shrinks
  // and the 1.5x trend gate fails.
  for (std::size_t i = 0; i + 1 < 4; ++i)
    CHECK(sweep.records[i].terminal_norm < sweep.records[i + 1].terminal_norm);
  CHECK_FALSE(terminal_trend_holds(sweep));

  const SweepSummary single = practical_stability_sweep(b.sys, b.design, family,
                                                        {{1, 0, 1}, 2}, {0.2}, 20.0, 0.25);
  CHECK(single.records.size() == 1);

  CHECK_THROWS_AS(practical_stability_sweep(b.sys, b.design, family, {{1, 0, 1}, 2}, {},
                                            20.0, 0.25),
                  BadParameter);
  CHECK_THROWS_AS(practical_stability_sweep(b.sys, b.design, family, {{1, 0, 1}, 2},
                                            {0.2, -0.1}, 20.0, 0.25),
                  BadParameter);
}

TEST_CASE("matched-model family settles on short periods only") {
  const Bench b;
  const ControllerFamily family = [&b](double, const NormalState& s) {
    return ControlResult{fbl_controller(b.design, b.sys, s), 0.0, SolverStatus::Interior};
  };
  const SweepSummary sweep = practical_stability_sweep(
      b.sys, b.design, family, {{1, 0, 1}, 2}, {0.2, 0.1, 0.05, 0.025}, 20.0, 0.25);

  REQUIRE(sweep.records.size() == 4);
  // Under the exact flow the h = 0.2 matched loop is not contractive for
  // this plant (the held input overshoots), so it misses the target ball.
  CHECK_FALSE(sweep.records[0].settled_time.has_value());
  for (std::size_t i = 1; i < 4; ++i) {
    REQUIRE(sweep.records[i].settled_time.has_value());
    CHECK(*sweep.records[i].settled_time <= 15.0);
  }
  // Terminal norms do shrink monotonically for this family.
  CHECK(terminal_trend_holds(sweep));
}

TEST_CASE("trend gate arithmetic") {
  SweepSummary s;
  s.R_target = 0.25;
  for (double t : {1.0, 1.4, 2.0}) {
    SweepRecord r;
    r.terminal_norm = t;
    s.records.push_back(r);
  }
  CHECK(terminal_trend_holds(s));  // 1.4 <= 1.5, 2.0 <= 2.1
  s.records[2].terminal_norm = 2.2;
  CHECK_FALSE(terminal_trend_holds(s));
  s.records[2].terminal_norm = 1e-12;
  CHECK(terminal_trend_holds(s));
}

TEST_CASE("trajectory CSV export round-trips") {
  const Bench b;
  const Trajectory traj =
      run_closed_loop(b.sys, b.design, qcqp_loop(b, 0.2), {{1, 0, 1}, 2}, 0.2, 20.0);
  const std::string path = temp_file("sdclf_test_traj.csv").string();
  export_trajectory(traj, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,xi_1,xi_2,xi_3,u_1,V_eta,residual");

  std::size_t rows = 0;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    lines.push_back(line);
    ++rows;
  }
  REQUIRE(rows == 101);

  // 17 significant digits round-trip doubles exactly.
  for (std::size_t k : {std::size_t{0}, std::size_t{50}, std::size_t{100}}) {
    std::stringstream ss(lines[k]);
    std::string cell;
    std::getline(ss, cell, ',');
    CHECK(std::stod(cell) == traj.times[k]);
    for (std::size_t i = 0; i < 3; ++i) {
      std::getline(ss, cell, ',');
      CHECK(std::stod(cell) == traj.states[k].xi[i]);
    }
  }

  // Final row carries no input or residual.
  CHECK(lines.back().find(",,") != std::string::npos);
  CHECK(lines.back().back() == ',');

  std::filesystem::remove(path);
}

TEST_CASE("equilibrium trajectory exports zero state columns") {
  const Bench b;
  const LoopController zero = [](const NormalState&) {
    return ControlResult{{0.0}, 0.0, SolverStatus::Interior};
  };
  const Trajectory traj = run_closed_loop(b.sys, b.design, zero, {{0, 0, 0}, 2}, 0.5, 2.0);
  const std::string path = temp_file("sdclf_test_eq.csv").string();
  export_trajectory(traj, path);

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // t
    for (int i = 0; i < 3; ++i) {
      std::getline(ss, cell, ',');
      CHECK(std::stod(cell) == 0.0);
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("exports fail loudly on unwritable paths") {
  const Bench b;
  const LoopController zero = [](const NormalState&) {
    return ControlResult{{0.0}, 0.0, SolverStatus::Interior};
  };
  const Trajectory traj = run_closed_loop(b.sys, b.design, zero, {{0, 0, 0}, 2}, 0.5, 2.0);
  CHECK_THROWS_AS(export_trajectory(traj, "/nonexistent_dir_xyz/file.csv"), IoError);
  CHECK_THROWS_AS(write_text_atomic("/nonexistent_dir_xyz/file.txt", "x"), IoError);
}

TEST_CASE("atomic text writes land complete and overwrite cleanly") {
  const std::string path = temp_file("sdclf_test_atomic.txt").string();
  write_text_atomic(path, "first\n");
  CHECK(slurp(path) == "first\n");
  write_text_atomic(path, "second\n");
  CHECK(slurp(path) == "second\n");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove(path);
}

TEST_CASE("truncated runs still export") {
  const Bench b;
  const LoopController refuse = [](const NormalState&) {
    return ControlResult{{0.0}, 1.0, SolverStatus::Infeasible};
  };
  const Trajectory stuck = run_closed_loop(b.sys, b.design, refuse, {{1, 0, 1}, 2}, 0.2, 20.0);
  const std::string path = temp_file("sdclf_test_stuck.csv").string();
  export_trajectory(stuck, path);
  std::ifstream in(path);
  std::string header, row, extra;
  std::getline(in, header);
  REQUIRE(std::getline(in, row));
  CHECK_FALSE(std::getline(in, extra));
  CHECK(row.find(",,") != std::string::npos);
  std::filesystem::remove(path);
}
