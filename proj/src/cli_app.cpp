#include "sdclf/cli_app.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdclf/clf.hpp"
#include "sdclf/controllers.hpp"
#include "sdclf/simulate.hpp"
#include "sdclf/system.hpp"

namespace sdclf {

namespace {

using nlohmann::json;

struct RunConfig {
  std::string system = "benchmark";
  std::string controller = "clf-qcqp";
  double h = 0.2;
  double T = 20.0;
  std::vector<double> x0 = {1.0, 0.0, 1.0};
  std::vector<double> K = {0.5, std::sqrt(3.0) / 2.0};  // row-major k x gamma
  std::vector<double> Q_eta;                            // empty = identity
  double c = 0.5;
  double d = 0.5;
  std::vector<double> Q_z;  // empty = identity
  double L_q = 4.0;
  std::size_t substeps = 64;
  double R_target = 0.25;
  std::string output_path;
  std::vector<double> hs = {0.2, 0.1, 0.05, 0.025};
  double h0 = 0.2;
  std::size_t levels = 4;
};

std::vector<double> as_flat_matrix(const json& j, const char* key) {
  std::vector<double> out;
  if (!j.is_array()) throw BadParameter(std::string(key) + " must be an array");
  for (const json& row : j) {
    if (row.is_array())
      for (const json& v : row) out.push_back(v.get<double>());
    else
      out.push_back(row.get<double>());
  }
  return out;
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw BadParameter(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw BadParameter("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "system")
        cfg.system = value.get<std::string>();
      else if (key == "controller")
        cfg.controller = value.get<std::string>();
      else if (key == "h")
        cfg.h = value.get<double>();
      else if (key == "T")
        cfg.T = value.get<double>();
      else if (key == "x0")
        cfg.x0 = as_flat_matrix(value, "x0");
      else if (key == "K")
        cfg.K = as_flat_matrix(value, "K");
      else if (key == "Q_eta")
        cfg.Q_eta = as_flat_matrix(value, "Q_eta");
      else if (key == "c")
        cfg.c = value.get<double>();
      else if (key == "d")
        cfg.d = value.get<double>();
      else if (key == "Q_z")
        cfg.Q_z = as_flat_matrix(value, "Q_z");
      else if (key == "L_q")
        cfg.L_q = value.get<double>();
      else if (key == "substeps")
        cfg.substeps = value.get<std::size_t>();
      else if (key == "R_target")
        cfg.R_target = value.get<double>();
      else if (key == "output_path")
        cfg.output_path = value.get<std::string>();
      else if (key == "hs")
        cfg.hs = as_flat_matrix(value, "hs");
      else if (key == "h0")
        cfg.h0 = value.get<double>();
      else if (key == "levels")
        cfg.levels = value.get<std::size_t>();
      else
        throw BadParameter("unknown config key: " + key);
    } catch (const json::exception& e) {
      throw BadParameter("config key " + key + " has the wrong type: " + e.what());
    }
  }
}

Matrix reshape(const std::vector<double>& flat, std::size_t rows, std::size_t cols,
               const char* name) {
  if (flat.size() != rows * cols)
    throw BadParameter(std::string(name) + " must have " + std::to_string(rows * cols) +
                       " entries");
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = flat[i * cols + j];
  return out;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

struct Problem {
  NormalFormSystem sys;
  ClfDesign design;
};

Problem build_problem(const RunConfig& cfg) {
  if (cfg.system != "benchmark")
    throw BadParameter("unknown system: " + cfg.system + " (available: benchmark)");
  NormalFormSystem sys = make_benchmark();
  const std::size_t gamma = sys.gamma();
  const Matrix K = reshape(cfg.K, sys.k(), gamma, "K");
  const Matrix Q_eta = cfg.Q_eta.empty() ? Matrix::identity(gamma)
                                         : reshape(cfg.Q_eta, gamma, gamma, "Q_eta");
  ClfDesign design = design_output_clf(sys, K, Q_eta, cfg.c);
  return Problem{std::move(sys), std::move(design)};
}

void validate_common(const RunConfig& cfg) {
  if (!(cfg.h > 0.0)) throw BadParameter("h must be positive");
  if (!(cfg.T > 0.0)) throw BadParameter("T must be positive");
  if (!(cfg.c > 0.0 && cfg.c < 1.0)) throw BadParameter("c must lie in (0, 1)");
  if (!(cfg.d > 0.0 && cfg.d < 1.0)) throw BadParameter("d must lie in (0, 1)");
  if (cfg.substeps < 1) throw BadParameter("substeps must be at least 1");
  if (!(cfg.R_target > 0.0)) throw BadParameter("R_target must be positive");
  for (double v : cfg.x0)
    if (!std::isfinite(v)) throw BadParameter("x0 entries must be finite");
}

LoopController make_controller(const RunConfig& cfg, const Problem& prob, double h) {
  const NormalFormSystem& sys = prob.sys;
  const ClfDesign& design = prob.design;
  if (cfg.controller == "fbl")
    return [&sys, &design](const NormalState& s) {
      return ControlResult{fbl_controller(design, sys, s), 0.0, SolverStatus::Interior};
    };
  if (cfg.controller == "clf-qp")
    return [&sys, &design](const NormalState& s) { return clf_qp_controller(design, sys, s); };
  if (cfg.controller == "clf-qcqp")
    return [&sys, &design, h](const NormalState& s) {
      return clf_qcqp_controller(design, sys, s, h);
    };
  throw BadParameter("unknown controller: " + cfg.controller +
                     " (available: fbl, clf-qp, clf-qcqp)");
}

std::string sibling_path(const std::string& base, const std::string& suffix) {
  const std::filesystem::path p(base);
  std::filesystem::path out = p.parent_path() / (p.stem().string() + suffix);
  return out.string();
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

NormalState initial_state(const RunConfig& cfg, const Problem& prob) {
  if (cfg.x0.size() != prob.sys.n())
    throw BadParameter("x0 must have " + std::to_string(prob.sys.n()) + " entries");
  return NormalState{cfg.x0, prob.sys.gamma()};
}

int cmd_design(const RunConfig& cfg) {
  validate_common(cfg);
  const Problem prob = build_problem(cfg);
  const std::size_t nz = prob.sys.n() - prob.sys.gamma();
  const Matrix Q_z =
      cfg.Q_z.empty() ? Matrix::identity(nz) : reshape(cfg.Q_z, nz, nz, "Q_z");
  const ZeroClf zero = design_zero_clf(prob.sys, Q_z, cfg.d);
  const CompositeLyapunov comp = compose_lyapunov(prob.design, zero, cfg.L_q, cfg.h);

  json out;
  out["K"] = matrix_to_json(prob.design.K);
  out["P_eta"] = matrix_to_json(prob.design.P_eta);
  out["Q_eta"] = matrix_to_json(prob.design.Q_eta);
  out["c"] = prob.design.c;
  out["h_star_eta"] = prob.design.h_star_eta;
  out["sigma"] = comp.sigma;
  out["P_z"] = matrix_to_json(comp.P_z);
  out["L_q"] = comp.L_q;
  const std::string path = cfg.output_path.empty() ? "design.json" : cfg.output_path;
  write_text_atomic(path, dump_json(out));
  std::printf("h_star_eta=%.17g sigma=%.17g -> %s\n", prob.design.h_star_eta, comp.sigma,
              path.c_str());
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  validate_common(cfg);
  const Problem prob = build_problem(cfg);
  const NormalState x0 = initial_state(cfg, prob);
  const LoopController controller = make_controller(cfg, prob, cfg.h);
  const Trajectory traj = run_closed_loop(prob.sys, prob.design, controller, x0, cfg.h,
                                          cfg.T, cfg.substeps);
  const SweepRecord rec = make_sweep_record(traj, cfg.R_target);
  const bool settled =
      rec.settled_time.has_value() && *rec.settled_time <= 0.75 * cfg.T;

  const std::string csv_path =
      cfg.output_path.empty() ? "trajectory.csv" : cfg.output_path;
  export_trajectory(traj, csv_path);
  json summary;
  summary["settled"] = settled;
  summary["terminal_norm"] = rec.terminal_norm;
  summary["peak_norm"] = rec.peak_norm;
  summary["h_star_eta"] = prob.design.h_star_eta;
  const std::string summary_path = sibling_path(csv_path, "_summary.json");
  write_text_atomic(summary_path, dump_json(summary));
  std::printf("settled=%s terminal_norm=%.17g peak_norm=%.17g -> %s, %s\n",
              settled ? "true" : "false", rec.terminal_norm, rec.peak_norm,
              csv_path.c_str(), summary_path.c_str());
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  validate_common(cfg);
  if (cfg.hs.empty()) throw BadParameter("sweep needs at least one sample period in hs");
  for (double h : cfg.hs)
    if (!(h > 0.0)) throw BadParameter("sweep sample periods must be positive");
  const Problem prob = build_problem(cfg);
  const NormalState x0 = initial_state(cfg, prob);

  std::vector<double> hs = cfg.hs;
  std::sort(hs.begin(), hs.end(), std::greater<double>());
  const std::string summary_path = cfg.output_path.empty() ? "sweep.json" : cfg.output_path;

  SweepSummary summary;
  summary.R_target = cfg.R_target;
  json records = json::array();
  for (double h : hs) {
    const LoopController controller = make_controller(cfg, prob, h);
    const Trajectory traj =
        run_closed_loop(prob.sys, prob.design, controller, x0, h, cfg.T, cfg.substeps);
    const SweepRecord rec = make_sweep_record(traj, cfg.R_target);
    summary.records.push_back(rec);

    json jrec;
    jrec["h"] = rec.h;
    jrec["terminal_norm"] = rec.terminal_norm;
    jrec["peak_norm"] = rec.peak_norm;
    if (rec.settled_time.has_value())
      jrec["settled_time"] = *rec.settled_time;
    else
      jrec["settled_time"] = nullptr;
    jrec["R_target"] = rec.R_target;
    records.push_back(jrec);

    const std::string h_label = json(h).dump();
    export_trajectory(traj, sibling_path(summary_path, "_h" + h_label + ".csv"));
  }
  write_text_atomic(summary_path, dump_json(records));
  std::printf("%zu records -> %s\n", summary.records.size(), summary_path.c_str());
  return 0;
}

int cmd_consistency(const RunConfig& cfg) {
  validate_common(cfg);
  if (cfg.levels < 2) throw BadParameter("consistency check needs at least 2 levels");
  if (!(cfg.h0 > 0.0)) throw BadParameter("h0 must be positive");
  const Problem prob = build_problem(cfg);

  // Deterministic 21^3 lattice over [-1, 1]^3.
  std::vector<NormalState> states;
  states.reserve(21 * 21 * 21);
  for (int i = 0; i < 21; ++i)
    for (int j = 0; j < 21; ++j)
      for (int k = 0; k < 21; ++k)
        states.push_back(NormalState{Vector{-1.0 + 0.1 * i, -1.0 + 0.1 * j, -1.0 + 0.1 * k},
                                     prob.sys.gamma()});
  const Controller zero_input = [&prob](const NormalState&) {
    return Vector(prob.sys.m(), 0.0);
  };
  const std::vector<double> errors =
      consistency_errors(prob.sys, zero_input, states, cfg.h0, cfg.levels);
  const double slope =
      estimate_consistency_order(prob.sys, zero_input, states, cfg.h0, cfg.levels);

  json out;
  out["slope"] = slope;
  out["errors_per_level"] = errors;
  const std::string path = cfg.output_path.empty() ? "consistency.json" : cfg.output_path;
  write_text_atomic(path, dump_json(out));
  const bool ok = slope >= 1.9 && slope <= 2.1;
  std::printf("slope=%.17g %s -> %s\n", slope, ok ? "(within [1.9, 2.1])" : "(outside [1.9, 2.1])",
              path.c_str());
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Sampled-data CLF controller toolkit"};
  app.set_help_flag("--help", "print help and exit");  // frees -h/--h for the sample period
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig flags;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override its values)");
  auto* opt_system = app.add_option("--system", flags.system, "system name");
  auto* opt_controller =
      app.add_option("--controller", flags.controller, "fbl, clf-qp, or clf-qcqp");
  auto* opt_h = app.add_option("--h", flags.h, "sample period");
  auto* opt_T = app.add_option("--T", flags.T, "simulation horizon");
  auto* opt_x0 = app.add_option("--x0", flags.x0, "initial state")->delimiter(',');
  auto* opt_K = app.add_option("--K", flags.K, "gain matrix, row-major")->delimiter(',');
  auto* opt_Q_eta =
      app.add_option("--Q-eta", flags.Q_eta, "output-block Q, row-major")->delimiter(',');
  auto* opt_c = app.add_option("--c", flags.c, "decrease margin in (0,1)");
  auto* opt_d = app.add_option("--d", flags.d, "zero-dynamics margin in (0,1)");
  auto* opt_Q_z =
      app.add_option("--Q-z", flags.Q_z, "zero-dynamics Q, row-major")->delimiter(',');
  auto* opt_L_q = app.add_option("--L-q", flags.L_q, "Lipschitz bound for q in eta");
  auto* opt_substeps = app.add_option("--substeps", flags.substeps, "integrator substeps");
  auto* opt_R = app.add_option("--R-target", flags.R_target, "settling radius");
  auto* opt_out = app.add_option("--output,-o", flags.output_path, "output file path");

  CLI::App* sub_design = app.add_subcommand("design", "write the CLF design document");
  CLI::App* sub_simulate = app.add_subcommand("simulate", "run one closed loop");
  CLI::App* sub_sweep = app.add_subcommand("sweep", "sweep the sample period");
  CLI::App* sub_consistency =
      app.add_subcommand("consistency", "estimate the one-step error order");
  auto* opt_hs =
      sub_sweep->add_option("--hs", flags.hs, "sample periods to sweep")->delimiter(',');
  auto* opt_h0 = sub_consistency->add_option("--h0", flags.h0, "largest sample period");
  auto* opt_levels =
      sub_consistency->add_option("--levels", flags.levels, "number of halvings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    if (opt_system->count()) cfg.system = flags.system;
    if (opt_controller->count()) cfg.controller = flags.controller;
    if (opt_h->count()) cfg.h = flags.h;
    if (opt_T->count()) cfg.T = flags.T;
    if (opt_x0->count()) cfg.x0 = flags.x0;
    if (opt_K->count()) cfg.K = flags.K;
    if (opt_Q_eta->count()) cfg.Q_eta = flags.Q_eta;
    if (opt_c->count()) cfg.c = flags.c;
    if (opt_d->count()) cfg.d = flags.d;
    if (opt_Q_z->count()) cfg.Q_z = flags.Q_z;
    if (opt_L_q->count()) cfg.L_q = flags.L_q;
    if (opt_substeps->count()) cfg.substeps = flags.substeps;
    if (opt_R->count()) cfg.R_target = flags.R_target;
    if (opt_out->count()) cfg.output_path = flags.output_path;
    if (opt_hs->count()) cfg.hs = flags.hs;
    if (opt_h0->count()) cfg.h0 = flags.h0;
    if (opt_levels->count()) cfg.levels = flags.levels;

    if (sub_design->parsed()) return cmd_design(cfg);
    if (sub_simulate->parsed()) return cmd_simulate(cfg);
    if (sub_sweep->parsed()) return cmd_sweep(cfg);
    if (sub_consistency->parsed()) return cmd_consistency(cfg);
    std::fprintf(stderr, "no subcommand selected\n");
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace sdclf
