// Copyright 2026 The ioc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ioc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "ioc/csv.hpp"
#include "ioc/errors.hpp"
#include "ioc/expr.hpp"
#include "ioc/hjb.hpp"
#include "ioc/model.hpp"
#include "ioc/pmp.hpp"
#include "ioc/riccati.hpp"
#include "ioc/scenario.hpp"
#include "ioc/sim.hpp"
#include "json.hpp"

namespace ioc {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

/// The machine-readable failure line; one per failed run, on stderr.
void Diag(const char* category, const std::string& message) {
  std::cerr << "error: " << category << ": " << message << "\n";
}

void WriteBytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ValidationError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out)
    throw ValidationError("cannot write '" + path.string() + "'");
}

ordered_json ToJson(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd MapVec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

/// Collects the run summary and persists CSV artifacts. Every command ends
/// by writing summary.json so a run directory is self-describing: inputs
/// digest, parameters, per-file digests, headline metrics.
class Reporter {
 public:
  Reporter(const RunConfig& cfg, const Scenario* sc)
      : dir_(cfg.out_dir.empty() ? "." : cfg.out_dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec)
      throw ValidationError("cannot create output directory '" +
                            dir_.string() + "': " + ec.message());
    j_["command"] = cfg.command;
    if (sc) {
      j_["scenario"] = sc->path;
      j_["scenario_digest"] = fnv1a_hex(sc->raw);
    }
    j_["parameters"] = ordered_json::object();
    j_["outputs"] = ordered_json::object();
    j_["metrics"] = ordered_json::object();
  }

  template <class T>
  void param(const std::string& key, const T& value) {
    j_["parameters"][key] = value;
  }
  template <class T>
  void metric(const std::string& key, const T& value) {
    j_["metrics"][key] = value;
  }

  /// Writes `bytes` to out_dir/name and records its digest.
  void file(const std::string& name, const std::string& bytes) {
    WriteBytes(dir_ / name, bytes);
    j_["outputs"][name] = fnv1a_hex(bytes);
  }

  void finish() { WriteBytes(dir_ / "summary.json", j_.dump(2) + "\n"); }

 private:
  fs::path dir_;
  ordered_json j_;
};

/// Lattice-density overrides apply to box-shaped sets only; an explicit
/// finite set has no density to change.
void ResampleControls(HybridSystem& sys, const RunConfig& cfg) {
  const auto resample = [](ControlSet& set, int samples, const char* flag) {
    if (samples <= 0) return;
    if (set.kind != ControlSet::Kind::kBox)
      throw ValidationError(std::string(flag) +
                            " requires a box-shaped control set");
    set = ControlSet::box(
        set.lo, set.hi,
        std::vector<int>(static_cast<std::size_t>(set.lo.size()), samples));
  };
  resample(sys.controls_u, cfg.u_samples, "--u-samples");
  resample(sys.controls_w, cfg.w_samples, "--w-samples");
}

/// The solve grid: scenario `grid` block with any command-line pieces
/// replaced; a full override works without a scenario grid at all.
Grid ResolveGrid(const Scenario& sc, const RunConfig& cfg, int n) {
  Eigen::VectorXd lo, hi;
  std::vector<int> nodes;
  double delta = 1e-2;
  if (sc.grid) {
    lo = sc.grid->lo;
    hi = sc.grid->hi;
    nodes = sc.grid->counts;
    delta = sc.grid->delta;
  }
  if (!cfg.grid_lo.empty()) lo = MapVec(cfg.grid_lo);
  if (!cfg.grid_hi.empty()) hi = MapVec(cfg.grid_hi);
  if (!cfg.grid_nodes.empty()) nodes = cfg.grid_nodes;
  if (cfg.delta > 0.0) delta = cfg.delta;
  if (lo.size() == 0 || hi.size() == 0 || nodes.empty())
    throw ValidationError(
        "no grid: the scenario has no 'grid' block and the "
        "--grid-lo/--grid-hi/--grid-nodes overrides are incomplete");
  Grid g = Grid::uniform(lo, hi, nodes, delta);
  g.check();
  if (g.dim() != n)
    throw ValidationError("grid dimension " + std::to_string(g.dim()) +
                          " does not match the state dimension " +
                          std::to_string(n));
  return g;
}

Variant PickVariant(const RunConfig& cfg, const HybridSystem& sys) {
  if (cfg.variant == "basic") return Variant::kBasic;
  if (cfg.variant == "parametrized") return Variant::kParametrizedControl;
  if (cfg.variant == "aftereffect") return Variant::kAftereffect;
  switch (sys.impulse_arg) {
    case ImpulseArg::kControlLeftLimit:
      return Variant::kParametrizedControl;
    case ImpulseArg::kPreviousImpulse:
      return Variant::kAftereffect;
    case ImpulseArg::kNone:
      break;
  }
  return Variant::kBasic;
}

const char* VariantName(Variant v) {
  switch (v) {
    case Variant::kParametrizedControl:
      return "parametrized";
    case Variant::kAftereffect:
      return "aftereffect";
    case Variant::kBasic:
      break;
  }
  return "basic";
}

/// Initial point: command line beats the scenario's `initial` block.
bool GetInitial(const Scenario& sc, const RunConfig& cfg, int n, double* t0,
                Eigen::VectorXd* x0) {
  if (cfg.has_initial) {
    *t0 = cfg.initial_time;
    *x0 = MapVec(cfg.initial_state);
  } else if (sc.has_initial) {
    *t0 = sc.initial_time;
    *x0 = sc.initial_state;
  } else {
    return false;
  }
  if (x0->size() != n)
    throw ValidationError("initial state has dimension " +
                          std::to_string(x0->size()) + ", expected " +
                          std::to_string(n));
  return true;
}

Eigen::VectorXd RequireInitial(const Scenario& sc, const RunConfig& cfg,
                               int n, double* t0) {
  Eigen::VectorXd x0;
  if (!GetInitial(sc, cfg, n, t0, &x0))
    throw ValidationError(cfg.command +
                          " needs an initial point: add an 'initial' block "
                          "to the scenario or pass --time/--state");
  return x0;
}

void RecordGrid(Reporter& rep, const Grid& g) {
  ordered_json gj;
  gj["lo"] = ToJson(g.lo);
  gj["hi"] = ToJson(g.hi);
  gj["nodes"] = g.counts;
  gj["delta"] = g.delta;
  rep.param("grid", gj);
}

std::pair<ValueFunction, Policy> RunSolve(const Scenario& sc,
                                          const RunConfig& cfg,
                                          Variant variant, const Grid& grid) {
  HjbOptions opts;
  opts.threads = std::max(1, cfg.threads);
  const HybridSystem& sys = sc.model.system;
  const CostSpec& costs = sc.model.costs;
  switch (variant) {
    case Variant::kParametrizedControl:
      return solve_parametrized(sys, costs, grid, opts);
    case Variant::kAftereffect:
      return solve_aftereffect(sys, costs, grid, opts);
    case Variant::kBasic:
      break;
  }
  return solve_basic(sys, costs, grid, opts);
}

void ExportTrajectory(Reporter& rep, const Trajectory& traj,
                      const HybridSystem& sys) {
  rep.file("trajectory.csv", trajectory_csv(traj, sys.n, sys.mu));
  rep.file("jumps.csv", jumps_csv(traj, sys.n, sys.mw, sys.impulse_arg,
                                  sys.extra_dim()));
}

int Simulate(const RunConfig& cfg) {
  Scenario sc = load_scenario(cfg.scenario_path);
  const HybridSystem& sys = sc.model.system;

  double t0 = 0.0;
  const Eigen::VectorXd x0 = RequireInitial(sc, cfg, sys.n, &t0);
  const ControlSignal u =
      sc.u_signal ? *sc.u_signal
                  : ControlSignal::constant(Eigen::VectorXd::Zero(sys.mu));
  const ControlSignal w =
      sc.w_signal ? *sc.w_signal
                  : ControlSignal::constant(Eigen::VectorXd::Zero(sys.mw));

  IntegrateOptions opts;
  opts.step = cfg.step > 0.0 ? cfg.step : sc.sim_step;
  opts.max_events = sc.max_events;

  const Trajectory traj = integrate(sys, u, w, t0, x0, opts);
  const CostBreakdown cost = evaluate_cost(traj, sc.model.costs);

  Reporter rep(cfg, &sc);
  rep.param("step", opts.step);
  rep.param("max_events", opts.max_events);
  rep.param("initial_time", t0);
  rep.param("initial_state", ToJson(x0));
  ExportTrajectory(rep, traj, sys);
  rep.metric("rows", traj.size());
  rep.metric("jumps", traj.jumps.size());
  rep.metric("running_cost", cost.running);
  rep.metric("impulse_cost", cost.impulse);
  rep.metric("terminal_cost", cost.terminal);
  rep.metric("total_cost", cost.total());
  rep.finish();
  std::cout << "simulate: " << traj.size() << " rows, " << traj.jumps.size()
            << " jump(s), J = " << cost.total() << "\n";
  return 0;
}

int Solve(const RunConfig& cfg) {
  Scenario sc = load_scenario(cfg.scenario_path);
  ResampleControls(sc.model.system, cfg);
  const HybridSystem& sys = sc.model.system;
  const Variant variant = PickVariant(cfg, sys);
  const Grid grid = ResolveGrid(sc, cfg, sys.n);
  const auto [vf, pol] = RunSolve(sc, cfg, variant, grid);

  Reporter rep(cfg, &sc);
  rep.param("variant", VariantName(variant));
  RecordGrid(rep, grid);
  rep.param("u_lattice", sys.controls_u.count());
  rep.param("w_lattice", sys.controls_w.count());
  rep.param("threads", std::max(1, cfg.threads));
  rep.file("value.csv", value_csv(vf));
  rep.file("policy.csv", policy_csv(pol, vf));
  if (variant == Variant::kParametrizedControl)
    rep.file("impulse_details.csv",
             impulse_details_csv(vf, sys.controls_u.enumerate()));
  rep.metric("slices", vf.slice_count());
  rep.metric("nodes", grid.node_count());
  rep.metric("clamps", vf.total_clamps());

  double t0 = 0.0;
  Eigen::VectorXd x0;
  if (GetInitial(sc, cfg, sys.n, &t0, &x0)) {
    try {
      rep.metric("value_at_initial", vf.value_at(t0, x0));
    } catch (const Error&) {
      // The initial point can be outside this solution's readable range
      // (e.g. an aftereffect start after the first impulse); skip the metric.
    }
  }
  rep.finish();
  std::cout << "solve (" << VariantName(variant) << "): " << vf.slice_count()
            << " slices on " << grid.node_count() << " nodes\n";
  return 0;
}

int Synthesize(const RunConfig& cfg) {
  Scenario sc = load_scenario(cfg.scenario_path);
  ResampleControls(sc.model.system, cfg);
  const HybridSystem& sys = sc.model.system;
  double t0 = 0.0;
  const Eigen::VectorXd x0 = RequireInitial(sc, cfg, sys.n, &t0);
  const Variant variant = PickVariant(cfg, sys);
  const Grid grid = ResolveGrid(sc, cfg, sys.n);
  const auto [vf, pol] = RunSolve(sc, cfg, variant, grid);
  const Synthesis syn =
      synthesize_trajectory(vf, pol, sys, sc.model.costs, t0, x0);

  Reporter rep(cfg, &sc);
  rep.param("variant", VariantName(variant));
  RecordGrid(rep, grid);
  rep.param("initial_time", t0);
  rep.param("initial_state", ToJson(x0));
  rep.file("value.csv", value_csv(vf));
  rep.file("policy.csv", policy_csv(pol, vf));
  ExportTrajectory(rep, syn.trajectory, sys);
  rep.metric("value_interpolated", syn.value);
  rep.metric("running_cost", syn.cost.running);
  rep.metric("impulse_cost", syn.cost.impulse);
  rep.metric("terminal_cost", syn.cost.terminal);
  rep.metric("total_cost", syn.cost.total());
  rep.metric("cost_minus_value", syn.cost.total() - syn.value);
  rep.finish();
  std::cout << "synthesize: J = " << syn.cost.total()
            << ", V = " << syn.value << "\n";
  return 0;
}

int VerifyPmp(const RunConfig& cfg) {
  Scenario sc = load_scenario(cfg.scenario_path);
  ResampleControls(sc.model.system, cfg);
  const HybridSystem& sys = sc.model.system;
  const CostSpec& costs = sc.model.costs;
  double t0 = 0.0;
  const Eigen::VectorXd x0 = RequireInitial(sc, cfg, sys.n, &t0);
  const Variant variant = PickVariant(cfg, sys);
  const Grid grid = ResolveGrid(sc, cfg, sys.n);
  const auto [vf, pol] = RunSolve(sc, cfg, variant, grid);
  const Synthesis syn = synthesize_trajectory(vf, pol, sys, costs, t0, x0);

  const CostatePath costate = integrate_costate(sys, costs, syn.trajectory);
  const double tolerance = cfg.tolerance >= 0.0 ? cfg.tolerance : 1e-6;
  const ExtremumReport report =
      check_extremum(syn.trajectory, costate, sys, costs, tolerance);
  const GradientCheck grad = costate_vs_gradV(costate, vf, syn.trajectory);

  Reporter rep(cfg, &sc);
  rep.param("variant", VariantName(variant));
  RecordGrid(rep, grid);
  rep.param("initial_time", t0);
  rep.param("initial_state", ToJson(x0));
  rep.param("tolerance", tolerance);
  ExportTrajectory(rep, syn.trajectory, sys);
  rep.file("costate.csv", costate_csv(costate, sys.n));
  rep.file("extremum.csv", extremum_csv(report, sys.mu, sys.mw));
  rep.metric("violations", report.violations);
  rep.metric("min_margin", report.min_margin);
  rep.metric("grad_max_rel_error", grad.max_rel_error);
  rep.metric("grad_mean_rel_error", grad.mean_rel_error);
  rep.metric("grad_samples", grad.samples);
  rep.metric("warnings", costate.warnings);
  rep.finish();
  std::cout << "verify-pmp: " << report.violations << " violation(s), "
            << "min margin " << report.min_margin << ", max |p - dV/dx| rel "
            << grad.max_rel_error << "\n";
  return 0;
}

int Riccati(const RunConfig& cfg) {
  Scenario sc = load_scenario(cfg.scenario_path);
  if (!sc.lq)
    throw ValidationError("riccati needs an 'lq' block in the scenario");

  RiccatiOptions opts;
  if (cfg.step > 0.0) opts.step = cfg.step;
  opts.zero_beta = cfg.zero_beta;
  const RiccatiSolution sol = solve_impulsive_riccati(*sc.lq, opts);

  Reporter rep(cfg, &sc);
  rep.param("step", opts.step);
  rep.param("zero_beta", opts.zero_beta);
  rep.file("kpath.csv", kpath_csv(sol));
  rep.file("gains.csv", gains_csv(sol));
  rep.metric("mesh_points", sol.times().size());
  rep.metric("impulses", sol.impulse_gains().size());
  {
    const Eigen::MatrixXd k0 = sol.value_matrix(0.0, KSide::kPlus);
    ordered_json flat = ordered_json::array();
    for (Eigen::Index r = 0; r < k0.rows(); ++r)
      for (Eigen::Index c = 0; c < k0.cols(); ++c) flat.push_back(k0(r, c));
    rep.metric("k_initial", flat);
  }
  double t0 = 0.0;
  Eigen::VectorXd x0;
  if (GetInitial(sc, cfg, sc.lq->state_dim, &t0, &x0))
    rep.metric("value_at_initial", lq_value(sol, t0, KSide::kPlus, x0));
  rep.finish();
  std::cout << "riccati: " << sol.times().size() << " mesh points, "
            << sol.impulse_gains().size() << " impulse gain(s)\n";
  return 0;
}

int CompareLq(const RunConfig& cfg) {
  Scenario sc = load_scenario(cfg.scenario_path);
  if (!sc.lq)
    throw ValidationError("compare-lq needs an 'lq' block in the scenario");
  ResampleControls(sc.model.system, cfg);
  const HybridSystem& sys = sc.model.system;
  const Grid grid = ResolveGrid(sc, cfg, sys.n);
  const auto [vf, pol] = RunSolve(sc, cfg, Variant::kBasic, grid);

  RiccatiOptions ropts;
  if (cfg.step > 0.0) ropts.step = cfg.step;
  ropts.zero_beta = cfg.zero_beta;
  const RiccatiSolution sol = solve_impulsive_riccati(*sc.lq, ropts);

  // Discrepancy over the interior 60% of the grid box (boundary clamping
  // pollutes the outer bands) against the quadratic value from the gain
  // sweep, side-matched at impulse times.
  std::vector<std::size_t> interior;
  std::vector<Eigen::VectorXd> coords;
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    const Eigen::VectorXd x = grid.node(flat);
    bool inside = true;
    for (int d = 0; d < grid.dim(); ++d) {
      const double margin = 0.2 * (grid.hi[d] - grid.lo[d]);
      if (x[d] < grid.lo[d] + margin - 1e-12 ||
          x[d] > grid.hi[d] - margin + 1e-12) {
        inside = false;
        break;
      }
    }
    if (inside) {
      interior.push_back(flat);
      coords.push_back(x);
    }
  }

  double max_rel = 0.0;
  double worst_time = 0.0;
  Eigen::VectorXd worst_x = coords.empty() ? Eigen::VectorXd() : coords[0];
  std::string table = "s,side,max_rel\n";
  for (std::size_t si = 0; si < vf.slice_count(); ++si) {
    const KSide side = vf.sides[si] == -1 ? KSide::kMinus : KSide::kPlus;
    const Eigen::MatrixXd k = sol.value_matrix(vf.times[si], side);
    double slice_max = 0.0;
    for (std::size_t j = 0; j < interior.size(); ++j) {
      const double quad = coords[j].dot(k * coords[j]);
      const double rel = std::abs(vf.values[si][0][interior[j]] - quad) /
                         (1.0 + std::abs(quad));
      slice_max = std::max(slice_max, rel);
      if (rel > max_rel) {
        max_rel = rel;
        worst_time = vf.times[si];
        worst_x = coords[j];
      }
    }
    table += format_double(vf.times[si]);
    table += vf.sides[si] == -1 ? ",-," : (vf.sides[si] == 1 ? ",+," : ",.,");
    table += format_double(slice_max);
    table += "\n";
  }

  const double threshold = cfg.tolerance >= 0.0 ? cfg.tolerance : 0.02;
  Reporter rep(cfg, &sc);
  RecordGrid(rep, grid);
  rep.param("threshold", threshold);
  rep.param("riccati_step", ropts.step);
  rep.param("u_lattice", sys.controls_u.count());
  rep.param("w_lattice", sys.controls_w.count());
  rep.file("discrepancy.csv", table);
  rep.file("kpath.csv", kpath_csv(sol));
  rep.file("gains.csv", gains_csv(sol));
  rep.metric("max_rel_discrepancy", max_rel);
  rep.metric("worst_time", worst_time);
  rep.metric("worst_state", ToJson(worst_x));
  rep.metric("interior_nodes", interior.size());
  rep.metric("slices", vf.slice_count());
  rep.metric("passed", max_rel <= threshold);
  rep.finish();

  if (max_rel > threshold) {
    Diag("threshold", "compare-lq discrepancy " + format_double(max_rel) +
                          " exceeds " + format_double(threshold));
    return 4;
  }
  std::cout << "compare-lq: max relative discrepancy " << max_rel
            << " (threshold " << threshold << ")\n";
  return 0;
}

int CheckExpr(const RunConfig& cfg) {
  const VarSet vars{cfg.expr_vars};
  const Expression e = Expression::parse(cfg.expr_text, vars);

  Reporter rep(cfg, nullptr);
  rep.param("expr", cfg.expr_text);
  rep.param("vars", cfg.expr_vars);
  rep.metric("parsed", e.str());
  rep.metric("has_kinks", e.has_kinks());
  std::cout << "parsed: " << e.str() << "\n";

  if (!cfg.diff_var.empty()) {
    if (vars.index_of(cfg.diff_var) < 0)
      throw ValidationError("--derivative: unknown variable '" +
                            cfg.diff_var + "'");
    const Expression d = e.derivative(cfg.diff_var);
    rep.metric("derivative_var", cfg.diff_var);
    rep.metric("derivative", d.str());
    std::cout << "d/d" << cfg.diff_var << ": " << d.str() << "\n";
  }

  int code = 0;
  if (cfg.diff_check) {
    const double tolerance = cfg.tolerance >= 0.0 ? cfg.tolerance : 1e-5;
    const double h = 1e-5;
    const int kChecks = 100;
    std::vector<Expression> parts;
    for (const std::string& v : cfg.expr_vars) parts.push_back(e.derivative(v));

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    const std::size_t dim = cfg.expr_vars.size();
    std::vector<double> env(dim), bumped(dim);
    double max_rel = 0.0;
    long evaluations = 0;
    for (int i = 0; i < kChecks; ++i) {
      for (std::size_t j = 0; j < dim; ++j) env[j] = dist(rng);
      for (std::size_t j = 0; j < dim; ++j) {
        bumped = env;
        bumped[j] = env[j] + h;
        const double up = e.value(bumped);
        bumped[j] = env[j] - h;
        const double down = e.value(bumped);
        const double fd = (up - down) / (2.0 * h);
        const double sym = parts[j].value(env);
        max_rel = std::max(max_rel,
                           std::abs(sym - fd) / std::max(1.0, std::abs(fd)));
        ++evaluations;
      }
    }
    rep.param("seed", cfg.seed);
    rep.param("h", h);
    rep.param("tolerance", tolerance);
    rep.metric("diff_checks", kChecks);
    rep.metric("diff_evaluations", evaluations);
    rep.metric("max_rel_error", max_rel);
    rep.metric("diff_check_passed", max_rel <= tolerance);
    if (max_rel > tolerance) {
      rep.finish();
      Diag("numerical", "derivative mismatch: max relative error " +
                            format_double(max_rel) + " exceeds " +
                            format_double(tolerance));
      return 3;
    }
    std::cout << "diff-check: " << kChecks << " points, max rel error "
              << max_rel << "\n";
  }
  rep.finish();
  return code;
}

}  // namespace

int run_command(const RunConfig& cfg) {
  try {
    if (cfg.command == "simulate") return Simulate(cfg);
    if (cfg.command == "solve") return Solve(cfg);
    if (cfg.command == "synthesize") return Synthesize(cfg);
    if (cfg.command == "verify-pmp") return VerifyPmp(cfg);
    if (cfg.command == "riccati") return Riccati(cfg);
    if (cfg.command == "compare-lq") return CompareLq(cfg);
    if (cfg.command == "check-expr") return CheckExpr(cfg);
    throw ValidationError("unknown command '" + cfg.command + "'");
  } catch (const ParseError& e) {
    Diag("validation", e.what());
    return 2;
  } catch (const ValidationError& e) {
    Diag("validation", e.what());
    return 2;
  } catch (const NumericalError& e) {
    Diag("numerical", e.what());
    return 3;
  } catch (const EvalError& e) {
    Diag("numerical", e.what());
    return 3;
  } catch (const std::exception& e) {
    Diag("internal", e.what());
    return 3;
  }
}

int run_cli(int argc, const char* const* argv) {
  RunConfig cfg;
  CLI::App app{"impulsive optimal control toolkit"};
  app.require_subcommand(1);

  const auto add_common = [&](CLI::App* sub, bool with_scenario) {
    if (with_scenario)
      sub->add_option("scenario", cfg.scenario_path, "scenario JSON file")
          ->required();
    sub->add_option("--out", cfg.out_dir,
                    "output directory (default: $IOC_OUT_DIR, else '.')")
        ->envname("IOC_OUT_DIR");
    sub->add_option("--tolerance", cfg.tolerance,
                    "override the command's acceptance tolerance");
    sub->add_option("--seed", cfg.seed, "seed for sampled checks");
  };
  const auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid-lo", cfg.grid_lo, "grid lower corner")
        ->delimiter(',');
    sub->add_option("--grid-hi", cfg.grid_hi, "grid upper corner")
        ->delimiter(',');
    sub->add_option("--grid-nodes", cfg.grid_nodes, "nodes per axis")
        ->delimiter(',');
    sub->add_option("--delta", cfg.delta, "backward time step");
    sub->add_option("--u-samples", cfg.u_samples,
                    "per-axis samples for a box-shaped u set");
    sub->add_option("--w-samples", cfg.w_samples,
                    "per-axis samples for a box-shaped w set");
    sub->add_option("--threads", cfg.threads,
                    "solver threads (results are thread-count independent)");
  };
  const auto add_variant = [&](CLI::App* sub) {
    sub->add_option("--variant", cfg.variant,
                    "solver family (default: inferred from the impulse "
                    "argument)")
        ->check(CLI::IsMember({"basic", "parametrized", "aftereffect"}));
  };
  const auto add_initial = [&](CLI::App* sub) {
    sub->add_option("--time", cfg.initial_time, "initial time");
    sub->add_option("--state", cfg.initial_state, "initial state")
        ->delimiter(',');
  };

  CLI::App* simulate =
      app.add_subcommand("simulate", "integrate the hybrid system forward");
  add_common(simulate, true);
  add_initial(simulate);
  simulate->add_option("--step", cfg.step, "integration step");

  CLI::App* solve =
      app.add_subcommand("solve", "backward dynamic-programming sweep");
  add_common(solve, true);
  add_grid(solve);
  add_variant(solve);
  add_initial(solve);

  CLI::App* synthesize = app.add_subcommand(
      "synthesize", "solve, then roll out the feedback policy");
  add_common(synthesize, true);
  add_grid(synthesize);
  add_variant(synthesize);
  add_initial(synthesize);

  CLI::App* verify = app.add_subcommand(
      "verify-pmp", "costate, extremum margins, and value-gradient checks "
                    "on the synthesized trajectory");
  add_common(verify, true);
  add_grid(verify);
  add_variant(verify);
  add_initial(verify);

  CLI::App* riccati = app.add_subcommand(
      "riccati", "backward gain sweep for a linear-quadratic scenario");
  add_common(riccati, true);
  add_initial(riccati);
  riccati->add_option("--step", cfg.step, "integration step");
  riccati->add_flag("--zero-beta", cfg.zero_beta,
                    "drop the state-impulse cost cross term (β) from the gain and jump formulas");

  CLI::App* compare = app.add_subcommand(
      "compare-lq", "cross-validate the grid solve against the gain sweep");
  add_common(compare, true);
  add_grid(compare);
  compare->add_option("--step", cfg.step, "gain-sweep integration step");
  compare->add_flag("--zero-beta", cfg.zero_beta,
                    "drop the state-impulse cost cross term (β) from the gain and jump formulas");

  CLI::App* check = app.add_subcommand(
      "check-expr", "parse and differentiate a single expression");
  add_common(check, false);
  check->add_option("--expr", cfg.expr_text, "expression text")->required();
  check->add_option("--vars", cfg.expr_vars, "variable names")
      ->delimiter(',');
  check->add_option("--derivative", cfg.diff_var,
                    "print the partial derivative for this variable");
  check->add_flag("--diff-check", cfg.diff_check,
                  "random symbolic-vs-central-difference audit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    Diag("usage", e.what());
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  if (const CLI::Option* o = sub->get_option_no_throw("--state");
      o != nullptr && o->count() > 0)
    cfg.has_initial = true;
  if (cfg.out_dir.empty()) cfg.out_dir = ".";
  return run_command(cfg);
}

int dispatch(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("ioc");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const std::string& s : full) argv.push_back(s.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ioc
