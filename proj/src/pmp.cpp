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

#include "ioc/pmp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ioc/errors.hpp"

namespace ioc {
namespace {

std::string Num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Flow-side environment [t, x1..xn, u1..umu] shared across evaluations.
class FlowEnv {
 public:
  FlowEnv(int n, int mu) : n_(n), env_(1 + n + mu, 0.0) {}

  std::span<const double> fill(double t, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u) {
    env_[0] = t;
    for (int i = 0; i < n_; ++i) env_[1 + i] = x[i];
    for (int i = 0; i < u.size(); ++i) env_[1 + n_ + i] = u[i];
    return env_;
  }

 private:
  int n_;
  std::vector<double> env_;
};

// Jump-side environment [t, x1..xn, w1..wmw, extra...].
class JumpEnv {
 public:
  JumpEnv(int n, int mw, int extra) : n_(n), mw_(mw) {
    env_.assign(1 + n + mw + extra, 0.0);
  }

  std::span<const double> fill(double t, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& w,
                               const Eigen::VectorXd& extra) {
    env_[0] = t;
    for (int i = 0; i < n_; ++i) env_[1 + i] = x[i];
    for (int i = 0; i < w.size(); ++i) env_[1 + n_ + i] = w[i];
    for (int i = 0; i < extra.size(); ++i) env_[1 + n_ + mw_ + i] = extra[i];
    return env_;
  }

 private:
  int n_;
  int mw_;
  std::vector<double> env_;
};

void CheckDims(const HybridSystem& sys, const Eigen::VectorXd& x,
               const Eigen::VectorXd& p, const char* what) {
  if (x.size() != sys.n || p.size() != sys.n) {
    throw ValidationError(std::string(what) + ": state/costate dimension " +
                          Num(static_cast<double>(x.size())) + "/" +
                          Num(static_cast<double>(p.size())) +
                          " does not match n=" + Num(sys.n));
  }
}

std::string VarX(int j) { return "x" + std::to_string(j + 1); }

// Symbolic x-partials of every flow component, the running cost, the impulse
// map, the impulse cost, and the terminal cost. Built once per costate
// integration; kinked inputs keep their one-sided derivative conventions.
struct Partials {
  std::vector<std::vector<Expression>> dfdx;  // [i][j] = ∂f_i/∂x_j
  std::vector<Expression> dFdx;               // ∂F/∂x_j
  std::vector<std::vector<Expression>> dIdx;  // [i][j] = ∂I_i/∂x_j
  std::vector<Expression> dPhidx;             // ∂Φ/∂x_j
  std::vector<Expression> dF0dx;              // ∂F₀/∂x_j
};

Partials BuildPartials(const HybridSystem& sys, const CostSpec& costs) {
  Partials out;
  out.dfdx.resize(sys.n);
  for (int i = 0; i < sys.n; ++i) {
    out.dfdx[i].reserve(sys.n);
    for (int j = 0; j < sys.n; ++j)
      out.dfdx[i].push_back(sys.flow[i].derivative(VarX(j)));
  }
  out.dFdx.reserve(sys.n);
  for (int j = 0; j < sys.n; ++j)
    out.dFdx.push_back(costs.running.derivative(VarX(j)));
  if (sys.has_impulses()) {
    out.dIdx.resize(sys.n);
    for (int i = 0; i < sys.n; ++i) {
      out.dIdx[i].reserve(sys.n);
      for (int j = 0; j < sys.n; ++j)
        out.dIdx[i].push_back(sys.impulse_map[i].derivative(VarX(j)));
    }
    out.dPhidx.reserve(sys.n);
    for (int j = 0; j < sys.n; ++j)
      out.dPhidx.push_back(costs.impulse.derivative(VarX(j)));
  }
  out.dF0dx.reserve(sys.n);
  for (int j = 0; j < sys.n; ++j)
    out.dF0dx.push_back(costs.terminal.derivative(VarX(j)));
  return out;
}

// Collects at most one kink warning per expression family. The convention is
// deemed "exercised" when the symbolic partial disagrees with a central
// difference of the same expression at a trajectory sample — away from kink
// loci the two agree to truncation error.
class KinkMonitor {
 public:
  KinkMonitor(const HybridSystem& sys, const CostSpec& costs)
      : flow_(false), running_(false), jump_(false) {
    for (const auto& f : sys.flow) flow_ = flow_ || f.has_kinks();
    running_ = costs.running.has_kinks();
    if (sys.has_impulses()) {
      for (const auto& g : sys.impulse_map) jump_ = jump_ || g.has_kinks();
      jump_ = jump_ || costs.impulse.has_kinks();
    }
    active_ = flow_ || running_ || jump_;
  }

  bool active() const { return active_; }

  // Flow-side probe at one sample: compares each kinked family's symbolic
  // x-gradient row against central differences of the raw expression.
  void probe_flow(const HybridSystem& sys, const CostSpec& costs,
                  const Partials& px, double t, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& u, FlowEnv& env,
                  std::vector<std::string>& warnings) {
    if (!(flow_ || running_) || done_flow_) return;
    const double h = 1e-6;
    Eigen::VectorXd xp = x, xm = x;
    for (int j = 0; j < sys.n && !done_flow_; ++j) {
      xp[j] = x[j] + h;
      xm[j] = x[j] - h;
      if (flow_) {
        for (int i = 0; i < sys.n; ++i) {
          if (!sys.flow[i].has_kinks()) continue;
          const double fp = sys.flow[i].value(env.fill(t, xp, u));
          const double fm = sys.flow[i].value(env.fill(t, xm, u));
          const double sym = px.dfdx[i][j].value(env.fill(t, x, u));
          if (Mismatch(sym, (fp - fm) / (2 * h))) {
            warnings.push_back(
                "flow component " + std::to_string(i + 1) +
                " has a kink whose derivative convention is exercised near "
                "s=" +
                Num(t));
            done_flow_ = true;
            break;
          }
        }
      }
      if (running_ && !done_flow_) {
        const double fp = costs.running.value(env.fill(t, xp, u));
        const double fm = costs.running.value(env.fill(t, xm, u));
        const double sym = px.dFdx[j].value(env.fill(t, x, u));
        if (Mismatch(sym, (fp - fm) / (2 * h))) {
          warnings.push_back(
              "running cost has a kink whose derivative convention is "
              "exercised near s=" +
              Num(t));
          done_flow_ = true;
        }
      }
      xp[j] = x[j];
      xm[j] = x[j];
    }
  }

  // Jump-side probe at one impulse.
  void probe_jump(const HybridSystem& sys, const CostSpec& costs,
                  const Partials& px, double tau, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& w, const Eigen::VectorXd& extra,
                  JumpEnv& env, std::vector<std::string>& warnings) {
    if (!jump_ || done_jump_) return;
    const double h = 1e-6;
    Eigen::VectorXd xp = x, xm = x;
    for (int j = 0; j < sys.n && !done_jump_; ++j) {
      xp[j] = x[j] + h;
      xm[j] = x[j] - h;
      for (int i = 0; i < sys.n && !done_jump_; ++i) {
        if (!sys.impulse_map[i].has_kinks()) continue;
        const double gp = sys.impulse_map[i].value(env.fill(tau, xp, w, extra));
        const double gm = sys.impulse_map[i].value(env.fill(tau, xm, w, extra));
        const double sym = px.dIdx[i][j].value(env.fill(tau, x, w, extra));
        if (Mismatch(sym, (gp - gm) / (2 * h))) {
          warnings.push_back(
              "impulse map component " + std::to_string(i + 1) +
              " has a kink whose derivative convention is exercised at tau=" +
              Num(tau));
          done_jump_ = true;
        }
      }
      if (!done_jump_ && costs.impulse.has_kinks()) {
        const double gp = costs.impulse.value(env.fill(tau, xp, w, extra));
        const double gm = costs.impulse.value(env.fill(tau, xm, w, extra));
        const double sym = px.dPhidx[j].value(env.fill(tau, x, w, extra));
        if (Mismatch(sym, (gp - gm) / (2 * h))) {
          warnings.push_back(
              "impulse cost has a kink whose derivative convention is "
              "exercised at tau=" +
              Num(tau));
          done_jump_ = true;
        }
      }
      xp[j] = x[j];
      xm[j] = x[j];
    }
  }

 private:
  static bool Mismatch(double sym, double fd) {
    const double scale = std::max({std::abs(sym), std::abs(fd), 1.0});
    return std::abs(sym - fd) > 1e-3 * scale;
  }

  bool flow_, running_, jump_;
  bool active_ = false;
  bool done_flow_ = false;
  bool done_jump_ = false;
};

}  // namespace

double hamiltonian(double s, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& p, const Eigen::VectorXd& u,
                   const HybridSystem& sys, const CostSpec& costs) {
  CheckDims(sys, x, p, "hamiltonian");
  if (u.size() != sys.mu) {
    throw ValidationError("hamiltonian: control dimension " +
                          Num(static_cast<double>(u.size())) +
                          " does not match mu=" + Num(sys.mu));
  }
  return p.dot(sys.eval_flow(s, x, u)) + costs.eval_running(s, x, u);
}

double impulsive_hamiltonian(double s, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& p,
                             const Eigen::VectorXd& w,
                             const HybridSystem& sys, const CostSpec& costs,
                             const Eigen::VectorXd& extra) {
  CheckDims(sys, x, p, "impulsive_hamiltonian");
  if (!sys.has_impulses())
    throw ValidationError("impulsive_hamiltonian: system has no impulses");
  if (w.size() != sys.mw) {
    throw ValidationError("impulsive_hamiltonian: impulse control dimension " +
                          Num(static_cast<double>(w.size())) +
                          " does not match mw=" + Num(sys.mw));
  }
  if (extra.size() != sys.extra_dim()) {
    throw ValidationError(
        "impulsive_hamiltonian: extra argument dimension " +
        Num(static_cast<double>(extra.size())) +
        " does not match the impulse map (expected " + Num(sys.extra_dim()) +
        ")");
  }
  return p.dot(sys.eval_jump(s, x, w, extra)) +
         costs.eval_impulse(s, x, w, extra);
}

CostatePath integrate_costate(const HybridSystem& sys, const CostSpec& costs,
                              const Trajectory& traj) {
  const int n = sys.n;
  const std::size_t m = traj.size();
  if (m < 1) throw ValidationError("integrate_costate: empty trajectory");
  if (traj.u.size() != m || traj.x.size() != m || traj.sides.size() != m) {
    throw ValidationError(
        "integrate_costate: trajectory does not carry aligned states, "
        "controls, and sides");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (traj.x[i].size() != n)
      throw ValidationError("integrate_costate: state row " + Num(double(i)) +
                            " has dimension " +
                            Num(static_cast<double>(traj.x[i].size())) +
                            ", expected " + Num(n));
    if (traj.u[i].size() != sys.mu)
      throw ValidationError(
          "integrate_costate: missing controls on the trajectory (row " +
          Num(double(i)) + ")");
  }

  const Partials px = BuildPartials(sys, costs);
  FlowEnv fenv(n, sys.mu);
  JumpEnv jenv(n, sys.mw, sys.extra_dim());
  KinkMonitor kinks(sys, costs);

  CostatePath out;
  out.times = traj.times;
  out.sides = traj.sides;
  out.p.assign(m, Eigen::VectorXd::Zero(n));

  // Terminal condition p(T⁻) = ∇F₀(x(T⁻)). Terminal cost reads x only.
  {
    std::vector<double> tenv(static_cast<std::size_t>(n));
    const Eigen::VectorXd& xT = traj.x[m - 1];
    for (int j = 0; j < n; ++j) tenv[static_cast<std::size_t>(j)] = xT[j];
    for (int j = 0; j < n; ++j) out.p[m - 1][j] = px.dF0dx[j].value(tenv);
  }

  // -dp/ds at (s, x, p) with the step's held control.
  Eigen::VectorXd grad(n);
  const auto rhs = [&](double s, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& p,
                       const Eigen::VectorXd& u) -> Eigen::VectorXd {
    const auto env = fenv.fill(s, x, u);
    for (int j = 0; j < n; ++j) {
      double acc = px.dFdx[j].value(env);
      for (int i = 0; i < n; ++i) acc += p[i] * px.dfdx[i][j].value(env);
      grad[j] = -acc;
    }
    return grad;
  };

  std::size_t jmp = traj.jumps.size();
  out.jumps.resize(traj.jumps.size());

  for (std::size_t i = m - 1; i-- > 0;) {
    const double t0 = traj.times[i];
    const double t1 = traj.times[i + 1];
    if (traj.sides[i] == -1 && traj.sides[i + 1] == 1) {
      // Impulse pair: p⁻ = p⁺ + ∂K*/∂ξ(τ, x⁻, p⁺, w*).
      if (jmp == 0)
        throw ValidationError(
            "integrate_costate: trajectory impulse rows do not match its "
            "jump records");
      --jmp;
      const JumpRecord& rec = traj.jumps[jmp];
      const Eigen::VectorXd& pp = out.p[i + 1];
      const auto env = jenv.fill(t0, rec.x_minus, rec.w, rec.extra);
      Eigen::VectorXd pm = pp;
      for (int j = 0; j < n; ++j) {
        double acc = px.dPhidx[j].value(env);
        for (int k = 0; k < n; ++k) acc += pp[k] * px.dIdx[k][j].value(env);
        pm[j] += acc;
      }
      out.p[i] = pm;
      out.jumps[jmp] = CostatePath::Jump{t0, pp, pm};
      if (kinks.active())
        kinks.probe_jump(sys, costs, px, t0, rec.x_minus, rec.w, rec.extra,
                         jenv, out.warnings);
      continue;
    }

    // Backward RK4 across the flow step [t0, t1] (h < 0). The state at the
    // half step comes from the cubic Hermite through the endpoint states
    // with slopes f(·,·,u) under the step's held control.
    const Eigen::VectorXd& u = traj.u[i];
    const Eigen::VectorXd& x0 = traj.x[i];
    const Eigen::VectorXd& x1 = traj.x[i + 1];
    const double hf = t1 - t0;
    const Eigen::VectorXd f0 = sys.eval_flow(t0, x0, u);
    const Eigen::VectorXd f1 = sys.eval_flow(t1, x1, u);
    const Eigen::VectorXd xmid = 0.5 * (x0 + x1) + (hf / 8.0) * (f0 - f1);

    const double h = t0 - t1;
    const Eigen::VectorXd& p1 = out.p[i + 1];
    const Eigen::VectorXd k1 = rhs(t1, x1, p1, u);
    const Eigen::VectorXd k2 = rhs(t1 + h / 2, xmid, p1 + (h / 2) * k1, u);
    const Eigen::VectorXd k3 = rhs(t1 + h / 2, xmid, p1 + (h / 2) * k2, u);
    const Eigen::VectorXd k4 = rhs(t0, x0, p1 + h * k3, u);
    out.p[i] = p1 + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);

    if (!out.p[i].allFinite())
      throw NumericalError("costate blow-up at s=" + Num(t0));
    if (kinks.active())
      kinks.probe_flow(sys, costs, px, t0, x0, u, fenv, out.warnings);
  }
  if (jmp != 0)
    throw ValidationError(
        "integrate_costate: trajectory impulse rows do not match its jump "
        "records");
  return out;
}

ExtremumReport check_extremum(const Trajectory& traj,
                              const CostatePath& costate,
                              const HybridSystem& sys, const CostSpec& costs,
                              double tolerance) {
  const std::size_t m = traj.size();
  if (costate.size() != m || costate.jumps.size() != traj.jumps.size())
    throw ValidationError(
        "check_extremum: costate is not aligned with the trajectory");

  ExtremumReport rep;
  rep.tolerance = tolerance;
  rep.min_margin = std::numeric_limits<double>::infinity();

  const auto record = [&](double s, char kind, const Eigen::VectorXd& c,
                          double margin) {
    if (!std::isfinite(margin))
      throw NumericalError("check_extremum: non-finite margin at s=" +
                           Num(s));
    rep.rows.push_back(ExtremumReport::Row{s, kind, c, margin});
    rep.min_margin = std::min(rep.min_margin, margin);
    if (margin < -tolerance) ++rep.violations;
  };

  const std::vector<Eigen::VectorXd> u_lattice = sys.controls_u.enumerate();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (traj.sides[i] == -1) continue;  // no outgoing flow step
    const double s = traj.times[i];
    const Eigen::VectorXd& x = traj.x[i];
    const Eigen::VectorXd& p = costate.p[i];
    const double h_star = hamiltonian(s, x, p, traj.u[i], sys, costs);
    for (const Eigen::VectorXd& u : u_lattice)
      record(s, 'H', u, hamiltonian(s, x, p, u, sys, costs) - h_star);
  }

  if (!traj.jumps.empty()) {
    const std::vector<Eigen::VectorXd> w_lattice = sys.controls_w.enumerate();
    for (std::size_t k = 0; k < traj.jumps.size(); ++k) {
      const JumpRecord& rec = traj.jumps[k];
      const Eigen::VectorXd& pp = costate.jumps[k].p_plus;
      const double k_star = impulsive_hamiltonian(
          rec.time, rec.x_minus, pp, rec.w, sys, costs, rec.extra);
      for (const Eigen::VectorXd& w : w_lattice)
        record(rec.time, 'K', w,
               impulsive_hamiltonian(rec.time, rec.x_minus, pp, w, sys, costs,
                                     rec.extra) -
                   k_star);
    }
  }

  if (rep.rows.empty()) rep.min_margin = 0.0;
  return rep;
}

GradientCheck costate_vs_gradV(const CostatePath& costate,
                               const ValueFunction& vf,
                               const Trajectory& traj) {
  const std::size_t m = traj.size();
  if (costate.size() != m)
    throw ValidationError(
        "costate_vs_gradV: costate is not aligned with the trajectory");
  const Grid& g = vf.grid;
  const int n = g.dim();

  GradientCheck out;
  double sum = 0.0;
  std::vector<int> node(static_cast<std::size_t>(n));
  // Aftereffect solutions store one value grid per previous-impulse value;
  // the applicable grid switches to the jump's w as each impulse is passed.
  int param = vf.variant == Variant::kAftereffect ? vf.initial_param_index : 0;
  std::size_t jmp = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (vf.variant == Variant::kAftereffect && traj.sides[i] == 1 &&
        jmp < traj.jumps.size()) {
      const Eigen::VectorXd& w = traj.jumps[jmp].w;
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < vf.params.size(); ++k) {
        const double d = (vf.params[k] - w).norm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(k);
        }
      }
      param = best;
      ++jmp;
    }
    const std::size_t si =
        vf.slice_index(traj.times[i], traj.sides[i] == -1 ? -1 : 1);
    const std::vector<double>& slice = vf.values[si][param];

    // Central differences at the node nearest the sample; every axis needs
    // an interior node.
    for (int j = 0; j < n; ++j) {
      const double c = std::clamp(traj.x[i][j], g.lo[j], g.hi[j]);
      node[j] = static_cast<int>(std::lround((c - g.lo[j]) / g.spacing(j)));
      node[j] = std::clamp(node[j], 0, g.counts[j] - 1);
    }
    std::vector<int> idx = node;
    for (int j = 0; j < n; ++j) {
      if (node[j] < 1 || node[j] > g.counts[j] - 2)
        throw ValidationError(
            "costate_vs_gradV: trajectory too close to the grid boundary at "
            "s=" +
            Num(traj.times[i]) + " (axis " + std::to_string(j + 1) + ")");
      idx[j] = node[j] + 1;
      const double vp = slice[g.flat_index(idx)];
      idx[j] = node[j] - 1;
      const double vm = slice[g.flat_index(idx)];
      idx[j] = node[j];
      const double fd = (vp - vm) / (2.0 * g.spacing(j));
      const double pj = costate.p[i][j];
      const double den = std::max(std::abs(fd), std::abs(pj));
      const double rel = den > 0.0 ? std::abs(pj - fd) / den : 0.0;
      out.max_rel_error = std::max(out.max_rel_error, rel);
      sum += rel;
      ++out.samples;
    }
  }
  out.mean_rel_error = out.samples > 0 ? sum / double(out.samples) : 0.0;
  return out;
}

}  // namespace ioc
