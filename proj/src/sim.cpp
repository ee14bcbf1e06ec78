/*
 Copyright 2026 The ioc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

 http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "ioc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "ioc/errors.hpp"
#include "ioc/mesh.hpp"

namespace ioc {
namespace {

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// Flow evaluation with a reused environment buffer.
class FlowEval {
 public:
  explicit FlowEval(const HybridSystem& sys)
      : sys_(sys), env_(1 + sys.n + sys.mu) {}

  Eigen::VectorXd operator()(double t, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u) {
    env_[0] = t;
    for (int i = 0; i < sys_.n; ++i) env_[1 + i] = x[i];
    for (int k = 0; k < sys_.mu; ++k) env_[1 + sys_.n + k] = u[k];
    Eigen::VectorXd out(sys_.n);
    for (int i = 0; i < sys_.n; ++i) out[i] = sys_.flow[i].value(env_);
    return out;
  }

 private:
  const HybridSystem& sys_;
  std::vector<double> env_;
};

/// One classical RK4 step of length h with the control held constant.
Eigen::VectorXd Rk4Step(FlowEval& f, double t, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u, double h) {
  const Eigen::VectorXd k1 = f(t, x, u);
  const Eigen::VectorXd k2 = f(t + 0.5 * h, x + 0.5 * h * k1, u);
  const Eigen::VectorXd k3 = f(t + 0.5 * h, x + 0.5 * h * k2, u);
  const Eigen::VectorXd k4 = f(t + h, x + h * k3, u);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void CheckFinite(const Eigen::VectorXd& x, double t) {
  if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e12) {
    throw NumericalError("state blow-up at t=" + Num(t));
  }
}

double SurfaceValue(const Expression& g, double t, const Eigen::VectorXd& x,
                    std::vector<double>& env) {
  env[0] = t;
  for (Eigen::Index i = 0; i < x.size(); ++i) env[1 + i] = x[i];
  return g.value(env);
}

/// ∫_a^b of the quadratic through (t0,f0), (t1,f1), (t2,f2). Times are
/// shifted to the middle node so the cubic primitives stay well conditioned
/// on fine meshes far from the origin.
double QuadIntegral(double t0, double f0, double t1, double f1, double t2,
                    double f2, double a, double b) {
  const double s0 = t0 - t1, s2 = t2 - t1, sa = a - t1, sb = b - t1;
  auto prim = [](double p, double q, double t) {
    return t * t * t / 3.0 - (p + q) * t * t / 2.0 + p * q * t;
  };
  const double l0 = (prim(0.0, s2, sb) - prim(0.0, s2, sa)) / (s0 * (s0 - s2));
  const double l1 = (prim(s0, s2, sb) - prim(s0, s2, sa)) / (-s0 * -s2);
  const double l2 = (prim(s0, 0.0, sb) - prim(s0, 0.0, sa)) / (s2 * (s2 - s0));
  return f0 * l0 + f1 * l1 + f2 * l2;
}

}  // namespace

ControlSignal ControlSignal::constant(const Eigen::VectorXd& v) {
  ControlSignal s;
  s.kind_ = Kind::kConstant;
  s.dim_ = static_cast<int>(v.size());
  s.constant_ = v;
  return s;
}

ControlSignal ControlSignal::table(std::vector<double> times,
                                   std::vector<Eigen::VectorXd> values) {
  if (times.empty() || times.size() != values.size()) {
    throw ValidationError("control table needs one value per mesh time");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw ValidationError("control table times not strictly increasing");
    }
  }
  ControlSignal s;
  s.kind_ = Kind::kTable;
  s.dim_ = static_cast<int>(values.front().size());
  s.mesh_ = std::move(times);
  s.values_ = std::move(values);
  return s;
}

ControlSignal ControlSignal::feedback(
    int dim, std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> fn) {
  ControlSignal s;
  s.kind_ = Kind::kFeedback;
  s.dim_ = dim;
  s.fn_ = std::move(fn);
  return s;
}

Eigen::VectorXd ControlSignal::value(double t, const Eigen::VectorXd& x) const {
  switch (kind_) {
    case Kind::kConstant:
      return constant_;
    case Kind::kTable: {
      const auto it = std::upper_bound(mesh_.begin(), mesh_.end(), t);
      const std::size_t idx = it == mesh_.begin()
                                  ? 0
                                  : static_cast<std::size_t>(it - mesh_.begin()) - 1;
      return values_[idx];
    }
    case Kind::kFeedback:
      return fn_(t, x);
  }
  return constant_;
}

Trajectory integrate(const HybridSystem& sys, const ControlSignal& u,
                     const ControlSignal& w, double s,
                     const Eigen::VectorXd& xi,
                     const IntegrateOptions& options) {
  const double T = sys.horizon;
  if (!(s >= 0.0) || !(s < T)) {
    throw ValidationError("start time s=" + Num(s) + " must lie in [0, " +
                          Num(T) + ")");
  }
  if (xi.size() != sys.n) {
    throw ValidationError("start state has dimension " +
                          std::to_string(xi.size()) + ", expected " +
                          std::to_string(sys.n));
  }
  if (!xi.allFinite()) throw ValidationError("start state must be finite");
  if (u.dim() != sys.mu) {
    throw ValidationError("control signal u has dimension " +
                          std::to_string(u.dim()) + ", expected " +
                          std::to_string(sys.mu));
  }
  if (sys.has_impulses() && w.dim() != sys.mw) {
    throw ValidationError("control signal w has dimension " +
                          std::to_string(w.dim()) + ", expected " +
                          std::to_string(sys.mw));
  }

  FlowEval flow(sys);
  Trajectory traj;
  traj.start_time = s;
  traj.end_time = T;

  Eigen::VectorXd x = xi;
  Eigen::VectorXd b_prev = sys.impulse_arg == ImpulseArg::kPreviousImpulse
                               ? (sys.initial_prev_impulse.size() == sys.mw
                                      ? sys.initial_prev_impulse
                                      : Eigen::VectorXd::Zero(sys.mw))
                               : Eigen::VectorXd();

  auto push = [&](double t, int side, const Eigen::VectorXd& xv,
                  const Eigen::VectorXd& uv) {
    traj.times.push_back(t);
    traj.sides.push_back(side);
    traj.x.push_back(xv);
    traj.u.push_back(uv);
  };

  auto apply_jump = [&](double tau, const Eigen::VectorXd& u_left) {
    const Eigen::VectorXd wv = w.value(tau, x);
    Eigen::VectorXd extra;
    if (sys.impulse_arg == ImpulseArg::kControlLeftLimit) extra = u_left;
    if (sys.impulse_arg == ImpulseArg::kPreviousImpulse) extra = b_prev;
    const Eigen::VectorXd xp = x + sys.eval_jump(tau, x, wv, extra);
    CheckFinite(xp, tau);
    traj.jumps.push_back(JumpRecord{tau, x, xp, wv, extra});
    x = xp;
    b_prev = wv;
  };

  if (sys.schedule.kind == ImpulseSchedule::Kind::kFixedTimes) {
    std::vector<double> taus;
    for (double tau : sys.schedule.times) {
      if (tau > s && tau < T) taus.push_back(tau);
    }
    const TimeSegments segs = TimeSegments::build(s, T, taus, options.step);
    int side = 0;  // side of the node that opens the next segment
    for (std::size_t si = 0; si < segs.segments.size(); ++si) {
      const auto& seg = segs.segments[si];
      Eigen::VectorXd u_step;
      for (int j = 0; j < seg.steps; ++j) {
        const double t0 = mesh_time(seg.begin, seg.end, seg.steps, j);
        const double t1 = mesh_time(seg.begin, seg.end, seg.steps, j + 1);
        u_step = u.value(t0, x);
        push(t0, j == 0 ? side : 0, x, u_step);
        x = Rk4Step(flow, t0, x, u_step, t1 - t0);
        CheckFinite(x, t1);
      }
      const bool last = si + 1 == segs.segments.size();
      if (last) {
        push(seg.end, 0, x, u_step);
      } else {
        push(seg.end, -1, x, u_step);
        apply_jump(seg.end, u_step);
        side = +1;
      }
    }
    return traj;
  }

  // Event-surface mode.
  const std::size_t ns = sys.schedule.surfaces.size();
  std::vector<double> senv(1 + sys.n);
  std::vector<double> g_prev(ns);
  for (std::size_t k = 0; k < ns; ++k) {
    g_prev[k] = SurfaceValue(sys.schedule.surfaces[k], s, x, senv);
  }
  double t = s;
  int side = 0;
  int events = 0;
  while (true) {
    const int steps = steps_for(T - t, options.step);
    bool jumped = false;
    Eigen::VectorXd u_step;
    for (int j = 0; j < steps; ++j) {
      const double t0 = mesh_time(t, T, steps, j);
      const double t1 = mesh_time(t, T, steps, j + 1);
      u_step = u.value(t0, x);
      push(t0, j == 0 ? side : 0, x, u_step);
      side = 0;
      const Eigen::VectorXd x_new = Rk4Step(flow, t0, x, u_step, t1 - t0);
      CheckFinite(x_new, t1);

      // Locate the earliest sign change across this step, if any.
      double best_theta = -1.0;
      for (std::size_t k = 0; k < ns; ++k) {
        const double g_new =
            SurfaceValue(sys.schedule.surfaces[k], t1, x_new, senv);
        const bool crosses =
            g_prev[k] != 0.0 && (g_new == 0.0 || (g_prev[k] > 0) != (g_new > 0));
        if (!crosses) {
          g_prev[k] = g_new;
          continue;
        }
        // Bisection on step fraction; x(θ) by a single RK4 substep.
        double lo = 0.0, hi = t1 - t0;
        double glo = g_prev[k];
        while (hi - lo > 1e-10) {
          const double mid = 0.5 * (lo + hi);
          const Eigen::VectorXd xm = Rk4Step(flow, t0, x, u_step, mid);
          const double gm = SurfaceValue(sys.schedule.surfaces[k], t0 + mid, xm, senv);
          if (gm == 0.0 || (glo > 0) != (gm > 0)) {
            hi = mid;
          } else {
            lo = mid;
            glo = gm;
          }
        }
        const double theta = hi;
        if (best_theta < 0.0 || theta < best_theta) best_theta = theta;
        g_prev[k] = g_new;
      }

      if (best_theta >= 0.0 && t0 + best_theta < T - 1e-12) {
        const double tau = t0 + best_theta;
        const Eigen::VectorXd x_minus = Rk4Step(flow, t0, x, u_step, best_theta);
        push(tau, -1, x_minus, u_step);
        x = x_minus;
        apply_jump(tau, u_step);
        if (++events > options.max_events) {
          throw NumericalError("event budget exceeded at t=" + Num(tau));
        }
        for (std::size_t k = 0; k < ns; ++k) {
          g_prev[k] = SurfaceValue(sys.schedule.surfaces[k], tau, x, senv);
        }
        t = tau;
        side = +1;
        jumped = true;
        break;
      }
      x = x_new;
      if (j + 1 == steps) push(T, 0, x, u_step);
    }
    if (!jumped) break;
  }
  return traj;
}

CostBreakdown evaluate_cost(const Trajectory& traj, const CostSpec& costs) {
  const std::size_t m = traj.size();
  if (m == 0) throw ValidationError("empty trajectory");

  std::vector<double> f(m);
  for (std::size_t i = 0; i < m; ++i) {
    f[i] = costs.eval_running(traj.times[i], traj.x[i], traj.u[i]);
  }

  CostBreakdown out;
  std::size_t seg_start = 0;
  auto integrate_segment = [&](std::size_t a, std::size_t b) {
    if (b - a + 1 < 3) {
      throw NumericalError(
          "segment starting at t=" + Num(traj.times[a]) +
          " has fewer than 3 mesh nodes; Simpson quadrature needs 3");
    }
    double sum = 0.0;
    std::size_t i = a;
    while (i + 2 <= b) {
      sum += QuadIntegral(traj.times[i], f[i], traj.times[i + 1], f[i + 1],
                          traj.times[i + 2], f[i + 2], traj.times[i],
                          traj.times[i + 2]);
      i += 2;
    }
    if (i + 1 == b) {
      sum += QuadIntegral(traj.times[b - 2], f[b - 2], traj.times[b - 1],
                          f[b - 1], traj.times[b], f[b], traj.times[b - 1],
                          traj.times[b]);
    }
    return sum;
  };

  for (std::size_t i = 0; i < m; ++i) {
    if (traj.sides[i] == -1) {
      out.running += integrate_segment(seg_start, i);
      seg_start = i + 1;
    }
  }
  out.running += integrate_segment(seg_start, m - 1);

  for (const JumpRecord& jr : traj.jumps) {
    out.impulse += costs.eval_impulse(jr.time, jr.x_minus, jr.w, jr.extra);
  }
  out.terminal = costs.eval_terminal(traj.x.back());
  return out;
}

}  // namespace ioc
