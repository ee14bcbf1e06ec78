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

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ioc/model.hpp"

namespace ioc {

/// One applied impulse: x⁺ = x⁻ + I(τ, x⁻, w[, extra]); `extra` is the
/// u left limit (a) or the previous impulse control (b), per the system's
/// impulse argument.
struct JumpRecord {
  double time = 0.0;
  Eigen::VectorXd x_minus;
  Eigen::VectorXd x_plus;
  Eigen::VectorXd w;
  Eigen::VectorXd extra;
};

/// Simulated path. Impulse times appear twice: a side -1 row carrying
/// x(τ⁻) followed by a side +1 row carrying x(τ⁺). u[i] is the control held
/// on the step departing node i; on side -1 rows and the final row it is the
/// left-limit value (the control of the arriving step).
struct Trajectory {
  std::vector<double> times;
  std::vector<int> sides;  // -1, 0, +1
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> u;
  std::vector<JumpRecord> jumps;
  double start_time = 0.0;
  double end_time = 0.0;

  std::size_t size() const { return times.size(); }
};

/// Control source for the integrator. All kinds are held constant across
/// each integration step, sampled at the step's start node: tables are
/// zero-order holds on their own mesh, feedback is evaluated at (t_i, x_i).
class ControlSignal {
 public:
  enum class Kind { kConstant, kTable, kFeedback };

  static ControlSignal constant(const Eigen::VectorXd& v);
  /// Zero-order hold: value(t) = values[j] for the last mesh time ≤ t;
  /// times strictly increasing, values one per mesh time.
  static ControlSignal table(std::vector<double> times,
                             std::vector<Eigen::VectorXd> values);
  static ControlSignal feedback(
      int dim, std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> fn);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  Eigen::VectorXd value(double t, const Eigen::VectorXd& x) const;

 private:
  Kind kind_ = Kind::kConstant;
  int dim_ = 0;
  Eigen::VectorXd constant_;
  std::vector<double> mesh_;
  std::vector<Eigen::VectorXd> values_;
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> fn_;
};

struct IntegrateOptions {
  double step = 1e-3;    // requested step; per-segment steps divide evenly
  int max_events = 1000; // event-surface impulse budget
};

/// Forward integration of the hybrid system from (s, ξ) to the horizon.
/// Classical fixed-step RK4 with the mesh aligned so every fixed impulse
/// time is a node; at each impulse the jump is applied once from x(τ⁻).
/// Event-surface schedules: a sign change of any surface g(t,x) across a
/// step is located by bisection (to 1e-10 in t, via a single RK4 substep
/// from the step's start); simultaneous crossings resolve earliest-first,
/// ties by declaration order; a node with g = 0 that was reached by a jump
/// or given as the start state does not re-trigger. Crossings within 1e-12
/// of the horizon are ignored (impulses are interior).
/// Throws NumericalError on state blow-up (with the first offending time)
/// or when max_events is exceeded.
Trajectory integrate(const HybridSystem& sys, const ControlSignal& u,
                     const ControlSignal& w, double s,
                     const Eigen::VectorXd& xi,
                     const IntegrateOptions& options = {});

struct CostBreakdown {
  double running = 0.0;
  double impulse = 0.0;
  double terminal = 0.0;
  double total() const { return running + impulse + terminal; }
};

/// J = ∫F dt + Σ Φ + F0(x(T⁻)). The integral term uses quadratic-pair
/// quadrature on the trajectory mesh per inter-impulse segment (composite
/// Simpson on uniform meshes); Φ is evaluated at (τ, x⁻, w, extra) from the
/// jump records; the terminal cost at the final row. Throws NumericalError
/// when a segment has fewer than 3 nodes.
CostBreakdown evaluate_cost(const Trajectory& traj, const CostSpec& costs);

}  // namespace ioc
