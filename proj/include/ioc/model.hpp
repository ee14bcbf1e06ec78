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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ioc/expr.hpp"
#include "ioc/riccati.hpp"

namespace ioc {

/// Admissible control values: an explicit finite list or an axis-aligned box
/// sampled on a uniform per-axis lattice. Both the value-function backup and
/// the impulse backup minimize by enumerating these points.
struct ControlSet {
  enum class Kind { kFinite, kBox };

  Kind kind = Kind::kFinite;
  std::vector<Eigen::VectorXd> points;  // finite list
  Eigen::VectorXd lo, hi;               // box bounds
  std::vector<int> samples_per_axis;    // box lattice resolution

  static ControlSet finite(std::vector<Eigen::VectorXd> pts);
  static ControlSet box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                        const std::vector<int>& samples);
  /// Single-point set (e.g. an uncontrolled axis).
  static ControlSet single(const Eigen::VectorXd& point);

  int dim() const;
  /// Lattice size (product of per-axis counts for a box).
  std::size_t count() const;
  std::vector<std::string> check() const;

  /// Deterministic enumeration order: finite lists as given; box lattices
  /// lexicographic with the last axis fastest. An axis with one sample
  /// contributes the interval midpoint.
  std::vector<Eigen::VectorXd> enumerate() const;
};

/// When the impulse triggers: a fixed strictly increasing list of times in
/// (0, T), or zero crossings of scalar surfaces g(t, x) (simulator only).
struct ImpulseSchedule {
  enum class Kind { kFixedTimes, kEventSurface };

  Kind kind = Kind::kFixedTimes;
  std::vector<double> times;
  std::vector<Expression> surfaces;  // over (t, x1..xn)

  bool empty() const {
    return kind == Kind::kFixedTimes ? times.empty() : surfaces.empty();
  }
};

/// Extra argument threaded into the impulse map and impulse cost:
/// kControlLeftLimit passes a = u(τ⁻) (variables a1..a_mu);
/// kPreviousImpulse passes the previous impulse control (variables b1..b_mw).
enum class ImpulseArg { kNone, kControlLeftLimit, kPreviousImpulse };

/// Raw textual description of a hybrid system, prior to validation.
struct HybridSystemSpec {
  int state_dim = 0;
  std::vector<std::string> flow;         // n entries f_i(t, x, u)
  std::vector<std::string> impulse_map;  // n entries I_i(t, x, w[, extra])
  ImpulseArg impulse_arg = ImpulseArg::kNone;
  std::vector<double> impulse_times;
  std::vector<std::string> event_surfaces;  // scalar g(t, x) expressions
  ControlSet controls_u;
  ControlSet controls_w;
  double horizon = 0.0;
  /// Aftereffect variant only: the b value in force on [0, τ1).
  /// Empty means zero.
  std::vector<double> initial_prev_impulse;
};

/// Cost description: running rate F(t,x,u), impulse cost Φ(t,x,w[,extra]),
/// terminal cost F0(x). Empty strings mean zero.
struct CostText {
  std::string running;
  std::string impulse;
  std::string terminal;
};

/// Validated, compiled hybrid system. dx/dt = f(t,x,u) between impulses;
/// x(τ⁺) = x(τ⁻) + I(τ, x(τ⁻), w[, extra]) at impulses.
struct HybridSystem {
  int n = 0;   // state dimension
  int mu = 0;  // continuous control dimension
  int mw = 0;  // impulse control dimension

  std::vector<Expression> flow;         // over flow_vars
  std::vector<Expression> impulse_map;  // over jump_vars
  ImpulseArg impulse_arg = ImpulseArg::kNone;
  ImpulseSchedule schedule;
  ControlSet controls_u;
  ControlSet controls_w;
  double horizon = 0.0;
  Eigen::VectorXd initial_prev_impulse;  // size mw for aftereffect, else empty

  VarSet flow_vars;      // t, x1..xn, u1..umu
  VarSet jump_vars;      // t, x1..xn, w1..wmw [, a1.. | b1..]
  VarSet surface_vars;   // t, x1..xn
  VarSet terminal_vars;  // x1..xn

  /// Dimension of the extra impulse argument (mu, mw, or 0).
  int extra_dim() const;
  bool has_impulses() const { return !schedule.empty(); }

  Eigen::VectorXd eval_flow(double t, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u) const;
  Eigen::VectorXd eval_jump(double t, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& w,
                            const Eigen::VectorXd& extra) const;
};

/// Compiled costs over the same variable sets as the owning HybridSystem.
struct CostSpec {
  Expression running;   // over flow_vars
  Expression impulse;   // over jump_vars
  Expression terminal;  // over terminal_vars

  double eval_running(double t, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& u) const;
  double eval_impulse(double t, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& w,
                      const Eigen::VectorXd& extra) const;
  double eval_terminal(const Eigen::VectorXd& x) const;
};

struct ValidatedModel {
  HybridSystem system;
  CostSpec costs;
};

/// Either a compiled model or the complete list of violations found.
struct ValidationResult {
  std::optional<ValidatedModel> model;
  std::vector<std::string> errors;

  bool ok() const { return model.has_value(); }
  /// The model, or a ValidationError listing every problem.
  const ValidatedModel& value() const;
};

ValidationResult validate_system(const HybridSystemSpec& spec,
                                 const CostText& costs);

/// Maps per-interval discrete samples to a continuous-time signal:
/// out_i(t) = Σ_j φ_ij(t) z_j for t in the containing interval. Zero-order
/// hold is φ = identity.
struct InterpolationOperator {
  enum class Kind { kZeroOrderHold, kBasis };

  Kind kind = Kind::kZeroOrderHold;
  int dim = 0;
  /// basis[k]: dim×dim row-major expressions over t for interval k.
  /// A single entry is shared by every interval.
  std::vector<std::vector<Expression>> basis;

  static InterpolationOperator zero_order_hold(int dim);
  /// Throws ParseError on malformed basis entries.
  static InterpolationOperator basis_functions(
      int dim, const std::vector<std::vector<std::string>>& per_interval);

  std::vector<std::string> check(std::size_t interval_count) const;
};

/// Evaluate the interpolated signal at time t. samples[k] is the discrete
/// value in force on interval k, where interval 0 is [0, τ1) (the initial
/// value) and interval k is [τ_k, τ_{k+1}). Throws EvalError for t outside
/// [0, horizon] or a missing sample.
Eigen::VectorXd interpolate(const InterpolationOperator& op,
                            const std::vector<Eigen::VectorXd>& samples,
                            std::span<const double> times, double horizon,
                            double t);

/// Sampled-data family: continuous plant y' = f(...) coupled to a discrete
/// recursion z(τ_k) = g(...) through interpolation operators p (for z) and
/// q (for w). The variant fixes the argument lists:
///   C1: f(t, y, u, pz, qw)   C2: f(t, y, u, pz)
///   D1: g(t, y, u, z, w)     D2: g(t, y, z, w)
enum class SampledVariant { kC1D1, kC1D2, kC2D1, kC2D2 };

struct SampledDataSpec {
  SampledVariant variant = SampledVariant::kC2D2;
  int cont_dim = 0;          // n_y
  int cont_control_dim = 0;  // m_u
  int disc_dim = 0;          // n_z
  int disc_control_dim = 0;  // m_w
  std::vector<std::string> flow;        // n_y entries
  std::vector<std::string> transition;  // n_z entries
  InterpolationOperator p;              // dim n_z
  InterpolationOperator q;              // dim m_w (C1 variants only)
  std::vector<double> times;
  double horizon = 0.0;
};

struct SampledDataSystem {
  SampledVariant variant = SampledVariant::kC2D2;
  int ny = 0, mu = 0, nz = 0, mw = 0;
  std::vector<Expression> flow;        // over flow_vars
  std::vector<Expression> transition;  // over transition_vars
  InterpolationOperator p, q;
  std::vector<double> times;
  double horizon = 0.0;
  VarSet flow_vars;        // t, y.., u.., pz.. [, qw..]
  VarSet transition_vars;  // t, y.., [u..,] z.., w..
};

struct SampledValidation {
  std::optional<SampledDataSystem> system;
  std::vector<std::string> errors;

  bool ok() const { return system.has_value(); }
  const SampledDataSystem& value() const;
};

SampledValidation validate_system(const SampledDataSpec& spec);

/// Reduction to canonical impulsive form with state [y; z; held w]:
/// z components flow with rate 0 and jump by g − z at each τ_k; for C1
/// variants the held q(w) value is carried as extra state components that
/// jump to the new w. D1 variants produce an impulse map carrying the
/// u-left-limit argument (a1..a_mu). Requires zero-order-hold operators.
/// `costs` is written over the augmented state naming x1..x_naug, and the
/// caller composes the augmented initial state [y0; z0; (w0)].
ValidationResult reduce_sampled_data(const SampledDataSystem& sd,
                                     const CostText& costs,
                                     const ControlSet& controls_u,
                                     const ControlSet& controls_w);

/// Expansion of a linear-quadratic instance into expression form:
/// f = P(t)x + Q(t)u, I = Mx + Nw, F = xᵀAx + 2xᵀBu + uᵀCu,
/// Φ = xᵀαx + 2xᵀβw + wᵀγw, F0 = xᵀA0x. All impulses must share the same
/// jump data, since the canonical form has a single impulse map.
ValidationResult lq_to_general(const LQSystem& lq, const ControlSet& controls_u,
                               const ControlSet& controls_w);
/// Convenience overload with unit-box controls ([-1,1] per axis, 21 samples).
ValidationResult lq_to_general(const LQSystem& lq);

}  // namespace ioc
