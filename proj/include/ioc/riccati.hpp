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
#include <string>
#include <vector>

#include "ioc/expr.hpp"

namespace ioc {

/// Matrix whose entries are either constants or expressions of the single
/// variable t. Flow-side system/cost matrices are of this kind; jump-side
/// matrices are plain constants attached to their impulse time.
class TimeMatrix {
 public:
  TimeMatrix() = default;

  static TimeMatrix constant(const Eigen::MatrixXd& m);
  static TimeMatrix zero(int rows, int cols);
  /// Entries given row-major as expression strings over the variable "t".
  static TimeMatrix parse(int rows, int cols,
                          const std::vector<std::string>& entries);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool is_constant() const { return exprs_.empty(); }
  bool is_zero() const;

  Eigen::MatrixXd value(double t) const;
  /// Row-major entry expression; constants are wrapped on demand.
  Expression entry(int r, int c) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  Eigen::MatrixXd constant_;           // used when exprs_ is empty
  std::vector<Expression> exprs_;      // row-major, over the VarSet {t}
};

/// Jump data at one impulse time: state map x+ = (E+M)x + Nb and the
/// quadratic impulse cost x'αx + 2x'βb + b'γb.
struct LQImpulse {
  double time = 0.0;
  Eigen::MatrixXd M;      // n×n
  Eigen::MatrixXd N;      // n×m_w
  Eigen::MatrixXd alpha;  // n×n, symmetric
  Eigen::MatrixXd beta;   // n×m_w
  Eigen::MatrixXd gamma;  // m_w×m_w, symmetric positive definite
};

/// Linear flow dx/ds = P(s)x + Q(s)u with running cost x'Ax + 2x'Bu + u'Cu,
/// jumps per `impulses`, and terminal cost x'A0 x at s = T.
struct LQSystem {
  int state_dim = 0;            // n
  int control_dim = 0;          // m_u
  int impulse_control_dim = 0;  // m_w
  TimeMatrix P, Q;              // n×n, n×m_u
  TimeMatrix A, B, C;           // n×n, n×m_u, m_u×m_u
  Eigen::MatrixXd A0;           // n×n, symmetric
  std::vector<LQImpulse> impulses;  // strictly increasing times in (0, T)
  double horizon = 0.0;

  /// All structural problems (dimensions, symmetry, definiteness at sample
  /// times, impulse-time ordering); empty when the system is well formed.
  std::vector<std::string> check() const;
  /// Throws ValidationError listing every problem from check().
  void require_valid() const;
};

struct RiccatiOptions {
  double step = 1e-3;            // requested flow mesh step
  bool zero_beta = false;  // force β = 0 in gain and jump formulas
};

enum class KSide { kMinus = -1, kPlus = +1 };

/// Result of one backward flow integration on [s0, s1]; times ascending,
/// k[j] symmetric, k.back() equal to the supplied end condition.
struct RiccatiFlowResult {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> k;
};

/// Piecewise K(s) over [0, T] with one-sided values at each impulse time and
/// the impulse feedback gain L_k per jump (b* = L_k x(τ_k⁻)).
class RiccatiSolution {
 public:
  RiccatiSolution() = default;
  RiccatiSolution(LQSystem system, RiccatiOptions options,
                  std::vector<double> times, std::vector<int> sides,
                  std::vector<Eigen::MatrixXd> k,
                  std::vector<Eigen::MatrixXd> gains);

  const LQSystem& system() const { return system_; }
  const RiccatiOptions& options() const { return options_; }

  /// Mesh: times ascending; sides[j] is -1 / +1 at impulse times, 0 elsewhere.
  const std::vector<double>& times() const { return times_; }
  const std::vector<int>& sides() const { return sides_; }
  const std::vector<Eigen::MatrixXd>& k_path() const { return k_; }
  /// One gain per impulse, in the order of system().impulses.
  const std::vector<Eigen::MatrixXd>& impulse_gains() const { return gains_; }

  /// K(s) with the requested side at impulse times; linear interpolation
  /// between mesh points. s must lie in [0, T].
  Eigen::MatrixXd value_matrix(double s, KSide side = KSide::kPlus) const;

  /// Continuous feedback gain −C(s)⁻¹(Q(s)ᵀK(s) + B(s)ᵀ); u* = gain·x.
  Eigen::MatrixXd feedback_gain(double s, KSide side = KSide::kPlus) const;
  Eigen::VectorXd feedback_control(double s, const Eigen::VectorXd& x) const;

 private:
  LQSystem system_;
  RiccatiOptions options_;
  std::vector<double> times_;
  std::vector<int> sides_;
  std::vector<Eigen::MatrixXd> k_;
  std::vector<Eigen::MatrixXd> gains_;
};

/// Backward RK4 integration of the Riccati flow
///   −dK/ds = A + KP + PᵀK − (KQ + B)C⁻¹(QᵀK + Bᵀ)
/// from K(s1) = K_end down to s0, symmetrizing after every step.
/// Throws NumericalError on finite escape (with the escape time) or when
/// C(s) fails its Cholesky factorization.
RiccatiFlowResult riccati_flow(const LQSystem& lq, const Eigen::MatrixXd& k_end,
                               double s0, double s1, double step);

/// Impulse feedback gain L = −(NᵀK⁺N + γ)⁻¹(NᵀK⁺(E+M) + βᵀ).
/// Throws NumericalError when NᵀK⁺N + γ is not positive definite (the
/// message reports its smallest eigenvalue).
Eigen::MatrixXd impulse_gain(const Eigen::MatrixXd& k_plus,
                             const Eigen::MatrixXd& M, const Eigen::MatrixXd& N,
                             const Eigen::MatrixXd& beta,
                             const Eigen::MatrixXd& gamma);

/// Jump condition
///   K⁻ = (E+M)ᵀK⁺(E+M) + α − ((E+M)ᵀK⁺N + β)(NᵀK⁺N + γ)⁻¹(NᵀK⁺(E+M) + βᵀ),
/// i.e. xᵀK⁻x = min_b {(x+Mx+Nb)ᵀK⁺(x+Mx+Nb) + xᵀαx + 2xᵀβb + bᵀγb}.
Eigen::MatrixXd riccati_jump(const Eigen::MatrixXd& k_plus,
                             const Eigen::MatrixXd& M, const Eigen::MatrixXd& N,
                             const Eigen::MatrixXd& alpha,
                             const Eigen::MatrixXd& beta,
                             const Eigen::MatrixXd& gamma);

/// Full backward composition: K(T⁻) = A0, flow between impulses, gain and
/// jump at each impulse, down to s = 0.
RiccatiSolution solve_impulsive_riccati(const LQSystem& lq,
                                        const RiccatiOptions& options = {});

/// Quadratic value xᵀK(s)x with the requested one-sided K at impulse times.
double lq_value(const RiccatiSolution& sol, double s, KSide side,
                const Eigen::VectorXd& x);

}  // namespace ioc
