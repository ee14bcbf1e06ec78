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

#ifndef IOC_HJB_HPP_
#define IOC_HJB_HPP_

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

#include "ioc/model.hpp"
#include "ioc/sim.hpp"

namespace ioc {

/// Uniform rectangular state grid plus the requested time step. The time
/// step is adjusted per inter-impulse interval so that every impulse time
/// is a slice boundary.
struct Grid {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  std::vector<int> counts;  // nodes per dimension, each >= 2
  double delta = 1e-2;      // requested time step

  static Grid uniform(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                      const std::vector<int>& counts, double delta);

  int dim() const { return static_cast<int>(counts.size()); }
  std::size_t node_count() const;
  double spacing(int d) const { return (hi[d] - lo[d]) / (counts[d] - 1); }

  /// Node coordinates for a flat index (row-major, last dimension fastest).
  Eigen::VectorXd node(std::size_t flat) const;
  std::size_t flat_index(const std::vector<int>& idx) const;
  /// Nearest node to x, coordinates clamped into the box first.
  std::size_t nearest_node(const Eigen::VectorXd& x) const;
  bool contains(const Eigen::VectorXd& x) const;

  /// Multilinear interpolation of per-node values at x. Coordinates outside
  /// the box are clamped to the boundary; each clamped coordinate increments
  /// *clamps. Coordinates within 1e-9 of a node (in cell units) snap to it,
  /// so node reads reproduce stored values bit-for-bit.
  double interpolate(const std::vector<double>& values,
                     const Eigen::VectorXd& x, long* clamps = nullptr) const;

  void check() const;  // throws ValidationError on a malformed grid
};

enum class Variant { kBasic, kParametrizedControl, kAftereffect };

/// Per-a detail retained at an impulse time by the parametrized backup, so
/// readings other than the envelope-minimum continuation can be tested.
struct ImpulseDetail {
  double time = 0.0;
  std::vector<std::vector<double>> v_minus_per_a;  // [a_index][node]
};

/// Backward-induction solution: ordered time slices of grid values. Impulse
/// times carry two slices (side -1 stored before +1). For the aftereffect
/// variant every slice holds one value array per element of W; otherwise
/// the per-slice array count is 1.
struct ValueFunction {
  Variant variant = Variant::kBasic;
  Grid grid;
  std::vector<double> times;
  std::vector<int> sides;  // 0 interior, -1/+1 at impulse times
  std::vector<std::vector<std::vector<double>>> values;  // [slice][param][node]
  std::vector<long> clamps;  // clamp events while producing each slice
  std::vector<Eigen::VectorXd> params;  // aftereffect: W members, else empty
  int initial_param_index = 0;          // aftereffect: index of the declared b
  std::vector<ImpulseDetail> impulse_details;  // parametrized variant only

  std::size_t slice_count() const { return times.size(); }
  /// Index of the slice at time s (within 1e-9). side resolves the duplicate
  /// pair at impulse times; it is ignored elsewhere. Throws if absent.
  std::size_t slice_index(double s, int side) const;
  /// Interpolated value at (s, x). At impulse times reads the +1 slice.
  /// Aftereffect solutions answer with the declared initial parameter and
  /// only before the first impulse; use the explicit overload otherwise.
  double value_at(double s, const Eigen::VectorXd& x) const;
  double value_at(double s, int side, const Eigen::VectorXd& x,
                  int param_index) const;
  long total_clamps() const;
};

/// Grids of minimizing controls, aligned slice-for-slice with a
/// ValueFunction. Slices without an outgoing flow step (side -1 and the
/// final slice) carry empty arrays. Entries are indices into the stored
/// control lattices; the aftereffect variant keeps one array per b in W.
struct Policy {
  Grid grid;
  std::vector<Eigen::VectorXd> u_lattice;
  std::vector<Eigen::VectorXd> w_lattice;
  std::vector<double> times;
  std::vector<int> sides;
  std::vector<std::vector<std::vector<int>>> u_star;  // [slice][param][node]
  std::vector<double> impulse_times;
  /// [impulse][param][node]: w* for basic, b* per a for parametrized,
  /// c* per b for aftereffect.
  std::vector<std::vector<std::vector<int>>> w_star;
  std::vector<std::vector<int>> a_star;  // [impulse][node], parametrized only

  /// Control for the flow step departing time s (nearest-node lookup).
  Eigen::VectorXd u_at(double s, const Eigen::VectorXd& x,
                       int param_index = 0) const;
};

struct HjbOptions {
  int threads = 1;  // node-parallel within each backward step
};

/// One impulse backup: V-(xi) = min over w in W of
/// { V+(xi + I(tau, xi, w)) + Phi(tau, xi, w) }, per grid node. Ties pick
/// the first enumerated w.
struct BackupResult {
  std::vector<double> v_minus;
  std::vector<int> w_star;
  long clamps = 0;
};
BackupResult impulse_backup(const std::vector<double>& v_plus,
                            const HybridSystem& sys, const CostSpec& costs,
                            const Grid& grid, double tau);

/// Parametrized variant: I and Phi also read the flow control's left limit
/// a; produces one V- per sampled a plus the envelope minimum over a (used
/// to continue the sweep; between impulses a has no effect).
struct ParamBackupResult {
  std::vector<std::vector<double>> v_minus_per_a;  // [a_index][node]
  std::vector<double> v_minus_envelope;
  std::vector<std::vector<int>> b_star;  // [a_index][node]
  std::vector<int> a_star;               // [node] envelope argmin
  long clamps = 0;
};
ParamBackupResult impulse_backup_parametrized(const std::vector<double>& v_plus,
                                              const HybridSystem& sys,
                                              const CostSpec& costs,
                                              const Grid& grid, double tau);

/// Aftereffect variant: V-(xi, b) = min over c in W of
/// { V+(xi + I(tau, xi, c, b), c) + Phi(tau, xi, c, b) }. The chosen c
/// selects which V+ slice is consulted. Requires a finite W.
struct AftereffectBackupResult {
  std::vector<std::vector<double>> v_minus_per_b;  // [b_index][node]
  std::vector<std::vector<int>> c_star;            // [b_index][node]
  long clamps = 0;
};
AftereffectBackupResult impulse_backup_aftereffect(
    const std::vector<std::vector<double>>& v_plus_per_c,
    const HybridSystem& sys, const CostSpec& costs, const Grid& grid,
    double tau);

/// Backward semi-Lagrangian sweep for a fixed-time schedule:
/// V(s,xi) = min over sampled a of { delta*F(s,xi,a) + V~(s+delta,
/// xi + delta*f(s,xi,a)) } between impulses, impulse_backup at each tau,
/// V(T) = F0 exactly on nodes.
std::pair<ValueFunction, Policy> solve_basic(const HybridSystem& sys,
                                             const CostSpec& costs,
                                             const Grid& grid,
                                             const HjbOptions& options = {});

/// As solve_basic but applying impulse_backup_parametrized at impulses and
/// continuing with the envelope; per-a slices are retained in
/// impulse_details. Requires the control-left-limit impulse argument.
std::pair<ValueFunction, Policy> solve_parametrized(
    const HybridSystem& sys, const CostSpec& costs, const Grid& grid,
    const HjbOptions& options = {});

/// Aftereffect sweep: carries one grid per b in W between impulses (they
/// obey the same flow step) and applies impulse_backup_aftereffect at each
/// impulse. The scalar value before the first impulse uses the system's
/// declared initial previous-impulse value.
std::pair<ValueFunction, Policy> solve_aftereffect(
    const HybridSystem& sys, const CostSpec& costs, const Grid& grid,
    const HjbOptions& options = {});

/// Closed-loop rollout on the solver's own time mesh, taking controls from
/// the policy by nearest-node lookup. Returns the realized trajectory and
/// cost alongside the interpolated value at the start point.
struct Synthesis {
  Trajectory trajectory;
  CostBreakdown cost;
  double value = 0.0;  // V(s, xi) interpolated from the solution
};
Synthesis synthesize_trajectory(const ValueFunction& vf, const Policy& pol,
                                const HybridSystem& sys, const CostSpec& costs,
                                double s, const Eigen::VectorXd& xi);

/// One-step consistency of the discrete scheme at the given sample points:
/// residual(s,xi) = V(s,xi) - min_a { delta*F + V~(s+delta, xi+delta*f) },
/// using the same backup kernel as the solver, so node residuals vanish
/// exactly. Sample times must be non-impulse slice times.
struct ResidualStats {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  std::size_t count = 0;
};
ResidualStats dpp_residual(
    const ValueFunction& vf, const HybridSystem& sys, const CostSpec& costs,
    const std::vector<std::pair<double, Eigen::VectorXd>>& points);

}  // namespace ioc

#endif  // IOC_HJB_HPP_
