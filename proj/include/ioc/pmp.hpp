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

#ifndef IOC_PMP_HPP_
#define IOC_PMP_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ioc/hjb.hpp"
#include "ioc/model.hpp"
#include "ioc/sim.hpp"

namespace ioc {

// Pontryagin apparatus for hybrid trajectories: Hamiltonian evaluation,
// backward costate integration with jumps at impulse times, and
// minimum-principle margin checks against the control lattices.

/// Costate path aligned row-for-row with a Trajectory: impulse times appear
/// twice (a side -1 row carrying p(τ⁻) after the jump update, and a side +1
/// row carrying p(τ⁺)).
struct CostatePath {
  struct Jump {
    double time = 0.0;
    Eigen::VectorXd p_plus;   // costate just after the impulse
    Eigen::VectorXd p_minus;  // = p_plus + ∂K*/∂ξ(τ, x⁻, p_plus)
  };

  std::vector<double> times;
  std::vector<int> sides;  // mirrors the trajectory: -1, 0, +1
  std::vector<Eigen::VectorXd> p;
  std::vector<Jump> jumps;

  /// Non-fatal diagnostics, e.g. a kinked expression whose one-sided
  /// derivative convention was exercised along this trajectory.
  std::vector<std::string> warnings;

  std::size_t size() const { return times.size(); }
};

/// Minimum-principle margins along a trajectory. Flow rows compare
/// H(s, x*, p*, u) against the trajectory's own control; impulse rows
/// compare K(τ, x⁻, p⁺, w) against the recorded jump control. Nonnegative
/// margins (up to tolerance) are what optimality predicts.
struct ExtremumReport {
  struct Row {
    double time = 0.0;
    char kind = 'H';  // 'H' flow sample, 'K' impulse sample
    Eigen::VectorXd control;
    double margin = 0.0;
  };

  std::vector<Row> rows;
  double tolerance = 0.0;
  double min_margin = 0.0;
  int violations = 0;  // rows with margin < -tolerance
};

/// Relative agreement between costate components and central differences of
/// a grid value function along a trajectory.
struct GradientCheck {
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  std::size_t samples = 0;
};

/// H(s, x, p, u) = ⟨p, f(s,x,u)⟩ + F(s,x,u).
double hamiltonian(double s, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& p, const Eigen::VectorXd& u,
                   const HybridSystem& sys, const CostSpec& costs);

/// K(s, x, p, w) = ⟨p, I(s,x,w[,extra])⟩ + Φ(s,x,w[,extra]). `extra` is the
/// impulse map's extra argument (u left limit or previous impulse control);
/// pass an empty vector for systems without one.
double impulsive_hamiltonian(double s, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& p,
                             const Eigen::VectorXd& w,
                             const HybridSystem& sys, const CostSpec& costs,
                             const Eigen::VectorXd& extra = Eigen::VectorXd());

/// Integrates dp/ds = -∂H/∂ξ(s, x*(s), p, u*(s)) backward over the
/// trajectory's own mesh (classical RK4; the state is interpolated at stage
/// midpoints by a cubic Hermite built from the step's endpoint states and
/// flow slopes, with the step's held control). At each impulse, processed in
/// backward order, p⁻ = p⁺ + ∂K*/∂ξ(τ, x⁻, p⁺, w*). Terminal condition
/// p(T⁻) = ∇F₀(x*(T⁻)), differentiated symbolically.
CostatePath integrate_costate(const HybridSystem& sys, const CostSpec& costs,
                              const Trajectory& traj);

/// Evaluates minimum-principle margins along the trajectory: at every node
/// with an outgoing flow step, H(u) - H(u*) over the u lattice; at every
/// impulse, K(w) - K(w*) over the w lattice. Controls are sampled from the
/// system's own ControlSets, matching the policy class the solvers search.
ExtremumReport check_extremum(const Trajectory& traj,
                              const CostatePath& costate,
                              const HybridSystem& sys, const CostSpec& costs,
                              double tolerance);

/// Compares costate components against central differences of the value
/// function at the grid node nearest each trajectory sample. Every sample
/// must sit at least one node away from the grid boundary.
GradientCheck costate_vs_gradV(const CostatePath& costate,
                               const ValueFunction& vf, const Trajectory& traj);

}  // namespace ioc

#endif  // IOC_PMP_HPP_
