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

#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "ioc/errors.hpp"
#include "ioc/hjb.hpp"
#include "ioc/model.hpp"
#include "ioc/pmp.hpp"
#include "ioc/riccati.hpp"
#include "ioc/sim.hpp"

namespace {

Eigen::VectorXd Vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

Eigen::VectorXd Vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

ioc::ControlSet Finite1(const std::vector<double>& vals) {
  std::vector<Eigen::VectorXd> pts;
  for (double v : vals) pts.push_back(Vec1(v));
  return ioc::ControlSet::finite(pts);
}

ioc::ControlSet Box1(double lo, double hi, int count) {
  return ioc::ControlSet::box(Eigen::VectorXd::Constant(1, lo),
                              Eigen::VectorXd::Constant(1, hi), {count});
}

ioc::ValidatedModel Compile(const ioc::HybridSystemSpec& spec,
                            const ioc::CostText& costs = {}) {
  return ioc::validate_system(spec, costs).value();
}

/// Scalar LQ benchmark: dx = u, F = x² + u², F0 = x², one impulse at 0.5
/// with x⁺ = x⁻ + w and Φ = w².
ioc::LQSystem ScalarLq() {
  ioc::LQSystem lq;
  lq.state_dim = 1;
  lq.control_dim = 1;
  lq.impulse_control_dim = 1;
  lq.P = ioc::TimeMatrix::zero(1, 1);
  lq.Q = ioc::TimeMatrix::constant(Eigen::MatrixXd::Identity(1, 1));
  lq.A = ioc::TimeMatrix::constant(Eigen::MatrixXd::Identity(1, 1));
  lq.B = ioc::TimeMatrix::zero(1, 1);
  lq.C = ioc::TimeMatrix::constant(Eigen::MatrixXd::Identity(1, 1));
  lq.A0 = Eigen::MatrixXd::Identity(1, 1);
  lq.horizon = 1.0;
  ioc::LQImpulse imp;
  imp.time = 0.5;
  imp.M = Eigen::MatrixXd::Zero(1, 1);
  imp.N = Eigen::MatrixXd::Identity(1, 1);
  imp.alpha = Eigen::MatrixXd::Zero(1, 1);
  imp.beta = Eigen::MatrixXd::Zero(1, 1);
  imp.gamma = Eigen::MatrixXd::Identity(1, 1);
  lq.impulses = {imp};
  return lq;
}

}  // namespace

TEST_SUITE("pmp") {

TEST_CASE("hamiltonian matches hand arithmetic") {
  ioc::HybridSystemSpec spec;
  spec.state_dim = 2;
  spec.flow = {"3", "4"};
  spec.controls_u = ioc::ControlSet::finite({Eigen::VectorXd()});
  spec.controls_w = Finite1({0.0});
  spec.horizon = 1.0;
  const auto with_f = Compile(spec, {"5", "", ""});
  CHECK(ioc::hamiltonian(0.0, Vec2(0.0, 0.0), Vec2(1.0, 2.0),
                         Eigen::VectorXd(), with_f.system,
                         with_f.costs) == 16.0);

  const auto zero_f = Compile(spec);
  CHECK(ioc::hamiltonian(0.3, Vec2(5.0, -1.0), Vec2(0.0, 0.0),
                         Eigen::VectorXd(), zero_f.system,
                         zero_f.costs) == 0.0);
}

TEST_CASE("hamiltonian on the scalar LQ matches matrix arithmetic") {
  const auto lq = ScalarLq();
  const auto model =
      ioc::lq_to_general(lq, Box1(-4.0, 4.0, 41), Box1(-2.0, 2.0, 41)).value();
  const double s = 0.3;
  const Eigen::VectorXd x = Vec1(0.7), p = Vec1(1.1), u = Vec1(0.4);
  // H = pᵀ(Px + Qu) + xᵀAx + uᵀCu with the matrices above.
  const double direct = p.dot(Eigen::MatrixXd::Zero(1, 1) * x +
                              Eigen::MatrixXd::Identity(1, 1) * u) +
                        x.dot(x) + u.dot(u);
  CHECK(std::abs(ioc::hamiltonian(s, x, p, u, model.system, model.costs) -
                 direct) <= 1e-12);
}

TEST_CASE("impulsive hamiltonian matches hand arithmetic") {
  ioc::HybridSystemSpec spec;
  spec.state_dim = 2;
  spec.flow = {"0", "0"};
  spec.controls_u = ioc::ControlSet::finite({Eigen::VectorXd()});
  spec.controls_w = Finite1({0.0});
  spec.impulse_map = {"2", "7"};
  spec.impulse_times = {0.5};
  spec.horizon = 1.0;
  const auto model = Compile(spec, {"", "3", ""});
  CHECK(ioc::impulsive_hamiltonian(0.5, Vec2(0.0, 0.0), Vec2(1.0, 0.0),
                                   Vec1(0.0), model.system,
                                   model.costs) == 5.0);

  spec.impulse_map = {"0", "0"};
  const auto zero = Compile(spec);
  CHECK(ioc::impulsive_hamiltonian(0.5, Vec2(2.0, 3.0), Vec2(4.0, 5.0),
                                   Vec1(0.0), zero.system, zero.costs) == 0.0);
}

TEST_CASE("impulsive hamiltonian slope in p recovers the jump row") {
  ioc::HybridSystemSpec spec;
  spec.state_dim = 1;
  spec.flow = {"0"};
  spec.controls_u = Finite1({0.0});
  spec.controls_w = Finite1({0.5});
  spec.impulse_map = {"w1*x1 + t"};
  spec.impulse_times = {0.3};
  spec.horizon = 1.0;
  const auto model = Compile(spec);

  const auto traj = ioc::integrate(model.system,
                                   ioc::ControlSignal::constant(Vec1(0.0)),
                                   ioc::ControlSignal::constant(Vec1(0.5)),
                                   0.0, Vec1(2.0));
  REQUIRE(traj.jumps.size() == 1);
  const auto& rec = traj.jumps[0];

  // ∂K/∂p₁ by affine slope: K(e₁) − K(0) = I₁(τ, x⁻, w).
  const double slope =
      ioc::impulsive_hamiltonian(rec.time, rec.x_minus, Vec1(1.0), rec.w,
                                 model.system, model.costs) -
      ioc::impulsive_hamiltonian(rec.time, rec.x_minus, Vec1(0.0), rec.w,
                                 model.system, model.costs);
  CHECK(std::abs(slope - (rec.x_plus - rec.x_minus)[0]) <= 1e-12);
  CHECK(std::abs(slope - (0.5 * 2.0 + 0.3)) <= 1e-12);
}

TEST_CASE("affine extrapolation in p recovers the raw costs") {
  ioc::HybridSystemSpec spec;
  spec.state_dim = 1;
  spec.flow = {"sin(x1) + u1"};
  spec.controls_u = Finite1({0.3});
  spec.controls_w = Finite1({0.7});
  spec.impulse_map = {"w1*w1 + x1"};
  spec.impulse_times = {0.4};
  spec.horizon = 1.0;
  const auto model = Compile(spec, {"x1*x1*u1 + 2", "w1*x1 + 1", ""});

  const double s = 0.4;
  const Eigen::VectorXd x = Vec1(0.8), p = Vec1(1.7);
  const Eigen::VectorXd u = Vec1(0.3), w = Vec1(0.7);

  const double h1 = ioc::hamiltonian(s, x, p, u, model.system, model.costs);
  const double h2 =
      ioc::hamiltonian(s, x, (2.0 * p).eval(), u, model.system, model.costs);
  CHECK(std::abs((2.0 * h1 - h2) - (0.8 * 0.8 * 0.3 + 2.0)) <= 1e-12);

  const double k1 =
      ioc::impulsive_hamiltonian(s, x, p, w, model.system, model.costs);
  const double k2 = ioc::impulsive_hamiltonian(s, x, (2.0 * p).eval(), w,
                                               model.system, model.costs);
  CHECK(std::abs((2.0 * k1 - k2) - (0.7 * 0.8 + 1.0)) <= 1e-12);
}

TEST_CASE("terminal condition is the terminal cost gradient") {
  ioc::HybridSystemSpec spec;
  spec.state_dim = 1;
  spec.flow = {"0"};
  spec.controls_u = Finite1({0.0});
  spec.controls_w = Finite1({0.0});
  spec.horizon = 1.0;
  const auto model = Compile(spec, {"", "", "x1*x1"});

  const auto traj = ioc::integrate(model.system,
                                   ioc::ControlSignal::constant(Vec1(0.0)),
                                   ioc::ControlSignal::constant(Vec1(0.0)),
                                   0.0, Vec1(1.0), {0.1, 1000});
  const auto cp = ioc::integrate_costate(model.system, model.costs, traj);
  REQUIRE(cp.size() == traj.size());
  CHECK(cp.times == traj.times);
  // Zero right-hand side: p stays exactly at ∇F₀(x(T⁻)) = 2.
  for (const auto& p : cp.p) CHECK(p[0] == 2.0);
  CHECK(cp.jumps.empty());
  CHECK(cp.warnings.empty());
}

TEST_CASE("costate jumps by the impulse cost gradient") {
  ioc::HybridSystemSpec spec;
  spec.state_dim = 1;
  spec.flow = {"0"};
  spec.controls_u = Finite1({0.0});
  spec.controls_w = Finite1({0.0});
  spec.impulse_map = {"1"};  // independent of x: ∂K/∂ξ = ∂Φ/∂ξ
  spec.impulse_times = {0.5};
  spec.horizon = 1.0;
  const auto model = Compile(spec, {"", "x1*x1", "x1*x1"});

  const auto traj = ioc::integrate(model.system,
                                   ioc::ControlSignal::constant(Vec1(0.0)),
                                   ioc::ControlSignal::constant(Vec1(0.0)),
                                   0.0, Vec1(1.0), {0.1, 1000});
  REQUIRE(traj.jumps.size() == 1);
  const auto cp = ioc::integrate_costate(model.system, model.costs, traj);

  // x⁻ = 1, x⁺ = 2, x(T) = 2: p⁺ = 4 on [τ, T]; p⁻ = p⁺ + 2x⁻ = 6 before.
  REQUIRE(cp.jumps.size() == 1);
  CHECK(cp.jumps[0].time == 0.5);
  CHECK(cp.jumps[0].p_plus[0] == 4.0);
  CHECK(cp.jumps[0].p_minus[0] == 6.0);
  for (std::size_t i = 0; i < cp.size(); ++i) {
    const double expected =
        (cp.times[i] < 0.5 || cp.sides[i] == -1) ? 6.0 : 4.0;
    CHECK(cp.p[i][0] == expected);
  }
}

TEST_CASE("scalar LQ minimum principle with Riccati-synthesized controls") {
  // Both backups minimize over control lattices, so the grid value carries a
  // quantization ripple whose x-slope scales with the squared lattice
  // spacing (and not with δ). The ∇V comparison below needs the lattices
  // fine enough that the ripple stays well under its 5% budget.
  const auto lq = ScalarLq();
  const auto model =
      ioc::lq_to_general(lq, Box1(-4.0, 4.0, 81), Box1(-2.0, 2.0, 201)).value();
  const auto sol = ioc::solve_impulsive_riccati(lq);

  const auto u_sig = ioc::ControlSignal::feedback(
      1, [&sol](double t, const Eigen::VectorXd& x) {
        return sol.feedback_control(t, x);
      });
  const auto w_sig = ioc::ControlSignal::feedback(
      1, [&sol](double, const Eigen::VectorXd& x) {
        return (sol.impulse_gains()[0] * x).eval();
      });

  SUBCASE("closed-form controls show no violations at 1e-6") {
    const auto traj =
        ioc::integrate(model.system, u_sig, w_sig, 0.0, Vec1(1.0));
    const auto cp = ioc::integrate_costate(model.system, model.costs, traj);
    const auto rep =
        ioc::check_extremum(traj, cp, model.system, model.costs, 1e-6);
    CHECK(rep.violations == 0);
    CHECK(rep.min_margin >= -1e-6);
    // Flow rows per step plus one impulse row per lattice member.
    CHECK(rep.rows.size() >= 41 * (traj.size() - 2));

    // The costate is the value gradient: p(s) = 2 K(s) x*(s).
    for (std::size_t i = 0; i < traj.size(); i += 50) {
      const ioc::KSide side =
          traj.sides[i] == -1 ? ioc::KSide::kMinus : ioc::KSide::kPlus;
      const double k = sol.value_matrix(traj.times[i], side)(0, 0);
      const double analytic = 2.0 * k * traj.x[i][0];
      CHECK(std::abs(cp.p[i][0] - analytic) <=
            0.01 * std::max(1.0, std::abs(analytic)));
    }
  }

  SUBCASE("perturbing the control on a subinterval flags violations") {
    const auto u_bad = ioc::ControlSignal::feedback(
        1, [&sol](double t, const Eigen::VectorXd& x) {
          Eigen::VectorXd u = sol.feedback_control(t, x);
          if (t >= 0.2 && t <= 0.3) u[0] += 0.8;  // 10% of the u range
          return u;
        });
    const auto traj =
        ioc::integrate(model.system, u_bad, w_sig, 0.0, Vec1(1.0));
    const auto cp = ioc::integrate_costate(model.system, model.costs, traj);
    const auto rep =
        ioc::check_extremum(traj, cp, model.system, model.costs, 1e-6);
    CHECK(rep.violations >= 1);
    CHECK(rep.min_margin < -1e-6);
  }

  SUBCASE("costate tracks grid value gradients within 5%") {
    // Node spacing bounds the comparison: the gradient is differenced at the
    // nearest node, up to half a cell from x*(s), so the cell must be fine
    // relative to the state scale.
    const auto g = ioc::Grid::uniform(Vec1(-2.0), Vec1(2.0), {401}, 0.01);
    const auto [vf, pol] = ioc::solve_basic(model.system, model.costs, g);
    const auto traj =
        ioc::integrate(model.system, u_sig, w_sig, 0.0, Vec1(1.0), {0.01, 1000});
    const auto cp = ioc::integrate_costate(model.system, model.costs, traj);
    const auto stats = ioc::costate_vs_gradV(cp, vf, traj);
    CHECK(stats.samples == traj.size());
    CHECK(stats.max_rel_error <= 0.05);
    CHECK(stats.mean_rel_error <= stats.max_rel_error);
  }
}

TEST_CASE("u-independent dynamics give zero margins everywhere") {
  ioc::HybridSystemSpec spec;
  spec.state_dim = 1;
  spec.flow = {"x1"};
  spec.controls_u = Finite1({-1.0, 0.0, 1.0});
  spec.controls_w = Finite1({0.0, 1.0});
  spec.impulse_map = {"1"};
  spec.impulse_times = {0.5};
  spec.horizon = 1.0;
  const auto model = Compile(spec, {"", "", "x1*x1"});

  const auto traj = ioc::integrate(model.system,
                                   ioc::ControlSignal::constant(Vec1(0.0)),
                                   ioc::ControlSignal::constant(Vec1(0.0)),
                                   0.0, Vec1(0.5), {0.05, 1000});
  const auto cp = ioc::integrate_costate(model.system, model.costs, traj);
  const auto rep =
      ioc::check_extremum(traj, cp, model.system, model.costs, 1e-6);
  CHECK(rep.violations == 0);
  CHECK(rep.min_margin == 0.0);
  for (const auto& row : rep.rows) CHECK(row.margin == 0.0);
}

TEST_CASE("state-independent value gives zero on both sides") {
  ioc::HybridSystemSpec spec;
  spec.state_dim = 1;
  spec.flow = {"0"};
  spec.controls_u = Finite1({0.0});
  spec.controls_w = Finite1({0.0});
  spec.horizon = 1.0;
  const auto model = Compile(spec);

  const auto g = ioc::Grid::uniform(Vec1(-2.0), Vec1(2.0), {5}, 0.1);
  const auto [vf, pol] = ioc::solve_basic(model.system, model.costs, g);
  const auto traj = ioc::integrate(model.system,
                                   ioc::ControlSignal::constant(Vec1(0.0)),
                                   ioc::ControlSignal::constant(Vec1(0.0)),
                                   0.0, Vec1(0.0), {0.1, 1000});
  const auto cp = ioc::integrate_costate(model.system, model.costs, traj);
  const auto stats = ioc::costate_vs_gradV(cp, vf, traj);
  CHECK(stats.max_rel_error == 0.0);
  CHECK(stats.mean_rel_error == 0.0);
  CHECK(stats.samples == traj.size());
}

TEST_CASE("stationary quadratic value agrees exactly after differencing") {
  ioc::HybridSystemSpec spec;
  spec.state_dim = 1;
  spec.flow = {"0"};
  spec.controls_u = Finite1({0.0});
  spec.controls_w = Finite1({0.0});
  spec.horizon = 1.0;
  const auto model = Compile(spec, {"", "", "x1*x1"});

  const auto g = ioc::Grid::uniform(Vec1(-2.0), Vec1(2.0), {5}, 0.1);
  const auto [vf, pol] = ioc::solve_basic(model.system, model.costs, g);
  const auto traj = ioc::integrate(model.system,
                                   ioc::ControlSignal::constant(Vec1(0.0)),
                                   ioc::ControlSignal::constant(Vec1(0.0)),
                                   0.0, Vec1(1.0), {0.1, 1000});
  const auto cp = ioc::integrate_costate(model.system, model.costs, traj);
  // p ≡ 2; central differences of ξ² at ξ=1 with h=1 give exactly 2.
  const auto stats = ioc::costate_vs_gradV(cp, vf, traj);
  CHECK(stats.max_rel_error == 0.0);
}

TEST_CASE("symbolic x-gradient of H matches central differences") {
  ioc::HybridSystemSpec spec;
  spec.state_dim = 2;
  spec.flow = {"sin(x1)*u1 + x2", "x1*x2 + cos(x2)"};
  spec.controls_u = Box1(-1.0, 1.0, 3);
  spec.controls_w = Finite1({0.0});
  spec.horizon = 1.0;
  const auto model = Compile(spec, {"x1*x1*u1 + x2", "", ""});
  const auto& sys = model.system;

  // Symbolic ∂H/∂x_j = Σ_i p_i ∂f_i/∂x_j + ∂F/∂x_j over [t, x1, x2, u1].
  std::vector<std::vector<ioc::Expression>> dfdx(2);
  std::vector<ioc::Expression> dFdx;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      dfdx[i].push_back(sys.flow[i].derivative(j == 0 ? "x1" : "x2"));
  dFdx.push_back(model.costs.running.derivative("x1"));
  dFdx.push_back(model.costs.running.derivative("x2"));

  std::mt19937 rng(20260819);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const double s = 0.5 + 0.5 * unit(rng);
    const Eigen::VectorXd x = Vec2(unit(rng), unit(rng));
    const Eigen::VectorXd p = Vec2(unit(rng), unit(rng));
    const Eigen::VectorXd u = Vec1(unit(rng));
    const std::vector<double> env = {s, x[0], x[1], u[0]};
    for (int j = 0; j < 2; ++j) {
      double sym = dFdx[j].value(env);
      for (int i = 0; i < 2; ++i) sym += p[i] * dfdx[i][j].value(env);

      Eigen::VectorXd xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const double fd =
          (ioc::hamiltonian(s, xp, p, u, sys, model.costs) -
           ioc::hamiltonian(s, xm, p, u, sys, model.costs)) /
          (2.0 * h);
      CHECK(std::abs(sym - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("kinked flow warns when its convention is exercised") {
  ioc::HybridSystemSpec spec;
  spec.state_dim = 1;
  spec.flow = {"step(x1)"};
  spec.controls_u = Finite1({0.0});
  spec.controls_w = Finite1({0.0});
  spec.horizon = 0.2;
  const auto model = Compile(spec);

  // Starting on the kink locus x=0, the one-sided convention is exercised.
  const auto on_kink = ioc::integrate(model.system,
                                      ioc::ControlSignal::constant(Vec1(0.0)),
                                      ioc::ControlSignal::constant(Vec1(0.0)),
                                      0.0, Vec1(0.0), {0.05, 1000});
  const auto cp = ioc::integrate_costate(model.system, model.costs, on_kink);
  REQUIRE(cp.warnings.size() == 1);
  CHECK(cp.warnings[0].find("kink") != std::string::npos);

  // Away from the locus the same expression stays silent.
  const auto smooth = ioc::integrate(model.system,
                                     ioc::ControlSignal::constant(Vec1(0.0)),
                                     ioc::ControlSignal::constant(Vec1(0.0)),
                                     0.0, Vec1(1.0), {0.05, 1000});
  const auto cs = ioc::integrate_costate(model.system, model.costs, smooth);
  CHECK(cs.warnings.empty());
}

TEST_CASE("alignment and boundary preconditions are enforced") {
  ioc::HybridSystemSpec spec;
  spec.state_dim = 1;
  spec.flow = {"u1"};
  spec.controls_u = Finite1({0.0});
  spec.controls_w = Finite1({0.0});
  spec.horizon = 1.0;
  const auto model = Compile(spec, {"", "", "x1*x1"});

  SUBCASE("dimension mismatches") {
    CHECK_THROWS_AS(ioc::hamiltonian(0.0, Vec2(1.0, 2.0), Vec1(1.0),
                                     Vec1(0.0), model.system, model.costs),
                    ioc::ValidationError);
    CHECK_THROWS_WITH_AS(
        ioc::impulsive_hamiltonian(0.0, Vec1(1.0), Vec1(1.0), Vec1(0.0),
                                   model.system, model.costs),
        doctest::Contains("no impulses"), ioc::ValidationError);
  }

  SUBCASE("trajectory without controls") {
    ioc::Trajectory traj;
    traj.times = {0.0, 1.0};
    traj.sides = {0, 0};
    traj.x = {Vec1(0.0), Vec1(0.0)};
    traj.u = {Eigen::VectorXd(), Eigen::VectorXd()};
    CHECK_THROWS_WITH_AS(
        ioc::integrate_costate(model.system, model.costs, traj),
        doctest::Contains("missing controls"), ioc::ValidationError);
  }

  SUBCASE("misaligned costate") {
    const auto traj = ioc::integrate(model.system,
                                     ioc::ControlSignal::constant(Vec1(0.0)),
                                     ioc::ControlSignal::constant(Vec1(0.0)),
                                     0.0, Vec1(0.0), {0.1, 1000});
    auto cp = ioc::integrate_costate(model.system, model.costs, traj);
    cp.p.pop_back();
    cp.times.pop_back();
    cp.sides.pop_back();
    CHECK_THROWS_WITH_AS(
        ioc::check_extremum(traj, cp, model.system, model.costs, 1e-6),
        doctest::Contains("not aligned"), ioc::ValidationError);
  }

  SUBCASE("trajectory hugging the grid boundary") {
    ioc::HybridSystemSpec still = spec;
    still.flow = {"0"};
    const auto frozen = Compile(still, {"", "", "x1*x1"});
    const auto g = ioc::Grid::uniform(Vec1(-2.0), Vec1(2.0), {5}, 0.1);
    const auto [vf, pol] = ioc::solve_basic(frozen.system, frozen.costs, g);
    const auto traj = ioc::integrate(frozen.system,
                                     ioc::ControlSignal::constant(Vec1(0.0)),
                                     ioc::ControlSignal::constant(Vec1(0.0)),
                                     0.0, Vec1(-2.0), {0.1, 1000});
    const auto cp = ioc::integrate_costate(frozen.system, frozen.costs, traj);
    CHECK_THROWS_WITH_AS(ioc::costate_vs_gradV(cp, vf, traj),
                         doctest::Contains("grid boundary"),
                         ioc::ValidationError);
  }
}

}  // TEST_SUITE
