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
#include <vector>

#include "ioc/errors.hpp"
#include "ioc/model.hpp"
#include "ioc/sim.hpp"

namespace {

Eigen::VectorXd Vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

ioc::ControlSet NoControls() { return ioc::ControlSet::finite({Eigen::VectorXd()}); }

ioc::ControlSignal NoSignal() { return ioc::ControlSignal::constant(Eigen::VectorXd()); }

/// Scalar system skeleton; callers override what they need.
ioc::HybridSystemSpec ScalarSpec(const std::string& flow, double horizon) {
  ioc::HybridSystemSpec spec;
  spec.state_dim = 1;
  spec.flow = {flow};
  spec.controls_u = NoControls();
  spec.controls_w = NoControls();
  spec.horizon = horizon;
  return spec;
}

ioc::ValidatedModel Compile(const ioc::HybridSystemSpec& spec,
                            const ioc::CostText& costs = {}) {
  return ioc::validate_system(spec, costs).value();
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("control signal kinds evaluate as documented") {
  const auto c = ioc::ControlSignal::constant(Vec1(3.0));
  CHECK(c.dim() == 1);
  CHECK(c.value(0.7, Vec1(99.0))[0] == 3.0);

  const auto tab = ioc::ControlSignal::table({0.0, 0.5}, {Vec1(1.0), Vec1(2.0)});
  CHECK(tab.value(0.25, Vec1(0.0))[0] == 1.0);
  CHECK(tab.value(0.5, Vec1(0.0))[0] == 2.0);   // right-continuous
  CHECK(tab.value(0.75, Vec1(0.0))[0] == 2.0);
  CHECK(tab.value(-0.1, Vec1(0.0))[0] == 1.0);  // clamped to first entry

  const auto fb = ioc::ControlSignal::feedback(
      1, [](double, const Eigen::VectorXd& x) { return Eigen::VectorXd(-x); });
  CHECK(fb.value(0.0, Vec1(4.0))[0] == -4.0);

  CHECK_THROWS_AS(ioc::ControlSignal::table({0.0, 0.0}, {Vec1(1), Vec1(2)}),
                  ioc::ValidationError);
  CHECK_THROWS_AS(ioc::ControlSignal::table({0.0}, {Vec1(1), Vec1(2)}),
                  ioc::ValidationError);
}

TEST_CASE("pure jump: f=0, I=1 at tau=0.5 moves the state by one") {
  auto spec = ScalarSpec("0", 1.0);
  spec.impulse_map = {"1"};
  spec.impulse_times = {0.5};
  const auto model = Compile(spec);

  const auto traj =
      ioc::integrate(model.system, NoSignal(), NoSignal(), 0.0, Vec1(0.0));

  REQUIRE(traj.jumps.size() == 1);
  CHECK(traj.jumps[0].time == doctest::Approx(0.5));
  CHECK(traj.jumps[0].x_minus[0] == doctest::Approx(0.0));
  CHECK(traj.jumps[0].x_plus[0] == doctest::Approx(1.0));
  CHECK(traj.x.back()[0] == doctest::Approx(1.0));

  // Exactly two rows at the impulse time, minus before plus.
  int dup = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times[i] == 0.5) ++dup;
  }
  CHECK(dup == 2);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    CHECK(traj.times[i] <= traj.times[i + 1]);
    if (traj.sides[i] == -1) {
      CHECK(traj.sides[i + 1] == +1);
      CHECK(traj.times[i] == traj.times[i + 1]);
    }
  }
}

TEST_CASE("exponential flow reaches e within 1e-8 at h=1e-3") {
  const auto model = Compile(ScalarSpec("x1", 1.0));
  ioc::IntegrateOptions opt;
  opt.step = 1e-3;
  const auto traj =
      ioc::integrate(model.system, NoSignal(), NoSignal(), 0.0, Vec1(1.0), opt);
  CHECK(std::abs(traj.x.back()[0] - std::exp(1.0)) < 1e-8);
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.times.back() == 1.0);
  CHECK(traj.jumps.empty());
}

TEST_CASE("RK4 halving improves terminal error by a factor in [12,20]") {
  const auto model = Compile(ScalarSpec("x1", 1.0));
  auto terminal_err = [&](double h) {
    ioc::IntegrateOptions opt;
    opt.step = h;
    const auto traj =
        ioc::integrate(model.system, NoSignal(), NoSignal(), 0.0, Vec1(1.0), opt);
    return std::abs(traj.x.back()[0] - std::exp(1.0));
  };
  const double ratio = terminal_err(0.1) / terminal_err(0.05);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("event surface g = x1 - 1 with f = 1 fires at t = 1") {
  auto spec = ScalarSpec("1", 2.0);
  spec.impulse_map = {"-1"};
  spec.event_surfaces = {"x1 - 1"};
  const auto model = Compile(spec);

  const auto traj =
      ioc::integrate(model.system, NoSignal(), NoSignal(), 0.0, Vec1(0.0));

  REQUIRE(traj.jumps.size() == 1);
  CHECK(std::abs(traj.jumps[0].time - 1.0) <= 1e-9);
  CHECK(traj.jumps[0].x_minus[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(traj.jumps[0].x_plus[0] == doctest::Approx(0.0).epsilon(1e-8));
  // After the reset the state climbs back to ~1 by the horizon; the second
  // crossing coincides with T and must not fire.
  CHECK(traj.x.back()[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(traj.times.back() == 2.0);
}

TEST_CASE("feedback control is sampled at the step start and held") {
  // f = u with u(t,x) = t held per step: x(1) = sum of t_j * h over the mesh,
  // which telescopes to 1/2 - h/2 exactly (RK4 is exact for constant rates).
  auto spec = ScalarSpec("u1", 1.0);
  spec.controls_u = ioc::ControlSet::box(Eigen::VectorXd::Constant(1, -2.0),
                                         Eigen::VectorXd::Constant(1, 2.0), {5});
  const auto model = Compile(spec);

  const auto u = ioc::ControlSignal::feedback(
      1, [](double t, const Eigen::VectorXd&) { return Vec1(t); });
  ioc::IntegrateOptions opt;
  opt.step = 0.01;
  const auto traj =
      ioc::integrate(model.system, u, NoSignal(), 0.0, Vec1(0.0), opt);
  CHECK(traj.x.back()[0] == doctest::Approx(0.5 - 0.005).epsilon(1e-12));
}

TEST_CASE("impulse rows store the left-limit control; the next row the new one") {
  auto spec = ScalarSpec("u1", 1.0);
  spec.controls_u = ioc::ControlSet::box(Eigen::VectorXd::Constant(1, -9.0),
                                         Eigen::VectorXd::Constant(1, 9.0), {3});
  spec.impulse_map = {"0"};
  spec.impulse_times = {0.5};
  const auto model = Compile(spec);

  const auto u = ioc::ControlSignal::table({0.0, 0.5}, {Vec1(2.0), Vec1(7.0)});
  const auto traj =
      ioc::integrate(model.system, u, NoSignal(), 0.0, Vec1(0.0));

  std::size_t im = traj.size();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.sides[i] == -1) im = i;
  }
  REQUIRE(im < traj.size());
  CHECK(traj.u[im][0] == 2.0);      // arriving step's control
  CHECK(traj.u[im + 1][0] == 7.0);  // departing step's control
  CHECK(traj.u.back()[0] == 7.0);   // final row: left limit of last step
}

TEST_CASE("control left-limit argument reaches the impulse map") {
  auto spec = ScalarSpec("0", 1.0);
  spec.controls_u = ioc::ControlSet::box(Eigen::VectorXd::Constant(1, -9.0),
                                         Eigen::VectorXd::Constant(1, 9.0), {3});
  spec.impulse_map = {"a1"};
  spec.impulse_arg = ioc::ImpulseArg::kControlLeftLimit;
  spec.impulse_times = {0.5};
  const auto model = Compile(spec);

  const auto u = ioc::ControlSignal::table({0.0, 0.5}, {Vec1(3.0), Vec1(-8.0)});
  const auto traj =
      ioc::integrate(model.system, u, NoSignal(), 0.0, Vec1(0.0));

  REQUIRE(traj.jumps.size() == 1);
  CHECK(traj.jumps[0].extra[0] == 3.0);  // u just before the jump, not after
  CHECK(traj.x.back()[0] == doctest::Approx(3.0));
}

TEST_CASE("previous-impulse argument threads through consecutive jumps") {
  auto spec = ScalarSpec("0", 1.0);
  spec.controls_w = ioc::ControlSet::box(Eigen::VectorXd::Constant(1, -9.0),
                                         Eigen::VectorXd::Constant(1, 9.0), {3});
  spec.impulse_map = {"b1"};
  spec.impulse_arg = ioc::ImpulseArg::kPreviousImpulse;
  spec.impulse_times = {0.3, 0.6};
  spec.initial_prev_impulse = {0.25};
  const auto model = Compile(spec);

  const auto w = ioc::ControlSignal::constant(Vec1(2.0));
  const auto traj =
      ioc::integrate(model.system, NoSignal(), w, 0.0, Vec1(0.0));

  REQUIRE(traj.jumps.size() == 2);
  CHECK(traj.jumps[0].extra[0] == 0.25);  // declared initial value
  CHECK(traj.jumps[1].extra[0] == 2.0);   // first jump's w
  CHECK(traj.x.back()[0] == doctest::Approx(2.25));
}

TEST_CASE("jump records reconstruct the impulse map to 1e-12") {
  auto spec = ScalarSpec("x1", 1.0);
  spec.controls_w = ioc::ControlSet::box(Eigen::VectorXd::Constant(1, -9.0),
                                         Eigen::VectorXd::Constant(1, 9.0), {3});
  spec.impulse_map = {"w1*x1 + t"};
  spec.impulse_times = {0.3, 0.6};
  const auto model = Compile(spec);

  const auto w = ioc::ControlSignal::constant(Vec1(0.5));
  const auto traj =
      ioc::integrate(model.system, NoSignal(), w, 0.0, Vec1(1.0));

  REQUIRE(traj.jumps.size() == 2);
  for (const auto& jr : traj.jumps) {
    const Eigen::VectorXd delta =
        model.system.eval_jump(jr.time, jr.x_minus, jr.w, jr.extra);
    CHECK((jr.x_plus - jr.x_minus - delta).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("state blow-up reports the first offending time") {
  const auto model = Compile(ScalarSpec("x1*x1", 1.0));
  CHECK_THROWS_WITH_AS(
      ioc::integrate(model.system, NoSignal(), NoSignal(), 0.0, Vec1(2.0)),
      doctest::Contains("blow-up"), ioc::NumericalError);
}

TEST_CASE("integrate validates its preconditions") {
  const auto model = Compile(ScalarSpec("0", 1.0));
  CHECK_THROWS_AS(
      ioc::integrate(model.system, NoSignal(), NoSignal(), 1.0, Vec1(0.0)),
      ioc::ValidationError);
  CHECK_THROWS_AS(
      ioc::integrate(model.system, NoSignal(), NoSignal(), -0.1, Vec1(0.0)),
      ioc::ValidationError);
  CHECK_THROWS_AS(ioc::integrate(model.system, NoSignal(), NoSignal(), 0.0,
                                 Eigen::VectorXd::Zero(2)),
                  ioc::ValidationError);
  CHECK_THROWS_AS(ioc::integrate(model.system, ioc::ControlSignal::constant(Vec1(1.0)),
                                 NoSignal(), 0.0, Vec1(0.0)),
                  ioc::ValidationError);
}

TEST_CASE("unit running cost integrates to the horizon length") {
  const auto model = Compile(ScalarSpec("0", 1.0), {"1", "", ""});
  const auto traj =
      ioc::integrate(model.system, NoSignal(), NoSignal(), 0.0, Vec1(0.0));
  const auto cost = ioc::evaluate_cost(traj, model.costs);
  CHECK(cost.running == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cost.impulse == 0.0);
  CHECK(cost.terminal == 0.0);
  CHECK(cost.total() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("impulse cost of 2 raises J from 1 to 3") {
  auto spec = ScalarSpec("0", 1.0);
  spec.impulse_map = {"0"};
  spec.impulse_times = {0.5};
  const auto model = Compile(spec, {"1", "2", ""});
  const auto traj =
      ioc::integrate(model.system, NoSignal(), NoSignal(), 0.0, Vec1(0.0));
  const auto cost = ioc::evaluate_cost(traj, model.costs);
  CHECK(cost.running == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cost.impulse == doctest::Approx(2.0));
  CHECK(cost.total() == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("terminal cost evaluates at the final state") {
  const auto model = Compile(ScalarSpec("0", 1.0), {"", "", "x1*x1"});
  const auto traj =
      ioc::integrate(model.system, NoSignal(), NoSignal(), 0.0, Vec1(2.0));
  const auto cost = ioc::evaluate_cost(traj, model.costs);
  CHECK(cost.running == 0.0);
  CHECK(cost.terminal == doctest::Approx(4.0));
  CHECK(cost.total() == doctest::Approx(4.0));
}

TEST_CASE("quadrature is exact for quadratic integrands") {
  const auto model = Compile(ScalarSpec("0", 1.0), {"t*t", "", ""});
  const auto traj =
      ioc::integrate(model.system, NoSignal(), NoSignal(), 0.0, Vec1(0.0));
  const auto cost = ioc::evaluate_cost(traj, model.costs);
  CHECK(std::abs(cost.running - 1.0 / 3.0) <= 1e-12);
}

TEST_CASE("segments with fewer than 3 nodes are rejected") {
  auto spec = ScalarSpec("0", 1.0);
  spec.impulse_map = {"0"};
  spec.impulse_times = {0.5};
  const auto model = Compile(spec, {"1", "", ""});
  ioc::IntegrateOptions opt;
  opt.step = 0.5;  // each half becomes a single interval: 2 nodes
  const auto traj =
      ioc::integrate(model.system, NoSignal(), NoSignal(), 0.0, Vec1(0.0), opt);
  CHECK_THROWS_AS(ioc::evaluate_cost(traj, model.costs), ioc::NumericalError);
}

TEST_CASE("cost is additive across a split at a non-impulse time") {
  // Full problem on [0,1], impulse at 0.7, split point m = 0.4.
  const std::string flow = "u1 - x1";
  const ioc::CostText costs{"x1*x1 + u1", "w1*x1", "x1*x1"};

  auto spec_full = ScalarSpec(flow, 1.0);
  spec_full.controls_u = ioc::ControlSet::box(Eigen::VectorXd::Constant(1, -2.0),
                                              Eigen::VectorXd::Constant(1, 2.0), {5});
  spec_full.controls_w = spec_full.controls_u;
  spec_full.impulse_map = {"w1"};
  spec_full.impulse_times = {0.7};
  const auto full = Compile(spec_full, costs);

  auto spec_head = ScalarSpec(flow, 0.4);  // stops at m, no impulse, F0 = 0
  spec_head.controls_u = spec_full.controls_u;
  const auto head = Compile(spec_head, {costs.running, "", ""});

  const auto u = ioc::ControlSignal::constant(Vec1(0.5));
  const auto w = ioc::ControlSignal::constant(Vec1(0.3));
  ioc::IntegrateOptions opt;
  opt.step = 1e-2;

  const auto traj_full =
      ioc::integrate(full.system, u, w, 0.0, Vec1(1.0), opt);
  const double j_full = ioc::evaluate_cost(traj_full, full.costs).total();

  const auto traj_head =
      ioc::integrate(head.system, u, w, 0.0, Vec1(1.0), opt);
  const double j_head = ioc::evaluate_cost(traj_head, head.costs).total();

  const auto traj_tail = ioc::integrate(full.system, u, w, 0.4,
                                        traj_head.x.back(), opt);
  const double j_tail = ioc::evaluate_cost(traj_tail, full.costs).total();

  CHECK(std::abs(j_full - (j_head + j_tail)) <= 1e-8);
}

TEST_CASE("impulse cost sees time, pre-jump state, and impulse control") {
  auto spec = ScalarSpec("1", 1.0);
  spec.controls_w = ioc::ControlSet::box(Eigen::VectorXd::Constant(1, -2.0),
                                         Eigen::VectorXd::Constant(1, 2.0), {5});
  spec.impulse_map = {"w1"};
  spec.impulse_times = {0.5};
  // Φ = t + 10*x + 100*w at (0.5, 0.5, 0.25) → 53.
  const auto model = Compile(spec, {"", "t + 10*x1 + 100*w1", ""});
  const auto w = ioc::ControlSignal::constant(Vec1(0.25));
  const auto traj =
      ioc::integrate(model.system, NoSignal(), w, 0.0, Vec1(0.0));
  const auto cost = ioc::evaluate_cost(traj, model.costs);
  CHECK(cost.impulse == doctest::Approx(0.5 + 5.0 + 25.0).epsilon(1e-9));
}

}  // TEST_SUITE
