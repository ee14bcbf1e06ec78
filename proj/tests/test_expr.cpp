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

#include "ioc/expr.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

using ioc::EvalError;
using ioc::Expression;
using ioc::ParseError;
using ioc::VarSet;

namespace {

double eval(const Expression& e, std::vector<double> env) {
  return e.value(std::span<const double>(env));
}

// Central finite difference of `e` in `var` at `point` (h = 1e-6).
double central_diff(const Expression& e, const VarSet& vars,
                    const std::string& var, std::vector<double> point) {
  const double h = 1e-6;
  int slot = vars.index_of(var);
  REQUIRE(slot >= 0);
  std::vector<double> hi = point, lo = point;
  hi[slot] += h;
  lo[slot] -= h;
  return (e.value(std::span<const double>(hi)) -
          e.value(std::span<const double>(lo))) /
         (2.0 * h);
}

// Random smooth expression generator for the derivative property test.
// Stays away from domain edges: divisions use positive constant offsets,
// log/sqrt wrap strictly positive subtrees.
struct RandomExpr {
  std::mt19937 rng;
  VarSet vars{std::vector<std::string>{"t", "x1", "x2"}};

  explicit RandomExpr(unsigned seed) : rng(seed) {}

  std::string leaf() {
    switch (rng() % 4) {
      case 0: return "t";
      case 1: return "x1";
      case 2: return "x2";
      default: {
        std::uniform_real_distribution<double> c(-2.0, 2.0);
        return "(" + std::to_string(c(rng)) + ")";
      }
    }
  }

  std::string build(int depth) {
    if (depth <= 0) return leaf();
    switch (rng() % 8) {
      case 0: return "(" + build(depth - 1) + " + " + build(depth - 1) + ")";
      case 1: return "(" + build(depth - 1) + " - " + build(depth - 1) + ")";
      case 2: return "(" + build(depth - 1) + ")*(" + build(depth - 1) + ")";
      case 3: return "sin(" + build(depth - 1) + ")";
      case 4: return "cos(" + build(depth - 1) + ")";
      case 5: return "exp(0.3*" + build(depth - 1) + ")";
      case 6: return "(" + build(depth - 1) + ")^2";
      default:
        // denominator bounded away from zero
        return "(" + build(depth - 1) + ")/(4 + (" + build(depth - 1) +
               ")^2)";
    }
  }
};

}  // namespace

TEST_SUITE("expr") {

TEST_CASE("parse and evaluate basic arithmetic") {
  VarSet vars(std::vector<std::string>{"t", "x1"});
  auto e = Expression::parse("x1^2 + 2*t", vars);
  CHECK(eval(e, {1.0, 3.0}) == doctest::Approx(11.0).epsilon(1e-15));
}

TEST_CASE("unary minus binds looser than caret") {
  VarSet vars(std::vector<std::string>{"x1"});
  auto e = Expression::parse("-x1^2", vars);
  CHECK(eval(e, {2.0}) == doctest::Approx(-4.0).epsilon(1e-15));
}

TEST_CASE("standard precedence and associativity") {
  VarSet vars(std::vector<std::string>{"t"});
  CHECK(eval(Expression::parse("2 + 3*4", vars), {0.0}) == 14.0);
  CHECK(eval(Expression::parse("10 - 4 - 3", vars), {0.0}) == 3.0);
  CHECK(eval(Expression::parse("16/4/2", vars), {0.0}) == 2.0);
  CHECK(eval(Expression::parse("2*3^2", vars), {0.0}) == 18.0);
  CHECK(eval(Expression::parse("(2*3)^2", vars), {0.0}) == 36.0);
  CHECK(eval(Expression::parse("  2 *\t t ", vars), {5.0}) == 10.0);
  CHECK(eval(Expression::parse("2^-1", vars), {0.0}) == 0.5);
  CHECK(eval(Expression::parse("t^(-2)", vars), {2.0}) == 0.25);
}

TEST_CASE("functions") {
  VarSet vars(std::vector<std::string>{"t"});
  CHECK(eval(Expression::parse("exp(t)", vars), {0.0}) == 1.0);
  CHECK(eval(Expression::parse("min(t, 2)", vars), {5.0}) == 2.0);
  CHECK(eval(Expression::parse("max(t, 2)", vars), {5.0}) == 5.0);
  CHECK(eval(Expression::parse("abs(t)", vars), {-3.0}) == 3.0);
  CHECK(eval(Expression::parse("sqrt(t)", vars), {9.0}) == 3.0);
  CHECK(eval(Expression::parse("log(exp(t))", vars), {2.0}) ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK(eval(Expression::parse("sign(t)", vars), {0.0}) == 0.0);
  CHECK(eval(Expression::parse("sign(t)", vars), {-7.0}) == -1.0);
  CHECK(eval(Expression::parse("step(t)", vars), {0.0}) == 1.0);
  CHECK(eval(Expression::parse("step(t)", vars), {-1e-30}) == 0.0);
}

TEST_CASE("syntax errors carry positions") {
  VarSet vars(std::vector<std::string>{"t", "x1"});

  try {
    Expression::parse("2*+", vars);
    FAIL("expected ParseError");
  } catch (const ParseError& err) {
    CHECK(err.position() == 2);
  }

  try {
    Expression::parse("x2", vars);
    FAIL("expected ParseError");
  } catch (const ParseError& err) {
    CHECK(err.position() == 0);
    CHECK(std::string(err.what()).find("x2") != std::string::npos);
  }

  CHECK_THROWS_AS(Expression::parse("sin(t", vars), ParseError);
  CHECK_THROWS_AS(Expression::parse("min(t)", vars), ParseError);
  CHECK_THROWS_AS(Expression::parse("t^x1", vars), ParseError);
  CHECK_THROWS_AS(Expression::parse("t^2.5", vars), ParseError);
  CHECK_THROWS_AS(Expression::parse("foo(t)", vars), ParseError);
  CHECK_THROWS_AS(Expression::parse("", vars), ParseError);
  CHECK_THROWS_AS(Expression::parse("(t", vars), ParseError);
}

TEST_CASE("domain errors instead of NaN") {
  VarSet vars(std::vector<std::string>{"x1", "x2"});
  auto div = Expression::parse("x1/x2", vars);
  CHECK_THROWS_AS(eval(div, {1.0, 0.0}), EvalError);
  CHECK_THROWS_AS(eval(Expression::parse("log(x1)", vars), {-1.0, 0.0}),
                  EvalError);
  CHECK_THROWS_AS(eval(Expression::parse("log(x1)", vars), {0.0, 0.0}),
                  EvalError);
  CHECK_THROWS_AS(eval(Expression::parse("sqrt(x1)", vars), {-4.0, 0.0}),
                  EvalError);
  CHECK_THROWS_AS(eval(Expression::parse("x1^(-1)", vars), {0.0, 0.0}),
                  EvalError);
}

TEST_CASE("map-based evaluation reports missing bindings") {
  VarSet vars(std::vector<std::string>{"t", "x1"});
  auto e = Expression::parse("t + x1", vars);
  CHECK(e.value({{"t", 1.0}, {"x1", 2.0}}) == 3.0);
  CHECK_THROWS_AS(e.value({{"t", 1.0}}), EvalError);
  // unused declared variables need no binding
  auto f = Expression::parse("t", vars);
  CHECK(f.value({{"t", 4.0}}) == 4.0);
}

TEST_CASE("derivatives of polynomial and trig terms") {
  VarSet vars(std::vector<std::string>{"t", "x1"});

  auto sq = Expression::parse("x1^2", vars).derivative("x1");
  CHECK(eval(sq, {0.0, 3.0}) == doctest::Approx(6.0).epsilon(1e-15));

  auto dt = Expression::parse("x1", vars).derivative("t");
  CHECK(eval(dt, {5.0, 7.0}) == 0.0);

  // d/dx1 sin(x1)*x1 at x1=1 -> cos(1) + sin(1); frozen against the central
  // finite-difference oracle below.
  auto prod = Expression::parse("sin(x1)*x1", vars);
  auto dprod = prod.derivative("x1");
  double at1 = eval(dprod, {0.0, 1.0});
  CHECK(at1 == doctest::Approx(1.38177).epsilon(1e-5));
  double fd = central_diff(prod, vars, "x1", {0.0, 1.0});
  CHECK(std::fabs(at1 - fd) <= 1e-6);
}

TEST_CASE("kink conventions") {
  VarSet vars(std::vector<std::string>{"x1", "x2"});

  auto dabs = Expression::parse("abs(x1)", vars).derivative("x1");
  CHECK(eval(dabs, {0.0, 0.0}) == 0.0);  // sign(0) = 0
  CHECK(eval(dabs, {3.0, 0.0}) == 1.0);
  CHECK(eval(dabs, {-3.0, 0.0}) == -1.0);

  // min/max take the active branch; ties go to the first argument.
  auto dmin = Expression::parse("min(x1^2, x2)", vars).derivative("x1");
  CHECK(eval(dmin, {1.0, 5.0}) == 2.0);   // x1^2 active
  CHECK(eval(dmin, {2.0, 1.0}) == 0.0);   // x2 active
  CHECK(eval(dmin, {1.0, 1.0}) == 2.0);   // tie -> first argument

  auto dmax = Expression::parse("max(x1, 2*x1)", vars).derivative("x1");
  CHECK(eval(dmax, {1.0, 0.0}) == 2.0);
  CHECK(eval(dmax, {-1.0, 0.0}) == 1.0);
  CHECK(eval(dmax, {0.0, 0.0}) == 1.0);   // tie -> first argument
}

TEST_CASE("quotient and chain rules against finite differences") {
  VarSet vars(std::vector<std::string>{"t", "x1", "x2"});
  const char* cases[] = {
      "x1/(1 + x2^2)",
      "exp(0.5*x1)*cos(x2)",
      "log(2 + x1^2)",
      "sqrt(1 + x1^2 + x2^2)",
      "sin(x1*x2 + t)",
      "(x1 + x2)^3",
  };
  std::vector<double> pt = {0.7, 1.3, -0.4};
  for (const char* text : cases) {
    auto e = Expression::parse(text, vars);
    for (const char* var : {"t", "x1", "x2"}) {
      double sym = eval(e.derivative(var), pt);
      double fd = central_diff(e, vars, var, pt);
      CHECK_MESSAGE(std::fabs(sym - fd) <= 1e-6 * (1.0 + std::fabs(sym)),
                    text, " d/d", var);
    }
  }
}

TEST_CASE("property: 100 random smooth expressions match finite differences") {
  RandomExpr gen(20260819);
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    std::string text = gen.build(3);
    auto e = Expression::parse(text, gen.vars);
    std::vector<double> pt = {coord(gen.rng), coord(gen.rng),
                              coord(gen.rng)};
    for (const char* var : {"t", "x1", "x2"}) {
      double sym = eval(e.derivative(var), pt);
      double fd = central_diff(e, gen.vars, var, pt);
      CHECK_MESSAGE(std::fabs(sym - fd) <= 1e-5 * (1.0 + std::fabs(sym)),
                    "expr: ", text);
      ++checked;
    }
  }
  CHECK(checked == 300);
}

TEST_CASE("property: pretty-print round trip is evaluation-equivalent") {
  RandomExpr gen(777);
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  for (int i = 0; i < 60; ++i) {
    std::string text = gen.build(3);
    auto e = Expression::parse(text, gen.vars);
    auto back = Expression::parse(e.str(), gen.vars);
    auto twice = Expression::parse(back.str(), gen.vars);
    for (int k = 0; k < 5; ++k) {
      std::vector<double> pt = {coord(gen.rng), coord(gen.rng),
                                coord(gen.rng)};
      double v0 = eval(e, pt);
      double v1 = eval(back, pt);
      double v2 = eval(twice, pt);
      CHECK(std::fabs(v0 - v1) <= 1e-12 * (1.0 + std::fabs(v0)));
      CHECK(std::fabs(v1 - v2) <= 1e-12 * (1.0 + std::fabs(v1)));
    }
  }
  // derivatives print and reparse too (they may contain sign/step)
  VarSet vars(std::vector<std::string>{"x1", "x2"});
  auto d = Expression::parse("min(x1^2, abs(x2))", vars).derivative("x1");
  auto d2 = Expression::parse(d.str(), vars);
  for (double a : {-1.0, 0.3, 2.0}) {
    for (double b : {-2.0, 0.0, 0.5}) {
      CHECK(eval(d, {a, b}) == eval(d2, {a, b}));
    }
  }
}

TEST_CASE("rebind moves expressions onto a new variable set") {
  VarSet src(std::vector<std::string>{"t", "y1", "pz1"});
  VarSet dst(std::vector<std::string>{"t", "x1", "x2"});
  auto e = Expression::parse("y1 + 2*pz1", src);
  auto r = e.rebind(dst, {{"y1", Expression::variable("x1", dst)},
                          {"pz1", Expression::variable("x2", dst)}});
  CHECK(eval(r, {0.0, 1.0, 3.0}) == 7.0);
  CHECK_THROWS_AS(e.rebind(dst, {}), ioc::Error);  // y1 has no replacement
}

TEST_CASE("builder arithmetic folds identities") {
  VarSet vars(std::vector<std::string>{"x1"});
  auto x = Expression::variable("x1", vars);
  auto zero = Expression::constant(0.0);
  auto one = Expression::constant(1.0);
  CHECK((x + zero).str() == "x1");
  CHECK((zero * x).str() == "0");
  CHECK((one * x).str() == "x1");
  CHECK((x.pow(1)).str() == "x1");
  CHECK((x.pow(0)).str() == "1");
  auto q = Expression::constant(2.0) * x + x.pow(2);
  CHECK(eval(q, {3.0}) == 15.0);
}

TEST_CASE("kink detection") {
  VarSet vars(std::vector<std::string>{"x1"});
  CHECK(Expression::parse("abs(x1)", vars).has_kinks());
  CHECK(Expression::parse("min(x1, 2)", vars).has_kinks());
  CHECK_FALSE(Expression::parse("sin(x1) + x1^2", vars).has_kinks());
}

}  // TEST_SUITE
