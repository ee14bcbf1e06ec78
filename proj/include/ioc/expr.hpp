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

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ioc/errors.hpp"

namespace ioc {

/// Ordered, immutable list of variable names shared by a family of
/// expressions. The position of a name in the list is the slot that
/// Expression::value(std::span) reads its value from.
class VarSet {
 public:
  VarSet() : names_(std::make_shared<const std::vector<std::string>>()) {}

  explicit VarSet(std::vector<std::string> names)
      : names_(std::make_shared<const std::vector<std::string>>(
            std::move(names))) {}

  /// Slot of `name`, or -1 when the set does not contain it.
  int index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_->size(); ++i) {
      if ((*names_)[i] == name) return static_cast<int>(i);
    }
    return -1;
  }

  std::size_t size() const { return names_->size(); }
  const std::string& name(std::size_t i) const { return (*names_)[i]; }
  const std::vector<std::string>& names() const { return *names_; }

  /// True when both sets list the same names in the same order. Expressions
  /// over compatible sets can be combined and evaluated interchangeably.
  bool compatible_with(const VarSet& other) const {
    return names_ == other.names_ || *names_ == *other.names_;
  }

 private:
  std::shared_ptr<const std::vector<std::string>> names_;
};

namespace detail {
struct ExprNode;
using NodeRef = std::shared_ptr<const ExprNode>;
}  // namespace detail

/// An immutable scalar expression over a fixed variable set.
///
/// Grammar (documented in docs/expressions.md):
///   literals, declared variables, binary + - * / ^, unary minus, and the
///   functions sin cos exp log sqrt abs sign step, plus two-argument
///   min/max. `^` takes an integer literal exponent and binds tighter than
///   unary minus, so -x1^2 evaluates to -(x1^2).
///
/// Evaluation is exact about domain errors: division by zero, log of a
/// non-positive value and sqrt of a negative value raise EvalError rather
/// than returning NaN.
///
/// derivative() is symbolic and closed over the same language. Kinked
/// functions follow fixed conventions: d|x|/dx = sign(x) with sign(0) = 0,
/// and min/max differentiate as their active branch with the first argument
/// winning ties (step(0) = 1 encodes the tie rule).
class Expression {
 public:
  /// The constant 0 over an empty variable set.
  Expression();

  /// Parses `text` against the declared variables. Diagnostics carry a byte
  /// offset into `text`; referencing an undeclared name is an error that
  /// names the offending variable.
  static Expression parse(std::string_view text, const VarSet& vars);

  static Expression constant(double value, const VarSet& vars = VarSet());
  static Expression variable(std::string_view name, const VarSet& vars);

  /// Evaluates with values bound by slot order of vars(). `env.size()` must
  /// equal vars().size().
  double value(std::span<const double> env) const;

  /// Evaluates with values bound by name; every variable that occurs in the
  /// expression must be present.
  double value(const std::map<std::string, double>& env) const;

  /// Symbolic partial derivative with respect to a declared variable.
  Expression derivative(std::string_view var) const;

  /// Rebinds the expression onto `target`. Every variable occurring here is
  /// either replaced by `replacements[name]` (an expression over `target`)
  /// or, when absent from the map, must exist in `target` under the same
  /// name. Used to rewrite signals when systems are rewritten to a larger
  /// state vector.
  Expression rebind(const VarSet& target,
                    const std::map<std::string, Expression>& replacements =
                        {}) const;

  /// Canonical printable form; parsing it back yields an expression that
  /// evaluates identically.
  std::string str() const;

  const VarSet& vars() const { return vars_; }

  bool references(std::string_view name) const;

  /// True when the tree contains abs/min/max/sign/step, whose derivatives
  /// follow the kink conventions above.
  bool has_kinks() const;

  bool is_constant() const;
  bool is_constant_zero() const;

  /// Structural builders used by code that generates expressions (for
  /// example the quadratic-cost expansion). They fold constants and drop
  /// additive/multiplicative identities.
  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a);
  Expression pow(int exponent) const;

 private:
  Expression(detail::NodeRef root, VarSet vars);

  detail::NodeRef root_;
  VarSet vars_;
};

}  // namespace ioc
