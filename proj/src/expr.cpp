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

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <utility>

namespace ioc {
namespace detail {

enum class Op : unsigned char {
  kConst,
  kVar,
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kSin,
  kCos,
  kExp,
  kLog,
  kSqrt,
  kAbs,
  kSign,
  kStep,
  kMin,
  kMax,
};

struct ExprNode {
  Op op;
  double constant = 0.0;  // kConst
  int slot = -1;          // kVar
  int exponent = 0;       // kPow
  NodeRef a, b;
};

namespace {

NodeRef MakeConst(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::kConst;
  n->constant = v;
  return n;
}

NodeRef MakeVar(int slot) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::kVar;
  n->slot = slot;
  return n;
}

NodeRef MakeUnary(Op op, NodeRef a) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  return n;
}

NodeRef MakeBinary(Op op, NodeRef a, NodeRef b) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodeRef MakePow(NodeRef a, int exponent) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::kPow;
  n->a = std::move(a);
  n->exponent = exponent;
  return n;
}

bool IsConst(const NodeRef& n, double v) {
  return n->op == Op::kConst && n->constant == v;
}

// x^k by repeated squaring; k may be negative.
double IntPow(double base, int exponent) {
  if (exponent == 0) return 1.0;
  bool invert = exponent < 0;
  unsigned long long k =
      invert ? -static_cast<long long>(exponent) : exponent;
  if (invert && base == 0.0) {
    throw EvalError("zero raised to a negative power");
  }
  double acc = 1.0, p = base;
  while (k != 0) {
    if (k & 1ull) acc *= p;
    p *= p;
    k >>= 1;
  }
  return invert ? 1.0 / acc : acc;
}

double Eval(const ExprNode* n, const double* env) {
  switch (n->op) {
    case Op::kConst:
      return n->constant;
    case Op::kVar:
      return env[n->slot];
    case Op::kNeg:
      return -Eval(n->a.get(), env);
    case Op::kAdd:
      return Eval(n->a.get(), env) + Eval(n->b.get(), env);
    case Op::kSub:
      return Eval(n->a.get(), env) - Eval(n->b.get(), env);
    case Op::kMul:
      return Eval(n->a.get(), env) * Eval(n->b.get(), env);
    case Op::kDiv: {
      double d = Eval(n->b.get(), env);
      if (d == 0.0) throw EvalError("division by zero");
      return Eval(n->a.get(), env) / d;
    }
    case Op::kPow:
      return IntPow(Eval(n->a.get(), env), n->exponent);
    case Op::kSin:
      return std::sin(Eval(n->a.get(), env));
    case Op::kCos:
      return std::cos(Eval(n->a.get(), env));
    case Op::kExp:
      return std::exp(Eval(n->a.get(), env));
    case Op::kLog: {
      double v = Eval(n->a.get(), env);
      if (v <= 0.0) throw EvalError("log of a non-positive value");
      return std::log(v);
    }
    case Op::kSqrt: {
      double v = Eval(n->a.get(), env);
      if (v < 0.0) throw EvalError("sqrt of a negative value");
      return std::sqrt(v);
    }
    case Op::kAbs:
      return std::fabs(Eval(n->a.get(), env));
    case Op::kSign: {
      double v = Eval(n->a.get(), env);
      return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    }
    case Op::kStep:
      return Eval(n->a.get(), env) >= 0.0 ? 1.0 : 0.0;
    case Op::kMin: {
      double x = Eval(n->a.get(), env), y = Eval(n->b.get(), env);
      return x <= y ? x : y;
    }
    case Op::kMax: {
      double x = Eval(n->a.get(), env), y = Eval(n->b.get(), env);
      return x >= y ? x : y;
    }
  }
  throw EvalError("corrupt expression node");
}

// Folding builders. Only generated trees (derivatives, rewrites, quadratic
// expansions) go through these; parsing preserves the user's structure.
NodeRef Fold2(Op op, NodeRef a, NodeRef b);

NodeRef FoldNeg(NodeRef a) {
  if (a->op == Op::kConst) return MakeConst(-a->constant);
  if (a->op == Op::kNeg) return a->a;
  return MakeUnary(Op::kNeg, std::move(a));
}

NodeRef FoldAdd(NodeRef a, NodeRef b) {
  if (a->op == Op::kConst && b->op == Op::kConst)
    return MakeConst(a->constant + b->constant);
  if (IsConst(a, 0.0)) return b;
  if (IsConst(b, 0.0)) return a;
  return MakeBinary(Op::kAdd, std::move(a), std::move(b));
}

NodeRef FoldSub(NodeRef a, NodeRef b) {
  if (a->op == Op::kConst && b->op == Op::kConst)
    return MakeConst(a->constant - b->constant);
  if (IsConst(b, 0.0)) return a;
  if (IsConst(a, 0.0)) return FoldNeg(std::move(b));
  return MakeBinary(Op::kSub, std::move(a), std::move(b));
}

NodeRef FoldMul(NodeRef a, NodeRef b) {
  if (a->op == Op::kConst && b->op == Op::kConst)
    return MakeConst(a->constant * b->constant);
  if (IsConst(a, 0.0) || IsConst(b, 0.0)) return MakeConst(0.0);
  if (IsConst(a, 1.0)) return b;
  if (IsConst(b, 1.0)) return a;
  if (IsConst(a, -1.0)) return FoldNeg(std::move(b));
  if (IsConst(b, -1.0)) return FoldNeg(std::move(a));
  return MakeBinary(Op::kMul, std::move(a), std::move(b));
}

NodeRef FoldDiv(NodeRef a, NodeRef b) {
  if (IsConst(a, 0.0)) return MakeConst(0.0);
  if (IsConst(b, 1.0)) return a;
  if (a->op == Op::kConst && b->op == Op::kConst && b->constant != 0.0)
    return MakeConst(a->constant / b->constant);
  return MakeBinary(Op::kDiv, std::move(a), std::move(b));
}

NodeRef FoldPow(NodeRef a, int exponent) {
  if (exponent == 0) return MakeConst(1.0);
  if (exponent == 1) return a;
  if (a->op == Op::kConst) return MakeConst(IntPow(a->constant, exponent));
  return MakePow(std::move(a), exponent);
}

NodeRef Fold2(Op op, NodeRef a, NodeRef b) {
  switch (op) {
    case Op::kAdd:
      return FoldAdd(std::move(a), std::move(b));
    case Op::kSub:
      return FoldSub(std::move(a), std::move(b));
    case Op::kMul:
      return FoldMul(std::move(a), std::move(b));
    case Op::kDiv:
      return FoldDiv(std::move(a), std::move(b));
    default:
      return MakeBinary(op, std::move(a), std::move(b));
  }
}

NodeRef Derivative(const NodeRef& n, int slot) {
  switch (n->op) {
    case Op::kConst:
      return MakeConst(0.0);
    case Op::kVar:
      return MakeConst(n->slot == slot ? 1.0 : 0.0);
    case Op::kNeg:
      return FoldNeg(Derivative(n->a, slot));
    case Op::kAdd:
      return FoldAdd(Derivative(n->a, slot), Derivative(n->b, slot));
    case Op::kSub:
      return FoldSub(Derivative(n->a, slot), Derivative(n->b, slot));
    case Op::kMul:
      return FoldAdd(FoldMul(Derivative(n->a, slot), n->b),
                     FoldMul(n->a, Derivative(n->b, slot)));
    case Op::kDiv:
      // (a'b - ab') / b^2
      return FoldDiv(FoldSub(FoldMul(Derivative(n->a, slot), n->b),
                             FoldMul(n->a, Derivative(n->b, slot))),
                     FoldPow(n->b, 2));
    case Op::kPow:
      // k * a^(k-1) * a'
      return FoldMul(
          FoldMul(MakeConst(static_cast<double>(n->exponent)),
                  FoldPow(n->a, n->exponent - 1)),
          Derivative(n->a, slot));
    case Op::kSin:
      return FoldMul(MakeUnary(Op::kCos, n->a), Derivative(n->a, slot));
    case Op::kCos:
      return FoldNeg(
          FoldMul(MakeUnary(Op::kSin, n->a), Derivative(n->a, slot)));
    case Op::kExp:
      return FoldMul(MakeUnary(Op::kExp, n->a), Derivative(n->a, slot));
    case Op::kLog:
      return FoldDiv(Derivative(n->a, slot), n->a);
    case Op::kSqrt:
      return FoldDiv(Derivative(n->a, slot),
                     FoldMul(MakeConst(2.0), MakeUnary(Op::kSqrt, n->a)));
    case Op::kAbs:
      // d|u| = sign(u) du, with sign(0) = 0.
      return FoldMul(MakeUnary(Op::kSign, n->a), Derivative(n->a, slot));
    case Op::kSign:
    case Op::kStep:
      // Piecewise constant away from the kink; the kink itself contributes
      // nothing under the active-branch convention.
      return MakeConst(0.0);
    case Op::kMin: {
      // Active branch; ties go to the first argument: weight = step(b - a).
      NodeRef w = MakeUnary(Op::kStep, FoldSub(n->b, n->a));
      return FoldAdd(FoldMul(w, Derivative(n->a, slot)),
                     FoldMul(FoldSub(MakeConst(1.0), w),
                             Derivative(n->b, slot)));
    }
    case Op::kMax: {
      NodeRef w = MakeUnary(Op::kStep, FoldSub(n->a, n->b));
      return FoldAdd(FoldMul(w, Derivative(n->a, slot)),
                     FoldMul(FoldSub(MakeConst(1.0), w),
                             Derivative(n->b, slot)));
    }
  }
  throw EvalError("corrupt expression node");
}

bool HasSlot(const ExprNode* n, int slot) {
  if (n->op == Op::kVar) return n->slot == slot;
  if (n->a && HasSlot(n->a.get(), slot)) return true;
  if (n->b && HasSlot(n->b.get(), slot)) return true;
  return false;
}

bool HasKinks(const ExprNode* n) {
  switch (n->op) {
    case Op::kAbs:
    case Op::kSign:
    case Op::kStep:
    case Op::kMin:
    case Op::kMax:
      return true;
    default:
      break;
  }
  if (n->a && HasKinks(n->a.get())) return true;
  if (n->b && HasKinks(n->b.get())) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Printing. Precedence: + - (1) < * / (2) < unary - (3) < ^ (4) < atoms (5).

int Precedence(const ExprNode* n) {
  switch (n->op) {
    case Op::kAdd:
    case Op::kSub:
      return 1;
    case Op::kMul:
    case Op::kDiv:
      return 2;
    case Op::kNeg:
      return 3;
    case Op::kPow:
      return 4;
    case Op::kConst:
      return n->constant < 0.0 ? 3 : 5;
    default:
      return 5;
  }
}

std::string FormatNumber(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void Print(const ExprNode* n, const std::vector<std::string>& names,
           std::string& out);

void PrintChild(const ExprNode* child, int min_prec,
                const std::vector<std::string>& names, std::string& out) {
  if (Precedence(child) < min_prec) {
    out += '(';
    Print(child, names, out);
    out += ')';
  } else {
    Print(child, names, out);
  }
}

void Print(const ExprNode* n, const std::vector<std::string>& names,
           std::string& out) {
  switch (n->op) {
    case Op::kConst:
      out += FormatNumber(n->constant);
      return;
    case Op::kVar:
      out += names[n->slot];
      return;
    case Op::kNeg:
      out += '-';
      PrintChild(n->a.get(), 3, names, out);
      return;
    case Op::kAdd:
      PrintChild(n->a.get(), 1, names, out);
      out += " + ";
      PrintChild(n->b.get(), 2, names, out);
      return;
    case Op::kSub:
      PrintChild(n->a.get(), 1, names, out);
      out += " - ";
      PrintChild(n->b.get(), 2, names, out);
      return;
    case Op::kMul:
      PrintChild(n->a.get(), 2, names, out);
      out += "*";
      PrintChild(n->b.get(), 3, names, out);
      return;
    case Op::kDiv:
      PrintChild(n->a.get(), 2, names, out);
      out += "/";
      PrintChild(n->b.get(), 3, names, out);
      return;
    case Op::kPow:
      PrintChild(n->a.get(), 4, names, out);
      out += '^';
      if (n->exponent < 0) {
        out += '(';
        out += std::to_string(n->exponent);
        out += ')';
      } else {
        out += std::to_string(n->exponent);
      }
      return;
    case Op::kSin:
    case Op::kCos:
    case Op::kExp:
    case Op::kLog:
    case Op::kSqrt:
    case Op::kAbs:
    case Op::kSign:
    case Op::kStep: {
      static const char* kNames[] = {"sin", "cos", "exp",  "log",
                                     "sqrt", "abs", "sign", "step"};
      out += kNames[static_cast<int>(n->op) - static_cast<int>(Op::kSin)];
      out += '(';
      Print(n->a.get(), names, out);
      out += ')';
      return;
    }
    case Op::kMin:
    case Op::kMax:
      out += (n->op == Op::kMin) ? "min(" : "max(";
      Print(n->a.get(), names, out);
      out += ", ";
      Print(n->b.get(), names, out);
      out += ')';
      return;
  }
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over a tokenized view of the input.

enum class Tok : unsigned char {
  kNumber,
  kIdent,
  kPlus,
  kMinus,
  kStar,
  kSlash,
  kCaret,
  kLParen,
  kRParen,
  kComma,
  kEnd,
};

struct Token {
  Tok type;
  double number = 0.0;
  std::string text;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_])))
      ++i_;
    Token t;
    t.pos = i_;
    if (i_ >= src_.size()) {
      t.type = Tok::kEnd;
      return t;
    }
    char c = src_[i_];
    switch (c) {
      case '+': t.type = Tok::kPlus; ++i_; return t;
      case '-': t.type = Tok::kMinus; ++i_; return t;
      case '*': t.type = Tok::kStar; ++i_; return t;
      case '/': t.type = Tok::kSlash; ++i_; return t;
      case '^': t.type = Tok::kCaret; ++i_; return t;
      case '(': t.type = Tok::kLParen; ++i_; return t;
      case ')': t.type = Tok::kRParen; ++i_; return t;
      case ',': t.type = Tok::kComma; ++i_; return t;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = i_;
      while (i_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[i_])))
        ++i_;
      if (i_ < src_.size() && src_[i_] == '.') {
        ++i_;
        while (i_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[i_])))
          ++i_;
      }
      if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
        std::size_t mark = i_;
        ++i_;
        if (i_ < src_.size() && (src_[i_] == '+' || src_[i_] == '-')) ++i_;
        if (i_ < src_.size() &&
            std::isdigit(static_cast<unsigned char>(src_[i_]))) {
          while (i_ < src_.size() &&
                 std::isdigit(static_cast<unsigned char>(src_[i_])))
            ++i_;
        } else {
          i_ = mark;  // bare 'e' belongs to the next token
        }
      }
      t.type = Tok::kNumber;
      t.text = std::string(src_.substr(start, i_ - start));
      t.number = std::strtod(t.text.c_str(), nullptr);
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i_;
      while (i_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[i_])) ||
              src_[i_] == '_'))
        ++i_;
      t.type = Tok::kIdent;
      t.text = std::string(src_.substr(start, i_ - start));
      return t;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", i_);
  }

 private:
  std::string_view src_;
  std::size_t i_ = 0;
};

struct FunctionEntry {
  const char* name;
  Op op;
  int arity;
};

constexpr FunctionEntry kFunctions[] = {
    {"sin", Op::kSin, 1},   {"cos", Op::kCos, 1},   {"exp", Op::kExp, 1},
    {"log", Op::kLog, 1},   {"sqrt", Op::kSqrt, 1}, {"abs", Op::kAbs, 1},
    {"sign", Op::kSign, 1}, {"step", Op::kStep, 1}, {"min", Op::kMin, 2},
    {"max", Op::kMax, 2},
};

class Parser {
 public:
  Parser(std::string_view src, const VarSet& vars)
      : lexer_(src), vars_(vars) {
    advance();
  }

  NodeRef parse() {
    NodeRef e = additive();
    if (cur_.type != Tok::kEnd) {
      throw ParseError("syntax error: unexpected " + describe(cur_),
                       cur_.pos);
    }
    return e;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  static std::string describe(const Token& t) {
    switch (t.type) {
      case Tok::kNumber: return "number '" + t.text + "'";
      case Tok::kIdent: return "identifier '" + t.text + "'";
      case Tok::kPlus: return "'+'";
      case Tok::kMinus: return "'-'";
      case Tok::kStar: return "'*'";
      case Tok::kSlash: return "'/'";
      case Tok::kCaret: return "'^'";
      case Tok::kLParen: return "'('";
      case Tok::kRParen: return "')'";
      case Tok::kComma: return "','";
      case Tok::kEnd: return "end of expression";
    }
    return "token";
  }

  NodeRef additive() {
    NodeRef e = multiplicative();
    while (cur_.type == Tok::kPlus || cur_.type == Tok::kMinus) {
      Op op = cur_.type == Tok::kPlus ? Op::kAdd : Op::kSub;
      advance();
      e = MakeBinary(op, std::move(e), multiplicative());
    }
    return e;
  }

  NodeRef multiplicative() {
    NodeRef e = unary();
    while (cur_.type == Tok::kStar || cur_.type == Tok::kSlash) {
      Op op = cur_.type == Tok::kStar ? Op::kMul : Op::kDiv;
      advance();
      e = MakeBinary(op, std::move(e), unary());
    }
    return e;
  }

  // Unary minus binds looser than '^': -x1^2 is -(x1^2).
  NodeRef unary() {
    if (cur_.type == Tok::kMinus) {
      advance();
      return MakeUnary(Op::kNeg, unary());
    }
    return power();
  }

  NodeRef power() {
    NodeRef e = primary();
    while (cur_.type == Tok::kCaret) {
      advance();
      e = MakePow(std::move(e), exponent());
    }
    return e;
  }

  int exponent() {
    bool paren = false;
    if (cur_.type == Tok::kLParen) {
      paren = true;
      advance();
    }
    int sign = 1;
    if (cur_.type == Tok::kMinus) {
      sign = -1;
      advance();
    }
    if (cur_.type != Tok::kNumber || cur_.text.find('.') != std::string::npos ||
        cur_.text.find('e') != std::string::npos ||
        cur_.text.find('E') != std::string::npos) {
      throw ParseError("exponent must be an integer literal", cur_.pos);
    }
    int value = sign * static_cast<int>(cur_.number);
    advance();
    if (paren) {
      if (cur_.type != Tok::kRParen)
        throw ParseError("expected ')' after exponent", cur_.pos);
      advance();
    }
    return value;
  }

  NodeRef primary() {
    if (cur_.type == Tok::kNumber) {
      NodeRef e = MakeConst(cur_.number);
      advance();
      return e;
    }
    if (cur_.type == Tok::kLParen) {
      advance();
      NodeRef e = additive();
      if (cur_.type != Tok::kRParen)
        throw ParseError("expected ')'", cur_.pos);
      advance();
      return e;
    }
    if (cur_.type == Tok::kIdent) {
      Token ident = cur_;
      advance();
      if (cur_.type == Tok::kLParen) return call(ident);
      int slot = vars_.index_of(ident.text);
      if (slot < 0) {
        throw ParseError("undeclared variable '" + ident.text + "'",
                         ident.pos);
      }
      return MakeVar(slot);
    }
    throw ParseError("syntax error: unexpected " + describe(cur_), cur_.pos);
  }

  NodeRef call(const Token& ident) {
    const FunctionEntry* fn = nullptr;
    for (const auto& entry : kFunctions) {
      if (ident.text == entry.name) {
        fn = &entry;
        break;
      }
    }
    if (fn == nullptr) {
      throw ParseError("unknown function '" + ident.text + "'", ident.pos);
    }
    advance();  // consume '('
    NodeRef first = additive();
    if (fn->arity == 1) {
      if (cur_.type != Tok::kRParen)
        throw ParseError("expected ')' after argument of '" + ident.text +
                             "'",
                         cur_.pos);
      advance();
      return MakeUnary(fn->op, std::move(first));
    }
    if (cur_.type != Tok::kComma) {
      throw ParseError("'" + ident.text + "' takes two arguments", cur_.pos);
    }
    advance();
    NodeRef second = additive();
    if (cur_.type != Tok::kRParen)
      throw ParseError("expected ')' after arguments of '" + ident.text +
                           "'",
                       cur_.pos);
    advance();
    return MakeBinary(fn->op, std::move(first), std::move(second));
  }

  Lexer lexer_;
  Token cur_;
  const VarSet& vars_;
};

}  // namespace
}  // namespace detail

using detail::ExprNode;
using detail::NodeRef;
using detail::Op;

Expression::Expression()
    : root_(detail::MakeConst(0.0)), vars_(VarSet()) {}

Expression::Expression(NodeRef root, VarSet vars)
    : root_(std::move(root)), vars_(std::move(vars)) {}

Expression Expression::parse(std::string_view text, const VarSet& vars) {
  detail::Parser parser(text, vars);
  return Expression(parser.parse(), vars);
}

Expression Expression::constant(double value, const VarSet& vars) {
  return Expression(detail::MakeConst(value), vars);
}

Expression Expression::variable(std::string_view name, const VarSet& vars) {
  int slot = vars.index_of(name);
  if (slot < 0) {
    throw Error("variable '" + std::string(name) +
                "' is not in the variable set");
  }
  return Expression(detail::MakeVar(slot), vars);
}

double Expression::value(std::span<const double> env) const {
  if (env.size() != vars_.size()) {
    throw EvalError("environment size " + std::to_string(env.size()) +
                    " does not match variable count " +
                    std::to_string(vars_.size()));
  }
  return detail::Eval(root_.get(), env.data());
}

double Expression::value(const std::map<std::string, double>& env) const {
  std::vector<double> slots(vars_.size(), 0.0);
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    auto it = env.find(vars_.name(i));
    if (it == env.end()) {
      if (references(vars_.name(i))) {
        throw EvalError("missing binding for variable '" + vars_.name(i) +
                        "'");
      }
      continue;
    }
    slots[i] = it->second;
  }
  return detail::Eval(root_.get(), slots.data());
}

Expression Expression::derivative(std::string_view var) const {
  int slot = vars_.index_of(var);
  if (slot < 0) {
    throw Error("cannot differentiate with respect to undeclared variable '" +
                std::string(var) + "'");
  }
  return Expression(detail::Derivative(root_, slot), vars_);
}

bool Expression::references(std::string_view name) const {
  int slot = vars_.index_of(name);
  if (slot < 0) return false;
  return detail::HasSlot(root_.get(), slot);
}

bool Expression::has_kinks() const { return detail::HasKinks(root_.get()); }

bool Expression::is_constant() const { return root_->op == Op::kConst; }

bool Expression::is_constant_zero() const {
  return root_->op == Op::kConst && root_->constant == 0.0;
}

std::string Expression::str() const {
  std::string out;
  detail::Print(root_.get(), vars_.names(), out);
  return out;
}

namespace detail {
namespace {

NodeRef Rebind(const NodeRef& n, const VarSet& source, const VarSet& target,
               const std::map<std::string, NodeRef>& replacement_roots) {
  switch (n->op) {
    case Op::kConst:
      return n;
    case Op::kVar: {
      const std::string& name = source.name(n->slot);
      auto it = replacement_roots.find(name);
      if (it != replacement_roots.end()) return it->second;
      int slot = target.index_of(name);
      if (slot < 0) {
        throw Error("variable '" + name +
                    "' has no replacement and is absent from the target "
                    "variable set");
      }
      return MakeVar(slot);
    }
    default: {
      auto m = std::make_shared<ExprNode>(*n);
      if (n->a)
        m->a = Rebind(n->a, source, target, replacement_roots);
      if (n->b)
        m->b = Rebind(n->b, source, target, replacement_roots);
      return m;
    }
  }
}

}  // namespace
}  // namespace detail

Expression Expression::rebind(
    const VarSet& target,
    const std::map<std::string, Expression>& replacements) const {
  std::map<std::string, detail::NodeRef> roots;
  for (const auto& [name, expr] : replacements) {
    if (!expr.vars().compatible_with(target) && expr.vars().size() != 0) {
      throw Error("replacement for '" + name +
                  "' is not an expression over the target variable set");
    }
    roots.emplace(name, expr.root_);
  }
  return Expression(
      detail::Rebind(root_, vars_, target, roots), target);
}

namespace {

const VarSet& PickVars(const Expression& a, const Expression& b) {
  if (a.vars().size() == 0) return b.vars();
  if (b.vars().size() == 0) return a.vars();
  if (!a.vars().compatible_with(b.vars())) {
    throw Error("cannot combine expressions over different variable sets");
  }
  return a.vars();
}

}  // namespace

// The builder operators reach into root_ via friendship; they are the only
// way expression trees are composed outside the parser.
Expression operator+(const Expression& a, const Expression& b) {
  return Expression(detail::Fold2(Op::kAdd, a.root_, b.root_),
                    PickVars(a, b));
}

Expression operator-(const Expression& a, const Expression& b) {
  return Expression(detail::Fold2(Op::kSub, a.root_, b.root_),
                    PickVars(a, b));
}

Expression operator*(const Expression& a, const Expression& b) {
  return Expression(detail::Fold2(Op::kMul, a.root_, b.root_),
                    PickVars(a, b));
}

Expression operator/(const Expression& a, const Expression& b) {
  return Expression(detail::Fold2(Op::kDiv, a.root_, b.root_),
                    PickVars(a, b));
}

Expression operator-(const Expression& a) {
  return Expression(detail::FoldNeg(a.root_), a.vars());
}

Expression Expression::pow(int exponent) const {
  return Expression(detail::FoldPow(root_, exponent), vars_);
}

}  // namespace ioc
