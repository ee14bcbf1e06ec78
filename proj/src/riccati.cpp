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

#include "ioc/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "ioc/errors.hpp"
#include "ioc/mesh.hpp"

namespace ioc {
namespace {

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string DimStr(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

bool IsSymmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

VarSet TimeVars() {
  static const VarSet vars({"t"});
  return vars;
}

}  // namespace

TimeMatrix TimeMatrix::constant(const Eigen::MatrixXd& m) {
  TimeMatrix out;
  out.rows_ = static_cast<int>(m.rows());
  out.cols_ = static_cast<int>(m.cols());
  out.constant_ = m;
  return out;
}

TimeMatrix TimeMatrix::zero(int rows, int cols) {
  return constant(Eigen::MatrixXd::Zero(rows, cols));
}

TimeMatrix TimeMatrix::parse(int rows, int cols,
                             const std::vector<std::string>& entries) {
  if (static_cast<int>(entries.size()) != rows * cols) {
    throw ValidationError("expected " + std::to_string(rows * cols) +
                          " entries, got " + std::to_string(entries.size()));
  }
  TimeMatrix out;
  out.rows_ = rows;
  out.cols_ = cols;
  out.exprs_.reserve(entries.size());
  for (const std::string& e : entries) {
    out.exprs_.push_back(Expression::parse(e, TimeVars()));
  }
  return out;
}

bool TimeMatrix::is_zero() const {
  if (exprs_.empty()) {
    return rows_ == 0 || cols_ == 0 || constant_.cwiseAbs().maxCoeff() == 0.0;
  }
  return std::all_of(exprs_.begin(), exprs_.end(),
                     [](const Expression& e) { return e.is_constant_zero(); });
}

Eigen::MatrixXd TimeMatrix::value(double t) const {
  if (exprs_.empty()) return constant_;
  Eigen::MatrixXd out(rows_, cols_);
  const double env[1] = {t};
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      out(r, c) = exprs_[static_cast<std::size_t>(r) * cols_ + c].value(env);
    }
  }
  return out;
}

Expression TimeMatrix::entry(int r, int c) const {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_) {
    throw Error("TimeMatrix entry index out of range");
  }
  if (exprs_.empty()) return Expression::constant(constant_(r, c), TimeVars());
  return exprs_[static_cast<std::size_t>(r) * cols_ + c];
}

std::vector<std::string> LQSystem::check() const {
  std::vector<std::string> problems;
  const int n = state_dim;
  const int mu = control_dim;
  const int mw = impulse_control_dim;
  if (n < 1) problems.push_back("state dimension must be at least 1");
  if (mu < 0) problems.push_back("control dimension must be nonnegative");
  if (mw < 0) problems.push_back("impulse control dimension must be nonnegative");
  if (!(horizon > 0.0)) problems.push_back("horizon must be positive");
  if (!problems.empty()) return problems;

  auto check_dims = [&](const char* name, int rows, int cols, int er, int ec) {
    if (rows != er || cols != ec) {
      problems.push_back(std::string(name) + " must be " + std::to_string(er) +
                         "x" + std::to_string(ec) + " (got " +
                         std::to_string(rows) + "x" + std::to_string(cols) +
                         ")");
      return false;
    }
    return true;
  };
  check_dims("P", P.rows(), P.cols(), n, n);
  check_dims("Q", Q.rows(), Q.cols(), n, mu);
  check_dims("A", A.rows(), A.cols(), n, n);
  check_dims("B", B.rows(), B.cols(), n, mu);
  check_dims("C", C.rows(), C.cols(), mu, mu);
  check_dims("A0", static_cast<int>(A0.rows()), static_cast<int>(A0.cols()), n,
             n);
  if (!problems.empty()) return problems;

  if (!IsSymmetric(A0)) problems.push_back("A0 must be symmetric");

  const double sample_times[] = {0.0, 0.25 * horizon, 0.5 * horizon,
                                 0.75 * horizon, horizon};
  for (double s : sample_times) {
    Eigen::MatrixXd as;
    Eigen::MatrixXd cs;
    try {
      as = A.value(s);
      cs = C.value(s);
    } catch (const EvalError& e) {
      problems.push_back(std::string("cost matrix not evaluable at t=") +
                         Num(s) + ": " + e.what());
      break;
    }
    if (!IsSymmetric(as)) {
      problems.push_back("A must be symmetric (violated at t=" + Num(s) + ")");
      break;
    }
    if (mu > 0) {
      Eigen::LLT<Eigen::MatrixXd> llt(Symmetrize(cs));
      if (!IsSymmetric(cs) || llt.info() != Eigen::Success) {
        problems.push_back("C must be symmetric positive definite (violated at t=" +
                           Num(s) + ")");
        break;
      }
    }
  }

  double prev = 0.0;
  for (std::size_t k = 0; k < impulses.size(); ++k) {
    const LQImpulse& imp = impulses[k];
    const std::string at = "impulse " + std::to_string(k + 1) + ": ";
    if (!(imp.time > 0.0) || !(imp.time < horizon)) {
      problems.push_back(at + "time " + Num(imp.time) +
                         " must lie strictly inside (0, " + Num(horizon) + ")");
    }
    if (k > 0 && !(imp.time > prev)) {
      problems.push_back(at + "times not strictly increasing");
    }
    prev = imp.time;
    bool dims_ok = true;
    auto jd = [&](const char* name, const Eigen::MatrixXd& m, int er, int ec) {
      if (m.rows() != er || m.cols() != ec) {
        problems.push_back(at + name + " must be " + std::to_string(er) + "x" +
                           std::to_string(ec) + " (got " + DimStr(m) + ")");
        dims_ok = false;
      }
    };
    jd("M", imp.M, n, n);
    jd("N", imp.N, n, mw);
    jd("alpha", imp.alpha, n, n);
    jd("beta", imp.beta, n, mw);
    jd("gamma", imp.gamma, mw, mw);
    if (!dims_ok) continue;
    if (!IsSymmetric(imp.alpha)) problems.push_back(at + "alpha must be symmetric");
    if (mw > 0) {
      Eigen::LLT<Eigen::MatrixXd> llt(Symmetrize(imp.gamma));
      if (!IsSymmetric(imp.gamma) || llt.info() != Eigen::Success) {
        problems.push_back(at + "gamma must be symmetric positive definite");
      }
    }
  }
  return problems;
}

void LQSystem::require_valid() const {
  const std::vector<std::string> problems = check();
  if (problems.empty()) return;
  std::string msg = "invalid LQ system: ";
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (i) msg += "; ";
    msg += problems[i];
  }
  throw ValidationError(msg);
}

RiccatiFlowResult riccati_flow(const LQSystem& lq, const Eigen::MatrixXd& k_end,
                               double s0, double s1, double step) {
  if (!(s1 > s0)) throw ValidationError("riccati_flow requires s0 < s1");
  const int n = lq.state_dim;
  if (k_end.rows() != n || k_end.cols() != n) {
    throw ValidationError("K_end must be " + std::to_string(n) + "x" +
                          std::to_string(n) + " (got " + DimStr(k_end) + ")");
  }

  auto rhs = [&](double s, const Eigen::MatrixXd& K) -> Eigen::MatrixXd {
    const Eigen::MatrixXd P = lq.P.value(s);
    const Eigen::MatrixXd A = lq.A.value(s);
    Eigen::MatrixXd quad = Eigen::MatrixXd::Zero(n, n);
    if (lq.control_dim > 0) {
      const Eigen::MatrixXd Q = lq.Q.value(s);
      const Eigen::MatrixXd B = lq.B.value(s);
      const Eigen::MatrixXd C = lq.C.value(s);
      Eigen::LLT<Eigen::MatrixXd> llt(Symmetrize(C));
      if (llt.info() != Eigen::Success) {
        throw NumericalError("C not positive definite at s=" + Num(s));
      }
      const Eigen::MatrixXd W = K * Q + B;             // n×m
      quad = W * llt.solve(W.transpose());             // W C⁻¹ Wᵀ
    }
    return -(A + K * P + P.transpose() * K - quad);
  };

  const int steps = steps_for(s1 - s0, step);
  RiccatiFlowResult out;
  out.times.resize(steps + 1);
  out.k.resize(steps + 1);
  for (int j = 0; j <= steps; ++j) out.times[j] = mesh_time(s0, s1, steps, j);
  out.k[steps] = Symmetrize(k_end);

  Eigen::MatrixXd K = out.k[steps];
  for (int j = steps; j > 0; --j) {
    const double sb = out.times[j];
    const double sa = out.times[j - 1];
    const double h = sa - sb;  // negative: integrating backward
    const Eigen::MatrixXd f1 = rhs(sb, K);
    const Eigen::MatrixXd f2 = rhs(sb + 0.5 * h, K + 0.5 * h * f1);
    const Eigen::MatrixXd f3 = rhs(sb + 0.5 * h, K + 0.5 * h * f2);
    const Eigen::MatrixXd f4 = rhs(sa, K + h * f3);
    K = Symmetrize(K + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4));
    if (!K.allFinite() || K.cwiseAbs().maxCoeff() > 1e12) {
      throw NumericalError("Riccati flow blow-up (finite escape) near s=" +
                           Num(sa));
    }
    out.k[j - 1] = K;
  }
  return out;
}

Eigen::MatrixXd impulse_gain(const Eigen::MatrixXd& k_plus,
                             const Eigen::MatrixXd& M, const Eigen::MatrixXd& N,
                             const Eigen::MatrixXd& beta,
                             const Eigen::MatrixXd& gamma) {
  const int n = static_cast<int>(k_plus.rows());
  const Eigen::MatrixXd EM = Eigen::MatrixXd::Identity(n, n) + M;
  const Eigen::MatrixXd S =
      Symmetrize(N.transpose() * k_plus * N + gamma);
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    throw NumericalError(
        "N'K+N + gamma not positive definite (smallest eigenvalue " +
        Num(es.eigenvalues().minCoeff()) + ")");
  }
  return -llt.solve(N.transpose() * k_plus * EM + beta.transpose());
}

Eigen::MatrixXd riccati_jump(const Eigen::MatrixXd& k_plus,
                             const Eigen::MatrixXd& M, const Eigen::MatrixXd& N,
                             const Eigen::MatrixXd& alpha,
                             const Eigen::MatrixXd& beta,
                             const Eigen::MatrixXd& gamma) {
  const int n = static_cast<int>(k_plus.rows());
  const Eigen::MatrixXd EM = Eigen::MatrixXd::Identity(n, n) + M;
  const Eigen::MatrixXd S =
      Symmetrize(N.transpose() * k_plus * N + gamma);
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    throw NumericalError(
        "N'K+N + gamma not positive definite (smallest eigenvalue " +
        Num(es.eigenvalues().minCoeff()) + ")");
  }
  const Eigen::MatrixXd G = EM.transpose() * k_plus * N + beta;  // n×m_w
  return Symmetrize(EM.transpose() * k_plus * EM + alpha -
                    G * llt.solve(G.transpose()));
}

RiccatiSolution::RiccatiSolution(LQSystem system, RiccatiOptions options,
                                 std::vector<double> times,
                                 std::vector<int> sides,
                                 std::vector<Eigen::MatrixXd> k,
                                 std::vector<Eigen::MatrixXd> gains)
    : system_(std::move(system)),
      options_(options),
      times_(std::move(times)),
      sides_(std::move(sides)),
      k_(std::move(k)),
      gains_(std::move(gains)) {}

Eigen::MatrixXd RiccatiSolution::value_matrix(double s, KSide side) const {
  if (times_.empty()) throw Error("empty Riccati solution");
  if (s < 0.0 || s > system_.horizon) {
    throw ValidationError("s=" + Num(s) + " outside [0, " +
                          Num(system_.horizon) + "]");
  }
  const auto it = std::lower_bound(times_.begin(), times_.end(), s - 1e-12);
  std::size_t idx = static_cast<std::size_t>(it - times_.begin());
  if (idx < times_.size() && std::abs(times_[idx] - s) <= 1e-12) {
    // Exact mesh hit. Impulse times store a (minus, plus) pair.
    if (idx + 1 < times_.size() && times_[idx + 1] == times_[idx]) {
      return side == KSide::kMinus ? k_[idx] : k_[idx + 1];
    }
    return k_[idx];
  }
  const auto hi = std::upper_bound(times_.begin(), times_.end(), s);
  const std::size_t j1 = static_cast<std::size_t>(hi - times_.begin());
  if (j1 == 0 || j1 >= times_.size()) {
    throw NumericalError("time s=" + Num(s) + " not bracketed by the K mesh");
  }
  const std::size_t j0 = j1 - 1;
  const double t0 = times_[j0];
  const double t1 = times_[j1];
  const double theta = (s - t0) / (t1 - t0);
  return (1.0 - theta) * k_[j0] + theta * k_[j1];
}

Eigen::MatrixXd RiccatiSolution::feedback_gain(double s, KSide side) const {
  const Eigen::MatrixXd K = value_matrix(s, side);
  const Eigen::MatrixXd C = system_.C.value(s);
  Eigen::LLT<Eigen::MatrixXd> llt(Symmetrize(C));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("C not positive definite at s=" + Num(s));
  }
  return -llt.solve(system_.Q.value(s).transpose() * K +
                    system_.B.value(s).transpose());
}

Eigen::VectorXd RiccatiSolution::feedback_control(
    double s, const Eigen::VectorXd& x) const {
  return feedback_gain(s) * x;
}

RiccatiSolution solve_impulsive_riccati(const LQSystem& lq,
                                        const RiccatiOptions& options) {
  lq.require_valid();
  const std::size_t nk = lq.impulses.size();

  std::vector<double> bounds;
  bounds.reserve(nk + 2);
  bounds.push_back(0.0);
  for (const LQImpulse& imp : lq.impulses) bounds.push_back(imp.time);
  bounds.push_back(lq.horizon);

  std::vector<RiccatiFlowResult> segs(nk + 1);
  std::vector<Eigen::MatrixXd> gains(nk);
  Eigen::MatrixXd k_end = Symmetrize(lq.A0);
  for (std::size_t k = nk + 1; k-- > 0;) {
    segs[k] = riccati_flow(lq, k_end, bounds[k], bounds[k + 1], options.step);
    if (k > 0) {
      const LQImpulse& imp = lq.impulses[k - 1];
      const Eigen::MatrixXd& k_plus = segs[k].k.front();
      const Eigen::MatrixXd beta =
          options.zero_beta
              ? Eigen::MatrixXd::Zero(imp.beta.rows(), imp.beta.cols())
              : imp.beta;
      gains[k - 1] = impulse_gain(k_plus, imp.M, imp.N, beta, imp.gamma);
      k_end = riccati_jump(k_plus, imp.M, imp.N, imp.alpha, beta, imp.gamma);
    }
  }

  std::vector<double> times;
  std::vector<int> sides;
  std::vector<Eigen::MatrixXd> kpath;
  for (std::size_t k = 0; k <= nk; ++k) {
    const RiccatiFlowResult& seg = segs[k];
    for (std::size_t j = 0; j < seg.times.size(); ++j) {
      int side = 0;
      if (j == 0 && k > 0) side = +1;
      if (j + 1 == seg.times.size() && k < nk) side = -1;
      times.push_back(seg.times[j]);
      sides.push_back(side);
      kpath.push_back(seg.k[j]);
    }
  }
  return RiccatiSolution(lq, options, std::move(times), std::move(sides),
                         std::move(kpath), std::move(gains));
}

double lq_value(const RiccatiSolution& sol, double s, KSide side,
                const Eigen::VectorXd& x) {
  const Eigen::MatrixXd K = sol.value_matrix(s, side);
  if (x.size() != K.rows()) {
    throw ValidationError("state has dimension " + std::to_string(x.size()) +
                          ", expected " + std::to_string(K.rows()));
  }
  return x.dot(K * x);
}

}  // namespace ioc
