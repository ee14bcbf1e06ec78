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

#include "ioc/model.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <utility>

#include "ioc/errors.hpp"

namespace ioc {
namespace {

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<std::string> IndexedNames(const char* prefix, int count) {
  std::vector<std::string> names;
  names.reserve(count);
  for (int i = 1; i <= count; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

VarSet JoinVars(std::initializer_list<std::vector<std::string>> groups) {
  std::vector<std::string> all;
  for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
  return VarSet(std::move(all));
}

/// Parses `text` against `vars`, appending "label: reason" on failure.
std::optional<Expression> ParseChecked(const std::string& label,
                                       const std::string& text,
                                       const VarSet& vars,
                                       std::vector<std::string>& errors) {
  try {
    return Expression::parse(text.empty() ? "0" : text, vars);
  } catch (const Error& e) {
    errors.push_back(label + ": " + e.what());
    return std::nullopt;
  }
}

void CheckImpulseTimes(const std::vector<double>& times, double horizon,
                       std::vector<std::string>& errors) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k > 0 && !(times[k] > times[k - 1])) {
      errors.push_back("impulse times not strictly increasing");
      break;
    }
  }
  for (double tau : times) {
    if (!(tau > 0.0) || !(tau < horizon)) {
      errors.push_back("impulse time " + Num(tau) +
                       " must lie strictly inside (0, " + Num(horizon) + ")");
    }
  }
}

std::string JoinErrors(const std::vector<std::string>& errors) {
  std::string msg;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (i) msg += "; ";
    msg += errors[i];
  }
  return msg;
}

}  // namespace

ControlSet ControlSet::finite(std::vector<Eigen::VectorXd> pts) {
  ControlSet out;
  out.kind = Kind::kFinite;
  out.points = std::move(pts);
  return out;
}

ControlSet ControlSet::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           const std::vector<int>& samples) {
  ControlSet out;
  out.kind = Kind::kBox;
  out.lo = lo;
  out.hi = hi;
  out.samples_per_axis = samples;
  return out;
}

ControlSet ControlSet::single(const Eigen::VectorXd& point) {
  return finite({point});
}

int ControlSet::dim() const {
  if (kind == Kind::kFinite) {
    return points.empty() ? 0 : static_cast<int>(points.front().size());
  }
  return static_cast<int>(lo.size());
}

std::size_t ControlSet::count() const {
  if (kind == Kind::kFinite) return points.size();
  std::size_t total = 1;
  for (int s : samples_per_axis) total *= static_cast<std::size_t>(s);
  return total;
}

std::vector<std::string> ControlSet::check() const {
  std::vector<std::string> problems;
  if (kind == Kind::kFinite) {
    if (points.empty()) {
      problems.push_back("empty control set");
      return problems;
    }
    const Eigen::Index d = points.front().size();
    for (const Eigen::VectorXd& p : points) {
      if (p.size() != d) {
        problems.push_back("control points have mixed dimensions");
        break;
      }
    }
    return problems;
  }
  if (lo.size() != hi.size() ||
      static_cast<std::size_t>(lo.size()) != samples_per_axis.size()) {
    problems.push_back("box bounds and sample counts have mixed dimensions");
    return problems;
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) {
      problems.push_back("box axis " + std::to_string(i + 1) + ": lower bound " +
                         Num(lo[i]) + " exceeds upper bound " + Num(hi[i]));
    }
  }
  for (std::size_t i = 0; i < samples_per_axis.size(); ++i) {
    if (samples_per_axis[i] < 1) {
      problems.push_back("box axis " + std::to_string(i + 1) +
                         ": sample count must be at least 1");
    }
  }
  return problems;
}

std::vector<Eigen::VectorXd> ControlSet::enumerate() const {
  if (kind == Kind::kFinite) return points;
  const int d = dim();
  std::vector<std::vector<double>> axis(d);
  for (int i = 0; i < d; ++i) {
    const int count = samples_per_axis[i];
    axis[i].reserve(count);
    if (count == 1) {
      axis[i].push_back(0.5 * (lo[i] + hi[i]));
    } else {
      for (int j = 0; j < count; ++j) {
        axis[i].push_back(lo[i] + j * (hi[i] - lo[i]) / (count - 1));
      }
    }
  }
  std::vector<Eigen::VectorXd> out;
  out.reserve(count());
  Eigen::VectorXd point(d);
  std::vector<int> idx(d, 0);
  while (true) {
    for (int i = 0; i < d; ++i) point[i] = axis[i][idx[i]];
    out.push_back(point);
    int axis_to_bump = d - 1;
    while (axis_to_bump >= 0 && ++idx[axis_to_bump] >= samples_per_axis[axis_to_bump]) {
      idx[axis_to_bump] = 0;
      --axis_to_bump;
    }
    if (axis_to_bump < 0) break;
  }
  return out;
}

int HybridSystem::extra_dim() const {
  switch (impulse_arg) {
    case ImpulseArg::kControlLeftLimit: return mu;
    case ImpulseArg::kPreviousImpulse: return mw;
    case ImpulseArg::kNone: return 0;
  }
  return 0;
}

Eigen::VectorXd HybridSystem::eval_flow(double t, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& u) const {
  std::vector<double> env(1 + n + mu);
  env[0] = t;
  for (int i = 0; i < n; ++i) env[1 + i] = x[i];
  for (int k = 0; k < mu; ++k) env[1 + n + k] = u[k];
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = flow[i].value(env);
  return out;
}

Eigen::VectorXd HybridSystem::eval_jump(double t, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& w,
                                        const Eigen::VectorXd& extra) const {
  const int ed = extra_dim();
  std::vector<double> env(1 + n + mw + ed);
  env[0] = t;
  for (int i = 0; i < n; ++i) env[1 + i] = x[i];
  for (int k = 0; k < mw; ++k) env[1 + n + k] = w[k];
  for (int k = 0; k < ed; ++k) env[1 + n + mw + k] = extra[k];
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = impulse_map[i].value(env);
  return out;
}

double CostSpec::eval_running(double t, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u) const {
  std::vector<double> env(1 + x.size() + u.size());
  env[0] = t;
  for (Eigen::Index i = 0; i < x.size(); ++i) env[1 + i] = x[i];
  for (Eigen::Index k = 0; k < u.size(); ++k) env[1 + x.size() + k] = u[k];
  return running.value(env);
}

double CostSpec::eval_impulse(double t, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& w,
                              const Eigen::VectorXd& extra) const {
  std::vector<double> env(1 + x.size() + w.size() + extra.size());
  env[0] = t;
  Eigen::Index at = 1;
  for (Eigen::Index i = 0; i < x.size(); ++i) env[at++] = x[i];
  for (Eigen::Index k = 0; k < w.size(); ++k) env[at++] = w[k];
  for (Eigen::Index k = 0; k < extra.size(); ++k) env[at++] = extra[k];
  return impulse.value(env);
}

double CostSpec::eval_terminal(const Eigen::VectorXd& x) const {
  std::vector<double> env(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) env[i] = x[i];
  return terminal.value(env);
}

const ValidatedModel& ValidationResult::value() const {
  if (model) return *model;
  throw ValidationError("invalid system: " + JoinErrors(errors));
}

const SampledDataSystem& SampledValidation::value() const {
  if (system) return *system;
  throw ValidationError("invalid sampled-data system: " + JoinErrors(errors));
}

ValidationResult validate_system(const HybridSystemSpec& spec,
                                 const CostText& costs) {
  ValidationResult out;
  std::vector<std::string>& errors = out.errors;

  const int n = spec.state_dim;
  if (n < 1) errors.push_back("state dimension must be at least 1");
  if (!(spec.horizon > 0.0)) errors.push_back("horizon must be positive");
  for (const std::string& p : spec.controls_u.check()) {
    errors.push_back("controls u: " + p);
  }
  for (const std::string& p : spec.controls_w.check()) {
    errors.push_back("controls w: " + p);
  }
  if (!spec.impulse_times.empty() && !spec.event_surfaces.empty()) {
    errors.push_back(
        "impulse schedule cannot mix fixed times and event surfaces");
  }
  CheckImpulseTimes(spec.impulse_times, spec.horizon, errors);
  if (n < 1) return out;

  const int mu = spec.controls_u.dim();
  const int mw = spec.controls_w.dim();
  const std::vector<std::string> xs = IndexedNames("x", n);
  const std::vector<std::string> us = IndexedNames("u", mu);
  const std::vector<std::string> ws = IndexedNames("w", mw);
  std::vector<std::string> extras;
  if (spec.impulse_arg == ImpulseArg::kControlLeftLimit) {
    extras = IndexedNames("a", mu);
  } else if (spec.impulse_arg == ImpulseArg::kPreviousImpulse) {
    extras = IndexedNames("b", mw);
  }
  const VarSet flow_vars = JoinVars({{"t"}, xs, us});
  const VarSet jump_vars = JoinVars({{"t"}, xs, ws, extras});
  const VarSet surface_vars = JoinVars({{"t"}, xs});
  const VarSet terminal_vars = JoinVars({xs});

  const bool has_schedule =
      !spec.impulse_times.empty() || !spec.event_surfaces.empty();

  std::vector<Expression> flow;
  if (static_cast<int>(spec.flow.size()) != n) {
    errors.push_back("flow must have " + std::to_string(n) +
                     " entries (got " + std::to_string(spec.flow.size()) + ")");
  } else {
    for (int i = 0; i < n; ++i) {
      if (auto e = ParseChecked("f[" + std::to_string(i + 1) + "]",
                                spec.flow[i], flow_vars, errors)) {
        flow.push_back(std::move(*e));
      }
    }
  }

  std::vector<Expression> impulse_map;
  if (has_schedule && spec.impulse_map.empty()) {
    errors.push_back("impulse map required when an impulse schedule is given");
  } else if (!spec.impulse_map.empty()) {
    if (static_cast<int>(spec.impulse_map.size()) != n) {
      errors.push_back("impulse map must have " + std::to_string(n) +
                       " entries (got " +
                       std::to_string(spec.impulse_map.size()) + ")");
    } else {
      for (int i = 0; i < n; ++i) {
        if (auto e = ParseChecked("I[" + std::to_string(i + 1) + "]",
                                  spec.impulse_map[i], jump_vars, errors)) {
          impulse_map.push_back(std::move(*e));
        }
      }
    }
  }

  std::vector<Expression> surfaces;
  for (std::size_t k = 0; k < spec.event_surfaces.size(); ++k) {
    if (auto e = ParseChecked("surface[" + std::to_string(k + 1) + "]",
                              spec.event_surfaces[k], surface_vars, errors)) {
      surfaces.push_back(std::move(*e));
    }
  }

  Eigen::VectorXd initial_b;
  if (!spec.initial_prev_impulse.empty() &&
      spec.impulse_arg != ImpulseArg::kPreviousImpulse) {
    errors.push_back(
        "initial previous-impulse value requires the aftereffect argument");
  } else if (spec.impulse_arg == ImpulseArg::kPreviousImpulse) {
    if (spec.initial_prev_impulse.empty()) {
      initial_b = Eigen::VectorXd::Zero(mw);
    } else if (static_cast<int>(spec.initial_prev_impulse.size()) != mw) {
      errors.push_back("initial previous-impulse value must have " +
                       std::to_string(mw) + " entries (got " +
                       std::to_string(spec.initial_prev_impulse.size()) + ")");
    } else {
      initial_b = Eigen::Map<const Eigen::VectorXd>(
          spec.initial_prev_impulse.data(), mw);
    }
  }

  auto running = ParseChecked("F", costs.running, flow_vars, errors);
  auto impulse_cost = ParseChecked("Phi", costs.impulse, jump_vars, errors);
  auto terminal = ParseChecked("F0", costs.terminal, terminal_vars, errors);

  if (!errors.empty()) return out;

  HybridSystem sys;
  sys.n = n;
  sys.mu = mu;
  sys.mw = mw;
  sys.flow = std::move(flow);
  sys.impulse_map = std::move(impulse_map);
  sys.impulse_arg = spec.impulse_arg;
  if (!spec.event_surfaces.empty()) {
    sys.schedule.kind = ImpulseSchedule::Kind::kEventSurface;
    sys.schedule.surfaces = std::move(surfaces);
  } else {
    sys.schedule.kind = ImpulseSchedule::Kind::kFixedTimes;
    sys.schedule.times = spec.impulse_times;
  }
  sys.controls_u = spec.controls_u;
  sys.controls_w = spec.controls_w;
  sys.horizon = spec.horizon;
  sys.initial_prev_impulse = std::move(initial_b);
  sys.flow_vars = flow_vars;
  sys.jump_vars = jump_vars;
  sys.surface_vars = surface_vars;
  sys.terminal_vars = terminal_vars;

  CostSpec cs;
  cs.running = std::move(*running);
  cs.impulse = std::move(*impulse_cost);
  cs.terminal = std::move(*terminal);

  out.model = ValidatedModel{std::move(sys), std::move(cs)};
  return out;
}

InterpolationOperator InterpolationOperator::zero_order_hold(int dim) {
  InterpolationOperator op;
  op.kind = Kind::kZeroOrderHold;
  op.dim = dim;
  return op;
}

InterpolationOperator InterpolationOperator::basis_functions(
    int dim, const std::vector<std::vector<std::string>>& per_interval) {
  InterpolationOperator op;
  op.kind = Kind::kBasis;
  op.dim = dim;
  const VarSet tvars({"t"});
  op.basis.reserve(per_interval.size());
  for (const auto& entries : per_interval) {
    std::vector<Expression> mat;
    mat.reserve(entries.size());
    for (const std::string& e : entries) {
      mat.push_back(Expression::parse(e, tvars));
    }
    op.basis.push_back(std::move(mat));
  }
  return op;
}

std::vector<std::string> InterpolationOperator::check(
    std::size_t interval_count) const {
  std::vector<std::string> problems;
  if (dim < 1) problems.push_back("interpolation dimension must be at least 1");
  if (kind == Kind::kZeroOrderHold) return problems;
  if (basis.empty()) {
    problems.push_back("basis interpolation requires basis functions");
    return problems;
  }
  if (basis.size() != 1 && basis.size() != interval_count) {
    problems.push_back("basis must supply 1 or " +
                       std::to_string(interval_count) +
                       " interval entries (got " +
                       std::to_string(basis.size()) + ")");
  }
  const std::size_t need = static_cast<std::size_t>(dim) * dim;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (basis[k].size() != need) {
      problems.push_back("basis interval " + std::to_string(k + 1) +
                         " must have " + std::to_string(need) +
                         " entries (got " + std::to_string(basis[k].size()) +
                         ")");
    }
  }
  return problems;
}

Eigen::VectorXd interpolate(const InterpolationOperator& op,
                            const std::vector<Eigen::VectorXd>& samples,
                            std::span<const double> times, double horizon,
                            double t) {
  if (t < 0.0 || t > horizon) {
    throw EvalError("t=" + Num(t) + " outside [0, " + Num(horizon) + "]");
  }
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t interval = static_cast<std::size_t>(it - times.begin());
  if (interval >= samples.size()) {
    throw EvalError("missing sample for interval " +
                    std::to_string(interval + 1));
  }
  const Eigen::VectorXd& z = samples[interval];
  if (z.size() != op.dim) {
    throw EvalError("sample for interval " + std::to_string(interval + 1) +
                    " has dimension " + std::to_string(z.size()) +
                    ", expected " + std::to_string(op.dim));
  }
  if (op.kind == InterpolationOperator::Kind::kZeroOrderHold) return z;
  const std::vector<Expression>* mat = nullptr;
  if (op.basis.size() == 1) {
    mat = &op.basis[0];
  } else if (interval < op.basis.size()) {
    mat = &op.basis[interval];
  } else {
    throw EvalError("missing basis for interval " +
                    std::to_string(interval + 1));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(op.dim);
  const double env[1] = {t};
  for (int i = 0; i < op.dim; ++i) {
    for (int j = 0; j < op.dim; ++j) {
      out[i] += (*mat)[static_cast<std::size_t>(i) * op.dim + j].value(env) * z[j];
    }
  }
  return out;
}

SampledValidation validate_system(const SampledDataSpec& spec) {
  SampledValidation out;
  std::vector<std::string>& errors = out.errors;

  const bool c1 = spec.variant == SampledVariant::kC1D1 ||
                  spec.variant == SampledVariant::kC1D2;
  const bool d1 = spec.variant == SampledVariant::kC1D1 ||
                  spec.variant == SampledVariant::kC2D1;

  if (spec.cont_dim < 1) errors.push_back("continuous dimension must be at least 1");
  if (spec.disc_dim < 1) errors.push_back("discrete dimension must be at least 1");
  if (spec.cont_control_dim < 0 || spec.disc_control_dim < 0) {
    errors.push_back("control dimensions must be nonnegative");
  }
  if (!(spec.horizon > 0.0)) errors.push_back("horizon must be positive");
  CheckImpulseTimes(spec.times, spec.horizon, errors);
  if (!errors.empty()) return out;

  const int ny = spec.cont_dim;
  const int mu = spec.cont_control_dim;
  const int nz = spec.disc_dim;
  const int mw = spec.disc_control_dim;

  const std::vector<std::string> ys = IndexedNames("y", ny);
  const std::vector<std::string> us = IndexedNames("u", mu);
  const std::vector<std::string> pzs = IndexedNames("pz", nz);
  const std::vector<std::string> qws = c1 ? IndexedNames("qw", mw)
                                          : std::vector<std::string>{};
  const std::vector<std::string> zs = IndexedNames("z", nz);
  const std::vector<std::string> wss = IndexedNames("w", mw);

  const VarSet flow_vars = JoinVars({{"t"}, ys, us, pzs, qws});
  const VarSet transition_vars =
      d1 ? JoinVars({{"t"}, ys, us, zs, wss}) : JoinVars({{"t"}, ys, zs, wss});

  std::vector<Expression> flow;
  if (static_cast<int>(spec.flow.size()) != ny) {
    errors.push_back("flow must have " + std::to_string(ny) + " entries (got " +
                     std::to_string(spec.flow.size()) + ")");
  } else {
    for (int i = 0; i < ny; ++i) {
      if (auto e = ParseChecked("f[" + std::to_string(i + 1) + "]",
                                spec.flow[i], flow_vars, errors)) {
        flow.push_back(std::move(*e));
      }
    }
  }

  std::vector<Expression> transition;
  if (static_cast<int>(spec.transition.size()) != nz) {
    errors.push_back("transition must have " + std::to_string(nz) +
                     " entries (got " + std::to_string(spec.transition.size()) +
                     ")");
  } else {
    for (int j = 0; j < nz; ++j) {
      if (auto e = ParseChecked("g[" + std::to_string(j + 1) + "]",
                                spec.transition[j], transition_vars, errors)) {
        transition.push_back(std::move(*e));
      }
    }
  }

  if (spec.p.dim != nz) {
    errors.push_back("operator p must have dimension " + std::to_string(nz) +
                     " (got " + std::to_string(spec.p.dim) + ")");
  }
  for (const std::string& m : spec.p.check(spec.times.size() + 1)) {
    errors.push_back("operator p: " + m);
  }
  if (c1) {
    if (spec.q.dim != mw) {
      errors.push_back("operator q must have dimension " + std::to_string(mw) +
                       " (got " + std::to_string(spec.q.dim) + ")");
    }
    for (const std::string& m : spec.q.check(spec.times.size() + 1)) {
      errors.push_back("operator q: " + m);
    }
  }

  if (!errors.empty()) return out;

  SampledDataSystem sys;
  sys.variant = spec.variant;
  sys.ny = ny;
  sys.mu = mu;
  sys.nz = nz;
  sys.mw = mw;
  sys.flow = std::move(flow);
  sys.transition = std::move(transition);
  sys.p = spec.p;
  sys.q = spec.q;
  sys.times = spec.times;
  sys.horizon = spec.horizon;
  sys.flow_vars = flow_vars;
  sys.transition_vars = transition_vars;
  out.system = std::move(sys);
  return out;
}

ValidationResult reduce_sampled_data(const SampledDataSystem& sd,
                                     const CostText& costs,
                                     const ControlSet& controls_u,
                                     const ControlSet& controls_w) {
  ValidationResult out;
  const bool c1 = sd.variant == SampledVariant::kC1D1 ||
                  sd.variant == SampledVariant::kC1D2;
  const bool d1 = sd.variant == SampledVariant::kC1D1 ||
                  sd.variant == SampledVariant::kC2D1;

  if (sd.p.kind != InterpolationOperator::Kind::kZeroOrderHold) {
    out.errors.push_back(
        "only zero-order-hold operators reduce to impulsive form (p)");
  }
  if (c1 && sd.q.kind != InterpolationOperator::Kind::kZeroOrderHold) {
    out.errors.push_back(
        "only zero-order-hold operators reduce to impulsive form (q)");
  }
  if (controls_u.dim() != sd.mu) {
    out.errors.push_back("controls u must have dimension " +
                         std::to_string(sd.mu) + " (got " +
                         std::to_string(controls_u.dim()) + ")");
  }
  if (controls_w.dim() != sd.mw) {
    out.errors.push_back("controls w must have dimension " +
                         std::to_string(sd.mw) + " (got " +
                         std::to_string(controls_w.dim()) + ")");
  }
  if (!out.errors.empty()) return out;

  const int held = c1 ? sd.mw : 0;
  const int n_aug = sd.ny + sd.nz + held;
  const std::vector<std::string> xs = IndexedNames("x", n_aug);
  const std::vector<std::string> us = IndexedNames("u", sd.mu);
  const std::vector<std::string> wss = IndexedNames("w", sd.mw);
  const std::vector<std::string> as =
      d1 ? IndexedNames("a", sd.mu) : std::vector<std::string>{};
  const VarSet flow_vars = JoinVars({{"t"}, xs, us});
  const VarSet jump_vars = JoinVars({{"t"}, xs, wss, as});

  // y_i -> x_i, pz_j / z_j -> x_{ny+j}, qw_j -> x_{ny+nz+j}, u_k -> a_k in g.
  std::map<std::string, Expression> fmap, gmap;
  fmap["t"] = Expression::variable("t", flow_vars);
  gmap["t"] = Expression::variable("t", jump_vars);
  for (int i = 0; i < sd.ny; ++i) {
    const std::string xi = "x" + std::to_string(i + 1);
    fmap["y" + std::to_string(i + 1)] = Expression::variable(xi, flow_vars);
    gmap["y" + std::to_string(i + 1)] = Expression::variable(xi, jump_vars);
  }
  for (int j = 0; j < sd.nz; ++j) {
    const std::string xz = "x" + std::to_string(sd.ny + j + 1);
    fmap["pz" + std::to_string(j + 1)] = Expression::variable(xz, flow_vars);
    gmap["z" + std::to_string(j + 1)] = Expression::variable(xz, jump_vars);
  }
  for (int k = 0; k < held; ++k) {
    fmap["qw" + std::to_string(k + 1)] =
        Expression::variable("x" + std::to_string(sd.ny + sd.nz + k + 1),
                             flow_vars);
  }
  for (int k = 0; k < sd.mu; ++k) {
    fmap["u" + std::to_string(k + 1)] =
        Expression::variable("u" + std::to_string(k + 1), flow_vars);
    if (d1) {
      gmap["u" + std::to_string(k + 1)] =
          Expression::variable("a" + std::to_string(k + 1), jump_vars);
    }
  }
  for (int k = 0; k < sd.mw; ++k) {
    gmap["w" + std::to_string(k + 1)] =
        Expression::variable("w" + std::to_string(k + 1), jump_vars);
  }

  HybridSystemSpec spec;
  spec.state_dim = n_aug;
  for (int i = 0; i < sd.ny; ++i) {
    spec.flow.push_back(sd.flow[i].rebind(flow_vars, fmap).str());
  }
  for (int j = 0; j < sd.nz + held; ++j) spec.flow.push_back("0");

  for (int i = 0; i < sd.ny; ++i) spec.impulse_map.push_back("0");
  for (int j = 0; j < sd.nz; ++j) {
    const Expression g = sd.transition[j].rebind(jump_vars, gmap);
    const Expression z =
        Expression::variable("x" + std::to_string(sd.ny + j + 1), jump_vars);
    spec.impulse_map.push_back((g - z).str());
  }
  for (int k = 0; k < held; ++k) {
    const Expression w =
        Expression::variable("w" + std::to_string(k + 1), jump_vars);
    const Expression hw = Expression::variable(
        "x" + std::to_string(sd.ny + sd.nz + k + 1), jump_vars);
    spec.impulse_map.push_back((w - hw).str());
  }

  spec.impulse_arg = d1 ? ImpulseArg::kControlLeftLimit : ImpulseArg::kNone;
  spec.impulse_times = sd.times;
  spec.controls_u = controls_u;
  spec.controls_w = controls_w;
  spec.horizon = sd.horizon;
  return validate_system(spec, costs);
}

namespace {

/// Σ_ij x_i Mat_ij x_j + optional cross/quadratic terms, built by folding so
/// zero entries vanish and the scalar identity prints without factors of 1.
Expression QuadraticForm(const Eigen::MatrixXd& mat,
                         const std::vector<Expression>& left,
                         const std::vector<Expression>& right,
                         const VarSet& vars, double scale = 1.0) {
  Expression sum = Expression::constant(0.0, vars);
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      const double c = scale * mat(i, j);
      if (c == 0.0) continue;
      sum = sum + Expression::constant(c, vars) * left[i] * right[j];
    }
  }
  return sum;
}

Expression LinearCombination(const TimeMatrix& mat, Eigen::Index row,
                             const std::vector<Expression>& terms,
                             const VarSet& vars,
                             const std::map<std::string, Expression>& tmap) {
  Expression sum = Expression::constant(0.0, vars);
  for (int j = 0; j < mat.cols(); ++j) {
    const Expression coeff =
        mat.entry(static_cast<int>(row), j).rebind(vars, tmap);
    if (coeff.is_constant_zero()) continue;
    sum = sum + coeff * terms[j];
  }
  return sum;
}

}  // namespace

ValidationResult lq_to_general(const LQSystem& lq, const ControlSet& controls_u,
                               const ControlSet& controls_w) {
  ValidationResult out;
  out.errors = lq.check();
  if (controls_u.dim() != lq.control_dim) {
    out.errors.push_back("controls u must have dimension " +
                         std::to_string(lq.control_dim) + " (got " +
                         std::to_string(controls_u.dim()) + ")");
  }
  if (controls_w.dim() != lq.impulse_control_dim) {
    out.errors.push_back("controls w must have dimension " +
                         std::to_string(lq.impulse_control_dim) + " (got " +
                         std::to_string(controls_w.dim()) + ")");
  }
  for (std::size_t k = 1; k < lq.impulses.size(); ++k) {
    const LQImpulse& a = lq.impulses[0];
    const LQImpulse& b = lq.impulses[k];
    if (a.M != b.M || a.N != b.N || a.alpha != b.alpha || a.beta != b.beta ||
        a.gamma != b.gamma) {
      out.errors.push_back(
          "expression form requires identical jump data at every impulse time");
      break;
    }
  }
  if (!out.errors.empty()) return out;

  const int n = lq.state_dim;
  const int mu = lq.control_dim;
  const int mw = lq.impulse_control_dim;
  const std::vector<std::string> xs = IndexedNames("x", n);
  const std::vector<std::string> us = IndexedNames("u", mu);
  const std::vector<std::string> wss = IndexedNames("w", mw);
  const VarSet flow_vars = JoinVars({{"t"}, xs, us});
  const VarSet jump_vars = JoinVars({{"t"}, xs, wss});
  const VarSet terminal_vars = JoinVars({xs});

  std::vector<Expression> fx, fu, jx, jw, tx;
  for (const std::string& name : xs) {
    fx.push_back(Expression::variable(name, flow_vars));
    jx.push_back(Expression::variable(name, jump_vars));
    tx.push_back(Expression::variable(name, terminal_vars));
  }
  for (const std::string& name : us) {
    fu.push_back(Expression::variable(name, flow_vars));
  }
  for (const std::string& name : wss) {
    jw.push_back(Expression::variable(name, jump_vars));
  }
  std::map<std::string, Expression> flow_tmap{
      {"t", Expression::variable("t", flow_vars)}};

  HybridSystemSpec spec;
  spec.state_dim = n;
  for (int i = 0; i < n; ++i) {
    const Expression fi = LinearCombination(lq.P, i, fx, flow_vars, flow_tmap) +
                          LinearCombination(lq.Q, i, fu, flow_vars, flow_tmap);
    spec.flow.push_back(fi.str());
  }

  CostText costs;
  {
    Expression F = Expression::constant(0.0, flow_vars);
    // A, B, C may be time-varying; expand entrywise with t left symbolic.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Expression c = lq.A.entry(i, j).rebind(flow_vars, flow_tmap);
        if (c.is_constant_zero()) continue;
        F = F + c * fx[i] * fx[j];
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < mu; ++k) {
        const Expression c = lq.B.entry(i, k).rebind(flow_vars, flow_tmap);
        if (c.is_constant_zero()) continue;
        F = F + Expression::constant(2.0, flow_vars) * c * fx[i] * fu[k];
      }
    }
    for (int k = 0; k < mu; ++k) {
      for (int l = 0; l < mu; ++l) {
        const Expression c = lq.C.entry(k, l).rebind(flow_vars, flow_tmap);
        if (c.is_constant_zero()) continue;
        F = F + c * fu[k] * fu[l];
      }
    }
    costs.running = F.str();
  }

  if (!lq.impulses.empty()) {
    const LQImpulse& imp = lq.impulses.front();
    for (int i = 0; i < n; ++i) {
      Expression sum = Expression::constant(0.0, jump_vars);
      for (int j = 0; j < n; ++j) {
        if (imp.M(i, j) == 0.0) continue;
        sum = sum + Expression::constant(imp.M(i, j), jump_vars) * jx[j];
      }
      for (int k = 0; k < mw; ++k) {
        if (imp.N(i, k) == 0.0) continue;
        sum = sum + Expression::constant(imp.N(i, k), jump_vars) * jw[k];
      }
      spec.impulse_map.push_back(sum.str());
    }
    const Expression phi =
        QuadraticForm(imp.alpha, jx, jx, jump_vars) +
        QuadraticForm(imp.beta, jx, jw, jump_vars, 2.0) +
        QuadraticForm(imp.gamma, jw, jw, jump_vars);
    costs.impulse = phi.str();
    for (const LQImpulse& each : lq.impulses) {
      spec.impulse_times.push_back(each.time);
    }
  }

  costs.terminal = QuadraticForm(lq.A0, tx, tx, terminal_vars).str();

  spec.controls_u = controls_u;
  spec.controls_w = controls_w;
  spec.horizon = lq.horizon;
  return validate_system(spec, costs);
}

ValidationResult lq_to_general(const LQSystem& lq) {
  auto unit_box = [](int dim) {
    return ControlSet::box(Eigen::VectorXd::Constant(dim, -1.0),
                           Eigen::VectorXd::Constant(dim, 1.0),
                           std::vector<int>(dim, 21));
  };
  return lq_to_general(lq, unit_box(lq.control_dim),
                       unit_box(lq.impulse_control_dim));
}

}  // namespace ioc
