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

#include "ioc/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "ioc/errors.hpp"
#include "ioc/mesh.hpp"

namespace ioc {
namespace {

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string VecStr(const Eigen::VectorXd& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += Num(v[i]);
  }
  return s + ")";
}

/// Splits [0, count) into contiguous chunks, one worker per chunk. Results
/// are independent of the thread count: every item is computed identically.
void ParallelFor(std::size_t count, int threads,
                 const std::function<void(std::size_t, std::size_t, int)>& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || count < 2) {
    fn(0, count, 0);
    return;
  }
  const std::size_t chunk = (count + threads - 1) / threads;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    const std::size_t b = std::min(count, t * chunk);
    const std::size_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e, t] { fn(b, e, t); });
  }
  for (auto& th : pool) th.join();
}

/// Everything a backward step needs, precomputed once per solve.
struct SweepContext {
  const HybridSystem* sys = nullptr;
  const CostSpec* costs = nullptr;
  const Grid* grid = nullptr;
  std::vector<Eigen::VectorXd> u_lattice;
  std::vector<Eigen::VectorXd> w_lattice;
  std::vector<Eigen::VectorXd> nodes;  // node coordinates, by flat index
};

/// min over the u lattice of { delta*F(s,x,a) + interp(later, x + delta*f) }.
/// Shared verbatim by the solver loop and dpp_residual so that node
/// residuals vanish exactly.
double FlowBackup(const SweepContext& ctx, double s, double delta,
                  const Eigen::VectorXd& x, const std::vector<double>& later,
                  std::vector<double>& env, Eigen::VectorXd& foot,
                  long* clamps, int* argmin) {
  const HybridSystem& sys = *ctx.sys;
  env[0] = s;
  for (int d = 0; d < sys.n; ++d) env[1 + d] = x[d];
  double best = std::numeric_limits<double>::infinity();
  int best_a = 0;
  for (std::size_t ai = 0; ai < ctx.u_lattice.size(); ++ai) {
    const Eigen::VectorXd& a = ctx.u_lattice[ai];
    for (int k = 0; k < sys.mu; ++k) env[1 + sys.n + k] = a[k];
    for (int d = 0; d < sys.n; ++d) {
      foot[d] = x[d] + delta * sys.flow[d].value(env);
    }
    const double cand =
        delta * ctx.costs->running.value(env) +
        ctx.grid->interpolate(later, foot, clamps);
    if (cand < best) {
      best = cand;
      best_a = static_cast<int>(ai);
    }
  }
  if (argmin) *argmin = best_a;
  return best;
}

/// One backward flow step over all nodes for a single value array.
void FlowStepSlice(const SweepContext& ctx, double s, double delta,
                   const std::vector<double>& later, std::vector<double>& out,
                   std::vector<int>& ustar_out, long& clamp_total,
                   int threads) {
  const std::size_t nn = ctx.nodes.size();
  out.resize(nn);
  ustar_out.resize(nn);
  std::vector<long> clamp_per_thread(std::max(1, threads), 0);
  ParallelFor(nn, threads, [&](std::size_t b, std::size_t e, int tid) {
    std::vector<double> env(1 + ctx.sys->n + ctx.sys->mu, 0.0);
    Eigen::VectorXd foot(ctx.sys->n);
    for (std::size_t i = b; i < e; ++i) {
      int amin = 0;
      out[i] = FlowBackup(ctx, s, delta, ctx.nodes[i], later, env, foot,
                          &clamp_per_thread[tid], &amin);
      ustar_out[i] = amin;
    }
  });
  for (long c : clamp_per_thread) clamp_total += c;
}

std::vector<Eigen::VectorXd> Enumerated(const ControlSet& set,
                                        const char* which) {
  const auto pts = set.enumerate();
  if (pts.empty()) {
    throw ValidationError(std::string("empty control sample for ") + which);
  }
  return pts;
}

void FillJumpEnv(std::vector<double>& env, const HybridSystem& sys, double tau,
                 const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                 const Eigen::VectorXd& extra) {
  env[0] = tau;
  for (int d = 0; d < sys.n; ++d) env[1 + d] = x[d];
  for (int k = 0; k < sys.mw; ++k) env[1 + sys.n + k] = w[k];
  for (Eigen::Index k = 0; k < extra.size(); ++k) {
    env[1 + sys.n + sys.mw + k] = extra[k];
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid

Grid Grid::uniform(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                   const std::vector<int>& counts, double delta) {
  Grid g;
  g.lo = lo;
  g.hi = hi;
  g.counts = counts;
  g.delta = delta;
  g.check();
  return g;
}

std::size_t Grid::node_count() const {
  std::size_t n = 1;
  for (int c : counts) n *= static_cast<std::size_t>(c);
  return n;
}

Eigen::VectorXd Grid::node(std::size_t flat) const {
  Eigen::VectorXd x(dim());
  for (int d = dim() - 1; d >= 0; --d) {
    const int i = static_cast<int>(flat % counts[d]);
    flat /= counts[d];
    x[d] = lo[d] + i * spacing(d);
  }
  return x;
}

std::size_t Grid::flat_index(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (int d = 0; d < dim(); ++d) flat = flat * counts[d] + idx[d];
  return flat;
}

std::size_t Grid::nearest_node(const Eigen::VectorXd& x) const {
  std::size_t flat = 0;
  for (int d = 0; d < dim(); ++d) {
    double u = (x[d] - lo[d]) / spacing(d);
    u = std::min(std::max(u, 0.0), static_cast<double>(counts[d] - 1));
    flat = flat * counts[d] + static_cast<int>(std::llround(u));
  }
  return flat;
}

bool Grid::contains(const Eigen::VectorXd& x) const {
  for (int d = 0; d < dim(); ++d) {
    if (x[d] < lo[d] || x[d] > hi[d]) return false;
  }
  return true;
}

double Grid::interpolate(const std::vector<double>& values,
                         const Eigen::VectorXd& x, long* clamps) const {
  const int n = dim();
  int base[8];
  double frac[8];
  if (n > 8) throw ValidationError("grid dimension above 8 is not supported");
  for (int d = 0; d < n; ++d) {
    double u = (x[d] - lo[d]) / spacing(d);
    const double r = std::round(u);
    // Snap near-node coordinates so node reads are bit-exact.
    if (std::abs(u - r) <= 1e-9 && r >= 0.0 && r <= counts[d] - 1) u = r;
    if (u < 0.0) {
      u = 0.0;
      if (clamps) ++*clamps;
    } else if (u > counts[d] - 1) {
      u = static_cast<double>(counts[d] - 1);
      if (clamps) ++*clamps;
    }
    int i = static_cast<int>(u);
    if (i > counts[d] - 2) i = counts[d] - 2;
    base[d] = i;
    frac[d] = u - i;
  }
  bool on_node = true;
  for (int d = 0; d < n; ++d) {
    if (frac[d] != 0.0 && frac[d] != 1.0) {
      on_node = false;
      break;
    }
  }
  if (on_node) {  // bit-exact node read
    std::size_t flat = 0;
    for (int d = 0; d < n; ++d) {
      flat = flat * counts[d] + base[d] + (frac[d] == 1.0 ? 1 : 0);
    }
    return values[flat];
  }
  double sum = 0.0;
  const unsigned corners = 1u << n;
  for (unsigned mask = 0; mask < corners; ++mask) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int d = 0; d < n; ++d) {
      const int bit = (mask >> d) & 1u;
      w *= bit ? frac[d] : 1.0 - frac[d];
      flat = flat * counts[d] + base[d] + bit;
    }
    if (w != 0.0) sum += w * values[flat];
  }
  return sum;
}

void Grid::check() const {
  if (lo.size() == 0 || lo.size() != hi.size() ||
      static_cast<std::size_t>(lo.size()) != counts.size()) {
    throw ValidationError("grid bounds and counts have mismatched dimensions");
  }
  for (int d = 0; d < dim(); ++d) {
    if (counts[d] < 2) {
      throw ValidationError("grid needs at least 2 nodes per dimension");
    }
    if (!(lo[d] < hi[d])) {
      throw ValidationError("grid bounds must satisfy lo < hi");
    }
  }
  if (!(delta > 0.0)) throw ValidationError("grid time step must be positive");
  if (node_count() > 50'000'000u) {
    throw ValidationError("grid too large (over 5e7 nodes)");
  }
}

// ---------------------------------------------------------------------------
// ValueFunction / Policy

std::size_t ValueFunction::slice_index(double s, int side) const {
  auto it = std::lower_bound(times.begin(), times.end(), s - 1e-9);
  if (it == times.end() || std::abs(*it - s) > 1e-9) {
    throw ValidationError("no solver slice at s=" + Num(s));
  }
  std::size_t i = static_cast<std::size_t>(it - times.begin());
  if (i + 1 < times.size() && std::abs(times[i + 1] - s) <= 1e-9) {
    return side == -1 ? i : i + 1;
  }
  return i;
}

double ValueFunction::value_at(double s, const Eigen::VectorXd& x) const {
  int param = 0;
  if (variant == Variant::kAftereffect) {
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (sides[i] == -1 && times[i] < s + 1e-9) {
        throw ValidationError(
            "aftereffect value at s=" + Num(s) +
            " depends on the in-force impulse parameter; use the explicit "
            "parameter overload");
      }
    }
    param = initial_param_index;
  }
  return value_at(s, +1, x, param);
}

double ValueFunction::value_at(double s, int side, const Eigen::VectorXd& x,
                               int param_index) const {
  const std::size_t i = slice_index(s, side);
  if (param_index < 0 ||
      param_index >= static_cast<int>(values[i].size())) {
    throw ValidationError("value-function parameter index out of range");
  }
  return grid.interpolate(values[i][param_index], x);
}

long ValueFunction::total_clamps() const {
  long total = 0;
  for (long c : clamps) total += c;
  return total;
}

Eigen::VectorXd Policy::u_at(double s, const Eigen::VectorXd& x,
                             int param_index) const {
  auto it = std::upper_bound(times.begin(), times.end(), s + 1e-9);
  if (it == times.begin()) {
    throw ValidationError("no policy slice at or before s=" + Num(s));
  }
  std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
  while (u_star[i].empty()) {
    if (i == 0) throw ValidationError("no flow policy at s=" + Num(s));
    --i;
  }
  if (param_index < 0 ||
      param_index >= static_cast<int>(u_star[i].size())) {
    throw ValidationError("policy parameter index out of range");
  }
  return u_lattice[u_star[i][param_index][grid.nearest_node(x)]];
}

// ---------------------------------------------------------------------------
// Impulse backups

BackupResult impulse_backup(const std::vector<double>& v_plus,
                            const HybridSystem& sys, const CostSpec& costs,
                            const Grid& grid, double tau) {
  if (sys.extra_dim() != 0) {
    throw ValidationError(
        "impulse_backup applies to systems without an extra impulse "
        "argument");
  }
  const auto W = Enumerated(sys.controls_w, "W");
  const std::size_t nn = grid.node_count();
  BackupResult out;
  out.v_minus.resize(nn);
  out.w_star.resize(nn);
  std::vector<double> env(1 + sys.n + sys.mw, 0.0);
  Eigen::VectorXd dest(sys.n);
  for (std::size_t i = 0; i < nn; ++i) {
    const Eigen::VectorXd xi = grid.node(i);
    double best = std::numeric_limits<double>::infinity();
    int best_w = 0;
    for (std::size_t wi = 0; wi < W.size(); ++wi) {
      FillJumpEnv(env, sys, tau, xi, W[wi], Eigen::VectorXd());
      for (int d = 0; d < sys.n; ++d) {
        dest[d] = xi[d] + sys.impulse_map[d].value(env);
      }
      const double cand = grid.interpolate(v_plus, dest, &out.clamps) +
                          costs.impulse.value(env);
      if (cand < best) {
        best = cand;
        best_w = static_cast<int>(wi);
      }
    }
    out.v_minus[i] = best;
    out.w_star[i] = best_w;
  }
  return out;
}

ParamBackupResult impulse_backup_parametrized(const std::vector<double>& v_plus,
                                              const HybridSystem& sys,
                                              const CostSpec& costs,
                                              const Grid& grid, double tau) {
  if (sys.impulse_arg != ImpulseArg::kControlLeftLimit) {
    throw ValidationError(
        "parametrized backup requires the control-left-limit impulse "
        "argument");
  }
  const auto A = Enumerated(sys.controls_u, "U");
  const auto W = Enumerated(sys.controls_w, "W");
  const std::size_t nn = grid.node_count();
  ParamBackupResult out;
  out.v_minus_per_a.assign(A.size(), std::vector<double>(nn));
  out.b_star.assign(A.size(), std::vector<int>(nn));
  out.v_minus_envelope.assign(nn, 0.0);
  out.a_star.assign(nn, 0);
  std::vector<double> env(1 + sys.n + sys.mw + sys.mu, 0.0);
  Eigen::VectorXd dest(sys.n);
  for (std::size_t i = 0; i < nn; ++i) {
    const Eigen::VectorXd xi = grid.node(i);
    double env_best = std::numeric_limits<double>::infinity();
    int env_a = 0;
    for (std::size_t ai = 0; ai < A.size(); ++ai) {
      double best = std::numeric_limits<double>::infinity();
      int best_w = 0;
      for (std::size_t wi = 0; wi < W.size(); ++wi) {
        FillJumpEnv(env, sys, tau, xi, W[wi], A[ai]);
        for (int d = 0; d < sys.n; ++d) {
          dest[d] = xi[d] + sys.impulse_map[d].value(env);
        }
        const double cand = grid.interpolate(v_plus, dest, &out.clamps) +
                            costs.impulse.value(env);
        if (cand < best) {
          best = cand;
          best_w = static_cast<int>(wi);
        }
      }
      out.v_minus_per_a[ai][i] = best;
      out.b_star[ai][i] = best_w;
      if (best < env_best) {
        env_best = best;
        env_a = static_cast<int>(ai);
      }
    }
    out.v_minus_envelope[i] = env_best;
    out.a_star[i] = env_a;
  }
  return out;
}

AftereffectBackupResult impulse_backup_aftereffect(
    const std::vector<std::vector<double>>& v_plus_per_c,
    const HybridSystem& sys, const CostSpec& costs, const Grid& grid,
    double tau) {
  if (sys.impulse_arg != ImpulseArg::kPreviousImpulse) {
    throw ValidationError(
        "aftereffect backup requires the previous-impulse argument");
  }
  if (sys.controls_w.kind != ControlSet::Kind::kFinite) {
    throw ValidationError(
        "aftereffect requires a finite impulse-control set");
  }
  const auto W = Enumerated(sys.controls_w, "W");
  if (v_plus_per_c.size() != W.size()) {
    throw ValidationError("aftereffect backup needs one V+ slice per element "
                          "of W");
  }
  const std::size_t nn = grid.node_count();
  AftereffectBackupResult out;
  out.v_minus_per_b.assign(W.size(), std::vector<double>(nn));
  out.c_star.assign(W.size(), std::vector<int>(nn));
  std::vector<double> env(1 + sys.n + 2 * sys.mw, 0.0);
  Eigen::VectorXd dest(sys.n);
  for (std::size_t bi = 0; bi < W.size(); ++bi) {
    for (std::size_t i = 0; i < nn; ++i) {
      const Eigen::VectorXd xi = grid.node(i);
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (std::size_t ci = 0; ci < W.size(); ++ci) {
        FillJumpEnv(env, sys, tau, xi, W[ci], W[bi]);
        for (int d = 0; d < sys.n; ++d) {
          dest[d] = xi[d] + sys.impulse_map[d].value(env);
        }
        const double cand =
            grid.interpolate(v_plus_per_c[ci], dest, &out.clamps) +
            costs.impulse.value(env);
        if (cand < best) {
          best = cand;
          best_c = static_cast<int>(ci);
        }
      }
      out.v_minus_per_b[bi][i] = best;
      out.c_star[bi][i] = best_c;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solvers

namespace {

std::pair<ValueFunction, Policy> SolveImpl(const HybridSystem& sys,
                                           const CostSpec& costs,
                                           const Grid& grid,
                                           const HjbOptions& options,
                                           Variant variant) {
  grid.check();
  if (grid.dim() != sys.n) {
    throw ValidationError("grid dimension does not match the state dimension");
  }
  if (sys.schedule.kind == ImpulseSchedule::Kind::kEventSurface &&
      !sys.schedule.empty()) {
    throw ValidationError("the grid solver requires a fixed-time schedule");
  }
  switch (variant) {
    case Variant::kBasic:
      if (sys.extra_dim() != 0) {
        throw ValidationError(
            "solve_basic applies to systems without an extra impulse "
            "argument");
      }
      break;
    case Variant::kParametrizedControl:
      if (sys.impulse_arg != ImpulseArg::kControlLeftLimit) {
        throw ValidationError(
            "solve_parametrized requires the control-left-limit impulse "
            "argument");
      }
      break;
    case Variant::kAftereffect:
      if (sys.impulse_arg != ImpulseArg::kPreviousImpulse) {
        throw ValidationError(
            "solve_aftereffect requires the previous-impulse argument");
      }
      if (sys.controls_w.kind != ControlSet::Kind::kFinite) {
        throw ValidationError(
            "aftereffect requires a finite impulse-control set");
      }
      break;
  }

  SweepContext ctx;
  ctx.sys = &sys;
  ctx.costs = &costs;
  ctx.grid = &grid;
  ctx.u_lattice = Enumerated(sys.controls_u, "U");
  ctx.w_lattice = sys.has_impulses() ? Enumerated(sys.controls_w, "W")
                                     : std::vector<Eigen::VectorXd>{};
  const std::size_t nn = grid.node_count();
  ctx.nodes.reserve(nn);
  for (std::size_t i = 0; i < nn; ++i) ctx.nodes.push_back(grid.node(i));

  const std::size_t nparams =
      variant == Variant::kAftereffect ? ctx.w_lattice.size() : 1;

  ValueFunction vf;
  vf.variant = variant;
  vf.grid = grid;
  if (variant == Variant::kAftereffect) {
    vf.params = ctx.w_lattice;
    vf.initial_param_index = 0;
    if (sys.initial_prev_impulse.size() == sys.mw) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < ctx.w_lattice.size(); ++i) {
        const double d =
            (ctx.w_lattice[i] - sys.initial_prev_impulse).norm();
        if (d < best) {
          best = d;
          vf.initial_param_index = static_cast<int>(i);
        }
      }
    }
  } else if (variant == Variant::kParametrizedControl) {
    vf.params = ctx.u_lattice;
  }

  Policy pol;
  pol.grid = grid;
  pol.u_lattice = ctx.u_lattice;
  pol.w_lattice = ctx.w_lattice;

  const TimeSegments segs =
      TimeSegments::build(0.0, sys.horizon, sys.schedule.times, grid.delta);

  // Terminal slice: F0 on nodes, exactly, for every parameter.
  std::vector<std::vector<double>> later(nparams, std::vector<double>(nn));
  {
    std::vector<double> env(sys.n, 0.0);
    for (std::size_t i = 0; i < nn; ++i) {
      for (int d = 0; d < sys.n; ++d) env[d] = ctx.nodes[i][d];
      const double v = costs.terminal.value(env);
      for (std::size_t p = 0; p < nparams; ++p) later[p][i] = v;
    }
  }

  // Slices are collected backward (T first) and reversed at the end.
  vf.times.push_back(sys.horizon);
  vf.sides.push_back(0);
  vf.values.push_back(later);
  vf.clamps.push_back(0);
  pol.u_star.emplace_back();  // no flow step departs T

  for (std::size_t si = segs.segments.size(); si-- > 0;) {
    const auto& seg = segs.segments[si];
    for (int j = seg.steps; j-- > 0;) {
      const double s0 = mesh_time(seg.begin, seg.end, seg.steps, j);
      const double s1 = mesh_time(seg.begin, seg.end, seg.steps, j + 1);
      const double delta = s1 - s0;
      std::vector<std::vector<double>> fresh(nparams);
      std::vector<std::vector<int>> ustar(nparams);
      long clamp_count = 0;
      for (std::size_t p = 0; p < nparams; ++p) {
        FlowStepSlice(ctx, s0, delta, later[p], fresh[p], ustar[p],
                      clamp_count, options.threads);
      }
      later = fresh;
      vf.times.push_back(s0);
      vf.sides.push_back(si == 0 || j > 0 ? 0 : +1);
      vf.values.push_back(later);
      vf.clamps.push_back(clamp_count);
      pol.u_star.push_back(std::move(ustar));
    }
    if (si == 0) break;

    // Impulse backup across tau = seg.begin: V+ (just computed) -> V-.
    const double tau = seg.begin;
    long clamp_count = 0;
    std::vector<std::vector<int>> wstar;
    switch (variant) {
      case Variant::kBasic: {
        BackupResult r = impulse_backup(later[0], sys, costs, grid, tau);
        later[0] = std::move(r.v_minus);
        wstar.push_back(std::move(r.w_star));
        clamp_count = r.clamps;
        break;
      }
      case Variant::kParametrizedControl: {
        ParamBackupResult r =
            impulse_backup_parametrized(later[0], sys, costs, grid, tau);
        later[0] = std::move(r.v_minus_envelope);
        wstar = std::move(r.b_star);
        pol.a_star.push_back(std::move(r.a_star));
        vf.impulse_details.push_back(
            ImpulseDetail{tau, std::move(r.v_minus_per_a)});
        clamp_count = r.clamps;
        break;
      }
      case Variant::kAftereffect: {
        AftereffectBackupResult r =
            impulse_backup_aftereffect(later, sys, costs, grid, tau);
        later = std::move(r.v_minus_per_b);
        wstar = std::move(r.c_star);
        clamp_count = r.clamps;
        break;
      }
    }
    vf.times.push_back(tau);
    vf.sides.push_back(-1);
    vf.values.push_back(later);
    vf.clamps.push_back(clamp_count);
    pol.u_star.emplace_back();  // jump departs the minus slice
    pol.impulse_times.push_back(tau);
    pol.w_star.push_back(std::move(wstar));
  }

  std::reverse(vf.times.begin(), vf.times.end());
  std::reverse(vf.sides.begin(), vf.sides.end());
  std::reverse(vf.values.begin(), vf.values.end());
  std::reverse(vf.clamps.begin(), vf.clamps.end());
  std::reverse(pol.u_star.begin(), pol.u_star.end());
  std::reverse(pol.impulse_times.begin(), pol.impulse_times.end());
  std::reverse(pol.w_star.begin(), pol.w_star.end());
  std::reverse(pol.a_star.begin(), pol.a_star.end());
  pol.times = vf.times;
  pol.sides = vf.sides;
  return {std::move(vf), std::move(pol)};
}

}  // namespace

std::pair<ValueFunction, Policy> solve_basic(const HybridSystem& sys,
                                             const CostSpec& costs,
                                             const Grid& grid,
                                             const HjbOptions& options) {
  return SolveImpl(sys, costs, grid, options, Variant::kBasic);
}

std::pair<ValueFunction, Policy> solve_parametrized(const HybridSystem& sys,
                                                    const CostSpec& costs,
                                                    const Grid& grid,
                                                    const HjbOptions& options) {
  return SolveImpl(sys, costs, grid, options, Variant::kParametrizedControl);
}

std::pair<ValueFunction, Policy> solve_aftereffect(const HybridSystem& sys,
                                                   const CostSpec& costs,
                                                   const Grid& grid,
                                                   const HjbOptions& options) {
  return SolveImpl(sys, costs, grid, options, Variant::kAftereffect);
}

// ---------------------------------------------------------------------------
// Synthesis

Synthesis synthesize_trajectory(const ValueFunction& vf, const Policy& pol,
                                const HybridSystem& sys, const CostSpec& costs,
                                double s, const Eigen::VectorXd& xi) {
  if (!vf.grid.contains(xi)) {
    throw ValidationError("start state " + VecStr(xi) +
                          " lies outside the grid");
  }
  std::size_t i0 = vf.slice_index(s, +1);
  if (vf.sides[i0] == -1) ++i0;

  int param = vf.variant == Variant::kAftereffect ? vf.initial_param_index : 0;
  std::size_t imp_idx = 0;
  for (std::size_t i = 0; i < i0; ++i) {
    if (vf.sides[i] == -1) ++imp_idx;
  }

  const double start_value = vf.value_at(s, vf.sides[i0], xi, param);

  Trajectory traj;
  traj.start_time = vf.times[i0];
  traj.end_time = vf.times.back();

  Eigen::VectorXd x = xi;
  Eigen::VectorXd u_prev = Eigen::VectorXd::Zero(sys.mu);
  int u_prev_idx = 0;

  for (std::size_t i = i0; i < vf.slice_count(); ++i) {
    const double t = vf.times[i];
    if (vf.sides[i] == -1) {
      const std::size_t node = vf.grid.nearest_node(x);
      int w_idx = 0;
      Eigen::VectorXd extra;
      switch (vf.variant) {
        case Variant::kBasic:
          w_idx = pol.w_star[imp_idx][0][node];
          break;
        case Variant::kParametrizedControl:
          w_idx = pol.w_star[imp_idx][u_prev_idx][node];
          extra = u_prev;
          break;
        case Variant::kAftereffect:
          w_idx = pol.w_star[imp_idx][param][node];
          extra = vf.params[param];
          param = w_idx;  // chosen c becomes the in-force parameter
          break;
      }
      const Eigen::VectorXd w = pol.w_lattice[w_idx];
      const Eigen::VectorXd x_plus = x + sys.eval_jump(t, x, w, extra);
      traj.times.push_back(t);
      traj.sides.push_back(-1);
      traj.x.push_back(x);
      traj.u.push_back(u_prev);
      traj.jumps.push_back(JumpRecord{t, x, x_plus, w, extra});
      x = x_plus;
      ++imp_idx;
      if (!vf.grid.contains(x)) {
        throw NumericalError("synthesized trajectory left the grid at t=" +
                             Num(t) + ", x=" + VecStr(x));
      }
      continue;
    }
    if (i + 1 == vf.slice_count()) {
      traj.times.push_back(t);
      traj.sides.push_back(0);
      traj.x.push_back(x);
      traj.u.push_back(u_prev);
      break;
    }
    const std::size_t node = vf.grid.nearest_node(x);
    // Aftereffect policies store one u array per parameter; others one.
    const int p = static_cast<int>(pol.u_star[i].size()) > param ? param : 0;
    u_prev_idx = pol.u_star[i][p][node];
    u_prev = pol.u_lattice[u_prev_idx];
    traj.times.push_back(t);
    traj.sides.push_back(vf.sides[i]);
    traj.x.push_back(x);
    traj.u.push_back(u_prev);
    const double h = vf.times[i + 1] - t;
    const Eigen::VectorXd k1 = sys.eval_flow(t, x, u_prev);
    const Eigen::VectorXd k2 =
        sys.eval_flow(t + 0.5 * h, x + 0.5 * h * k1, u_prev);
    const Eigen::VectorXd k3 =
        sys.eval_flow(t + 0.5 * h, x + 0.5 * h * k2, u_prev);
    const Eigen::VectorXd k4 = sys.eval_flow(t + h, x + h * k3, u_prev);
    x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite() || !vf.grid.contains(x)) {
      throw NumericalError("synthesized trajectory left the grid at t=" +
                           Num(vf.times[i + 1]) + ", x=" + VecStr(x));
    }
  }

  Synthesis out;
  out.trajectory = std::move(traj);
  out.cost = evaluate_cost(out.trajectory, costs);
  out.value = start_value;
  return out;
}

// ---------------------------------------------------------------------------
// DPP residual

ResidualStats dpp_residual(
    const ValueFunction& vf, const HybridSystem& sys, const CostSpec& costs,
    const std::vector<std::pair<double, Eigen::VectorXd>>& points) {
  SweepContext ctx;
  ctx.sys = &sys;
  ctx.costs = &costs;
  ctx.grid = &vf.grid;
  ctx.u_lattice = Enumerated(sys.controls_u, "U");

  ResidualStats stats;
  std::vector<double> env(1 + sys.n + sys.mu, 0.0);
  Eigen::VectorXd foot(sys.n);
  double total = 0.0;
  for (const auto& [s, x] : points) {
    const std::size_t i = vf.slice_index(s, 0);
    if (vf.sides[i] != 0) {
      throw ValidationError("dpp_residual sample at s=" + Num(s) +
                            " must be a non-impulse slice");
    }
    if (i + 1 >= vf.slice_count()) {
      throw ValidationError("dpp_residual sample at the terminal slice");
    }
    const int param =
        vf.variant == Variant::kAftereffect ? vf.initial_param_index : 0;
    const double delta = vf.times[i + 1] - vf.times[i];
    long clamps = 0;
    const double backed = FlowBackup(ctx, vf.times[i], delta, x,
                                     vf.values[i + 1][param], env, foot,
                                     &clamps, nullptr);
    const double r = vf.grid.interpolate(vf.values[i][param], x) - backed;
    const double a = std::abs(r);
    stats.max_abs = std::max(stats.max_abs, a);
    total += a;
    ++stats.count;
  }
  if (stats.count > 0) stats.mean_abs = total / stats.count;
  return stats;
}

}  // namespace ioc
