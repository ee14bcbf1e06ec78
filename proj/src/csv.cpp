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

#include "ioc/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "ioc/errors.hpp"

namespace ioc {
namespace {

char SideChar(int side) { return side < 0 ? '-' : (side > 0 ? '+' : '.'); }

void AppendIndexed(std::string& out, const char* stem, int count) {
  for (int i = 0; i < count; ++i) {
    out += ',';
    out += stem;
    out += std::to_string(i + 1);
  }
}

void AppendCells(std::string& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out += ',';
    out += format_double(v[i]);
  }
}

void AppendEmpty(std::string& out, int count) {
  for (int i = 0; i < count; ++i) out += ',';
}

const char* ExtraStem(ImpulseArg arg) {
  return arg == ImpulseArg::kControlLeftLimit ? "a" : "b";
}

// --- minimal strict reader used by parse_trajectory_csv ------------------

std::vector<std::string> SplitLines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string> SplitCells(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  while (true) {
    const std::size_t c = line.find(',', pos);
    if (c == std::string::npos) {
      cells.push_back(line.substr(pos));
      break;
    }
    cells.push_back(line.substr(pos, c - pos));
    pos = c + 1;
  }
  return cells;
}

double ParseNumber(const std::string& cell, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0')
    throw ValidationError(std::string("trajectory CSV: malformed ") + what +
                          " cell '" + cell + "'");
  return v;
}

/// Number of consecutive header cells named stem1, stem2, ... from `at`.
int CountRun(const std::vector<std::string>& header, std::size_t at,
             const std::string& stem) {
  int count = 0;
  while (at < header.size() &&
         header[at] == stem + std::to_string(count + 1)) {
    ++count;
    ++at;
  }
  return count;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x00000100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string trajectory_csv(const Trajectory& traj, int n, int mu) {
  std::string out = "t,side";
  AppendIndexed(out, "x", n);
  AppendIndexed(out, "u", mu);
  out += ",jump\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out += format_double(traj.times[i]);
    out += ',';
    out += SideChar(traj.sides[i]);
    AppendCells(out, traj.x[i]);
    AppendCells(out, traj.u[i]);
    out += traj.sides[i] == -1 ? ",1\n" : ",0\n";
  }
  return out;
}

std::string jumps_csv(const Trajectory& traj, int n, int mw, ImpulseArg arg,
                      int extra_dim) {
  std::string out = "t";
  AppendIndexed(out, "xm", n);
  AppendIndexed(out, "xp", n);
  AppendIndexed(out, "w", mw);
  if (extra_dim > 0) AppendIndexed(out, ExtraStem(arg), extra_dim);
  out += '\n';
  for (const JumpRecord& rec : traj.jumps) {
    out += format_double(rec.time);
    AppendCells(out, rec.x_minus);
    AppendCells(out, rec.x_plus);
    AppendCells(out, rec.w);
    if (extra_dim > 0) AppendCells(out, rec.extra);
    out += '\n';
  }
  return out;
}

std::string value_csv(const ValueFunction& vf) {
  const int n = vf.grid.dim();
  const bool with_b = vf.variant == Variant::kAftereffect;
  const int mb = with_b && !vf.params.empty()
                     ? static_cast<int>(vf.params[0].size())
                     : 0;
  std::string out = "s,side";
  if (with_b) AppendIndexed(out, "b", mb);
  AppendIndexed(out, "xi", n);
  out += ",V\n";
  for (std::size_t si = 0; si < vf.slice_count(); ++si) {
    const std::size_t nparams = vf.values[si].size();
    for (std::size_t p = 0; p < nparams; ++p) {
      for (std::size_t k = 0; k < vf.grid.node_count(); ++k) {
        out += format_double(vf.times[si]);
        out += ',';
        out += SideChar(vf.sides[si]);
        if (with_b) AppendCells(out, vf.params[p]);
        AppendCells(out, vf.grid.node(k));
        out += ',';
        out += format_double(vf.values[si][p][k]);
        out += '\n';
      }
    }
  }
  return out;
}

std::string impulse_details_csv(
    const ValueFunction& vf, const std::vector<Eigen::VectorXd>& a_lattice) {
  const int n = vf.grid.dim();
  const int ma =
      a_lattice.empty() ? 0 : static_cast<int>(a_lattice[0].size());
  std::string out = "s,side";
  AppendIndexed(out, "a", ma);
  AppendIndexed(out, "xi", n);
  out += ",V\n";
  for (const ImpulseDetail& det : vf.impulse_details) {
    for (std::size_t a = 0; a < det.v_minus_per_a.size(); ++a) {
      for (std::size_t k = 0; k < vf.grid.node_count(); ++k) {
        out += format_double(det.time);
        out += ",-";
        AppendCells(out, a_lattice[a]);
        AppendCells(out, vf.grid.node(k));
        out += ',';
        out += format_double(det.v_minus_per_a[a][k]);
        out += '\n';
      }
    }
  }
  return out;
}

std::string policy_csv(const Policy& pol, const ValueFunction& vf) {
  const int n = pol.grid.dim();
  const bool parametrized = vf.variant == Variant::kParametrizedControl;
  const bool aftereffect = vf.variant == Variant::kAftereffect;
  const int mu =
      pol.u_lattice.empty() ? 0 : static_cast<int>(pol.u_lattice[0].size());
  const int mw =
      pol.w_lattice.empty() ? 0 : static_cast<int>(pol.w_lattice[0].size());
  const int mb = aftereffect && !vf.params.empty()
                     ? static_cast<int>(vf.params[0].size())
                     : 0;

  std::string out = "s,side";
  if (parametrized) AppendIndexed(out, "a", mu);
  if (aftereffect) AppendIndexed(out, "b", mb);
  AppendIndexed(out, "xi", n);
  AppendIndexed(out, "u", mu);
  AppendIndexed(out, "w", mw);
  out += '\n';

  std::size_t imp = 0;
  for (std::size_t si = 0; si < pol.times.size(); ++si) {
    if (pol.sides[si] == -1) {
      // Impulse slice: minimizing w (and a for the parametrized variant).
      const auto& stars = pol.w_star[imp];
      const std::size_t nparams = aftereffect ? stars.size() : 1;
      for (std::size_t p = 0; p < nparams; ++p) {
        for (std::size_t k = 0; k < pol.grid.node_count(); ++k) {
          out += format_double(pol.times[si]);
          out += ",-";
          int w_idx;
          if (parametrized) {
            const int a_idx = pol.a_star[imp][k];
            AppendCells(out, pol.u_lattice[a_idx]);
            w_idx = stars[a_idx][k];
          } else {
            if (aftereffect) AppendCells(out, vf.params[p]);
            w_idx = stars[p][k];
          }
          AppendCells(out, pol.grid.node(k));
          AppendEmpty(out, mu);
          AppendCells(out, pol.w_lattice[w_idx]);
          out += '\n';
        }
      }
      ++imp;
      continue;
    }
    if (pol.u_star[si].empty()) continue;  // terminal slice
    for (std::size_t p = 0; p < pol.u_star[si].size(); ++p) {
      for (std::size_t k = 0; k < pol.grid.node_count(); ++k) {
        out += format_double(pol.times[si]);
        out += ',';
        out += SideChar(pol.sides[si]);
        if (parametrized) AppendEmpty(out, mu);
        if (aftereffect) AppendCells(out, vf.params[p]);
        AppendCells(out, pol.grid.node(k));
        AppendCells(out, pol.u_lattice[pol.u_star[si][p][k]]);
        AppendEmpty(out, mw);
        out += '\n';
      }
    }
  }
  return out;
}

std::string costate_csv(const CostatePath& cp, int n) {
  std::string out = "s,side";
  AppendIndexed(out, "p", n);
  out += '\n';
  for (std::size_t i = 0; i < cp.size(); ++i) {
    out += format_double(cp.times[i]);
    out += ',';
    out += SideChar(cp.sides[i]);
    AppendCells(out, cp.p[i]);
    out += '\n';
  }
  return out;
}

std::string extremum_csv(const ExtremumReport& rep, int mu, int mw) {
  const int cmax = std::max(mu, mw);
  std::string out = "s,kind";
  AppendIndexed(out, "c", cmax);
  out += ",margin\n";
  for (const auto& row : rep.rows) {
    out += format_double(row.time);
    out += ',';
    out += row.kind;
    AppendCells(out, row.control);
    AppendEmpty(out, cmax - static_cast<int>(row.control.size()));
    out += ',';
    out += format_double(row.margin);
    out += '\n';
  }
  return out;
}

std::string kpath_csv(const RiccatiSolution& sol) {
  const int n = sol.system().state_dim;
  std::string out = "s,side";
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      out += ",K_" + std::to_string(r + 1) + std::to_string(c + 1);
  out += '\n';
  for (std::size_t i = 0; i < sol.times().size(); ++i) {
    out += format_double(sol.times()[i]);
    out += ',';
    out += SideChar(sol.sides()[i]);
    const Eigen::MatrixXd& k = sol.k_path()[i];
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        out += ',';
        out += format_double(k(r, c));
      }
    out += '\n';
  }
  return out;
}

std::string gains_csv(const RiccatiSolution& sol) {
  const int n = sol.system().state_dim;
  const int mw = sol.system().impulse_control_dim;
  std::string out = "tau";
  for (int r = 0; r < mw; ++r)
    for (int c = 0; c < n; ++c)
      out += ",L_" + std::to_string(r + 1) + std::to_string(c + 1);
  out += '\n';
  for (std::size_t k = 0; k < sol.impulse_gains().size(); ++k) {
    out += format_double(sol.system().impulses[k].time);
    const Eigen::MatrixXd& L = sol.impulse_gains()[k];
    for (int r = 0; r < mw; ++r)
      for (int c = 0; c < n; ++c) {
        out += ',';
        out += format_double(L(r, c));
      }
    out += '\n';
  }
  return out;
}

Trajectory parse_trajectory_csv(const std::string& trajectory_text,
                                const std::string& jumps_text) {
  const std::vector<std::string> lines = SplitLines(trajectory_text);
  if (lines.empty())
    throw ValidationError("trajectory CSV: missing header row");
  const std::vector<std::string> header = SplitCells(lines[0]);
  if (header.size() < 3 || header[0] != "t" || header[1] != "side" ||
      header.back() != "jump")
    throw ValidationError("trajectory CSV: unexpected header '" + lines[0] +
                          "'");
  const int n = CountRun(header, 2, "x");
  const int mu = CountRun(header, 2 + static_cast<std::size_t>(n), "u");
  if (header.size() != 3 + static_cast<std::size_t>(n + mu))
    throw ValidationError("trajectory CSV: unexpected header '" + lines[0] +
                          "'");

  Trajectory traj;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const std::vector<std::string> cells = SplitCells(lines[li]);
    if (cells.size() != header.size())
      throw ValidationError("trajectory CSV: row " + std::to_string(li) +
                            " has " + std::to_string(cells.size()) +
                            " cells, expected " +
                            std::to_string(header.size()));
    traj.times.push_back(ParseNumber(cells[0], "time"));
    if (cells[1].size() != 1 ||
        (cells[1][0] != '-' && cells[1][0] != '+' && cells[1][0] != '.'))
      throw ValidationError("trajectory CSV: malformed side cell '" +
                            cells[1] + "'");
    traj.sides.push_back(cells[1][0] == '-' ? -1
                                            : (cells[1][0] == '+' ? 1 : 0));
    Eigen::VectorXd x(n), u(mu);
    for (int j = 0; j < n; ++j) x[j] = ParseNumber(cells[2 + j], "state");
    for (int j = 0; j < mu; ++j)
      u[j] = ParseNumber(cells[2 + n + j], "control");
    traj.x.push_back(std::move(x));
    traj.u.push_back(std::move(u));
  }
  if (!traj.times.empty()) {
    traj.start_time = traj.times.front();
    traj.end_time = traj.times.back();
  }

  if (!jumps_text.empty()) {
    const std::vector<std::string> jlines = SplitLines(jumps_text);
    if (jlines.empty() || SplitCells(jlines[0]).empty() ||
        SplitCells(jlines[0])[0] != "t")
      throw ValidationError("trajectory CSV: malformed jump table header");
    const std::vector<std::string> jheader = SplitCells(jlines[0]);
    const int jn = CountRun(jheader, 1, "xm");
    if (jn != n || CountRun(jheader, 1 + static_cast<std::size_t>(jn),
                            "xp") != jn)
      throw ValidationError(
          "trajectory CSV: jump table state columns do not match");
    const std::size_t w_at = 1 + 2 * static_cast<std::size_t>(jn);
    const int mw = CountRun(jheader, w_at, "w");
    const std::size_t e_at = w_at + static_cast<std::size_t>(mw);
    int extra = CountRun(jheader, e_at, "a");
    if (extra == 0) extra = CountRun(jheader, e_at, "b");
    if (jheader.size() != e_at + static_cast<std::size_t>(extra))
      throw ValidationError("trajectory CSV: unexpected jump table header '" +
                            jlines[0] + "'");
    for (std::size_t li = 1; li < jlines.size(); ++li) {
      if (jlines[li].empty()) continue;
      const std::vector<std::string> cells = SplitCells(jlines[li]);
      if (cells.size() != jheader.size())
        throw ValidationError("trajectory CSV: jump row " +
                              std::to_string(li) + " has " +
                              std::to_string(cells.size()) +
                              " cells, expected " +
                              std::to_string(jheader.size()));
      JumpRecord rec;
      rec.time = ParseNumber(cells[0], "jump time");
      rec.x_minus.resize(n);
      rec.x_plus.resize(n);
      rec.w.resize(mw);
      rec.extra.resize(extra);
      for (int j = 0; j < n; ++j)
        rec.x_minus[j] = ParseNumber(cells[1 + j], "jump state");
      for (int j = 0; j < n; ++j)
        rec.x_plus[j] = ParseNumber(cells[1 + n + j], "jump state");
      for (int j = 0; j < mw; ++j)
        rec.w[j] = ParseNumber(cells[w_at + j], "jump control");
      for (int j = 0; j < extra; ++j)
        rec.extra[j] = ParseNumber(cells[e_at + j], "jump argument");
      traj.jumps.push_back(std::move(rec));
    }
  }
  return traj;
}

}  // namespace ioc
