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

#include "ioc/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ioc/errors.hpp"
#include "json.hpp"

namespace ioc {
namespace {

using nlohmann::json;

/// Accumulates every problem found; the loader throws once at the end so a
/// bad scenario is reported completely rather than one field at a time.
struct Collector {
  std::vector<std::string> errors;

  void add(const std::string& where, const std::string& what) {
    errors.push_back(where + ": " + what);
  }
  bool ok() const { return errors.empty(); }
};

/// Rejects unknown keys so typos fail loudly instead of being ignored.
void CheckKeys(const json& j, const std::string& where,
               const std::set<std::string>& allowed, Collector& errs) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      errs.add(where, "unknown key '" + item.key() + "'");
  }
}

bool RequireObject(const json& j, const std::string& where, Collector& errs) {
  if (j.is_object()) return true;
  errs.add(where, "expected an object");
  return false;
}

double GetNumber(const json& j, const std::string& key,
                 const std::string& where, Collector& errs,
                 double fallback = 0.0) {
  if (!j.contains(key)) {
    errs.add(where, "missing required key '" + key + "'");
    return fallback;
  }
  if (!j[key].is_number()) {
    errs.add(where + "." + key, "expected a number");
    return fallback;
  }
  return j[key].get<double>();
}

int GetInt(const json& j, const std::string& key, const std::string& where,
           Collector& errs, int fallback = 0) {
  if (!j.contains(key)) {
    errs.add(where, "missing required key '" + key + "'");
    return fallback;
  }
  if (!j[key].is_number_integer()) {
    errs.add(where + "." + key, "expected an integer");
    return fallback;
  }
  return j[key].get<int>();
}

Eigen::VectorXd ParseVector(const json& j, const std::string& where,
                            Collector& errs) {
  if (!j.is_array()) {
    errs.add(where, "expected an array of numbers");
    return Eigen::VectorXd();
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      errs.add(where + "[" + std::to_string(i) + "]", "expected a number");
      return Eigen::VectorXd();
    }
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

std::vector<double> ParseDoubleList(const json& j, const std::string& where,
                                    Collector& errs) {
  const Eigen::VectorXd v = ParseVector(j, where, errs);
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<int> ParseIntList(const json& j, const std::string& where,
                              Collector& errs) {
  std::vector<int> out;
  if (!j.is_array()) {
    errs.add(where, "expected an array of integers");
    return out;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) {
      errs.add(where + "[" + std::to_string(i) + "]", "expected an integer");
      return {};
    }
    out.push_back(j[i].get<int>());
  }
  return out;
}

std::vector<std::string> ParseStringList(const json& j,
                                         const std::string& where,
                                         Collector& errs) {
  std::vector<std::string> out;
  if (!j.is_array()) {
    errs.add(where, "expected an array of strings");
    return out;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) {
      errs.add(where + "[" + std::to_string(i) + "]", "expected a string");
      return {};
    }
    out.push_back(j[i].get<std::string>());
  }
  return out;
}

/// Constant matrix: array of equally sized numeric rows.
Eigen::MatrixXd ParseMatrix(const json& j, const std::string& where,
                            Collector& errs) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    errs.add(where, "expected an array of numeric rows");
    return Eigen::MatrixXd();
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      errs.add(where, "rows have inconsistent lengths");
      return Eigen::MatrixXd();
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        errs.add(where + "[" + std::to_string(r) + "][" + std::to_string(c) +
                     "]",
                 "expected a number");
        return Eigen::MatrixXd();
      }
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

/// Time-varying matrix: numeric rows (constant) or string rows (expressions
/// over t). Mixing numbers and strings within one matrix is allowed; numbers
/// are rendered as literals.
TimeMatrix ParseTimeMatrix(const json& j, const std::string& where,
                           Collector& errs) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    errs.add(where, "expected an array of rows");
    return TimeMatrix();
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  bool any_expr = false;
  for (const auto& row : j)
    for (const auto& cell : row)
      if (cell.is_string()) any_expr = true;

  if (!any_expr) return TimeMatrix::constant(ParseMatrix(j, where, errs));

  std::vector<std::string> entries;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      errs.add(where, "rows have inconsistent lengths");
      return TimeMatrix();
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const json& cell = j[r][c];
      if (cell.is_string())
        entries.push_back(cell.get<std::string>());
      else if (cell.is_number())
        entries.push_back(json(cell.get<double>()).dump());
      else {
        errs.add(where, "cells must be numbers or expression strings");
        return TimeMatrix();
      }
    }
  }
  try {
    return TimeMatrix::parse(static_cast<int>(rows), static_cast<int>(cols),
                             entries);
  } catch (const Error& e) {
    errs.add(where, e.what());
    return TimeMatrix();
  }
}

ControlSet ParseControlSet(const json& j, const std::string& where,
                           Collector& errs) {
  if (!RequireObject(j, where, errs)) return ControlSet();
  if (j.contains("finite")) {
    CheckKeys(j, where, {"finite"}, errs);
    if (!j["finite"].is_array() || j["finite"].empty()) {
      errs.add(where + ".finite", "expected a non-empty array of points");
      return ControlSet();
    }
    std::vector<Eigen::VectorXd> pts;
    for (std::size_t i = 0; i < j["finite"].size(); ++i)
      pts.push_back(ParseVector(j["finite"][i],
                                where + ".finite[" + std::to_string(i) + "]",
                                errs));
    return ControlSet::finite(pts);
  }
  CheckKeys(j, where, {"lo", "hi", "samples"}, errs);
  if (!j.contains("lo") || !j.contains("hi") || !j.contains("samples")) {
    errs.add(where, "expected either 'finite' or 'lo'/'hi'/'samples'");
    return ControlSet();
  }
  const Eigen::VectorXd lo = ParseVector(j["lo"], where + ".lo", errs);
  const Eigen::VectorXd hi = ParseVector(j["hi"], where + ".hi", errs);
  const std::vector<int> samples =
      ParseIntList(j["samples"], where + ".samples", errs);
  if (!errs.ok()) return ControlSet();
  return ControlSet::box(lo, hi, samples);
}

ControlSignal ParseSignal(const json& j, const std::string& where,
                          Collector& errs) {
  if (!RequireObject(j, where, errs)) return ControlSignal();
  if (j.contains("constant")) {
    CheckKeys(j, where, {"constant"}, errs);
    return ControlSignal::constant(
        ParseVector(j["constant"], where + ".constant", errs));
  }
  if (j.contains("table")) {
    CheckKeys(j, where, {"table"}, errs);
    const json& t = j["table"];
    if (!RequireObject(t, where + ".table", errs)) return ControlSignal();
    CheckKeys(t, where + ".table", {"times", "values"}, errs);
    if (!t.contains("times") || !t.contains("values")) {
      errs.add(where + ".table", "expected 'times' and 'values'");
      return ControlSignal();
    }
    const std::vector<double> times =
        ParseDoubleList(t["times"], where + ".table.times", errs);
    std::vector<Eigen::VectorXd> values;
    if (t["values"].is_array()) {
      for (std::size_t i = 0; i < t["values"].size(); ++i)
        values.push_back(
            ParseVector(t["values"][i],
                        where + ".table.values[" + std::to_string(i) + "]",
                        errs));
    } else {
      errs.add(where + ".table.values", "expected an array of vectors");
    }
    if (!errs.ok()) return ControlSignal();
    try {
      return ControlSignal::table(times, values);
    } catch (const Error& e) {
      errs.add(where + ".table", e.what());
      return ControlSignal();
    }
  }
  errs.add(where, "expected 'constant' or 'table'");
  return ControlSignal();
}

ImpulseArg ParseImpulseArg(const json& j, const std::string& where,
                           Collector& errs) {
  if (!j.is_string()) {
    errs.add(where, "expected \"none\", \"u_left\", or \"w_prev\"");
    return ImpulseArg::kNone;
  }
  const std::string s = j.get<std::string>();
  if (s == "none") return ImpulseArg::kNone;
  if (s == "u_left") return ImpulseArg::kControlLeftLimit;
  if (s == "w_prev") return ImpulseArg::kPreviousImpulse;
  errs.add(where, "unknown impulse argument '" + s +
                      "' (expected \"none\", \"u_left\", or \"w_prev\")");
  return ImpulseArg::kNone;
}

CostText ParseCosts(const json& root, Collector& errs) {
  CostText costs;
  if (!root.contains("costs")) return costs;
  const json& j = root["costs"];
  if (!RequireObject(j, "costs", errs)) return costs;
  CheckKeys(j, "costs", {"F", "Phi", "F0"}, errs);
  const auto grab = [&](const char* key, std::string& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) {
      errs.add(std::string("costs.") + key, "expected an expression string");
      return;
    }
    out = j[key].get<std::string>();
  };
  grab("F", costs.running);
  grab("Phi", costs.impulse);
  grab("F0", costs.terminal);
  return costs;
}

HybridSystemSpec ParseSystem(const json& j, double horizon, Collector& errs) {
  HybridSystemSpec spec;
  spec.horizon = horizon;
  if (!RequireObject(j, "system", errs)) return spec;
  CheckKeys(j, "system", {"n", "f", "controls", "impulse"}, errs);
  spec.state_dim = GetInt(j, "n", "system", errs);
  if (j.contains("f"))
    spec.flow = ParseStringList(j["f"], "system.f", errs);
  else
    errs.add("system", "missing required key 'f'");

  if (j.contains("controls") &&
      RequireObject(j["controls"], "system.controls", errs)) {
    const json& c = j["controls"];
    CheckKeys(c, "system.controls", {"u", "w"}, errs);
    if (c.contains("u"))
      spec.controls_u = ParseControlSet(c["u"], "system.controls.u", errs);
    else
      errs.add("system.controls", "missing required key 'u'");
    if (c.contains("w"))
      spec.controls_w = ParseControlSet(c["w"], "system.controls.w", errs);
    else
      errs.add("system.controls", "missing required key 'w'");
  } else if (!j.contains("controls")) {
    errs.add("system", "missing required key 'controls'");
  }

  if (j.contains("impulse")) {
    const json& imp = j["impulse"];
    if (RequireObject(imp, "system.impulse", errs)) {
      CheckKeys(imp, "system.impulse",
                {"times", "surface", "I", "arg", "initial_b"}, errs);
      if (imp.contains("times") && imp.contains("surface"))
        errs.add("system.impulse",
                 "'times' and 'surface' are mutually exclusive");
      if (imp.contains("times"))
        spec.impulse_times =
            ParseDoubleList(imp["times"], "system.impulse.times", errs);
      else if (imp.contains("surface"))
        spec.event_surfaces =
            ParseStringList(imp["surface"], "system.impulse.surface", errs);
      else
        errs.add("system.impulse", "expected 'times' or 'surface'");
      if (imp.contains("I"))
        spec.impulse_map = ParseStringList(imp["I"], "system.impulse.I", errs);
      else
        errs.add("system.impulse", "missing required key 'I'");
      if (imp.contains("arg"))
        spec.impulse_arg =
            ParseImpulseArg(imp["arg"], "system.impulse.arg", errs);
      if (imp.contains("initial_b"))
        spec.initial_prev_impulse =
            ParseDoubleList(imp["initial_b"], "system.impulse.initial_b",
                            errs);
    }
  }
  return spec;
}

SampledDataSpec ParseSampledData(const json& j, double horizon,
                                 Collector& errs, ControlSet& controls_u,
                                 ControlSet& controls_w) {
  SampledDataSpec spec;
  spec.horizon = horizon;
  if (!RequireObject(j, "sampled_data", errs)) return spec;
  CheckKeys(j, "sampled_data",
            {"variant", "ny", "mu", "nz", "mw", "f", "g", "p", "q", "times",
             "controls"},
            errs);

  if (j.contains("variant") && j["variant"].is_string()) {
    const std::string v = j["variant"].get<std::string>();
    if (v == "C1D1")
      spec.variant = SampledVariant::kC1D1;
    else if (v == "C1D2")
      spec.variant = SampledVariant::kC1D2;
    else if (v == "C2D1")
      spec.variant = SampledVariant::kC2D1;
    else if (v == "C2D2")
      spec.variant = SampledVariant::kC2D2;
    else
      errs.add("sampled_data.variant",
               "unknown variant '" + v + "' (expected C1D1..C2D2)");
  } else {
    errs.add("sampled_data", "missing required key 'variant'");
  }
  spec.cont_dim = GetInt(j, "ny", "sampled_data", errs);
  spec.cont_control_dim = GetInt(j, "mu", "sampled_data", errs);
  spec.disc_dim = GetInt(j, "nz", "sampled_data", errs);
  spec.disc_control_dim = GetInt(j, "mw", "sampled_data", errs);
  if (j.contains("f"))
    spec.flow = ParseStringList(j["f"], "sampled_data.f", errs);
  else
    errs.add("sampled_data", "missing required key 'f'");
  if (j.contains("g"))
    spec.transition = ParseStringList(j["g"], "sampled_data.g", errs);
  else
    errs.add("sampled_data", "missing required key 'g'");
  if (j.contains("times"))
    spec.times = ParseDoubleList(j["times"], "sampled_data.times", errs);
  else
    errs.add("sampled_data", "missing required key 'times'");

  // Scenario files support zero-order-hold operators only (the reduction
  // itself requires them); basis operators stay a library-level feature.
  for (const char* key : {"p", "q"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_string() || j[key].get<std::string>() != "zoh")
      errs.add(std::string("sampled_data.") + key,
               "only \"zoh\" is supported in scenario files");
  }
  spec.p = InterpolationOperator::zero_order_hold(spec.disc_dim);
  spec.q = InterpolationOperator::zero_order_hold(spec.disc_control_dim);

  if (j.contains("controls") &&
      RequireObject(j["controls"], "sampled_data.controls", errs)) {
    const json& c = j["controls"];
    CheckKeys(c, "sampled_data.controls", {"u", "w"}, errs);
    if (c.contains("u"))
      controls_u = ParseControlSet(c["u"], "sampled_data.controls.u", errs);
    else
      errs.add("sampled_data.controls", "missing required key 'u'");
    if (c.contains("w"))
      controls_w = ParseControlSet(c["w"], "sampled_data.controls.w", errs);
    else
      errs.add("sampled_data.controls", "missing required key 'w'");
  } else if (!j.contains("controls")) {
    errs.add("sampled_data", "missing required key 'controls'");
  }
  return spec;
}

LQSystem ParseLq(const json& j, double horizon, Collector& errs,
                 ControlSet* controls_u, ControlSet* controls_w,
                 bool* has_controls) {
  LQSystem lq;
  lq.horizon = horizon;
  *has_controls = false;
  if (!RequireObject(j, "lq", errs)) return lq;
  CheckKeys(j, "lq",
            {"n", "mu", "mw", "P", "Q", "A", "B", "C", "A0", "impulses",
             "controls"},
            errs);
  lq.state_dim = GetInt(j, "n", "lq", errs);
  lq.control_dim = GetInt(j, "mu", "lq", errs);
  lq.impulse_control_dim = GetInt(j, "mw", "lq", errs);

  const auto tm = [&](const char* key) -> TimeMatrix {
    if (!j.contains(key)) {
      errs.add("lq", std::string("missing required key '") + key + "'");
      return TimeMatrix();
    }
    return ParseTimeMatrix(j[key], std::string("lq.") + key, errs);
  };
  lq.P = tm("P");
  lq.Q = tm("Q");
  lq.A = tm("A");
  lq.B = tm("B");
  lq.C = tm("C");
  if (j.contains("A0"))
    lq.A0 = ParseMatrix(j["A0"], "lq.A0", errs);
  else
    errs.add("lq", "missing required key 'A0'");

  if (j.contains("impulses")) {
    if (!j["impulses"].is_array()) {
      errs.add("lq.impulses", "expected an array");
    } else {
      for (std::size_t k = 0; k < j["impulses"].size(); ++k) {
        const std::string where = "lq.impulses[" + std::to_string(k) + "]";
        const json& ji = j["impulses"][k];
        if (!RequireObject(ji, where, errs)) continue;
        CheckKeys(ji, where, {"time", "M", "N", "alpha", "beta", "gamma"},
                  errs);
        LQImpulse imp;
        imp.time = GetNumber(ji, "time", where, errs);
        const auto mat = [&](const char* key) -> Eigen::MatrixXd {
          if (!ji.contains(key)) {
            errs.add(where, std::string("missing required key '") + key + "'");
            return Eigen::MatrixXd();
          }
          return ParseMatrix(ji[key], where + "." + key, errs);
        };
        imp.M = mat("M");
        imp.N = mat("N");
        imp.alpha = mat("alpha");
        imp.beta = mat("beta");
        imp.gamma = mat("gamma");
        lq.impulses.push_back(std::move(imp));
      }
    }
  }

  if (j.contains("controls") &&
      RequireObject(j["controls"], "lq.controls", errs)) {
    const json& c = j["controls"];
    CheckKeys(c, "lq.controls", {"u", "w"}, errs);
    if (c.contains("u") && c.contains("w")) {
      *controls_u = ParseControlSet(c["u"], "lq.controls.u", errs);
      *controls_w = ParseControlSet(c["w"], "lq.controls.w", errs);
      *has_controls = true;
    } else {
      errs.add("lq.controls", "expected both 'u' and 'w'");
    }
  }

  if (errs.ok())
    for (const std::string& e : lq.check()) errs.add("lq", e);
  return lq;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": " + e.what());
  }

  Collector errs;
  Scenario sc;
  if (!root.is_object())
    throw ValidationError(origin + ": top level must be a JSON object");

  CheckKeys(root, origin,
            {"horizon", "system", "sampled_data", "lq", "costs", "grid",
             "sim", "initial"},
            errs);

  const double horizon = GetNumber(root, "horizon", origin, errs);
  if (root.contains("horizon") && root["horizon"].is_number() &&
      horizon <= 0.0)
    errs.add(origin, "horizon must be positive");

  const CostText costs = ParseCosts(root, errs);

  const bool has_system = root.contains("system");
  const bool has_sd = root.contains("sampled_data");
  const bool has_lq = root.contains("lq");
  if (has_system && has_sd)
    errs.add(origin, "'system' and 'sampled_data' are mutually exclusive");
  if (!has_system && !has_sd && !has_lq)
    errs.add(origin,
             "expected one of 'system', 'sampled_data', or 'lq' to define "
             "the model");

  ControlSet lq_u, lq_w;
  bool lq_has_controls = false;
  if (has_lq)
    sc.lq = ParseLq(root["lq"], horizon, errs, &lq_u, &lq_w,
                    &lq_has_controls);

  if (has_system) {
    const HybridSystemSpec spec = ParseSystem(root["system"], horizon, errs);
    if (errs.ok()) {
      ValidationResult res = validate_system(spec, costs);
      if (res.ok())
        sc.model = *res.model;
      else
        for (const std::string& e : res.errors) errs.add("system", e);
    }
  } else if (has_sd) {
    ControlSet u, w;
    const SampledDataSpec spec =
        ParseSampledData(root["sampled_data"], horizon, errs, u, w);
    if (errs.ok()) {
      SampledValidation sd = validate_system(spec);
      if (!sd.ok()) {
        for (const std::string& e : sd.errors) errs.add("sampled_data", e);
      } else {
        ValidationResult res = reduce_sampled_data(*sd.system, costs, u, w);
        if (res.ok())
          sc.model = *res.model;
        else
          for (const std::string& e : res.errors) errs.add("sampled_data", e);
      }
    }
  } else if (has_lq && errs.ok()) {
    ValidationResult res = lq_has_controls
                               ? lq_to_general(*sc.lq, lq_u, lq_w)
                               : lq_to_general(*sc.lq);
    if (res.ok())
      sc.model = *res.model;
    else
      for (const std::string& e : res.errors) errs.add("lq", e);
  }

  if (root.contains("grid")) {
    const json& g = root["grid"];
    if (RequireObject(g, "grid", errs)) {
      CheckKeys(g, "grid", {"lo", "hi", "nodes", "delta"}, errs);
      Eigen::VectorXd lo, hi;
      std::vector<int> nodes;
      if (g.contains("lo"))
        lo = ParseVector(g["lo"], "grid.lo", errs);
      else
        errs.add("grid", "missing required key 'lo'");
      if (g.contains("hi"))
        hi = ParseVector(g["hi"], "grid.hi", errs);
      else
        errs.add("grid", "missing required key 'hi'");
      if (g.contains("nodes"))
        nodes = ParseIntList(g["nodes"], "grid.nodes", errs);
      else
        errs.add("grid", "missing required key 'nodes'");
      const double delta = GetNumber(g, "delta", "grid", errs, 1e-2);
      if (errs.ok()) {
        Grid grid = Grid::uniform(lo, hi, nodes, delta);
        try {
          grid.check();
          sc.grid = grid;
        } catch (const Error& e) {
          errs.add("grid", e.what());
        }
      }
    }
  }

  if (root.contains("sim")) {
    const json& s = root["sim"];
    if (RequireObject(s, "sim", errs)) {
      CheckKeys(s, "sim", {"step", "max_events", "u", "w"}, errs);
      if (s.contains("step")) {
        sc.sim_step = GetNumber(s, "step", "sim", errs);
        if (sc.sim_step <= 0.0) errs.add("sim.step", "must be positive");
      }
      if (s.contains("max_events"))
        sc.max_events = GetInt(s, "max_events", "sim", errs, 1000);
      if (s.contains("u")) sc.u_signal = ParseSignal(s["u"], "sim.u", errs);
      if (s.contains("w")) sc.w_signal = ParseSignal(s["w"], "sim.w", errs);
    }
  }

  if (root.contains("initial")) {
    const json& i = root["initial"];
    if (RequireObject(i, "initial", errs)) {
      CheckKeys(i, "initial", {"time", "state"}, errs);
      sc.initial_time =
          i.contains("time") ? GetNumber(i, "time", "initial", errs) : 0.0;
      if (i.contains("state"))
        sc.initial_state = ParseVector(i["state"], "initial.state", errs);
      else
        errs.add("initial", "missing required key 'state'");
      sc.has_initial = true;
    }
  }

  if (!errs.ok()) {
    std::ostringstream os;
    os << origin << ": invalid scenario (" << errs.errors.size()
       << " problem" << (errs.errors.size() == 1 ? "" : "s") << ")";
    for (const std::string& e : errs.errors) os << "\n  " << e;
    throw ValidationError(os.str());
  }

  sc.raw = text;
  sc.path = origin;
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ValidationError("cannot read scenario file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scenario(os.str(), path);
}

}  // namespace ioc
