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

#ifndef IOC_SCENARIO_HPP_
#define IOC_SCENARIO_HPP_

#include <optional>
#include <string>

#include "ioc/hjb.hpp"
#include "ioc/model.hpp"
#include "ioc/riccati.hpp"
#include "ioc/sim.hpp"

namespace ioc {

/// One parsed scenario file. The model comes from exactly one of the
/// `system`, `sampled_data` (reduced to impulsive form), or `lq` (expanded
/// to expression form) blocks; an `lq` block may additionally accompany
/// `system` for cross-validation commands. See docs/scenario.schema.json
/// for the field-by-field contract.
struct Scenario {
  std::string path;  // as passed to the loader
  std::string raw;   // file bytes, for the run-summary digest

  ValidatedModel model;
  std::optional<LQSystem> lq;

  std::optional<Grid> grid;
  double sim_step = 1e-3;
  int max_events = 1000;
  std::optional<ControlSignal> u_signal;  // sim.u
  std::optional<ControlSignal> w_signal;  // sim.w

  bool has_initial = false;
  double initial_time = 0.0;
  Eigen::VectorXd initial_state;
};

/// Parses scenario JSON text. `origin` names the source in diagnostics.
/// Collects every problem it can find and throws a single ValidationError
/// listing all of them; malformed JSON throws with the parser's positioned
/// diagnostic.
Scenario parse_scenario(const std::string& text, const std::string& origin);

/// Reads and parses a scenario file. Throws ValidationError when the file
/// cannot be read.
Scenario load_scenario(const std::string& path);

}  // namespace ioc

#endif  // IOC_SCENARIO_HPP_
