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

#ifndef IOC_CLI_HPP_
#define IOC_CLI_HPP_

#include <string>
#include <vector>

namespace ioc {

/// Everything one run needs beyond the scenario file. Fields left at their
/// sentinel (negative numbers, empty vectors/strings) defer to the scenario
/// or to per-command defaults.
struct RunConfig {
  std::string command;
  std::string scenario_path;
  std::string out_dir;  // --out; default $IOC_OUT_DIR, else "."

  // Grid overrides (--grid-lo/--grid-hi/--grid-nodes/--delta).
  std::vector<double> grid_lo;
  std::vector<double> grid_hi;
  std::vector<int> grid_nodes;
  double delta = -1.0;

  // Control lattice densities; only box-shaped sets can be resampled.
  int u_samples = 0;
  int w_samples = 0;

  double tolerance = -1.0;  // per-command default when negative
  int threads = 1;
  unsigned long seed = 1;  // drives the sampled checks in check-expr

  std::string variant;  // solve family: basic | parametrized | aftereffect
  bool zero_beta = false;
  double step = -1.0;  // simulate/riccati step override

  // Initial point override (--time/--state).
  bool has_initial = false;
  double initial_time = 0.0;
  std::vector<double> initial_state;

  // check-expr inputs.
  std::string expr_text;
  std::vector<std::string> expr_vars;
  std::string diff_var;   // differentiate with respect to this variable
  bool diff_check = false;  // random symbolic-vs-central-difference audit
};

/// Runs one fully parsed command. Returns the process exit code:
/// 0 success, 2 scenario or validation failure, 3 numerical failure,
/// 4 compare-lq discrepancy above threshold. Every failure also prints
/// one `error: <category>: <message>` line to stderr.
int run_command(const RunConfig& config);

/// Parses argv into a RunConfig and runs it; the `ioc` binary's whole main.
/// Also usable from tests: dispatch({"solve", "scenario.json", ...}).
int run_cli(int argc, const char* const* argv);
int dispatch(const std::vector<std::string>& args);

}  // namespace ioc

#endif  // IOC_CLI_HPP_
