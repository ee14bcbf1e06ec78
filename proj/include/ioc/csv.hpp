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

#ifndef IOC_CSV_HPP_
#define IOC_CSV_HPP_

#include <cstdint>
#include <string>
#include <string_view>

#include "ioc/hjb.hpp"
#include "ioc/model.hpp"
#include "ioc/pmp.hpp"
#include "ioc/riccati.hpp"
#include "ioc/sim.hpp"

namespace ioc {

// CSV renderers for every exportable artifact. All output is
// byte-deterministic: fixed column order, floats as %.17g (lossless
// round-trip), LF line endings, and a trailing newline. The writers return
// the file content; callers persist it (in binary mode, so Windows runtimes
// cannot rewrite the line endings).

/// %.17g rendering used by every CSV cell.
std::string format_double(double v);

/// 64-bit FNV-1a digest of a byte string, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Columns: t, side(-|+|.), x1..xn, u1..umu, jump(0|1). Two rows per
/// impulse time; the side "-" row carries jump = 1.
std::string trajectory_csv(const Trajectory& traj, int n, int mu);

/// Companion jump table: t, xm1..xmn (left limit), xp1..xpn (right limit),
/// w1..wmw, and the extra impulse argument (a1.. or b1..) when present.
std::string jumps_csv(const Trajectory& traj, int n, int mw, ImpulseArg arg,
                      int extra_dim);

/// Columns: s, side, [b1..bmw,] xi1..xin, V. Aftereffect solutions emit one
/// block per carried parameter b; other variants have no b columns.
std::string value_csv(const ValueFunction& vf);

/// Parametrized variant only: the per-a left-limit values retained at each
/// impulse time. Columns: s, side(-), a1..amu, xi1..xin, V.
std::string impulse_details_csv(const ValueFunction& vf,
                                const std::vector<Eigen::VectorXd>& a_lattice);

/// Columns: s, side, [a1..amu,] [b1..bmw,] xi1..xin, u1..umu, w1..wmw.
/// Flow rows carry u; impulse (side -) rows carry w plus, for the
/// parametrized variant, the minimizing a. Cells that do not apply are
/// empty. The terminal slice has no controls and is omitted.
std::string policy_csv(const Policy& pol, const ValueFunction& vf);

/// Columns: s, side, p1..pn.
std::string costate_csv(const CostatePath& cp, int n);

/// Columns: s, kind(H|K), c1..cmax, margin; H rows fill mu control cells,
/// K rows fill mw cells, the rest stay empty.
std::string extremum_csv(const ExtremumReport& rep, int mu, int mw);

/// Columns: s, side(-|+|.), K_11..K_nn row-major.
std::string kpath_csv(const RiccatiSolution& sol);

/// Columns: tau, L_11..L_{mw,n} row-major; one row per impulse.
std::string gains_csv(const RiccatiSolution& sol);

/// Inverse of trajectory_csv/jumps_csv: reconstructs the trajectory,
/// deducing dimensions from the headers. jumps_text may be empty when the
/// trajectory has no impulses. Throws ValidationError on malformed input.
Trajectory parse_trajectory_csv(const std::string& trajectory_text,
                                const std::string& jumps_text);

}  // namespace ioc

#endif  // IOC_CSV_HPP_
