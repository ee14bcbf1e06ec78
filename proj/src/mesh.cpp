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

#include "ioc/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "ioc/errors.hpp"

namespace ioc {

int steps_for(double length, double requested_step) {
  if (!(requested_step > 0.0)) throw ValidationError("step must be positive");
  if (!(length > 0.0)) return 1;
  const double q = length / requested_step;
  const double r = std::round(q);
  if (r >= 1.0 && std::abs(q - r) <= 1e-9 * std::max(1.0, q)) {
    return static_cast<int>(r);
  }
  return std::max(1, static_cast<int>(std::ceil(q)));
}

double mesh_time(double begin, double end, int steps, int j) {
  if (j <= 0) return begin;
  if (j >= steps) return end;
  return begin + j * ((end - begin) / steps);
}

TimeSegments TimeSegments::build(double start, double end,
                                 std::span<const double> breakpoints,
                                 double requested_step) {
  if (!(end > start)) throw ValidationError("empty time interval");
  std::vector<double> cuts;
  cuts.push_back(start);
  for (double b : breakpoints) {
    if (b <= start || b >= end) continue;
    if (b <= cuts.back()) throw ValidationError("breakpoints not strictly increasing");
    cuts.push_back(b);
  }
  cuts.push_back(end);

  TimeSegments out;
  out.segments.reserve(cuts.size() - 1);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Segment seg;
    seg.begin = cuts[i];
    seg.end = cuts[i + 1];
    seg.steps = steps_for(seg.end - seg.begin, requested_step);
    out.segments.push_back(seg);
  }
  return out;
}

}  // namespace ioc
