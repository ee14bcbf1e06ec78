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

#pragma once

#include <span>
#include <vector>

namespace ioc {

/// Number of uniform steps covering `length` with a step no larger than
/// `requested_step`: ceil(length/requested_step), with a relative guard so
/// exact multiples are not bumped up by floating-point noise.
int steps_for(double length, double requested_step);

/// Time t_j = begin + j*(end-begin)/steps, pinned exactly to `end` at the
/// last index so segment boundaries (impulse times) are hit bit-exactly.
double mesh_time(double begin, double end, int steps, int j);

/// Partition of [start, end] split at interior breakpoints, each segment
/// carrying its own uniform step count. Both the trajectory integrator and
/// the value-function sweep use this, so their meshes agree.
struct TimeSegments {
  struct Segment {
    double begin = 0.0;
    double end = 0.0;
    int steps = 1;
    double step() const { return (end - begin) / steps; }
  };

  std::vector<Segment> segments;

  /// Breakpoints must be strictly increasing; only those strictly inside
  /// (start, end) split the interval.
  static TimeSegments build(double start, double end,
                            std::span<const double> breakpoints,
                            double requested_step);
};

}  // namespace ioc
