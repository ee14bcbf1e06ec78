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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ioc {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the expression parser. Carries the byte offset of the offending
/// token inside the source text.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Raised when evaluating an expression outside its domain (division by
/// zero, log/sqrt of a non-positive/negative argument, missing binding).
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Raised for structurally invalid inputs: bad dimensions, empty control
/// sets, non-increasing impulse times, malformed scenario files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Raised when a numerical procedure fails at run time: state blow-up,
/// singular matrices that must be inverted, trajectories leaving the grid.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ioc
