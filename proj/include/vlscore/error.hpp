// Copyright 2026 The VLScore Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace vlscore {

// Bad input data or arguments. Surfaces as exit code 1 from the CLI.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A similarity measure has no value for this input (e.g. the angle at a
// vertex that coincides with another). Still an input error.
class UndefinedMeasureError : public InputError {
 public:
  using InputError::InputError;
};

// Raised when an arithmetic invariant is broken beyond rounding noise.
// Surfaces as exit code 2 from the CLI.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Input error that points at a line of a text file (1-based).
class ParseError : public InputError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : InputError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace vlscore
