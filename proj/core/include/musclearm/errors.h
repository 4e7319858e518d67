// Copyright 2026 The musclearm Authors.
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

#ifndef MUSCLEARM_ERRORS_H_
#define MUSCLEARM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace musclearm {

// Argument outside the mathematical domain of a curve or dynamics routine.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Target value outside the open range an inverse curve can reach.
class OutOfRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// a * fl fell below the floor where the fiber equilibrium is solvable.
class DegenerateEquilibrium : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The model itself is unusable (e.g. an ill-conditioned mass matrix).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnreachableError : public std::runtime_error {
 public:
  UnreachableError(const std::string& what, std::size_t sample)
      : std::runtime_error(what), sample_(sample) {}
  std::size_t sample() const { return sample_; }

 private:
  std::size_t sample_;
};

// File system or artifact read/write failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parse or validation failure in an experiment config. line() is 0 for
// validation errors that are not tied to a source line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string field, int line = 0)
      : std::runtime_error(what), field_(std::move(field)), line_(line) {}
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

}  // namespace musclearm

#endif  // MUSCLEARM_ERRORS_H_
