// Copyright 2026 The MAGI Clustering Authors
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
#ifndef MAGI_TYPES_H_
#define MAGI_TYPES_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace magi {

using NodeId = std::int32_t;
using EdgeIndex = std::int64_t;

// Precision used for training math. Test oracles instantiate the templated
// kernels with double.
using Real = float;

// Raised for malformed input files. Carries the 1-based line (or row) number
// when one is known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::int64_t line = 0)
      : std::runtime_error(what), line_(line) {}
  std::int64_t line() const { return line_; }

 private:
  std::int64_t line_;
};

// Raised when a request is structurally invalid (bad ids, mismatched shapes,
// out-of-range hyperparameters).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a dense oracle-only routine is asked to allocate beyond its cap.
class CapacityExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace magi

#endif  // MAGI_TYPES_H_
