//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef FDBN_ERRORS_H_
#define FDBN_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fdbn {

// Invalid argument values (negative thresholds, out-of-range lags, K <= 0).
class ArgumentError: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Shape mismatch between operands.
class DimensionError: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Factorization failures, overflow, singular systems.
class NumericError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Degenerate inputs to ranking metrics.
class MetricError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input files. line() is 1-based; 0 when not tied to a line.
class IngestError: public std::runtime_error {
public:
  IngestError(const std::string &what, std::size_t line)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": "
                                           + what),
        line_(line) { }

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace fdbn

#endif  // FDBN_ERRORS_H_
