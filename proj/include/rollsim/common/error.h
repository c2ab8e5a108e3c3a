// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rollsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected parameters or a violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Lookup of an unknown actor, pool, worker, method or label.
class NotFound : public Error {
 public:
  using Error::Error;
};

/// A resource request that does not fit. `free` is what was left when the
/// request was refused so callers can fall back to another pool.
class CapacityError : public Error {
 public:
  CapacityError(const std::string &what, int64_t free)
      : Error(what), free_(free) {}
  int64_t free() const { return free_; }

 private:
  int64_t free_;
};

/// No alive worker can take a routed request.
class RoutingError : public Error {
 public:
  using Error::Error;
};

/// Invocation of a method through the wrong execution mode.
class DispatchError : public Error {
 public:
  using Error::Error;
};

/// Operation not permitted in the current state of the object.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Scenario schema violation. Holds one diagnostic per offending field.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> diagnostics);
  const std::vector<std::string> &diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

inline std::string JoinDiagnostics(const std::vector<std::string> &lines) {
  std::string out = "scenario validation failed:";
  for (const auto &line : lines) {
    out += "\n  ";
    out += line;
  }
  return out;
}

inline ValidationError::ValidationError(std::vector<std::string> diagnostics)
    : Error(JoinDiagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

}  // namespace rollsim
