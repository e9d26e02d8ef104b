#pragma once

#include <stdexcept>
#include <string>

namespace hetmc {

/// Bad input: malformed files, out-of-range fields, violated preconditions.
/// CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A requested target cannot be met (path demand overflows, no frontier
/// point under the latency bound). CLI exit code 3.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Degenerate model fit (non-increasing latency observations and the like).
class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hetmc
