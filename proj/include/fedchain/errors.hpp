#pragma once

#include <stdexcept>
#include <string>

namespace fedchain {

// Bad configuration (unknown field, invalid preset, degenerate stepsize).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A vector or scalar turned NaN/Inf inside an operation.
class NonFiniteError : public std::runtime_error {
 public:
  explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical blow-up: a non-finite iterate at a known round.
class BlowupError : public std::runtime_error {
 public:
  BlowupError(int round, const std::string& what)
      : std::runtime_error(what + " (round " + std::to_string(round) + ")"),
        round_(round) {}
  int round() const { return round_; }

 private:
  int round_;
};

}  // namespace fedchain
