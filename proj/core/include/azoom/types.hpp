#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace azoom {

using ArmId = std::size_t;
using BallId = std::size_t;
using Trial = std::uint64_t;

/// Raised when a sample-driven estimate is requested before enough data exists.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an internal structural invariant is broken (partition coverage,
/// cluster separation, ...). These indicate a bug, not bad input.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised for malformed experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed-open context interval [lo, hi). The interval ending at 1 also owns 1.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  [[nodiscard]] double width() const { return hi - lo; }
  [[nodiscard]] double mid() const { return 0.5 * (lo + hi); }
  [[nodiscard]] bool contains(double x) const {
    return x >= lo && (x < hi || (hi == 1.0 && x == 1.0));
  }
  [[nodiscard]] Interval left_half() const { return {lo, mid()}; }
  [[nodiscard]] Interval right_half() const { return {mid(), hi}; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

}  // namespace azoom
