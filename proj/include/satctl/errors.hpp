#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace satctl {

// Error taxonomy, mirrored by the CLI exit codes:
//   ConfigError    -> 3  (bad scenario/schema/parameters, structural misuse)
//   ViolationError -> 2  (a certified property failed at runtime)
//   NumericalError -> 4  (non-finite values, genuine numerical singularities)
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A certified invariant failed (input confinement, output corridor, barrier, ...).
// `time` is NaN until the layer that knows the clock fills it in.
class ViolationError : public std::runtime_error {
 public:
  ViolationError(std::string monitor, double time, const std::string& what)
      : std::runtime_error(what), monitor_(std::move(monitor)), time_(time) {}

  const std::string& monitor() const { return monitor_; }
  double time() const { return time_; }
  bool has_time() const { return !std::isnan(time_); }
  void set_time(double t) { time_ = t; }

 private:
  std::string monitor_;
  double time_;
};

// Denominator guard: all legitimate denominators (plant gains, the saturation
// gain, jet divisors) are bounded away from zero along valid trajectories;
// crossing this threshold signals a bug or a violated assumption, not an edge
// to be smoothed over.
inline constexpr double kEpsDiv = 1e-9;

}  // namespace satctl
