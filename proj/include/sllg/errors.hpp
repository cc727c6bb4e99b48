#pragma once

#include <stdexcept>
#include <string>

namespace sllg {

/// Invalid arguments, malformed configuration, or violated preconditions.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A gate evaluated before compute rejected the run (CFL or smallness).
class GateError : public std::runtime_error {
 public:
  GateError(const std::string& what, double limit)
      : std::runtime_error(what), limit_(limit) {}

  /// The admissible bound the gate compared against (e.g. the maximal dt).
  double limit() const { return limit_; }

 private:
  double limit_;
};

/// Non-finite state detected during time stepping.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}

  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace sllg
