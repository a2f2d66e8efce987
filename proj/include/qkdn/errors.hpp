#pragma once

#include <stdexcept>
#include <string>

namespace qkdn {

/// Invalid argument to a model operation (negative delay, n < 3, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when scheduling on an engine that has been shut down.
class EngineStopped : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An event handler failed; the message names the offending event.
class SimulationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration could not be parsed or validated. `line` is 1-based, 0 when
/// no source position is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace qkdn
