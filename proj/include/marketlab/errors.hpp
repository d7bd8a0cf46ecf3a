#pragma once

#include <stdexcept>
#include <string>

namespace marketlab {

/// Parse or validation failure in a config file or input dataset.
/// Carries the 1-based line number when one is known (0 otherwise).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string msg, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + std::move(msg)
                                    : std::move(msg)),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_ = 0;
};

/// A market specification that cannot be realized (non-PSD correlation
/// target, variance incompatible with the marginal family, ...).
class InfeasibleSpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested stakes exceed the unit budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No opportunity passed the positive-edge filter.
class NoPositiveEdgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training loss blew past the divergence guard.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace marketlab
