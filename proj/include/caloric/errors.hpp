#pragma once

#include <stdexcept>
#include <string>

namespace caloric {

// Invalid or inconsistent run configuration (CLI exit code 3).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A solver detected a nonfinite value, constraint drift or energy growth (CLI exit code 4).
struct NumericalAbort : std::runtime_error {
  NumericalAbort(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage(stage) {}
  std::string stage;
};

// Data would leave the non-margin region of the grid.
struct SupportError : std::invalid_argument {
  SupportError(const std::string& what, double required_half_width)
      : std::invalid_argument(what), required_half_width(required_half_width) {}
  double required_half_width;
};

}  // namespace caloric
