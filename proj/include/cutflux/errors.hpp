#pragma once

#include <stdexcept>
#include <string>

namespace cutflux {

enum class ErrorKind {
  invalid_argument,
  degenerate_cut,
  unsupported_geometry,
  solver_failure,
  singular_system,
  inconsistent_patch,
  unisolvence_failure,
  io_error,
};

const char* to_string(ErrorKind kind);

/// Error raised by every module. `value` carries the diagnostic number that
/// goes with the kind (final residual, condition estimate, ...), or 0.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, double value = 0.0)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        value_(value) {}

  ErrorKind kind() const noexcept { return kind_; }
  double value() const noexcept { return value_; }

 private:
  ErrorKind kind_;
  double value_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::degenerate_cut: return "degenerate-cut";
    case ErrorKind::unsupported_geometry: return "unsupported-geometry";
    case ErrorKind::solver_failure: return "solver-failure";
    case ErrorKind::singular_system: return "singular-system";
    case ErrorKind::inconsistent_patch: return "inconsistent-patch";
    case ErrorKind::unisolvence_failure: return "unisolvence-failure";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace cutflux
