#pragma once

#include <stdexcept>
#include <string>

namespace robust_affine {

/// Base class for every error raised by the library. `kind()` is a stable
/// identifier usable in reports and exit-code mapping.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    InvalidArgument,
    NotConstantSlope,
    InvalidBox,
    BlowUp,
    OutOfRange,
    GridMismatch,
    InvalidStep,
    UnstableGrid,
    NotASuperhedge,
  };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(Error::Kind kind) noexcept;

/// Thrown by the G-PDE solver when the explicit scheme would lose monotonicity.
class UnstableGridError : public Error {
 public:
  UnstableGridError(const std::string& what, double max_dt)
      : Error(Kind::UnstableGrid, what), max_dt_(max_dt) {}

  /// Largest admissible time step for the given spatial grid and coefficients.
  double max_admissible_dt() const noexcept { return max_dt_; }

 private:
  double max_dt_;
};

}  // namespace robust_affine
