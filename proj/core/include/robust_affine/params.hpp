#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace robust_affine {

/// Closed interval [low, high]; degenerate intervals are allowed.
struct Interval {
  double low = 0.0;
  double high = 0.0;

  bool degenerate() const noexcept { return low == high; }
  bool contains(double v) const noexcept { return low <= v && v <= high; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Uncertainty rectangle for the affine coefficients of
///   dX = (b0 + b1 X) dt + sqrt(a0 + a1 X^+) dW.
/// b0, b1 are drift intercept/slope (1/time); a0 is the variance intercept
/// (state^2/time), a1 the variance slope (state/time).
class ParameterBox {
 public:
  /// Throws Error(InvalidBox) unless every low <= high and a0.low, a1.low >= 0.
  ParameterBox(Interval b0, Interval b1, Interval a0, Interval a1);

  /// Single constant-parameter model.
  static ParameterBox point(double b0, double b1, double a0, double a1);

  const Interval& b0() const noexcept { return b0_; }
  const Interval& b1() const noexcept { return b1_; }
  const Interval& a0() const noexcept { return a0_; }
  const Interval& a1() const noexcept { return a1_; }

  friend bool operator==(const ParameterBox&, const ParameterBox&) = default;

 private:
  Interval b0_, b1_, a0_, a1_;
};

enum class StateSpace { RealLine, NonNegative, Positive };

std::string_view to_string(StateSpace space) noexcept;
/// Accepts "real_line", "nonnegative", "positive". Throws Error(InvalidArgument).
StateSpace parse_state_space(std::string_view text);

bool in_state_space(StateSpace space, double x) noexcept;

/// A bounded set of values for one state-dependent quantity.
struct AffineInterval {
  double lower = 0.0;
  double upper = 0.0;
};

/// One constant-parameter model inside a box.
struct CornerParameter {
  double b0 = 0.0;
  double b1 = 0.0;
  double a0 = 0.0;
  double a1 = 0.0;

  friend bool operator==(const CornerParameter&, const CornerParameter&) = default;
};

bool contains(const ParameterBox& box, const CornerParameter& theta) noexcept;

/// {b0 + b1 x : (b0, b1) in box}.
AffineInterval drift_interval(const ParameterBox& box, double x) noexcept;

/// {a0 + a1 x^+ : (a0, a1) in box}.
AffineInterval diffusion_interval(const ParameterBox& box, double x) noexcept;

/// Either a0 is bounded away from zero, or the variance intercept vanishes
/// and the Feller-type condition b0.low >= a1.high / 2 > 0 holds.
bool is_proper(const ParameterBox& box) noexcept;

struct Coefficients {
  double drift = 0.0;
  double variance = 0.0;
};

/// Upper endpoints of the drift and diffusion intervals at x.
Coefficients extremal_coefficients(const ParameterBox& box, double x) noexcept;

/// The state-independent upper slope b1.high. Throws Error(NotConstantSlope)
/// on RealLine when the b1 interval is not degenerate.
double upper_slope(const ParameterBox& box, StateSpace space);

/// Coefficients of the model attaining the largest value of E[exp(-∫X)]:
/// lower drift endpoint, upper variance endpoint.
Coefficients worst_case_coefficients(const ParameterBox& box, double x) noexcept;

/// Slope b1 of the price-maximising drift on the given state space (b1.low
/// for x >= 0). Same NotConstantSlope rule as upper_slope.
double worst_case_slope(const ParameterBox& box, StateSpace space);

/// Equally spaced values on each axis, endpoints included; degenerate axes
/// contribute one value. Throws Error(InvalidArgument) if resolution < 2.
std::vector<CornerParameter> corner_grid(const ParameterBox& box, int resolution);

}  // namespace robust_affine
