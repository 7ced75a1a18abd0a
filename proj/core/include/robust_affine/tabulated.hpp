#pragma once

#include <istream>
#include <string>
#include <vector>

namespace robust_affine {

/// Piecewise-linear function through (x_i, y_i) with strictly increasing x;
/// linear extrapolation from the end segments. A single node is a constant.
class TabulatedFunction {
 public:
  TabulatedFunction(std::vector<double> xs, std::vector<double> ys);

  static TabulatedFunction constant(double c) { return TabulatedFunction({0.0}, {c}); }
  /// slope * x + intercept, represented exactly.
  static TabulatedFunction linear(double slope, double intercept = 0.0) {
    return TabulatedFunction({0.0, 1.0}, {intercept, intercept + slope});
  }

  double operator()(double x) const noexcept;

  const std::vector<double>& xs() const noexcept { return xs_; }
  const std::vector<double>& ys() const noexcept { return ys_; }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// Reads two whitespace-separated columns (state, value). Blank lines and
/// lines starting with '#' are skipped. Throws Error(InvalidArgument) with
/// the offending line number on malformed or non-increasing input.
TabulatedFunction read_tabulated(std::istream& in, const std::string& source = "<stream>");

}  // namespace robust_affine
