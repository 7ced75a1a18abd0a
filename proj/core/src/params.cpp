#include "robust_affine/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "robust_affine/error.hpp"

namespace robust_affine {

namespace {

void require_ordered(const Interval& iv, const char* name) {
  if (!(iv.low <= iv.high)) {
    throw Error(Error::Kind::InvalidBox,
                std::string("parameter box: ") + name + " interval has low > high or NaN");
  }
}

std::vector<double> axis_values(const Interval& iv, int resolution) {
  if (iv.degenerate()) return {iv.low};
  std::vector<double> values(static_cast<std::size_t>(resolution));
  const double step = (iv.high - iv.low) / (resolution - 1);
  for (int i = 0; i < resolution; ++i) values[i] = iv.low + step * i;
  // Endpoints are taken verbatim, not accumulated.
  values.front() = iv.low;
  values.back() = iv.high;
  return values;
}

}  // namespace

const char* to_string(Error::Kind kind) noexcept {
  switch (kind) {
    case Error::Kind::InvalidArgument: return "InvalidArgument";
    case Error::Kind::NotConstantSlope: return "NotConstantSlope";
    case Error::Kind::InvalidBox: return "InvalidBox";
    case Error::Kind::BlowUp: return "BlowUp";
    case Error::Kind::OutOfRange: return "OutOfRange";
    case Error::Kind::GridMismatch: return "GridMismatch";
    case Error::Kind::InvalidStep: return "InvalidStep";
    case Error::Kind::UnstableGrid: return "UnstableGrid";
    case Error::Kind::NotASuperhedge: return "NotASuperhedge";
  }
  return "Unknown";
}

ParameterBox::ParameterBox(Interval b0, Interval b1, Interval a0, Interval a1)
    : b0_(b0), b1_(b1), a0_(a0), a1_(a1) {
  require_ordered(b0_, "b0");
  require_ordered(b1_, "b1");
  require_ordered(a0_, "a0");
  require_ordered(a1_, "a1");
  if (a0_.low < 0.0 || a1_.low < 0.0) {
    throw Error(Error::Kind::InvalidBox, "parameter box: variance coefficients must be >= 0");
  }
}

ParameterBox ParameterBox::point(double b0, double b1, double a0, double a1) {
  return ParameterBox({b0, b0}, {b1, b1}, {a0, a0}, {a1, a1});
}

std::string_view to_string(StateSpace space) noexcept {
  switch (space) {
    case StateSpace::RealLine: return "real_line";
    case StateSpace::NonNegative: return "nonnegative";
    case StateSpace::Positive: return "positive";
  }
  return "unknown";
}

StateSpace parse_state_space(std::string_view text) {
  if (text == "real_line") return StateSpace::RealLine;
  if (text == "nonnegative") return StateSpace::NonNegative;
  if (text == "positive") return StateSpace::Positive;
  throw Error(Error::Kind::InvalidArgument, "unknown state space '" + std::string(text) + "'");
}

bool in_state_space(StateSpace space, double x) noexcept {
  switch (space) {
    case StateSpace::RealLine: return std::isfinite(x);
    case StateSpace::NonNegative: return x >= 0.0 && std::isfinite(x);
    case StateSpace::Positive: return x > 0.0 && std::isfinite(x);
  }
  return false;
}

bool contains(const ParameterBox& box, const CornerParameter& theta) noexcept {
  return box.b0().contains(theta.b0) && box.b1().contains(theta.b1) &&
         box.a0().contains(theta.a0) && box.a1().contains(theta.a1);
}

AffineInterval drift_interval(const ParameterBox& box, double x) noexcept {
  const bool nonneg = x >= 0.0;
  const double low_slope = nonneg ? box.b1().low : box.b1().high;
  const double high_slope = nonneg ? box.b1().high : box.b1().low;
  return {box.b0().low + low_slope * x, box.b0().high + high_slope * x};
}

AffineInterval diffusion_interval(const ParameterBox& box, double x) noexcept {
  const double xp = std::max(x, 0.0);
  return {box.a0().low + box.a1().low * xp, box.a0().high + box.a1().high * xp};
}

bool is_proper(const ParameterBox& box) noexcept {
  if (box.a0().low > 0.0) return true;
  const double half_a1 = box.a1().high / 2.0;
  return box.a0().low == 0.0 && box.a0().high == 0.0 && box.b0().low >= half_a1 && half_a1 > 0.0;
}

Coefficients extremal_coefficients(const ParameterBox& box, double x) noexcept {
  return {drift_interval(box, x).upper, diffusion_interval(box, x).upper};
}

Coefficients worst_case_coefficients(const ParameterBox& box, double x) noexcept {
  return {drift_interval(box, x).lower, diffusion_interval(box, x).upper};
}

double upper_slope(const ParameterBox& box, StateSpace space) {
  if (space == StateSpace::RealLine && !box.b1().degenerate()) {
    throw Error(Error::Kind::NotConstantSlope,
                "drift slope interval must be degenerate on the real line");
  }
  return box.b1().high;
}

double worst_case_slope(const ParameterBox& box, StateSpace space) {
  if (space == StateSpace::RealLine && !box.b1().degenerate()) {
    throw Error(Error::Kind::NotConstantSlope,
                "drift slope interval must be degenerate on the real line");
  }
  return box.b1().low;
}

std::vector<CornerParameter> corner_grid(const ParameterBox& box, int resolution) {
  if (resolution < 2) {
    throw Error(Error::Kind::InvalidArgument, "corner grid resolution must be >= 2");
  }
  const auto b0 = axis_values(box.b0(), resolution);
  const auto b1 = axis_values(box.b1(), resolution);
  const auto a0 = axis_values(box.a0(), resolution);
  const auto a1 = axis_values(box.a1(), resolution);

  std::vector<CornerParameter> grid;
  grid.reserve(b0.size() * b1.size() * a0.size() * a1.size());
  for (double v0 : b0)
    for (double v1 : b1)
      for (double w0 : a0)
        for (double w1 : a1) grid.push_back({v0, v1, w0, w1});
  return grid;
}

}  // namespace robust_affine
