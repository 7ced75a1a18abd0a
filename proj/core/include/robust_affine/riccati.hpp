#pragma once

#include <span>
#include <string>
#include <vector>

#include "robust_affine/params.hpp"

namespace robust_affine {

struct RiccatiOptions {
  /// Local error tolerance of the adaptive integrator, in (0, 1e-3].
  double tol = 1e-8;
  /// Largest admissible step; 0 selects horizon / 64.
  double max_step = 0.0;
  /// |psi| beyond this value is reported as finite-time explosion.
  double blowup_guard = 1e6;
};

struct StepControl {
  std::string method;
  double max_step = 0.0;
  double tol = 0.0;
};

/// Gridded solution of the generalised Riccati system
///
///   psi' = sup_{(a1,b1)} (a1 psi^2 / 2 + b1 psi) - 1,   psi(0) = u
///   phi' = sup_{(a0,b0)} (a0 psi^2 / 2 + b0 psi),        phi(0) = 0
///
/// over the parameter box. The variance endpoint is always the upper one; the
/// drift endpoint follows the sign of psi (lower endpoint while psi <= 0).
/// Values between grid nodes use cubic Hermite interpolation with the ODE
/// slopes, limited per interval so that monotone data stays monotone.
class RiccatiSolution {
 public:
  double u() const noexcept { return u_; }
  double horizon() const noexcept { return time_grid_.back(); }
  const std::vector<double>& time_grid() const noexcept { return time_grid_; }
  const std::vector<double>& phi_values() const noexcept { return phi_; }
  const std::vector<double>& psi_values() const noexcept { return psi_; }
  const ParameterBox& box() const noexcept { return box_; }
  StateSpace space() const noexcept { return space_; }
  /// Drift slope applied while psi <= 0.
  double slope() const noexcept { return slope_; }
  const StepControl& step_control() const noexcept { return control_; }

  /// Dense evaluation at time-to-maturity s in [0, horizon]; throws OutOfRange.
  double phi(double s) const;
  double psi(double s) const;

 private:
  friend RiccatiSolution solve_riccati(const ParameterBox&, StateSpace, double, double,
                                       const RiccatiOptions&);

  RiccatiSolution(ParameterBox box, StateSpace space) : box_(box), space_(space) {}

  struct HermiteSlopes {
    double left = 0.0;
    double right = 0.0;
  };
  double evaluate(double s, const std::vector<double>& values,
                  const std::vector<HermiteSlopes>& slopes) const;
  void build_interpolant(const std::vector<double>& dphi, const std::vector<double>& dpsi);

  double u_ = 0.0;
  std::vector<double> time_grid_;
  std::vector<double> phi_;
  std::vector<double> psi_;
  std::vector<HermiteSlopes> phi_slopes_;
  std::vector<HermiteSlopes> psi_slopes_;
  ParameterBox box_;
  StateSpace space_;
  double slope_ = 0.0;
  StepControl control_;
};

/// Integrates the generalised Riccati system on [0, horizon].
/// Errors: InvalidBox (non-constant slope on the real line, or a1 != 0 on the
/// real line), InvalidArgument (horizon <= 0, tol outside (0, 1e-3]),
/// BlowUp (|psi| exceeds the guard or the step size underflows).
RiccatiSolution solve_riccati(const ParameterBox& box, StateSpace space, double horizon, double u,
                              const RiccatiOptions& options);

inline RiccatiSolution solve_riccati(const ParameterBox& box, StateSpace space, double horizon,
                                     double u, double tol) {
  RiccatiOptions options;
  options.tol = tol;
  return solve_riccati(box, space, horizon, u, options);
}

/// exp(phi(T - t, 0) + psi(T - t, 0) x). Requires a solution with u = 0.
double upper_bond_price(const RiccatiSolution& sol, double t, double maturity, double x);

/// Value of the longevity bond along one intensity trajectory:
///   Y_r = exp(-∫_0^r mu ds) exp(phi(T - r, 0) + psi(T - r, 0) mu_r),
/// with the integral by the trapezoid rule on the path grid. The grid must
/// start at 0 and end at or before the maturity (GridMismatch otherwise).
std::vector<double> longevity_value_path(std::span<const double> grid,
                                         std::span<const double> mu_path,
                                         const RiccatiSolution& sol, double maturity);

}  // namespace robust_affine
