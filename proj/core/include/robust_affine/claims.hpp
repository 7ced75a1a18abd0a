#pragma once

#include <vector>

#include "robust_affine/matrix.hpp"
#include "robust_affine/riccati.hpp"
#include "robust_affine/tabulated.hpp"

namespace robust_affine {

/// Pays a constant amount at maturity if no default occurred before it.
struct EndowmentSpec {
  double maturity = 0.0;
  double payout = 1.0;
};

/// 1{not defaulted} * payout * upper_bond_price(sol, t, T, x).
double pure_endowment_price(const RiccatiSolution& sol, double t, double maturity, double x,
                            bool defaulted, double payout);

inline double pure_endowment_price(const RiccatiSolution& sol, const EndowmentSpec& spec,
                                   double t, double x, bool defaulted) {
  return pure_endowment_price(sol, t, spec.maturity, x, defaulted, spec.payout);
}

/// Variance-rate bounds [low, high] of the G-Brownian motion.
struct VolBounds {
  double low = 0.0;
  double high = 0.0;
};

/// G(a) = (high * a^+ - low * a^-) / 2.
double g_function(double a, const VolBounds& bounds) noexcept;

struct AssetGrid {
  double lower = 0.0;
  double upper = 1.0;
  int nodes = 3;
  double dt = 1e-3;
  double maturity = 1.0;
};

/// dS = b(S) ds + h(S) d<B> + sigma(S) dB under a G-Brownian motion B.
struct GPdeProblem {
  TabulatedFunction payoff;
  TabulatedFunction drift = TabulatedFunction::constant(0.0);
  TabulatedFunction qv_loading = TabulatedFunction::constant(0.0);
  TabulatedFunction sigma = TabulatedFunction::constant(0.0);
  VolBounds vol_bounds;
  AssetGrid grid;
};

class ValueSurface {
 public:
  ValueSurface(std::vector<double> times, std::vector<double> states, Matrix values)
      : times_(std::move(times)), states_(std::move(states)), values_(std::move(values)) {}

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& states() const noexcept { return states_; }
  /// Row k holds the layer at times()[k].
  const Matrix& values() const noexcept { return values_; }
  double maturity() const noexcept { return times_.back(); }

  /// Bilinear interpolation; Error(OutOfRange) outside the grid.
  double value_at(double t, double y) const;

 private:
  std::vector<double> times_;
  std::vector<double> states_;
  Matrix values_;
};

/// Largest time step keeping the explicit scheme monotone:
/// dt * max_i (high * sigma_i^2 / dy^2 + high * |h_i| / (2 dy) + |b_i| / dy) <= 1.
double max_stable_dt(const GPdeProblem& problem);

/// Backward explicit monotone scheme for
///   v_t + G(sigma^2 v_yy + h v_y) + b v_y = 0,  v(T, .) = f,
/// with upwind first differences and linear extrapolation at both edges.
/// The requested dt is shrunk so that it divides the maturity.
/// Throws UnstableGridError (carrying the admissible dt) if dt is too large,
/// Error(InvalidArgument) for malformed problems.
ValueSurface solve_g_pde(const GPdeProblem& problem);

/// upper_bond_price(sol, t, T, x_mu) * surface.value_at(t, y_s). The surface
/// maturity must equal T.
double product_claim_value(double t, double x_mu, const RiccatiSolution& sol,
                           const ValueSurface& surface, double y_s, double maturity);

}  // namespace robust_affine
