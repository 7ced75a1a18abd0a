#include "robust_affine/riccati.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "format.hpp"
#include "robust_affine/error.hpp"

namespace robust_affine {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Difference between the 5th- and embedded 4th-order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

using State = std::array<double, 2>;  // {phi, psi}

struct Hamiltonian {
  double a0, a1;            // upper variance endpoints
  double b0_low, b0_high;   // drift intercept endpoints
  double b1_low, b1_high;   // drift slope endpoints

  State operator()(const State& y) const noexcept {
    const double psi = y[1];
    const double sq = 0.5 * psi * psi;
    const double b0 = psi > 0.0 ? b0_high : b0_low;
    const double b1v = psi > 0.0 ? b1_high : b1_low;
    return {a0 * sq + b0 * psi, a1 * sq + b1v * psi - 1.0};
  }
};

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
  State acc{0.0, 0.0};
  for (const auto& [w, k] : terms) {
    acc[0] += w * (*k)[0];
    acc[1] += w * (*k)[1];
  }
  return {y[0] + h * acc[0], y[1] + h * acc[1]};
}

}  // namespace

RiccatiSolution solve_riccati(const ParameterBox& box, StateSpace space, double horizon, double u,
                              const RiccatiOptions& options) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(Error::Kind::InvalidArgument, "riccati: horizon must be positive");
  }
  if (!(options.tol > 0.0 && options.tol <= 1e-3)) {
    throw Error(Error::Kind::InvalidArgument, "riccati: tolerance must lie in (0, 1e-3]");
  }
  if (!std::isfinite(u)) throw Error(Error::Kind::InvalidArgument, "riccati: u must be finite");

  double slope = 0.0;
  try {
    slope = worst_case_slope(box, space);
  } catch (const Error& e) {
    throw Error(Error::Kind::InvalidBox, std::string("riccati: ") + e.what());
  }
  if (space == StateSpace::RealLine && box.a1().high != 0.0) {
    throw Error(Error::Kind::InvalidBox,
                "riccati: the variance slope must vanish on the real line");
  }

  const Hamiltonian rhs{box.a0().high, box.a1().high, box.b0().low,
                        box.b0().high, box.b1().low,  box.b1().high};
  const double max_step = options.max_step > 0.0 ? std::min(options.max_step, horizon)
                                                 : horizon / 64.0;
  const double tol = options.tol;

  RiccatiSolution sol(box, space);
  sol.u_ = u;
  sol.slope_ = slope;
  sol.control_ = {"dormand-prince-5(4)", max_step, tol};

  std::vector<double> dphi, dpsi;
  State y{0.0, u};
  State k1 = rhs(y);
  double t = 0.0;
  sol.time_grid_.push_back(0.0);
  sol.phi_.push_back(0.0);
  sol.psi_.push_back(u);
  dphi.push_back(k1[0]);
  dpsi.push_back(k1[1]);

  double h = std::min(max_step, 1e-2 * horizon);
  const double min_step = 1e-14 * horizon;

  while (t < horizon) {
    bool last = false;
    if (t + h >= horizon) {
      h = horizon - t;
      last = true;
    }
    const State k2 = rhs(axpy(y, h, {{a21, &k1}}));
    const State k3 = rhs(axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const State k4 = rhs(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State k5 = rhs(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State k6 =
        rhs(axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State y_new = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State k7 = rhs(y_new);

    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double local =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale = tol * (1.0 + std::max(std::abs(y[i]), std::abs(y_new[i])));
      err = std::max(err, std::abs(local) / scale);
    }
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      t = last ? horizon : t + h;
      y = y_new;
      k1 = k7;
      if (std::abs(y[1]) > options.blowup_guard || !std::isfinite(y[0])) {
        throw Error(Error::Kind::BlowUp,
                    "riccati: |psi| exceeded the blow-up guard at t = " + detail::shortest(t));
      }
      sol.time_grid_.push_back(t);
      sol.phi_.push_back(y[0]);
      sol.psi_.push_back(y[1]);
      dphi.push_back(k1[0]);
      dpsi.push_back(k1[1]);
      if (last) break;
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h = std::min(h * factor, max_step);
    if (h < min_step) {
      throw Error(Error::Kind::BlowUp,
                  "riccati: step size underflow at t = " + detail::shortest(t));
    }
  }

  sol.build_interpolant(dphi, dpsi);
  return sol;
}

void RiccatiSolution::build_interpolant(const std::vector<double>& dphi,
                                        const std::vector<double>& dpsi) {
  auto limit = [](double delta, double left, double right) -> HermiteSlopes {
    // Fritsch-Carlson limiter applied to the exact ODE slopes.
    if (delta == 0.0) return {0.0, 0.0};
    if (left * delta < 0.0) left = 0.0;
    if (right * delta < 0.0) right = 0.0;
    const double alpha = left / delta;
    const double beta = right / delta;
    const double r2 = alpha * alpha + beta * beta;
    if (r2 > 9.0) {
      const double tau = 3.0 / std::sqrt(r2);
      left = tau * alpha * delta;
      right = tau * beta * delta;
    }
    return {left, right};
  };
  const std::size_t n = time_grid_.size();
  phi_slopes_.resize(n - 1);
  psi_slopes_.resize(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double h = time_grid_[k + 1] - time_grid_[k];
    phi_slopes_[k] = limit((phi_[k + 1] - phi_[k]) / h, dphi[k], dphi[k + 1]);
    psi_slopes_[k] = limit((psi_[k + 1] - psi_[k]) / h, dpsi[k], dpsi[k + 1]);
  }
}

double RiccatiSolution::evaluate(double s, const std::vector<double>& values,
                                 const std::vector<HermiteSlopes>& slopes) const {
  if (!(s >= 0.0 && s <= horizon())) {
    throw Error(Error::Kind::OutOfRange,
                "riccati: time to maturity " + detail::shortest(s) + " outside [0, horizon]");
  }
  const auto it = std::upper_bound(time_grid_.begin(), time_grid_.end(), s);
  if (it == time_grid_.end()) return values.back();
  const auto k = static_cast<std::size_t>(it - time_grid_.begin()) - 1;
  if (s == time_grid_[k]) return values[k];
  const double h = time_grid_[k + 1] - time_grid_[k];
  const double x = (s - time_grid_[k]) / h;
  const double x2 = x * x;
  const double x3 = x2 * x;
  const double h00 = 2 * x3 - 3 * x2 + 1;
  const double h10 = x3 - 2 * x2 + x;
  const double h01 = -2 * x3 + 3 * x2;
  const double h11 = x3 - x2;
  return h00 * values[k] + h10 * h * slopes[k].left + h01 * values[k + 1] +
         h11 * h * slopes[k].right;
}

double RiccatiSolution::phi(double s) const { return evaluate(s, phi_, phi_slopes_); }
double RiccatiSolution::psi(double s) const { return evaluate(s, psi_, psi_slopes_); }

double upper_bond_price(const RiccatiSolution& sol, double t, double maturity, double x) {
  if (sol.u() != 0.0) {
    throw Error(Error::Kind::InvalidArgument, "bond price requires a solution with u = 0");
  }
  if (!(t >= 0.0 && t <= maturity)) {
    throw Error(Error::Kind::OutOfRange, "bond price requires 0 <= t <= T");
  }
  const double s = maturity - t;
  return std::exp(sol.phi(s) + sol.psi(s) * x);
}

std::vector<double> longevity_value_path(std::span<const double> grid,
                                         std::span<const double> mu_path,
                                         const RiccatiSolution& sol, double maturity) {
  if (grid.empty() || grid.size() != mu_path.size()) {
    throw Error(Error::Kind::GridMismatch, "longevity value: path and grid sizes differ");
  }
  if (grid.front() != 0.0 || grid.back() > maturity) {
    throw Error(Error::Kind::GridMismatch, "longevity value: grid must lie in [0, T]");
  }
  if (sol.horizon() < maturity) {
    throw Error(Error::Kind::OutOfRange, "longevity value: Riccati horizon shorter than T");
  }
  std::vector<double> out(grid.size());
  double integral = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (j > 0) integral += 0.5 * (mu_path[j - 1] + mu_path[j]) * (grid[j] - grid[j - 1]);
    out[j] = std::exp(-integral) * upper_bond_price(sol, grid[j], maturity, mu_path[j]);
  }
  return out;
}

}  // namespace robust_affine
