#include "robust_affine/claims.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "format.hpp"
#include "robust_affine/error.hpp"

namespace robust_affine {

namespace {

struct Stencil {
  std::vector<double> y, sigma2, h, b;
  double dy = 0.0;
};

Stencil build_stencil(const GPdeProblem& p) {
  const auto& g = p.grid;
  if (g.nodes < 3) throw Error(Error::Kind::InvalidArgument, "g-pde: need at least 3 nodes");
  if (!(g.upper > g.lower)) throw Error(Error::Kind::InvalidArgument, "g-pde: empty asset range");
  if (!(g.maturity > 0.0)) throw Error(Error::Kind::InvalidArgument, "g-pde: maturity must be > 0");
  if (!(g.dt > 0.0)) throw Error(Error::Kind::InvalidArgument, "g-pde: dt must be > 0");
  if (!(p.vol_bounds.low >= 0.0 && p.vol_bounds.low <= p.vol_bounds.high)) {
    throw Error(Error::Kind::InvalidArgument, "g-pde: need 0 <= low <= high variance bounds");
  }
  Stencil s;
  const auto n = static_cast<std::size_t>(g.nodes);
  s.dy = (g.upper - g.lower) / static_cast<double>(n - 1);
  s.y.resize(n);
  s.sigma2.resize(n);
  s.h.resize(n);
  s.b.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.y[i] = i + 1 == n ? g.upper : g.lower + s.dy * static_cast<double>(i);
    const double sig = p.sigma(s.y[i]);
    s.sigma2[i] = sig * sig;
    s.h[i] = p.qv_loading(s.y[i]);
    s.b[i] = p.drift(s.y[i]);
  }
  return s;
}

double stable_dt(const Stencil& s, const VolBounds& vb) {
  double rate = 0.0;
  for (std::size_t i = 1; i + 1 < s.y.size(); ++i) {
    rate = std::max(rate, vb.high * s.sigma2[i] / (s.dy * s.dy) +
                              0.5 * vb.high * std::abs(s.h[i]) / s.dy + std::abs(s.b[i]) / s.dy);
  }
  return rate == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / rate;
}

}  // namespace

double pure_endowment_price(const RiccatiSolution& sol, double t, double maturity, double x,
                            bool defaulted, double payout) {
  if (!(payout >= 0.0)) throw Error(Error::Kind::InvalidArgument, "endowment payout must be >= 0");
  if (defaulted) return 0.0;
  return payout * upper_bond_price(sol, t, maturity, x);
}

double g_function(double a, const VolBounds& bounds) noexcept {
  return 0.5 * (bounds.high * std::max(a, 0.0) - bounds.low * std::max(-a, 0.0));
}

double max_stable_dt(const GPdeProblem& problem) {
  return stable_dt(build_stencil(problem), problem.vol_bounds);
}

ValueSurface solve_g_pde(const GPdeProblem& problem) {
  const Stencil s = build_stencil(problem);
  const auto& g = problem.grid;
  const double admissible = stable_dt(s, problem.vol_bounds);
  if (g.dt > admissible) {
    throw UnstableGridError("g-pde: dt = " + detail::shortest(g.dt) +
                                " violates the monotonicity bound; max admissible dt = " +
                                detail::shortest(admissible),
                            admissible);
  }
  const auto steps = static_cast<std::size_t>(std::ceil(g.maturity / g.dt - 1e-12));
  const double dt = g.maturity / static_cast<double>(steps);
  const std::size_t n = s.y.size();

  std::vector<double> times(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    times[k] = g.maturity * static_cast<double>(k) / static_cast<double>(steps);
  }
  times.back() = g.maturity;

  Matrix values(steps + 1, n);
  for (std::size_t i = 0; i < n; ++i) values(steps, i) = problem.payoff(s.y[i]);

  const double inv_dy = 1.0 / s.dy;
  const double inv_dy2 = inv_dy * inv_dy;
  for (std::size_t k = steps; k-- > 0;) {
    const auto next = values.row(k + 1);
    auto cur = values.row(k);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double forward = (next[i + 1] - next[i]) * inv_dy;
      const double backward = (next[i] - next[i - 1]) * inv_dy;
      const double second = (next[i + 1] - 2.0 * next[i] + next[i - 1]) * inv_dy2;
      const double h_term = s.h[i] >= 0.0 ? s.h[i] * forward : s.h[i] * backward;
      const double b_term = s.b[i] >= 0.0 ? s.b[i] * forward : s.b[i] * backward;
      cur[i] = next[i] + dt * (g_function(s.sigma2[i] * second + h_term, problem.vol_bounds) + b_term);
    }
    cur[0] = 2.0 * cur[1] - cur[2];
    cur[n - 1] = 2.0 * cur[n - 2] - cur[n - 3];
  }
  return ValueSurface(std::move(times), s.y, std::move(values));
}

double ValueSurface::value_at(double t, double y) const {
  if (!(t >= times_.front() && t <= times_.back() && y >= states_.front() && y <= states_.back())) {
    throw Error(Error::Kind::OutOfRange, "value surface: point outside the solved grid");
  }
  auto bracket = [](const std::vector<double>& axis, double v) {
    auto it = std::upper_bound(axis.begin(), axis.end(), v);
    std::size_t k = it == axis.end() ? axis.size() - 2 : static_cast<std::size_t>(it - axis.begin()) - 1;
    k = std::min(k, axis.size() - 2);
    const double w = (v - axis[k]) / (axis[k + 1] - axis[k]);
    return std::pair{k, w};
  };
  const auto [kt, wt] = bracket(times_, t);
  const auto [ky, wy] = bracket(states_, y);
  auto layer = [&](std::size_t k) {
    const double lo = values_(k, ky);
    if (wy == 0.0) return lo;
    if (wy == 1.0) return values_(k, ky + 1);
    return lo + wy * (values_(k, ky + 1) - lo);
  };
  const double v0 = layer(kt);
  if (wt == 0.0) return v0;
  const double v1 = layer(kt + 1);
  if (wt == 1.0) return v1;
  return v0 + wt * (v1 - v0);
}

double product_claim_value(double t, double x_mu, const RiccatiSolution& sol,
                           const ValueSurface& surface, double y_s, double maturity) {
  if (surface.maturity() != maturity) {
    throw Error(Error::Kind::OutOfRange, "product claim: surface maturity differs from T");
  }
  return upper_bond_price(sol, t, maturity, x_mu) * surface.value_at(t, y_s);
}

}  // namespace robust_affine
