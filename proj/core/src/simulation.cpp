#include "robust_affine/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "format.hpp"
#include "robust_affine/error.hpp"
#include "robust_affine/rng.hpp"

namespace robust_affine {

namespace {

template <typename Fn>
void parallel_rows(std::size_t n_rows, unsigned threads, Fn&& fn) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n_rows, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_rows; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n_rows; i += workers) fn(i);
    });
  }
}

template <typename Model>
PathEnsemble simulate(const Model& model, StateSpace space, const SimulationSpec& spec,
                      std::string tag) {
  if (!in_state_space(space, spec.x0)) {
    throw Error(Error::Kind::InvalidArgument, "simulation: x0 outside the state space");
  }
  PathEnsemble out;
  out.time_grid = uniform_grid(spec.horizon, spec.dt);
  out.values = Matrix(spec.n_paths, out.time_grid.size());
  out.x0 = spec.x0;
  out.model_tag = std::move(tag);
  out.seed = spec.seed;
  out.first_path = spec.first_path;
  out.space = space;
  out.scheme = space == StateSpace::RealLine ? "euler-maruyama" : "euler-maruyama-full-truncation";

  const bool truncate = space != StateSpace::RealLine;
  const std::size_t n_steps = out.time_grid.size() - 1;
  const double h = spec.horizon / static_cast<double>(n_steps);
  const double sqrt_h = std::sqrt(h);

  parallel_rows(spec.n_paths, spec.threads, [&](std::size_t i) {
    SubStream noise(spec.seed, spec.first_path + i, StreamPurpose::Diffusion);
    auto row = out.values.row(i);
    double x = spec.x0;
    row[0] = spec.x0;
    for (std::size_t j = 1; j <= n_steps; ++j) {
      const double xc = truncate ? std::max(x, 0.0) : x;
      const Coefficients c = model(xc);
      x = x + c.drift * h + std::sqrt(std::max(c.variance, 0.0)) * sqrt_h * noise.next_normal();
      row[j] = truncate ? std::max(x, 0.0) : x;
    }
  });
  return out;
}

std::string describe(const CornerParameter& p) {
  using detail::shortest;
  return "corner(b0=" + shortest(p.b0) + ",b1=" + shortest(p.b1) + ",a0=" + shortest(p.a0) +
         ",a1=" + shortest(p.a1) + ")";
}

}  // namespace

std::vector<double> uniform_grid(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon >= dt) || !std::isfinite(horizon)) {
    throw Error(Error::Kind::InvalidStep, "time grid: need dt > 0 and horizon >= dt");
  }
  const double ratio = horizon / dt;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(Error::Kind::InvalidStep, "time grid: horizon is not a multiple of dt");
  }
  const auto n = static_cast<std::size_t>(steps);
  std::vector<double> grid(n + 1);
  for (std::size_t j = 0; j <= n; ++j) grid[j] = horizon * static_cast<double>(j) / static_cast<double>(n);
  grid.back() = horizon;
  return grid;
}

PathEnsemble simulate_corner(const CornerParameter& theta, StateSpace space,
                             const SimulationSpec& spec) {
  const auto model = [theta](double x) {
    return Coefficients{theta.b0 + theta.b1 * x, theta.a0 + theta.a1 * std::max(x, 0.0)};
  };
  return simulate(model, space, spec, describe(theta));
}

PathEnsemble simulate_extremal(const ParameterBox& box, StateSpace space,
                               const SimulationSpec& spec) {
  try {
    worst_case_slope(box, space);
  } catch (const Error& e) {
    throw Error(Error::Kind::InvalidBox, std::string("simulation: ") + e.what());
  }
  const auto model = [&box](double x) { return worst_case_coefficients(box, x); };
  return simulate(model, space, spec, "extremal");
}

HazardEnsemble hazard_integral(const PathEnsemble& paths) {
  HazardEnsemble out;
  out.time_grid = paths.time_grid;
  out.first_path = paths.first_path;
  out.gamma = Matrix(paths.values.rows(), paths.values.cols());
  const auto& grid = paths.time_grid;
  for (std::size_t i = 0; i < paths.values.rows(); ++i) {
    const auto mu = paths.values.row(i);
    auto g = out.gamma.row(i);
    double integral = 0.0;
    g[0] = 0.0;
    for (std::size_t j = 1; j < grid.size(); ++j) {
      integral += 0.5 * (mu[j - 1] + mu[j]) * (grid[j] - grid[j - 1]);
      g[j] = integral;
    }
  }
  return out;
}

Matrix survivor_index(const HazardEnsemble& hazard) {
  Matrix out(hazard.gamma.rows(), hazard.gamma.cols());
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) = std::exp(-hazard.gamma(i, j));
  return out;
}

DefaultSample cox_default_times(const HazardEnsemble& hazard, std::uint64_t seed) {
  std::vector<double> xi(hazard.gamma.rows());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    xi[i] = SubStream(seed, hazard.first_path + i, StreamPurpose::DefaultThreshold).uniforms(0)[0];
  }
  return cox_default_times(hazard, xi);
}

DefaultSample cox_default_times(const HazardEnsemble& hazard, std::span<const double> xi) {
  if (xi.size() != hazard.gamma.rows()) {
    throw Error(Error::Kind::InvalidArgument, "cox: one threshold per path required");
  }
  DefaultSample out;
  out.xi.assign(xi.begin(), xi.end());
  out.tau.resize(xi.size());
  out.survivor = survivor_index(hazard);
  const auto& grid = hazard.time_grid;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (!(xi[i] > 0.0 && xi[i] <= 1.0)) {
      throw Error(Error::Kind::InvalidArgument, "cox: thresholds must lie in (0, 1]");
    }
    const double level = -std::log(xi[i]);
    const auto g = hazard.gamma.row(i);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (g[j] >= level) {
        if (j == 0) {
          out.tau[i] = grid[0];
        } else {
          const double w = (level - g[j - 1]) / (g[j] - g[j - 1]);
          out.tau[i] = grid[j - 1] + w * (grid[j] - grid[j - 1]);
        }
        break;
      }
    }
  }
  return out;
}

std::size_t grid_index(std::span<const double> grid, double t) {
  if (grid.empty()) throw Error(Error::Kind::OutOfRange, "empty grid");
  const auto it = std::lower_bound(grid.begin(), grid.end(), t);
  const double spacing = grid.size() > 1 ? grid[1] - grid[0] : 1.0;
  const double tol = 1e-9 * spacing;
  if (it != grid.end() && std::abs(*it - t) <= tol) return static_cast<std::size_t>(it - grid.begin());
  if (it != grid.begin() && std::abs(*(it - 1) - t) <= tol) {
    return static_cast<std::size_t>(it - grid.begin()) - 1;
  }
  throw Error(Error::Kind::OutOfRange, "time " + std::to_string(t) + " is not a grid node");
}

McAccumulator mc_bond_accumulator(const HazardEnsemble& hazard, double t, double maturity) {
  if (!(t <= maturity)) throw Error(Error::Kind::OutOfRange, "bond estimate requires t <= T");
  const std::size_t jt = grid_index(hazard.time_grid, t);
  const std::size_t jT = grid_index(hazard.time_grid, maturity);
  McAccumulator acc;
  for (std::size_t i = 0; i < hazard.gamma.rows(); ++i) {
    acc.add(std::exp(-(hazard.gamma(i, jT) - hazard.gamma(i, jt))));
  }
  return acc;
}

McEstimate mc_bond_estimate(const HazardEnsemble& hazard, double t, double maturity) {
  return mc_bond_accumulator(hazard, t, maturity).estimate();
}

void CoxTally::add(const DefaultSample& sample, std::span<const double> grid) {
  for (std::size_t k = 0; k < times_.size(); ++k) {
    const std::size_t j = grid_index(grid, times_[k]);
    for (std::size_t i = 0; i < sample.tau.size(); ++i) {
      const bool alive = !sample.tau[i].has_value() || *sample.tau[i] > times_[k];
      alive_[k].add(alive ? 1.0 : 0.0);
      survivor_[k].add(sample.survivor(i, j));
    }
  }
}

void CoxTally::merge(const CoxTally& other) {
  if (other.times_ != times_) throw Error(Error::Kind::InvalidArgument, "cox tally: time sets differ");
  for (std::size_t k = 0; k < times_.size(); ++k) {
    alive_[k].merge(other.alive_[k]);
    survivor_[k].merge(other.survivor_[k]);
  }
}

std::vector<CoxTally::Row> CoxTally::rows() const {
  std::vector<Row> out;
  for (std::size_t k = 0; k < times_.size(); ++k) {
    Row r;
    r.time = times_[k];
    r.survival_fraction = alive_[k].mean();
    r.mean_survivor = survivor_[k].mean();
    const double n = static_cast<double>(alive_[k].count());
    const double p = r.survival_fraction;
    r.combined_se = std::sqrt(p * (1.0 - p) / n) + survivor_[k].std_error();
    r.within_3se = std::abs(r.survival_fraction - r.mean_survivor) <= 3.0 * r.combined_se;
    out.push_back(r);
  }
  return out;
}

}  // namespace robust_affine
