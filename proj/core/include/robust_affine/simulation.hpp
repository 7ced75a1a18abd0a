#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robust_affine/matrix.hpp"
#include "robust_affine/params.hpp"
#include "robust_affine/statistics.hpp"

namespace robust_affine {

/// Arguments shared by all path generators. Paths [first_path, first_path +
/// n_paths) of the conceptual ensemble are produced; splitting a run into
/// batches by first_path reproduces the single-run output bit for bit.
struct SimulationSpec {
  double x0 = 0.0;
  double horizon = 1.0;
  double dt = 1e-3;
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;
  std::size_t first_path = 0;
  /// Worker threads; 0 uses the hardware concurrency. Output never depends on it.
  unsigned threads = 0;
};

/// Uniform grid 0, dt, ..., horizon. Throws Error(InvalidStep) if dt <= 0,
/// horizon < dt, or horizon / dt is not an integer up to rounding.
std::vector<double> uniform_grid(double horizon, double dt);

struct PathEnsemble {
  std::vector<double> time_grid;
  Matrix values;  // n_paths x n_times
  double x0 = 0.0;
  std::string model_tag;
  std::uint64_t seed = 0;
  std::size_t first_path = 0;
  std::string scheme;
  StateSpace space = StateSpace::RealLine;
};

struct HazardEnsemble {
  std::vector<double> time_grid;
  Matrix gamma;  // cumulative intensity, gamma(., 0) = 0
  std::size_t first_path = 0;
};

struct DefaultSample {
  /// Default time per path; nullopt means no default up to the horizon.
  std::vector<std::optional<double>> tau;
  std::vector<double> xi;
  Matrix survivor;
};

/// Euler-Maruyama for dX = (b0 + b1 X) dt + sqrt(a0 + a1 X^+) dW. On
/// NonNegative/Positive spaces the full-truncation scheme is used: the
/// coefficients see X^+ and the recorded state is X^+.
PathEnsemble simulate_corner(const CornerParameter& theta, StateSpace space,
                             const SimulationSpec& spec);

/// Same scheme with the price-maximising coefficients of the box (lower
/// drift endpoint, upper variance endpoint). Throws Error(InvalidBox) when
/// the drift slope is not constant on the state space.
PathEnsemble simulate_extremal(const ParameterBox& box, StateSpace space,
                               const SimulationSpec& spec);

/// Cumulative trapezoid of each path.
HazardEnsemble hazard_integral(const PathEnsemble& paths);

/// exp(-gamma) elementwise.
Matrix survivor_index(const HazardEnsemble& hazard);

/// Cox construction tau = inf{t : gamma_t >= -ln xi} with one uniform xi in
/// (0, 1] per path from a stream independent of the diffusion noise.
DefaultSample cox_default_times(const HazardEnsemble& hazard, std::uint64_t seed);

/// Same construction with caller-supplied thresholds (one per path).
DefaultSample cox_default_times(const HazardEnsemble& hazard, std::span<const double> xi);

/// Sample mean and standard error of exp(-(gamma_T - gamma_t)); t and T must
/// be grid times (Error(OutOfRange) otherwise).
McEstimate mc_bond_estimate(const HazardEnsemble& hazard, double t, double maturity);
McAccumulator mc_bond_accumulator(const HazardEnsemble& hazard, double t, double maturity);

/// Index of a grid time, tolerant to rounding; Error(OutOfRange) if absent.
std::size_t grid_index(std::span<const double> grid, double t);

/// Running tallies for comparing the empirical survival fraction P(tau > t)
/// with the mean survivor index at fixed times.
class CoxTally {
 public:
  explicit CoxTally(std::vector<double> times) : times_(std::move(times)), alive_(times_.size()), survivor_(times_.size()) {}

  void add(const DefaultSample& sample, std::span<const double> grid);
  void merge(const CoxTally& other);

  struct Row {
    double time = 0.0;
    double survival_fraction = 0.0;
    double mean_survivor = 0.0;
    /// Binomial standard error plus the survivor-mean standard error.
    double combined_se = 0.0;
    bool within_3se = false;
  };
  std::vector<Row> rows() const;

 private:
  std::vector<double> times_;
  std::vector<McAccumulator> alive_;
  std::vector<McAccumulator> survivor_;
};

}  // namespace robust_affine
