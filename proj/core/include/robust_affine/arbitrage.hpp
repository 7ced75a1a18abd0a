#pragma once

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "robust_affine/matrix.hpp"
#include "robust_affine/riccati.hpp"
#include "robust_affine/simulation.hpp"
#include "robust_affine/statistics.hpp"

namespace robust_affine {

/// Holdings in the risky asset S and the traded claim S^Y over one interval.
struct Holding {
  double asset = 0.0;
  double claim = 0.0;
};

/// H = sum_i h_i 1_{(tau_{i-1}, tau_i]} with deterministic rebalance dates.
class SimpleStrategy {
 public:
  /// times = {0 = tau_0 < tau_1 < ... < tau_n}, one holding per interval.
  SimpleStrategy(std::vector<double> times, std::vector<Holding> holdings);

  static SimpleStrategy hold(double horizon, Holding h) { return SimpleStrategy({0.0, horizon}, {h}); }

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<Holding>& holdings() const noexcept { return holdings_; }

 private:
  std::vector<double> times_;
  std::vector<Holding> holdings_;
};

/// Rows "tau_left tau_right h_S h_Y", contiguous and starting at 0. '#'
/// comments and blank lines are skipped. Errors carry the line number.
SimpleStrategy read_strategy(std::istream& in, const std::string& source = "<stream>");

/// Aligned asset (S) and claim price (S^Y) paths under one simulated measure.
struct MarketPaths {
  std::vector<double> time_grid;
  Matrix asset;
  Matrix claim;
  std::string measure_tag;
};

/// Per-measure wealth X^{x,H} = x + sum h^S dS + sum h^Y dS^Y at every grid time.
struct WealthReport {
  std::string measure_tag;
  double x0 = 0.0;
  std::vector<double> time_grid;
  Matrix wealth;
  std::vector<McEstimate> expectation;  // per grid time
  bool admissible = false;
};

struct Verdict {
  bool passed = true;
  /// Largest standardised violation (or raw margin where no stderr applies).
  double statistic = 0.0;
  std::string detail;
};

WealthReport wealth_process(const SimpleStrategy& strategy, const MarketPaths& market, double x0);

/// Passes iff wealth is nonnegative on every path at every time.
Verdict check_admissible(const WealthReport& report);

/// For each measure and time: mean(X_t) <= x0 + 3 stderr(X_t).
Verdict check_expectation_nonincrease(std::span<const WealthReport> reports);

/// Paired tallies of a value process at checkpoints: values at each
/// checkpoint and increments between consecutive checkpoints. Mergeable, so
/// large ensembles can be streamed in batches.
class MartingaleTally {
 public:
  MartingaleTally(std::string measure_tag, std::vector<std::size_t> checkpoints);

  void add(const Matrix& values);
  void merge(const MartingaleTally& other);

  const std::string& measure_tag() const noexcept { return tag_; }
  const std::vector<std::size_t>& checkpoints() const noexcept { return checkpoints_; }
  const std::vector<McAccumulator>& levels() const noexcept { return levels_; }
  const std::vector<McAccumulator>& increments() const noexcept { return increments_; }
  /// Increments relative to the first checkpoint.
  const std::vector<McAccumulator>& drifts() const noexcept { return drifts_; }

 private:
  std::string tag_;
  std::vector<std::size_t> checkpoints_;
  std::vector<McAccumulator> levels_, increments_, drifts_;
};

enum class MartingaleMode {
  /// Each increment mean <= 3 stderr (one-sided).
  Supermartingale,
  /// Each increment and cumulative drift within 3 stderr (two-sided).
  Martingale,
};

Verdict check_supermartingale(std::span<const MartingaleTally> tallies, MartingaleMode mode);

/// Convenience for in-memory ensembles; compares consecutive grid times.
Verdict check_supermartingale(std::span<const MarketPaths> markets, MartingaleMode mode);

struct AssetSelector {
  bool asset = true;
  bool claim = true;
};

/// Passes iff every selected holding is >= 0.
Verdict check_no_short_sale(const SimpleStrategy& strategy, AssetSelector which);

/// Superhedging check: the candidate (capital, strategy) must dominate the
/// claim's terminal value on every path of every market (within an
/// absolute-plus-relative slack `tolerance`), otherwise Error(NotASuperhedge).
/// Passes iff price <= capital.
Verdict check_superhedge_dominates(double price, double capital, const SimpleStrategy& strategy,
                                   std::span<const MarketPaths> markets, double tolerance = 1e-12);

/// Driftless geometric paths S_t = S_0 exp(sigma W_t - sigma^2 t / 2), sampled
/// exactly on the grid from the asset substream.
Matrix simulate_asset(double s0, double sigma, const SimulationSpec& spec);

/// Longevity bond values along every intensity path of an ensemble.
Matrix longevity_values(const PathEnsemble& intensity, const RiccatiSolution& sol, double maturity);

/// Asset paths plus longevity bond price paths for one intensity ensemble.
MarketPaths longevity_market(const PathEnsemble& intensity, const RiccatiSolution& sol,
                             double maturity, double s0, double sigma, std::uint64_t asset_seed);

/// Random strategies with nonnegative holdings rebalanced on grid dates.
std::vector<SimpleStrategy> random_long_only_strategies(std::size_t count,
                                                        std::span<const double> grid,
                                                        std::uint64_t seed,
                                                        std::size_t max_intervals = 4);

struct Na1Certificate {
  std::size_t strategies_searched = 0;
  std::size_t admissible = 0;
  std::size_t arbitrages_found = 0;
};

/// Searches a strategy family with zero initial capital for a strategy that is
/// admissible, ends nonnegative on every path and strictly positive with
/// positive frequency on every measure. A clean result certifies only the
/// searched family.
Na1Certificate na1_probe(std::span<const SimpleStrategy> strategies,
                         std::span<const MarketPaths> markets);

}  // namespace robust_affine
