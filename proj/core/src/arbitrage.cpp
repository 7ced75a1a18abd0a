#include "robust_affine/arbitrage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "format.hpp"
#include "robust_affine/error.hpp"
#include "robust_affine/rng.hpp"

namespace robust_affine {

namespace {

// Absorbs rounding in comparisons that hold with equality in exact arithmetic.
constexpr double kRoundingSlack = 1e-12;

std::vector<std::size_t> strategy_indices(const SimpleStrategy& strategy,
                                          std::span<const double> grid) {
  std::vector<std::size_t> idx;
  idx.reserve(strategy.times().size());
  for (double t : strategy.times()) {
    try {
      idx.push_back(grid_index(grid, t));
    } catch (const Error&) {
      throw Error(Error::Kind::GridMismatch,
                  "strategy rebalance time " + detail::shortest(t) + " is not on the market grid");
    }
  }
  return idx;
}

void validate_market(const MarketPaths& m) {
  const std::size_t n = m.time_grid.size();
  if (m.asset.cols() != n || m.claim.cols() != n || m.asset.rows() != m.claim.rows()) {
    throw Error(Error::Kind::GridMismatch, "market paths are not aligned with the time grid");
  }
}

double z_score(double excess, double se) {
  if (excess <= 0.0) return se > 0.0 ? excess / se : 0.0;
  return se > 0.0 ? excess / se : std::numeric_limits<double>::infinity();
}

Matrix asset_on_grid(double s0, double sigma, std::span<const double> grid, std::size_t n_paths,
                     std::uint64_t seed, std::size_t first_path) {
  Matrix out(n_paths, grid.size());
  for (std::size_t i = 0; i < n_paths; ++i) {
    SubStream noise(seed, first_path + i, StreamPurpose::Asset);
    auto row = out.row(i);
    row[0] = s0;
    for (std::size_t j = 1; j < grid.size(); ++j) {
      const double h = grid[j] - grid[j - 1];
      row[j] = row[j - 1] * std::exp(sigma * std::sqrt(h) * noise.next_normal() - 0.5 * sigma * sigma * h);
    }
  }
  return out;
}

}  // namespace

SimpleStrategy::SimpleStrategy(std::vector<double> times, std::vector<Holding> holdings)
    : times_(std::move(times)), holdings_(std::move(holdings)) {
  if (holdings_.empty() || times_.size() != holdings_.size() + 1) {
    throw Error(Error::Kind::InvalidArgument, "strategy: need n >= 1 intervals and n + 1 dates");
  }
  if (times_.front() != 0.0) throw Error(Error::Kind::InvalidArgument, "strategy: must start at 0");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw Error(Error::Kind::InvalidArgument, "strategy: rebalance dates must increase");
    }
  }
  for (const auto& h : holdings_) {
    if (!std::isfinite(h.asset) || !std::isfinite(h.claim)) {
      throw Error(Error::Kind::InvalidArgument, "strategy: holdings must be finite");
    }
  }
}

SimpleStrategy read_strategy(std::istream& in, const std::string& source) {
  std::vector<double> times;
  std::vector<Holding> holdings;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(Error::Kind::InvalidArgument, source + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    double left = 0.0, right = 0.0, hs = 0.0, hy = 0.0;
    std::string extra;
    if (!(row >> left >> right >> hs >> hy) || (row >> extra)) {
      fail("expected four numeric columns: tau_left tau_right h_S h_Y");
    }
    if (!std::isfinite(left) || !std::isfinite(right) || !std::isfinite(hs) || !std::isfinite(hy)) {
      fail("non-finite value");
    }
    if (times.empty()) {
      if (left != 0.0) fail("first interval must start at 0");
      times.push_back(left);
    } else if (left != times.back()) {
      fail("interval does not start where the previous one ended");
    }
    if (!(right > left)) fail("interval end must exceed its start");
    times.push_back(right);
    holdings.push_back({hs, hy});
  }
  if (holdings.empty()) {
    line_no = std::max(line_no, 1);
    fail("no strategy rows");
  }
  return SimpleStrategy(std::move(times), std::move(holdings));
}

WealthReport wealth_process(const SimpleStrategy& strategy, const MarketPaths& market, double x0) {
  validate_market(market);
  const auto k = strategy_indices(strategy, market.time_grid);
  const auto& hold = strategy.holdings();
  const std::size_t n_times = market.time_grid.size();

  WealthReport report;
  report.measure_tag = market.measure_tag;
  report.x0 = x0;
  report.time_grid = market.time_grid;
  report.wealth = Matrix(market.asset.rows(), n_times);
  std::vector<McAccumulator> moments(n_times);

  for (std::size_t p = 0; p < market.asset.rows(); ++p) {
    const auto s = market.asset.row(p);
    const auto y = market.claim.row(p);
    auto x = report.wealth.row(p);
    for (std::size_t j = 0; j < n_times; ++j) {
      double gain_asset = 0.0;
      double gain_claim = 0.0;
      for (std::size_t i = 0; i < hold.size(); ++i) {
        const std::size_t lo = std::min(k[i], j);
        const std::size_t hi = std::min(k[i + 1], j);
        gain_asset += hold[i].asset * (s[hi] - s[lo]);
        gain_claim += hold[i].claim * (y[hi] - y[lo]);
      }
      x[j] = x0 + gain_asset + gain_claim;
      moments[j].add(x[j]);
    }
  }
  report.expectation.reserve(n_times);
  for (const auto& m : moments) report.expectation.push_back(m.estimate());
  report.admissible = check_admissible(report).passed;
  return report;
}

Verdict check_admissible(const WealthReport& report) {
  const auto& data = report.wealth.data();
  const double lowest = data.empty() ? 0.0 : *std::min_element(data.begin(), data.end());
  Verdict v;
  v.passed = lowest >= 0.0;
  v.statistic = lowest;
  v.detail = report.measure_tag + ": minimum wealth " + detail::shortest(lowest);
  return v;
}

Verdict check_expectation_nonincrease(std::span<const WealthReport> reports) {
  Verdict v;
  v.statistic = -std::numeric_limits<double>::infinity();
  for (const auto& r : reports) {
    for (std::size_t j = 0; j < r.expectation.size(); ++j) {
      const auto& e = r.expectation[j];
      const double excess = e.mean - r.x0;
      const double z = z_score(excess - kRoundingSlack * std::max(1.0, std::abs(r.x0)), e.std_error);
      if (z > v.statistic) {
        v.statistic = z;
        v.detail = r.measure_tag + " at t=" + detail::shortest(r.time_grid[j]);
      }
      if (excess > 3.0 * e.std_error + kRoundingSlack * std::max(1.0, std::abs(r.x0))) v.passed = false;
    }
  }
  if (reports.empty()) v.statistic = 0.0;
  return v;
}

MartingaleTally::MartingaleTally(std::string measure_tag, std::vector<std::size_t> checkpoints)
    : tag_(std::move(measure_tag)),
      checkpoints_(std::move(checkpoints)),
      levels_(checkpoints_.size()),
      increments_(checkpoints_.size() > 0 ? checkpoints_.size() - 1 : 0),
      drifts_(checkpoints_.size() > 0 ? checkpoints_.size() - 1 : 0) {
  if (checkpoints_.size() < 2 || !std::is_sorted(checkpoints_.begin(), checkpoints_.end())) {
    throw Error(Error::Kind::InvalidArgument, "martingale tally: need >= 2 ascending checkpoints");
  }
}

void MartingaleTally::add(const Matrix& values) {
  if (values.cols() <= checkpoints_.back()) {
    throw Error(Error::Kind::GridMismatch, "martingale tally: checkpoint beyond the path grid");
  }
  for (std::size_t p = 0; p < values.rows(); ++p) {
    const auto row = values.row(p);
    for (std::size_t k = 0; k < checkpoints_.size(); ++k) {
      levels_[k].add(row[checkpoints_[k]]);
      if (k > 0) {
        increments_[k - 1].add(row[checkpoints_[k]] - row[checkpoints_[k - 1]]);
        drifts_[k - 1].add(row[checkpoints_[k]] - row[checkpoints_[0]]);
      }
    }
  }
}

void MartingaleTally::merge(const MartingaleTally& other) {
  if (other.checkpoints_ != checkpoints_) {
    throw Error(Error::Kind::InvalidArgument, "martingale tally: checkpoints differ");
  }
  for (std::size_t k = 0; k < levels_.size(); ++k) levels_[k].merge(other.levels_[k]);
  for (std::size_t k = 0; k < increments_.size(); ++k) {
    increments_[k].merge(other.increments_[k]);
    drifts_[k].merge(other.drifts_[k]);
  }
}

Verdict check_supermartingale(std::span<const MartingaleTally> tallies, MartingaleMode mode) {
  Verdict v;
  v.statistic = tallies.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  auto consider = [&](const MartingaleTally& t, const McAccumulator& acc, std::size_t k,
                      bool two_sided, const char* what) {
    const double scale = std::max(1.0, std::abs(t.levels()[0].mean()));
    const double mean = two_sided ? std::abs(acc.mean()) : acc.mean();
    const double excess = mean - kRoundingSlack * scale;
    const double z = z_score(excess, acc.std_error());
    if (z > v.statistic) {
      v.statistic = z;
      v.detail = t.measure_tag() + ": " + what + " up to checkpoint " + std::to_string(k + 1);
    }
    if (excess > 3.0 * acc.std_error()) v.passed = false;
  };
  for (const auto& t : tallies) {
    for (std::size_t k = 0; k < t.increments().size(); ++k) {
      if (mode == MartingaleMode::Supermartingale) {
        consider(t, t.increments()[k], k, false, "increment");
      } else {
        consider(t, t.increments()[k], k, true, "increment");
        consider(t, t.drifts()[k], k, true, "cumulative drift");
      }
    }
  }
  return v;
}

Verdict check_supermartingale(std::span<const MarketPaths> markets, MartingaleMode mode) {
  std::vector<MartingaleTally> tallies;
  for (const auto& m : markets) {
    validate_market(m);
    std::vector<std::size_t> all(m.time_grid.size());
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
    MartingaleTally tally(m.measure_tag, std::move(all));
    tally.add(m.claim);
    tallies.push_back(std::move(tally));
  }
  return check_supermartingale(tallies, mode);
}

Verdict check_no_short_sale(const SimpleStrategy& strategy, AssetSelector which) {
  Verdict v;
  for (std::size_t i = 0; i < strategy.holdings().size(); ++i) {
    const auto& h = strategy.holdings()[i];
    if (which.asset && h.asset < 0.0) {
      v.passed = false;
      v.statistic = std::min(v.statistic, h.asset);
      v.detail = "short asset position in interval " + std::to_string(i + 1);
    }
    if (which.claim && h.claim < 0.0) {
      v.passed = false;
      v.statistic = std::min(v.statistic, h.claim);
      v.detail = "short claim position in interval " + std::to_string(i + 1);
    }
  }
  return v;
}

Verdict check_superhedge_dominates(double price, double capital, const SimpleStrategy& strategy,
                                   std::span<const MarketPaths> markets, double tolerance) {
  for (const auto& m : markets) {
    const WealthReport r = wealth_process(strategy, m, capital);
    const std::size_t last = m.time_grid.size() - 1;
    for (std::size_t p = 0; p < r.wealth.rows(); ++p) {
      const double payoff = m.claim(p, last);
      if (r.wealth(p, last) < payoff - tolerance * (1.0 + std::abs(payoff))) {
        throw Error(Error::Kind::NotASuperhedge,
                    "candidate fails to dominate the claim on path " + std::to_string(p) +
                        " under " + m.measure_tag);
      }
    }
  }
  Verdict v;
  v.passed = price <= capital + tolerance * (1.0 + std::abs(capital));
  v.statistic = price - capital;
  v.detail = "price " + detail::shortest(price) + " vs superhedging capital " + detail::shortest(capital);
  return v;
}

Matrix simulate_asset(double s0, double sigma, const SimulationSpec& spec) {
  if (!(s0 > 0.0) || !(sigma >= 0.0)) {
    throw Error(Error::Kind::InvalidArgument, "asset: need s0 > 0 and sigma >= 0");
  }
  const auto grid = uniform_grid(spec.horizon, spec.dt);
  return asset_on_grid(s0, sigma, grid, spec.n_paths, spec.seed, spec.first_path);
}

Matrix longevity_values(const PathEnsemble& intensity, const RiccatiSolution& sol, double maturity) {
  Matrix out(intensity.values.rows(), intensity.values.cols());
  for (std::size_t p = 0; p < out.rows(); ++p) {
    const auto y = longevity_value_path(intensity.time_grid, intensity.values.row(p), sol, maturity);
    std::copy(y.begin(), y.end(), out.row(p).begin());
  }
  return out;
}

MarketPaths longevity_market(const PathEnsemble& intensity, const RiccatiSolution& sol,
                             double maturity, double s0, double sigma, std::uint64_t asset_seed) {
  if (!(s0 > 0.0) || !(sigma >= 0.0)) {
    throw Error(Error::Kind::InvalidArgument, "asset: need s0 > 0 and sigma >= 0");
  }
  MarketPaths m;
  m.time_grid = intensity.time_grid;
  m.claim = longevity_values(intensity, sol, maturity);
  m.asset = asset_on_grid(s0, sigma, intensity.time_grid, intensity.values.rows(), asset_seed,
                          intensity.first_path);
  m.measure_tag = intensity.model_tag + "/sigma=" + detail::shortest(sigma);
  return m;
}

std::vector<SimpleStrategy> random_long_only_strategies(std::size_t count,
                                                        std::span<const double> grid,
                                                        std::uint64_t seed,
                                                        std::size_t max_intervals) {
  if (grid.size() < 2 || max_intervals < 1) {
    throw Error(Error::Kind::InvalidArgument, "strategy family: need a grid and >= 1 interval");
  }
  std::vector<SimpleStrategy> out;
  out.reserve(count);
  const std::size_t interior = grid.size() - 2;
  for (std::size_t s = 0; s < count; ++s) {
    SubStream rng(seed, s, StreamPurpose::Strategy);
    const std::size_t wanted =
        1 + static_cast<std::size_t>(rng.next_uniform() * static_cast<double>(max_intervals) - 1e-12);
    std::vector<std::size_t> cuts;
    const std::size_t n_cuts = std::min(wanted - 1, interior);
    while (cuts.size() < n_cuts) {
      const auto c = 1 + static_cast<std::size_t>((rng.next_uniform() - 1e-12) * static_cast<double>(interior));
      if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> times{grid.front()};
    for (std::size_t c : cuts) times.push_back(grid[c]);
    times.push_back(grid.back());
    std::vector<Holding> holdings;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
      const double ua = rng.next_uniform();
      const double uy = rng.next_uniform();
      holdings.push_back({ua < 0.2 ? 0.0 : 2.0 * ua, uy < 0.2 ? 0.0 : 2.0 * uy});
    }
    out.emplace_back(std::move(times), std::move(holdings));
  }
  return out;
}

Na1Certificate na1_probe(std::span<const SimpleStrategy> strategies,
                         std::span<const MarketPaths> markets) {
  Na1Certificate cert;
  for (const auto& s : strategies) {
    ++cert.strategies_searched;
    bool admissible = true;
    bool positive_everywhere = !markets.empty();
    for (const auto& m : markets) {
      const WealthReport r = wealth_process(s, m, 0.0);
      if (!r.admissible) {
        admissible = false;
        break;
      }
      const std::size_t last = m.time_grid.size() - 1;
      bool any_positive = false;
      for (std::size_t p = 0; p < r.wealth.rows(); ++p) any_positive |= r.wealth(p, last) > 0.0;
      positive_everywhere &= any_positive;
    }
    if (!admissible) continue;
    ++cert.admissible;
    if (positive_everywhere) ++cert.arbitrages_found;
  }
  return cert;
}

}  // namespace robust_affine
