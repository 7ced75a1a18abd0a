#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "csv.hpp"
#include "robust_affine/arbitrage.hpp"
#include "robust_affine/claims.hpp"
#include "robust_affine/error.hpp"
#include "robust_affine/riccati.hpp"
#include "robust_affine/simulation.hpp"

namespace robust_affine::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

RunReport start_report(const char* command, const RunConfig& config) {
  RunReport r;
  r.command = command;
  r.config_echo = to_json(config);
  r.config_hash = config_hash(config);
  return r;
}

std::string comment_line(const RunReport& r) {
  return "config_hash=" + r.config_hash + " command=" + r.command;
}

std::ofstream open_table(const RunOptions& options, RunReport& report, const std::string& name) {
  fs::create_directories(options.out_dir);
  const fs::path path = options.out_dir / name;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  report.tables.push_back(name);
  return out;
}

void finish_report(const RunReport& report, const RunOptions& options) {
  fs::create_directories(options.out_dir);
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"measure", c.measure},
                      {"passed", c.passed},
                      {"asserted", c.asserted},
                      {"statistic", std::isfinite(c.statistic) ? json(c.statistic) : json(nullptr)},
                      {"detail", c.detail}});
  }
  json doc = {{"command", report.command},
              {"config_hash", report.config_hash},
              {"config", report.config_echo},
              {"checks", checks},
              {"tables", report.tables},
              {"all_asserted_passed", report.all_asserted_passed()}};
  std::ofstream(options.out_dir / "report.json") << doc.dump(2) << '\n';

  json timings = json::object();
  for (const auto& [name, secs] : report.timings) timings[name] = secs;
  std::ofstream(options.out_dir / "timings.json") << timings.dump(2) << '\n';
}

SimulationSpec batch_spec(const RunConfig& c, const McSettings& mc, std::size_t first,
                          std::size_t count, unsigned threads) {
  SimulationSpec s;
  s.x0 = c.x0;
  s.horizon = c.horizon;
  s.dt = mc.dt;
  s.n_paths = count;
  s.seed = mc.seed;
  s.first_path = first;
  s.threads = threads;
  return s;
}

void add_check(RunReport& report, std::string name, std::string measure, const Verdict& v,
               bool asserted = true) {
  report.checks.push_back({std::move(name), std::move(measure), v.passed, asserted, v.statistic, v.detail});
}

std::vector<SimpleStrategy> load_strategies(const RunConfig& c, std::span<const double> grid) {
  std::vector<SimpleStrategy> out;
  for (const auto& path : c.strategy_files) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open strategy file " + path);
    try {
      out.push_back(read_strategy(in, path));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    for (double t : out.back().times()) {
      try {
        grid_index(grid, t);
      } catch (const Error&) {
        throw ConfigError(path + ": rebalance time " + format_double(t) + " is not on the check grid");
      }
    }
  }
  return out;
}

}  // namespace

bool RunReport::all_asserted_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return !c.asserted || c.passed; });
}

double black_scholes_call(double spot, double strike, double vol, double tau) {
  if (tau <= 0.0 || vol <= 0.0) return std::max(spot - strike, 0.0);
  if (spot <= 0.0) return 0.0;
  const double sd = vol * std::sqrt(tau);
  const double d1 = (std::log(spot / strike) + 0.5 * sd * sd) / sd;
  const double d2 = d1 - sd;
  auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  return spot * cdf(d1) - strike * cdf(d2);
}

RunReport cmd_price_bond(const RunConfig& c, const RunOptions& options) {
  validate_for(c, Command::PriceBond);
  Stopwatch clock;
  RunReport report = start_report("price-bond", c);
  const double horizon = *std::max_element(c.bond->maturities.begin(), c.bond->maturities.end());
  const RiccatiSolution sol = solve_riccati(c.box, c.space, horizon, 0.0, c.riccati_tol);
  report.timings.emplace_back("riccati", clock.lap());

  auto out = open_table(options, report, "bond_prices.csv");
  CsvWriter csv(out, comment_line(report), {"maturity", "state", "phi", "psi", "price"});
  for (double m : c.bond->maturities) {
    for (double x : c.bond->states) {
      csv.row(m, x, sol.phi(m), sol.psi(m), upper_bond_price(sol, 0.0, m, x));
    }
  }
  report.timings.emplace_back("output", clock.lap());
  finish_report(report, options);
  return report;
}

RunReport cmd_simulate(const RunConfig& c, const RunOptions& options) {
  validate_for(c, Command::Simulate);
  Stopwatch clock;
  RunReport report = start_report("simulate", c);
  const McSettings& mc = *c.mc;

  const RiccatiSolution sol = solve_riccati(c.box, c.space, c.horizon, 0.0, c.riccati_tol);
  report.timings.emplace_back("riccati", clock.lap());

  const auto grid = uniform_grid(c.horizon, mc.dt);
  const std::size_t n_steps = grid.size() - 1;
  const std::size_t stride = std::max<std::size_t>(1, n_steps / 100);
  std::vector<std::size_t> recorded;
  for (std::size_t j = 0; j <= n_steps; j += stride) recorded.push_back(j);
  if (recorded.back() != n_steps) recorded.push_back(n_steps);

  std::vector<McAccumulator> mu_acc(recorded.size()), surv_acc(recorded.size());
  std::vector<double> mu_min(recorded.size(), std::numeric_limits<double>::infinity());
  std::vector<double> mu_max(recorded.size(), -std::numeric_limits<double>::infinity());
  std::vector<double> bond_times;
  for (double t : mc.check_times)
    if (t > 0.0) bond_times.push_back(t);
  std::vector<McAccumulator> bond_acc(bond_times.size());
  CoxTally cox(mc.check_times);

  for (std::size_t first = 0; first < mc.n_paths; first += mc.batch_size) {
    const std::size_t count = std::min(mc.batch_size, mc.n_paths - first);
    const PathEnsemble ens = simulate_extremal(c.box, c.space, batch_spec(c, mc, first, count, options.threads));
    const HazardEnsemble hazard = hazard_integral(ens);
    const DefaultSample sample = cox_default_times(hazard, mc.seed);
    cox.add(sample, grid);
    for (std::size_t k = 0; k < recorded.size(); ++k) {
      const std::size_t j = recorded[k];
      for (std::size_t p = 0; p < count; ++p) {
        const double mu = ens.values(p, j);
        mu_acc[k].add(mu);
        mu_min[k] = std::min(mu_min[k], mu);
        mu_max[k] = std::max(mu_max[k], mu);
        surv_acc[k].add(sample.survivor(p, j));
      }
    }
    for (std::size_t k = 0; k < bond_times.size(); ++k) {
      bond_acc[k].merge(mc_bond_accumulator(hazard, 0.0, bond_times[k]));
    }
  }
  report.timings.emplace_back("simulation", clock.lap());

  {
    auto out = open_table(options, report, "paths_summary.csv");
    CsvWriter csv(out, comment_line(report),
                  {"time", "mu_mean", "mu_sd", "mu_min", "mu_max", "survivor_mean", "survivor_se"});
    for (std::size_t k = 0; k < recorded.size(); ++k) {
      csv.row(grid[recorded[k]], mu_acc[k].mean(), std::sqrt(mu_acc[k].variance()), mu_min[k], mu_max[k],
              surv_acc[k].mean(), surv_acc[k].std_error());
    }
  }
  {
    auto out = open_table(options, report, "cox_consistency.csv");
    CsvWriter csv(out, comment_line(report),
                  {"time", "survival_fraction", "mean_survivor", "combined_se", "within_3se"});
    for (const auto& row : cox.rows()) {
      csv.row(row.time, row.survival_fraction, row.mean_survivor, row.combined_se, row.within_3se);
      Verdict v{row.within_3se, (row.survival_fraction - row.mean_survivor) / std::max(row.combined_se, 1e-300),
                "t=" + format_double(row.time)};
      add_check(report, "cox_consistency", "extremal", v, false);
    }
  }
  {
    auto out = open_table(options, report, "bond_check.csv");
    CsvWriter csv(out, comment_line(report), {"maturity", "mc_mean", "mc_se", "riccati_price", "z"});
    for (std::size_t k = 0; k < bond_times.size(); ++k) {
      const double price = upper_bond_price(sol, 0.0, bond_times[k], c.x0);
      const auto e = bond_acc[k].estimate();
      const double z = e.std_error > 0.0 ? (e.mean - price) / e.std_error : (e.mean == price ? 0.0 : INFINITY);
      csv.row(bond_times[k], e.mean, e.std_error, price, z);
      add_check(report, "extremal_mc_vs_riccati", "extremal",
                Verdict{std::abs(e.mean - price) <= 3.0 * e.std_error + 1e-12, z, "T=" + format_double(bond_times[k])},
                false);
    }
  }
  report.timings.emplace_back("output", clock.lap());
  finish_report(report, options);
  return report;
}

RunReport cmd_check(const RunConfig& c, const RunOptions& options) {
  validate_for(c, Command::Check);
  Stopwatch clock;
  RunReport report = start_report("check", c);
  const McSettings& mc = *c.mc;
  const CheckSettings ck = c.check.value_or(CheckSettings{});
  const AssetSettings& asset = *c.asset;

  const auto grid = uniform_grid(c.horizon, ck.dt);
  const auto user_strategies = load_strategies(c, grid);

  const RiccatiSolution sol = solve_riccati(c.box, c.space, c.horizon, 0.0, c.riccati_tol);
  const double price = upper_bond_price(sol, 0.0, c.horizon, c.x0);
  report.timings.emplace_back("riccati", clock.lap());

  std::vector<std::size_t> checkpoints;
  checkpoints.push_back(0);
  for (double t : mc.check_times) {
    const std::size_t j = grid_index(grid, t);
    if (j > checkpoints.back()) checkpoints.push_back(j);
  }
  if (checkpoints.size() < 2) checkpoints.push_back(grid.size() - 1);

  std::vector<double> vols{asset.vol_low};
  if (asset.vol_high != asset.vol_low) vols.push_back(asset.vol_high);

  SimulationSpec spec;
  spec.x0 = c.x0;
  spec.horizon = c.horizon;
  spec.dt = ck.dt;
  spec.n_paths = ck.n_paths;
  spec.seed = mc.seed;
  spec.threads = options.threads;

  std::vector<PathEnsemble> ensembles;
  for (const auto& theta : corner_grid(c.box, mc.corner_resolution)) {
    ensembles.push_back(simulate_corner(theta, c.space, spec));
  }
  ensembles.push_back(simulate_extremal(c.box, c.space, spec));

  std::vector<MarketPaths> markets;
  auto measures_out = open_table(options, report, "measures.csv");
  CsvWriter measures_csv(measures_out, comment_line(report),
                         {"measure", "mc_bond_mean", "mc_bond_se", "riccati_price"});
  for (const auto& ens : ensembles) {
    const bool extremal = ens.model_tag == "extremal";
    const auto bond = mc_bond_estimate(hazard_integral(ens), 0.0, c.horizon);
    measures_csv.row(ens.model_tag, bond.mean, bond.std_error, price);
    if (!extremal) {
      const double excess = bond.mean - price;
      add_check(report, "corner_dominance", ens.model_tag,
                Verdict{excess <= 3.0 * bond.std_error + 1e-12,
                        bond.std_error > 0 ? excess / bond.std_error : 0.0,
                        "corner bond " + format_double(bond.mean) + " vs upper " + format_double(price)});
    }
    MartingaleTally tally(ens.model_tag, checkpoints);
    tally.add(longevity_values(ens, sol, c.horizon));
    const MartingaleTally one[] = {tally};
    add_check(report, extremal ? "martingale_extremal" : "supermartingale", ens.model_tag,
              check_supermartingale(one, extremal ? MartingaleMode::Martingale : MartingaleMode::Supermartingale));
    for (double vol : vols) markets.push_back(longevity_market(ens, sol, c.horizon, asset.s0, vol, mc.seed));
  }
  report.timings.emplace_back("simulation", clock.lap());

  const SimpleStrategy zero = SimpleStrategy::hold(c.horizon, {});
  try {
    add_check(report, "superhedge_unit_capital", "all",
              check_superhedge_dominates(price, 1.0, zero, markets));
  } catch (const Error& e) {
    add_check(report, "superhedge_unit_capital", "all", Verdict{false, 0.0, e.what()}, false);
  }

  auto expectation_over_markets = [&](const SimpleStrategy& s, double x0) {
    std::vector<WealthReport> reports;
    bool admissible = true;
    for (const auto& m : markets) {
      reports.push_back(wealth_process(s, m, x0));
      admissible &= reports.back().admissible;
    }
    return std::pair{check_expectation_nonincrease(reports), admissible};
  };

  for (std::size_t i = 0; i < user_strategies.size(); ++i) {
    const auto& s = user_strategies[i];
    const std::string name = fs::path(c.strategy_files[i]).filename().string();
    const Verdict long_only = check_no_short_sale(s, {true, true});
    add_check(report, "no_short_sale", name, long_only, false);
    const auto [expectation, admissible] = expectation_over_markets(s, 1.0);
    add_check(report, "admissible", name, Verdict{admissible, 0.0, "initial capital 1"}, false);
    add_check(report, "expectation_nonincrease", name, expectation, long_only.passed);
  }

  const auto family = random_long_only_strategies(ck.random_strategies, grid, mc.seed);
  Verdict family_verdict;
  family_verdict.statistic = -std::numeric_limits<double>::infinity();
  for (const auto& s : family) {
    const auto [v, admissible] = expectation_over_markets(s, 1.0);
    (void)admissible;
    if (!v.passed) family_verdict.passed = false;
    if (v.statistic > family_verdict.statistic) {
      family_verdict.statistic = v.statistic;
      family_verdict.detail = v.detail;
    }
  }
  if (family.empty()) family_verdict.statistic = 0.0;
  family_verdict.detail = std::to_string(family.size()) + " strategies; worst: " + family_verdict.detail;
  add_check(report, "random_long_only_expectation", "all", family_verdict);

  std::vector<SimpleStrategy> probe_family = family;
  probe_family.push_back(zero);
  const Na1Certificate cert = na1_probe(probe_family, markets);
  add_check(report, "na1_probe", "all",
            Verdict{cert.arbitrages_found == 0, static_cast<double>(cert.arbitrages_found),
                    std::to_string(cert.strategies_searched) + " searched, " +
                        std::to_string(cert.admissible) + " admissible at zero capital"});
  report.timings.emplace_back("checks", clock.lap());

  auto out = open_table(options, report, "checks.csv");
  CsvWriter csv(out, comment_line(report), {"check", "measure", "passed", "asserted", "statistic", "detail"});
  for (const auto& r : report.checks) csv.row(r.name, r.measure, r.passed, r.asserted, r.statistic, r.detail);
  finish_report(report, options);
  return report;
}

RunReport cmd_price_product(const RunConfig& c, const RunOptions& options) {
  validate_for(c, Command::PriceProduct);
  Stopwatch clock;
  RunReport report = start_report("price-product", c);
  const auto& pde = *c.pde;
  const auto& product = *c.product;

  const RiccatiSolution sol = solve_riccati(c.box, c.space, product.maturity, 0.0, c.riccati_tol);
  report.timings.emplace_back("riccati", clock.lap());

  GPdeProblem problem{pde.payoff.load(), pde.drift.load(), pde.qv_loading.load(), pde.sigma.load(),
                      VolBounds{pde.vol_bounds[0], pde.vol_bounds[1]},
                      AssetGrid{pde.lower, pde.upper, pde.nodes, pde.dt, product.maturity}};
  const ValueSurface surface = solve_g_pde(problem);
  report.timings.emplace_back("g_pde", clock.lap());

  std::vector<std::string> header{"t", "x_mu", "y_s", "v_mu", "v_s", "product"};
  if (pde.bs_strike) {
    header.push_back("bs_reference");
    header.push_back("product_reference");
  }
  auto out = open_table(options, report, "product_prices.csv");
  CsvWriter csv(out, comment_line(report), header);
  for (const auto& q : product.queries) {
    const double v_mu = upper_bond_price(sol, q[0], product.maturity, q[1]);
    const double v_s = surface.value_at(q[0], q[2]);
    const double value = product_claim_value(q[0], q[1], sol, surface, q[2], product.maturity);
    std::vector<std::string> row{format_double(q[0]), format_double(q[1]), format_double(q[2]),
                                 format_double(v_mu), format_double(v_s), format_double(value)};
    if (pde.bs_strike) {
      const double vol = std::sqrt(pde.vol_bounds[1]) * std::abs(pde.sigma.value);
      const double bs = black_scholes_call(q[2], *pde.bs_strike, vol, product.maturity - q[0]);
      row.push_back(format_double(bs));
      row.push_back(format_double(v_mu * bs));
    }
    csv.write_row(row);
  }
  report.timings.emplace_back("output", clock.lap());
  finish_report(report, options);
  return report;
}

int run_main(int argc, const char* const* argv) {
  CLI::App app{"Robust pricing of longevity-linked claims under affine parameter uncertainty"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "Output directory (default: output_dir from config, else ./out)");
    sub->add_option("--seed", seed, "Override mc.seed");
    sub->add_option("--threads", threads, "Worker threads (default: $ROBUST_AFFINE_THREADS or all cores)");
  };
  auto* bond = app.add_subcommand("price-bond", "Worst-case bond prices from the generalised Riccati system");
  bond->footer("Writes bond_prices.csv: maturity,state,phi,psi,price");
  auto* sim = app.add_subcommand("simulate", "Simulate the extremal intensity model and Cox default times");
  sim->footer(
      "Writes paths_summary.csv: time,mu_mean,mu_sd,mu_min,mu_max,survivor_mean,survivor_se\n"
      "       cox_consistency.csv: time,survival_fraction,mean_survivor,combined_se,within_3se\n"
      "       bond_check.csv: maturity,mc_mean,mc_se,riccati_price,z");
  auto* check = app.add_subcommand("check", "Statistical no-arbitrage and supermartingale checks");
  check->footer(
      "Writes measures.csv: measure,mc_bond_mean,mc_bond_se,riccati_price\n"
      "       checks.csv: check,measure,passed,asserted,statistic,detail\n"
      "Exit code 4 if any asserted check fails");
  auto* product = app.add_subcommand("price-product", "Product claim: bond factor times G-PDE asset factor");
  product->footer("Writes product_prices.csv: t,x_mu,y_s,v_mu,v_s,product[,bs_reference,product_reference]");
  for (auto* sub : {bond, sim, check, product}) add_common(sub);
  app.footer("Exit codes: 0 ok, 2 config error, 3 numeric/solver error, 4 check failure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig config = load_config(config_path);
    if (seed) {
      if (!config.mc) throw ConfigError("--seed given but the config has no mc section");
      config.mc->seed = *seed;
    }
    RunOptions options;
    options.out_dir = out_dir.empty() ? fs::path(config.output_dir) : fs::path(out_dir);
    if (threads) {
      options.threads = *threads;
    } else if (const char* env = std::getenv("ROBUST_AFFINE_THREADS")) {
      try {
        options.threads = static_cast<unsigned>(std::stoul(env));
      } catch (const std::exception&) {
        throw ConfigError("ROBUST_AFFINE_THREADS must be a nonnegative integer");
      }
    }

    RunReport report;
    if (*bond) report = cmd_price_bond(config, options);
    else if (*sim) report = cmd_simulate(config, options);
    else if (*check) report = cmd_check(config, options);
    else report = cmd_price_product(config, options);

    for (const auto& r : report.checks) {
      std::cout << (r.passed ? "PASS " : "FAIL ") << (r.asserted ? "" : "(reported) ") << r.name << " ["
                << r.measure << "] " << r.detail << '\n';
    }
    for (const auto& [name, secs] : report.timings) std::cout << "time " << name << ' ' << secs << "s\n";
    for (const auto& t : report.tables) std::cout << "wrote " << (options.out_dir / t).string() << '\n';
    return report.all_asserted_passed() ? kOk : kCheckFailure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnstableGridError& e) {
    std::cerr << "numeric error: " << e.what() << " (max admissible dt " << format_double(e.max_admissible_dt())
              << ")\n";
    return kNumericError;
  } catch (const Error& e) {
    std::cerr << "numeric error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericError;
  }
}

}  // namespace robust_affine::cli
