#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"

namespace robust_affine::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericError = 3, kCheckFailure = 4 };

struct CheckResult {
  std::string name;
  std::string measure;
  bool passed = true;
  /// Only asserted checks influence the exit code; the rest are reported.
  bool asserted = true;
  double statistic = 0.0;
  std::string detail;
};

struct RunReport {
  std::string command;
  nlohmann::json config_echo;
  std::string config_hash;
  std::vector<CheckResult> checks;
  std::vector<std::string> tables;
  std::vector<std::pair<std::string, double>> timings;  // seconds

  bool all_asserted_passed() const;
};

struct RunOptions {
  std::filesystem::path out_dir = "out";
  /// 0 selects the hardware concurrency.
  unsigned threads = 0;
};

/// Each command writes its CSV tables plus report.json (deterministic) and
/// timings.json (wall clock) into options.out_dir.
RunReport cmd_price_bond(const RunConfig& config, const RunOptions& options);
RunReport cmd_simulate(const RunConfig& config, const RunOptions& options);
RunReport cmd_check(const RunConfig& config, const RunOptions& options);
RunReport cmd_price_product(const RunConfig& config, const RunOptions& options);

/// Zero-rate Black-Scholes call price.
double black_scholes_call(double spot, double strike, double vol, double tau);

/// Full command-line entry point; returns the process exit code.
int run_main(int argc, const char* const* argv);

}  // namespace robust_affine::cli
