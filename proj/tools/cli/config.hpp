#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "robust_affine/claims.hpp"
#include "robust_affine/params.hpp"

namespace robust_affine::cli {

inline constexpr int kSchemaVersion = 1;

/// Any problem with the configuration or files it references (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A tabulated coefficient given inline or by file.
struct FunctionSpec {
  enum class Kind { Constant, Linear, File };
  Kind kind = Kind::Constant;
  double value = 0.0;
  std::string path;  // absolute when kind == File

  TabulatedFunction load() const;
  friend bool operator==(const FunctionSpec&, const FunctionSpec&) = default;
};

struct BondSettings {
  std::vector<double> maturities;
  std::vector<double> states;
  friend bool operator==(const BondSettings&, const BondSettings&) = default;
};

struct McSettings {
  std::size_t n_paths = 10000;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  int corner_resolution = 3;
  std::size_t batch_size = 5000;
  std::vector<double> check_times{0.25, 0.5, 1.0};
  friend bool operator==(const McSettings&, const McSettings&) = default;
};

struct AssetSettings {
  double s0 = 1.0;
  double vol_low = 0.15;
  double vol_high = 0.25;
  friend bool operator==(const AssetSettings&, const AssetSettings&) = default;
};

struct CheckSettings {
  std::size_t n_paths = 2000;
  double dt = 0.01;
  std::size_t random_strategies = 100;
  friend bool operator==(const CheckSettings&, const CheckSettings&) = default;
};

struct PdeSettings {
  double lower = 0.0;
  double upper = 1.0;
  int nodes = 3;
  double dt = 1e-3;
  std::array<double, 2> vol_bounds{0.0, 0.0};
  FunctionSpec payoff;
  FunctionSpec sigma;
  FunctionSpec drift;
  FunctionSpec qv_loading;
  std::optional<double> bs_strike;
  friend bool operator==(const PdeSettings&, const PdeSettings&) = default;
};

struct ProductSettings {
  double maturity = 1.0;
  std::vector<std::array<double, 3>> queries;  // (t, x_mu, y_s)
  friend bool operator==(const ProductSettings&, const ProductSettings&) = default;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  ParameterBox box = ParameterBox::point(0, 0, 0, 0);
  StateSpace space = StateSpace::RealLine;
  double horizon = 1.0;
  double x0 = 0.0;
  double riccati_tol = 1e-8;
  std::optional<BondSettings> bond;
  std::optional<McSettings> mc;
  std::optional<AssetSettings> asset;
  std::optional<CheckSettings> check;
  std::optional<PdeSettings> pde;
  std::optional<ProductSettings> product;
  std::vector<std::string> strategy_files;  // absolute
  std::string output_dir = "out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Relative paths are resolved against base_dir. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& file);

nlohmann::json to_json(const RunConfig& config);

/// FNV-1a of the canonical JSON echo, as 16 hex digits.
std::string config_hash(const RunConfig& config);

enum class Command { PriceBond, Simulate, Check, PriceProduct };

/// Per-command validation of required sections and numeric constraints.
void validate_for(const RunConfig& config, Command command);

}  // namespace robust_affine::cli
