#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/csv.hpp"
#include "json.hpp"

using namespace robust_affine;
using namespace robust_affine::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kData = ROBUST_AFFINE_TEST_DATA;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    out_ = fs::temp_directory_path() /
           ("robust_affine_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(out_);
    fs::create_directories(out_);
  }
  void TearDown() override { fs::remove_all(out_); }

  int run(std::vector<std::string> args) {
    std::vector<const char*> argv{"robust_affine"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_main(static_cast<int>(argv.size()), argv.data());
  }

  // Writes a modified copy of a data config next to the originals so that
  // relative file references still resolve.
  fs::path variant(const std::string& base, const std::function<void(nlohmann::json&)>& edit) {
    nlohmann::json doc;
    std::ifstream(kData / base) >> doc;
    edit(doc);
    const fs::path path = out_ / ("variant_" + base);
    for (const char* key : {"strategy_files"}) {
      if (doc.contains(key)) {
        for (auto& f : doc[key]) f = (kData / f.get<std::string>()).string();
      }
    }
    if (doc.contains("pde") && doc["pde"].contains("payoff_file")) {
      doc["pde"]["payoff_file"] = (kData / doc["pde"]["payoff_file"].get<std::string>()).string();
    }
    std::ofstream(path) << doc.dump(2);
    return path;
  }

  std::vector<std::vector<std::string>> read_csv(const std::string& name, std::string* comment = nullptr) {
    std::ifstream in(out_ / name);
    std::string line;
    std::getline(in, line);
    if (comment) *comment = line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      rows.push_back(cells);
    }
    return rows;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path out_;
};

}  // namespace

TEST(Csv, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.9430269799465490}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
}

TEST(Csv, QuotesFields) {
  std::ostringstream out;
  CsvWriter w(out, "hash", {"a", "b"});
  w.row(std::string("x,y"), 1.5);
  EXPECT_EQ(out.str(), "# hash\na,b\n\"x,y\",1.5\n");
}

TEST(Config, RoundTripsThroughJson) {
  const auto c = load_config(kData / "zero_box.json");
  EXPECT_EQ(c.schema_version, kSchemaVersion);
  EXPECT_EQ(c.space, StateSpace::NonNegative);
  ASSERT_EQ(c.strategy_files.size(), 1u);
  EXPECT_TRUE(fs::path(c.strategy_files[0]).is_absolute());
  const auto again = parse_config(to_json(c), "/");
  EXPECT_EQ(again, c);
  EXPECT_EQ(config_hash(again), config_hash(c));
}

TEST(Config, HashChangesWithContent) {
  auto c = load_config(kData / "zero_box.json");
  const auto h = config_hash(c);
  c.x0 = 0.03;
  EXPECT_NE(config_hash(c), h);
  EXPECT_EQ(h.size(), 16u);
}

TEST(Config, Errors) {
  auto parse = [](const char* text) { return parse_config(nlohmann::json::parse(text), "/"); };
  EXPECT_THROW(parse("[]"), ConfigError);
  EXPECT_THROW(parse(R"({"schema_version": 2})"), ConfigError);
  const char* base = R"({"schema_version": 1, "box": {"b0": [0, 0], "b1": [0, 0], "a0": [0, 0], "a1": [0, 0]},
                         "state_space": "real_line", "horizon": 1, "x0": 0})";
  EXPECT_NO_THROW(parse(base));
  auto with = [&](const char* key, nlohmann::json value) {
    auto doc = nlohmann::json::parse(base);
    doc[key] = value;
    return parse_config(doc, "/");
  };
  EXPECT_THROW(with("state_space", "torus"), ConfigError);
  EXPECT_THROW(with("horizon", -1), ConfigError);
  EXPECT_THROW(with("box", nlohmann::json::parse(R"({"b0": [1, 0], "b1": [0, 0], "a0": [0, 0], "a1": [0, 0]})")),
               ConfigError);
  EXPECT_THROW(with("strategy_files", {"does_not_exist.txt"}), ConfigError);
  EXPECT_THROW(with("riccati_tol", 0.5), ConfigError);
}

TEST(Config, ValidationPerCommand) {
  auto c = load_config(kData / "zero_box.json");
  EXPECT_NO_THROW(validate_for(c, Command::PriceBond));
  c.bond->maturities.clear();
  EXPECT_THROW(validate_for(c, Command::PriceBond), ConfigError);
  c = load_config(kData / "zero_box.json");
  c.mc->dt = 0.3;
  EXPECT_THROW(validate_for(c, Command::Simulate), ConfigError);
  c = load_config(kData / "zero_box.json");
  c.product.reset();
  EXPECT_THROW(validate_for(c, Command::PriceProduct), ConfigError);
}

TEST_F(CliTest, PriceBondZeroBox) {
  EXPECT_EQ(run({"price-bond", "--config", (kData / "zero_box.json").string(), "--out", out_.string()}), kOk);
  std::string comment;
  const auto rows = read_csv("bond_prices.csv", &comment);
  EXPECT_EQ(comment.rfind("# config_hash=", 0), 0u);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"maturity", "state", "phi", "psi", "price"}));
  EXPECT_NEAR(std::stod(rows[1][4]), std::exp(-0.01), 1e-15);
  EXPECT_NEAR(std::stod(rows[2][4]), std::exp(-0.02), 1e-15);
  EXPECT_TRUE(fs::exists(out_ / "report.json"));
  EXPECT_TRUE(fs::exists(out_ / "timings.json"));
}

TEST_F(CliTest, PriceBondVasicek) {
  const auto cfg = fs::path(ROBUST_AFFINE_CONFIG_DIR) / "vasicek.json";
  ASSERT_EQ(run({"price-bond", "--config", cfg.string(), "--out", out_.string()}), kOk);
  bool found = false;
  for (const auto& r : read_csv("bond_prices.csv")) {
    if (r[0] == "1" && r[1] == "0.05") {
      found = true;
      // wide intercept box: worst case at b0 = 0.02
      EXPECT_NEAR(std::stod(r[4]), 0.951619822284040785, 1e-9);
    }
  }
  EXPECT_TRUE(found);
}

TEST_F(CliTest, EmptyMaturitiesIsConfigError) {
  const auto cfg = variant("zero_box.json", [](auto& d) { d["bond"]["maturities"] = nlohmann::json::array(); });
  EXPECT_EQ(run({"price-bond", "--config", cfg.string(), "--out", out_.string()}), kConfigError);
}

TEST_F(CliTest, MissingConfigFlagOrFile) {
  EXPECT_EQ(run({"price-bond"}), kConfigError);
  EXPECT_EQ(run({"price-bond", "--config", (out_ / "nope.json").string()}), kConfigError);
  std::ofstream(out_ / "broken.json") << "{ not json";
  EXPECT_EQ(run({"price-bond", "--config", (out_ / "broken.json").string()}), kConfigError);
}

TEST_F(CliTest, SimulateZeroBoxSurvivor) {
  ASSERT_EQ(run({"simulate", "--config", (kData / "zero_box.json").string(), "--out", out_.string()}), kOk);
  const auto rows = read_csv("paths_summary.csv");
  ASSERT_GT(rows.size(), 2u);
  EXPECT_EQ(rows[0][0], "time");
  EXPECT_EQ(rows[0][5], "survivor_mean");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double t = std::stod(rows[i][0]);
    EXPECT_NEAR(std::stod(rows[i][5]), std::exp(-0.02 * t), 1e-14) << t;
    EXPECT_EQ(std::stod(rows[i][1]), 0.02);
  }
  EXPECT_TRUE(fs::exists(out_ / "cox_consistency.csv"));
  EXPECT_TRUE(fs::exists(out_ / "bond_check.csv"));
}

TEST_F(CliTest, SimulateIsReproducibleAcrossThreadsAndBatches) {
  const auto small = variant("zero_box.json", [&](auto& d) {
    d["box"] = {{"b0", {0.02, 0.03}}, {"b1", {-0.3, -0.1}}, {"a0", {0, 0}}, {"a1", {0.01, 0.02}}};
    d["mc"]["n_paths"] = 300;
    d["mc"]["batch_size"] = 300;
  });
  const auto batched = variant("zero_box.json", [&](auto& d) {
    d["box"] = {{"b0", {0.02, 0.03}}, {"b1", {-0.3, -0.1}}, {"a0", {0, 0}}, {"a1", {0.01, 0.02}}};
    d["mc"]["n_paths"] = 300;
    d["mc"]["batch_size"] = 70;
  });
  ASSERT_EQ(run({"simulate", "--config", small.string(), "--out", (out_ / "a").string(), "--threads", "1"}), kOk);
  ASSERT_EQ(run({"simulate", "--config", small.string(), "--out", (out_ / "b").string(), "--threads", "3"}), kOk);
  ASSERT_EQ(run({"simulate", "--config", batched.string(), "--out", (out_ / "c").string()}), kOk);
  const auto a = slurp(out_ / "a" / "paths_summary.csv");
  EXPECT_EQ(a, slurp(out_ / "b" / "paths_summary.csv"));
  // the batch size is part of the config hash but not of the numbers
  auto body = [](const std::string& s) { return s.substr(s.find('\n')); };
  EXPECT_EQ(body(a), body(slurp(out_ / "c" / "paths_summary.csv")));
  EXPECT_EQ(slurp(out_ / "a" / "cox_consistency.csv"), slurp(out_ / "b" / "cox_consistency.csv"));
}

TEST_F(CliTest, SeedOverride) {
  const auto cfg = variant("zero_box.json", [&](auto& d) {
    d["box"] = {{"b0", {0.02, 0.03}}, {"b1", {-0.3, -0.1}}, {"a0", {0, 0}}, {"a1", {0.01, 0.02}}};
  });
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", (out_ / "a").string(), "--seed", "3"}), kOk);
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", (out_ / "b").string(), "--seed", "4"}), kOk);
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", (out_ / "c").string()}), kOk);
  EXPECT_NE(slurp(out_ / "a" / "paths_summary.csv"), slurp(out_ / "b" / "paths_summary.csv"));
  EXPECT_EQ(slurp(out_ / "a" / "paths_summary.csv"), slurp(out_ / "c" / "paths_summary.csv"));
}

TEST_F(CliTest, ThreadsFromEnvironment) {
  const auto cfg = (kData / "zero_box.json").string();
  ::setenv("ROBUST_AFFINE_THREADS", "2", 1);
  EXPECT_EQ(run({"simulate", "--config", cfg, "--out", out_.string()}), kOk);
  ::setenv("ROBUST_AFFINE_THREADS", "many", 1);
  EXPECT_EQ(run({"simulate", "--config", cfg, "--out", out_.string()}), kConfigError);
  ::unsetenv("ROBUST_AFFINE_THREADS");
}

TEST_F(CliTest, CheckZeroStrategyPasses) {
  EXPECT_EQ(run({"check", "--config", (kData / "zero_box.json").string(), "--out", out_.string()}), kOk);
  const auto rows = read_csv("checks.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"check", "measure", "passed", "asserted", "statistic", "detail"}));
  EXPECT_TRUE(fs::exists(out_ / "measures.csv"));
}

TEST_F(CliTest, CheckMalformedStrategyReportsLine) {
  const auto cfg = variant("zero_box.json", [](auto& d) { d["strategy_files"] = {"malformed_strategy.txt"}; });
  testing::internal::CaptureStderr();
  const int code = run({"check", "--config", cfg.string(), "--out", out_.string()});
  const std::string err = testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, kConfigError);
  EXPECT_NE(err.find("malformed_strategy.txt:3"), std::string::npos) << err;
}

TEST_F(CliTest, CheckLongOnlyPortfolioFile) {
  const auto cfg = fs::path(ROBUST_AFFINE_CONFIG_DIR) / "vasicek.json";
  EXPECT_EQ(run({"check", "--config", cfg.string(), "--out", out_.string()}), kOk);
  int asserted = 0;
  for (const auto& r : read_csv("checks.csv")) {
    if (r[0] == "expectation_nonincrease") {
      EXPECT_EQ(r[2], "true");
      EXPECT_EQ(r[3], "true");
      ++asserted;
    }
  }
  EXPECT_EQ(asserted, 2);
}

TEST_F(CliTest, PriceProductFlatPayoff) {
  ASSERT_EQ(run({"price-product", "--config", (kData / "zero_box.json").string(), "--out", out_.string()}), kOk);
  const auto rows = read_csv("product_prices.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "x_mu", "y_s", "v_mu", "v_s", "product"}));
  EXPECT_NEAR(std::stod(rows[1][5]), std::exp(-0.02), 1e-15);
  EXPECT_EQ(std::stod(rows[2][5]), 1.0);
}

TEST_F(CliTest, PriceProductCallMatchesReferenceColumn) {
  ASSERT_EQ(run({"price-product", "--config", (kData / "product_call.json").string(), "--out", out_.string()}),
            kOk);
  const auto rows = read_csv("product_prices.csv");
  ASSERT_EQ(rows[0].size(), 8u);
  for (std::size_t i = 1; i < 4; ++i) {
    EXPECT_LE(std::abs(std::stod(rows[i][5]) / std::stod(rows[i][7]) - 1.0), 1e-3) << i;
  }
  // t = T: bond factor 1 and payoff value
  EXPECT_NEAR(std::stod(rows[4][5]), 0.3, 1e-14);
}

TEST_F(CliTest, UnstablePdeStepIsNumericError) {
  const auto cfg = variant("product_call.json", [](auto& d) { d["pde"]["dt"] = 0.01; });
  testing::internal::CaptureStderr();
  EXPECT_EQ(run({"price-product", "--config", cfg.string(), "--out", out_.string()}), kNumericError);
  const std::string err = testing::internal::GetCapturedStderr();
  EXPECT_NE(err.find("max admissible dt"), std::string::npos) << err;
}

TEST_F(CliTest, HelpDocumentsColumns) {
  testing::internal::CaptureStdout();
  EXPECT_EQ(run({"simulate", "--help"}), kOk);
  const std::string help = testing::internal::GetCapturedStdout();
  EXPECT_NE(help.find("survivor_mean"), std::string::npos);
}
