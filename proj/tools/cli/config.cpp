#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "robust_affine/error.hpp"

namespace robust_affine::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(where, std::string("missing key '") + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "expected a finite number");
  return d;
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

std::uint64_t count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(where, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Interval interval(const json& v, const std::string& where) {
  const auto xs = number_list(v, where);
  if (xs.size() != 2) fail(where, "expected [low, high]");
  return {xs[0], xs[1]};
}

std::string resolve(const std::string& path, const fs::path& base) {
  fs::path p(path);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal().string();
}

void require_file(const std::string& path, const std::string& where) {
  if (!fs::is_regular_file(path)) fail(where, "file not found: " + path);
}

FunctionSpec function_spec(const json& v, const fs::path& base, const std::string& where) {
  FunctionSpec f;
  if (v.is_number()) {
    f.value = number(v, where);
    return f;
  }
  if (!v.is_object() || v.size() != 1) fail(where, "expected a number or one of {constant, linear, file}");
  if (v.contains("constant")) {
    f.value = number(v.at("constant"), where + ".constant");
  } else if (v.contains("linear")) {
    f.kind = FunctionSpec::Kind::Linear;
    f.value = number(v.at("linear"), where + ".linear");
  } else if (v.contains("file")) {
    if (!v.at("file").is_string()) fail(where + ".file", "expected a path");
    f.kind = FunctionSpec::Kind::File;
    f.path = resolve(v.at("file").get<std::string>(), base);
    require_file(f.path, where + ".file");
    f.load();  // surfaces malformed tables at validation time
  } else {
    fail(where, "expected one of {constant, linear, file}");
  }
  return f;
}

json function_json(const FunctionSpec& f) {
  switch (f.kind) {
    case FunctionSpec::Kind::Constant: return {{"constant", f.value}};
    case FunctionSpec::Kind::Linear: return {{"linear", f.value}};
    case FunctionSpec::Kind::File: return {{"file", f.path}};
  }
  return nullptr;
}

}  // namespace

TabulatedFunction FunctionSpec::load() const {
  switch (kind) {
    case Kind::Constant: return TabulatedFunction::constant(value);
    case Kind::Linear: return TabulatedFunction::linear(value);
    case Kind::File: {
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot open " + path);
      try {
        return read_tabulated(in, path);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
  }
  throw ConfigError("unknown function kind");
}

RunConfig parse_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) fail("config", "top level must be an object");
  RunConfig c;
  c.schema_version = static_cast<int>(count(require(doc, "schema_version", "config"), "schema_version"));
  if (c.schema_version != kSchemaVersion) {
    fail("schema_version", "unsupported version " + std::to_string(c.schema_version));
  }

  const json& box = require(doc, "box", "config");
  try {
    c.box = ParameterBox(interval(require(box, "b0", "box"), "box.b0"),
                         interval(require(box, "b1", "box"), "box.b1"),
                         interval(require(box, "a0", "box"), "box.a0"),
                         interval(require(box, "a1", "box"), "box.a1"));
  } catch (const Error& e) {
    fail("box", e.what());
  }

  const json& space = require(doc, "state_space", "config");
  if (!space.is_string()) fail("state_space", "expected a string");
  try {
    c.space = parse_state_space(space.get<std::string>());
  } catch (const Error& e) {
    fail("state_space", e.what());
  }

  c.horizon = number(require(doc, "horizon", "config"), "horizon");
  if (!(c.horizon > 0.0)) fail("horizon", "must be > 0");
  c.x0 = number(require(doc, "x0", "config"), "x0");
  if (!in_state_space(c.space, c.x0)) fail("x0", "outside the state space");
  c.riccati_tol = number_or(doc, "riccati_tol", c.riccati_tol, "config");
  if (!(c.riccati_tol > 0.0 && c.riccati_tol <= 1e-3)) fail("riccati_tol", "must lie in (0, 1e-3]");

  if (doc.contains("bond")) {
    const json& b = doc.at("bond");
    BondSettings s;
    s.maturities = number_list(require(b, "maturities", "bond"), "bond.maturities");
    s.states = number_list(require(b, "states", "bond"), "bond.states");
    c.bond = s;
  }
  if (doc.contains("mc")) {
    const json& m = doc.at("mc");
    McSettings s;
    if (m.contains("n_paths")) s.n_paths = count(m.at("n_paths"), "mc.n_paths");
    s.dt = number_or(m, "dt", s.dt, "mc");
    if (m.contains("seed")) s.seed = count(m.at("seed"), "mc.seed");
    if (m.contains("corner_resolution")) {
      s.corner_resolution = static_cast<int>(count(m.at("corner_resolution"), "mc.corner_resolution"));
    }
    if (m.contains("batch_size")) s.batch_size = count(m.at("batch_size"), "mc.batch_size");
    if (m.contains("check_times")) s.check_times = number_list(m.at("check_times"), "mc.check_times");
    c.mc = s;
  }
  if (doc.contains("asset")) {
    const json& a = doc.at("asset");
    AssetSettings s;
    s.s0 = number_or(a, "s0", s.s0, "asset");
    s.vol_low = number_or(a, "vol_low", s.vol_low, "asset");
    s.vol_high = number_or(a, "vol_high", s.vol_high, "asset");
    c.asset = s;
  }
  if (doc.contains("check")) {
    const json& k = doc.at("check");
    CheckSettings s;
    if (k.contains("n_paths")) s.n_paths = count(k.at("n_paths"), "check.n_paths");
    s.dt = number_or(k, "dt", s.dt, "check");
    if (k.contains("random_strategies")) {
      s.random_strategies = count(k.at("random_strategies"), "check.random_strategies");
    }
    c.check = s;
  }
  if (doc.contains("pde")) {
    const json& p = doc.at("pde");
    PdeSettings s;
    s.lower = number(require(p, "lower", "pde"), "pde.lower");
    s.upper = number(require(p, "upper", "pde"), "pde.upper");
    s.nodes = static_cast<int>(count(require(p, "nodes", "pde"), "pde.nodes"));
    s.dt = number(require(p, "dt", "pde"), "pde.dt");
    const auto vb = interval(require(p, "vol_bounds", "pde"), "pde.vol_bounds");
    s.vol_bounds = {vb.low, vb.high};
    if (p.contains("payoff_file")) {
      if (!p.at("payoff_file").is_string()) fail("pde.payoff_file", "expected a path");
      s.payoff = function_spec(json{{"file", p.at("payoff_file")}}, base_dir, "pde.payoff_file");
    } else {
      s.payoff = function_spec(require(p, "payoff", "pde"), base_dir, "pde.payoff");
    }
    s.sigma = p.contains("sigma") ? function_spec(p.at("sigma"), base_dir, "pde.sigma") : FunctionSpec{};
    s.drift = p.contains("drift") ? function_spec(p.at("drift"), base_dir, "pde.drift") : FunctionSpec{};
    s.qv_loading =
        p.contains("qv_loading") ? function_spec(p.at("qv_loading"), base_dir, "pde.qv_loading") : FunctionSpec{};
    if (p.contains("bs_strike")) s.bs_strike = number(p.at("bs_strike"), "pde.bs_strike");
    c.pde = s;
  }
  if (doc.contains("product")) {
    const json& p = doc.at("product");
    ProductSettings s;
    s.maturity = number(require(p, "maturity", "product"), "product.maturity");
    const json& q = require(p, "queries", "product");
    if (!q.is_array()) fail("product.queries", "expected an array of [t, x_mu, y_s]");
    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto v = number_list(q[i], "product.queries[" + std::to_string(i) + "]");
      if (v.size() != 3) fail("product.queries[" + std::to_string(i) + "]", "expected [t, x_mu, y_s]");
      s.queries.push_back({v[0], v[1], v[2]});
    }
    c.product = s;
  }
  if (doc.contains("strategy_files")) {
    const json& files = doc.at("strategy_files");
    if (!files.is_array()) fail("strategy_files", "expected an array of paths");
    for (std::size_t i = 0; i < files.size(); ++i) {
      const std::string where = "strategy_files[" + std::to_string(i) + "]";
      if (!files[i].is_string()) fail(where, "expected a path");
      const auto path = resolve(files[i].get<std::string>(), base_dir);
      require_file(path, where);
      c.strategy_files.push_back(path);
    }
  }
  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string()) fail("output_dir", "expected a path");
    c.output_dir = doc.at("output_dir").get<std::string>();
  }
  return c;
}

RunConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(file.string() + ": invalid JSON: " + e.what());
  }
  return parse_config(doc, fs::absolute(file).parent_path());
}

json to_json(const RunConfig& c) {
  auto iv = [](const Interval& i) { return json::array({i.low, i.high}); };
  json doc;
  doc["schema_version"] = c.schema_version;
  doc["box"] = {{"b0", iv(c.box.b0())}, {"b1", iv(c.box.b1())}, {"a0", iv(c.box.a0())}, {"a1", iv(c.box.a1())}};
  doc["state_space"] = std::string(to_string(c.space));
  doc["horizon"] = c.horizon;
  doc["x0"] = c.x0;
  doc["riccati_tol"] = c.riccati_tol;
  if (c.bond) doc["bond"] = {{"maturities", c.bond->maturities}, {"states", c.bond->states}};
  if (c.mc) {
    doc["mc"] = {{"n_paths", c.mc->n_paths},
                 {"dt", c.mc->dt},
                 {"seed", c.mc->seed},
                 {"corner_resolution", c.mc->corner_resolution},
                 {"batch_size", c.mc->batch_size},
                 {"check_times", c.mc->check_times}};
  }
  if (c.asset) doc["asset"] = {{"s0", c.asset->s0}, {"vol_low", c.asset->vol_low}, {"vol_high", c.asset->vol_high}};
  if (c.check) {
    doc["check"] = {{"n_paths", c.check->n_paths},
                    {"dt", c.check->dt},
                    {"random_strategies", c.check->random_strategies}};
  }
  if (c.pde) {
    json p = {{"lower", c.pde->lower},
              {"upper", c.pde->upper},
              {"nodes", c.pde->nodes},
              {"dt", c.pde->dt},
              {"vol_bounds", c.pde->vol_bounds},
              {"payoff", function_json(c.pde->payoff)},
              {"sigma", function_json(c.pde->sigma)},
              {"drift", function_json(c.pde->drift)},
              {"qv_loading", function_json(c.pde->qv_loading)}};
    if (c.pde->bs_strike) p["bs_strike"] = *c.pde->bs_strike;
    doc["pde"] = p;
  }
  if (c.product) {
    json q = json::array();
    for (const auto& row : c.product->queries) q.push_back(row);
    doc["product"] = {{"maturity", c.product->maturity}, {"queries", q}};
  }
  doc["strategy_files"] = c.strategy_files;
  doc["output_dir"] = c.output_dir;
  return doc;
}

std::string config_hash(const RunConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate_for(const RunConfig& c, Command command) {
  auto on_grid = [](double t, double dt) {
    const double r = t / dt;
    return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
  };
  auto validate_mc = [&] {
    if (!c.mc) fail("mc", "section required for this command");
    const auto& m = *c.mc;
    if (m.n_paths < 2) fail("mc.n_paths", "need at least 2 paths");
    if (!(m.dt > 0.0) || m.dt > c.horizon || !on_grid(c.horizon, m.dt)) {
      fail("mc.dt", "must be > 0 and divide the horizon");
    }
    if (m.batch_size == 0) fail("mc.batch_size", "must be >= 1");
    if (m.corner_resolution < 2) fail("mc.corner_resolution", "must be >= 2");
    for (double t : m.check_times) {
      if (!(t >= 0.0 && t <= c.horizon) || !on_grid(t, m.dt)) {
        fail("mc.check_times", "time " + std::to_string(t) + " is not a grid node in [0, horizon]");
      }
    }
  };
  auto validate_box = [&] {
    try {
      worst_case_slope(c.box, c.space);
    } catch (const Error& e) {
      fail("box", e.what());
    }
  };

  switch (command) {
    case Command::PriceBond: {
      if (!c.bond) fail("bond", "section required for price-bond");
      if (c.bond->maturities.empty()) fail("bond.maturities", "must not be empty");
      if (c.bond->states.empty()) fail("bond.states", "must not be empty");
      for (double m : c.bond->maturities)
        if (!(m > 0.0)) fail("bond.maturities", "maturities must be > 0");
      for (double x : c.bond->states)
        if (!in_state_space(c.space, x)) fail("bond.states", "state outside the state space");
      break;
    }
    case Command::Simulate:
      validate_mc();
      validate_box();
      break;
    case Command::Check: {
      validate_mc();
      validate_box();
      if (!c.asset) fail("asset", "section required for check");
      if (!(c.asset->s0 > 0.0) || !(c.asset->vol_low >= 0.0) || !(c.asset->vol_low <= c.asset->vol_high)) {
        fail("asset", "need s0 > 0 and 0 <= vol_low <= vol_high");
      }
      const CheckSettings k = c.check.value_or(CheckSettings{});
      if (k.n_paths < 2) fail("check.n_paths", "need at least 2 paths");
      if (!(k.dt > 0.0) || k.dt > c.horizon || !on_grid(c.horizon, k.dt)) {
        fail("check.dt", "must be > 0 and divide the horizon");
      }
      for (double t : c.mc->check_times)
        if (!on_grid(t, k.dt)) fail("mc.check_times", "check times must also lie on the check grid");
      break;
    }
    case Command::PriceProduct: {
      if (!c.pde) fail("pde", "section required for price-product");
      if (!c.product) fail("product", "section required for price-product");
      const auto& p = *c.pde;
      if (p.nodes < 3) fail("pde.nodes", "need at least 3 nodes");
      if (!(p.upper > p.lower)) fail("pde", "need lower < upper");
      if (!(p.dt > 0.0)) fail("pde.dt", "must be > 0");
      if (!(p.vol_bounds[0] >= 0.0 && p.vol_bounds[0] <= p.vol_bounds[1])) {
        fail("pde.vol_bounds", "need 0 <= low <= high");
      }
      if (p.bs_strike && p.sigma.kind != FunctionSpec::Kind::Linear) {
        fail("pde.bs_strike", "the Black-Scholes reference needs a linear sigma");
      }
      if (!(c.product->maturity > 0.0)) fail("product.maturity", "must be > 0");
      if (c.product->queries.empty()) fail("product.queries", "must not be empty");
      for (const auto& q : c.product->queries) {
        if (!(q[0] >= 0.0 && q[0] <= c.product->maturity)) fail("product.queries", "need 0 <= t <= T");
        if (!in_state_space(c.space, q[1])) fail("product.queries", "x_mu outside the state space");
        if (!(q[2] >= p.lower && q[2] <= p.upper)) fail("product.queries", "y_s outside the asset grid");
      }
      break;
    }
  }
}

}  // namespace robust_affine::cli
