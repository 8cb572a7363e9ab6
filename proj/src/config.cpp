#include "cdslab/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cdslab/error.hpp"

namespace cdslab {

using nlohmann::json;

namespace {

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + "/" + key, "required field is missing");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

long long as_integer(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) {
    double v = j.get<double>();
    if (v == static_cast<double>(static_cast<long long>(v))) return static_cast<long long>(v);
  }
  throw ConfigError(path, "expected an integer");
}

std::vector<double> as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], path + "/" + std::to_string(i)));
  return out;
}

// A scalar is broadcast to `n` entries.
std::vector<double> as_vector_or_scalar(const json& j, std::size_t n, const std::string& path) {
  if (j.is_number()) return std::vector<double>(n, j.get<double>());
  auto v = as_vector(j, path);
  if (v.size() != n)
    throw ConfigError(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  return v;
}

Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Curve as_curve(const json& j, const std::string& path) {
  if (j.is_number()) return Curve(j.get<double>());
  if (!j.is_object()) throw ConfigError(path, "expected a number or {\"times\": [...], \"values\": [...]}");
  auto times = as_vector(require(j, "times", path), path + "/times");
  auto values = as_vector(require(j, "values", path), path + "/values");
  try {
    return Curve(std::move(times), std::move(values));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

json curve_json(const Curve& c) {
  if (c.times().size() == 1) return c.values().front();
  return json{{"times", c.times()}, {"values", c.values()}};
}

MarketModel parse_model(const json& j) {
  const std::string p = "/model";
  MarketModel m;
  auto v0 = as_vector(require(j, "v0", p), p + "/v0");
  if (v0.size() < 2) throw ConfigError(p + "/v0", "need the counterparty and at least one reference name");
  const std::size_t d = v0.size();
  m.n_ref = static_cast<int>(d) - 1;
  m.v0 = to_eigen(v0);

  const json& drift = require(j, "drift", p);
  if (drift.is_array()) {
    if (drift.size() != d) throw ConfigError(p + "/drift", "expected " + std::to_string(d) + " entries");
    for (std::size_t i = 0; i < d; ++i) m.drift.push_back(as_curve(drift[i], p + "/drift/" + std::to_string(i)));
  } else {
    m.drift.assign(d, as_curve(drift, p + "/drift"));
  }
  m.base_vol = to_eigen(as_vector_or_scalar(require(j, "base_vol", p), d, p + "/base_vol"));

  const json& corr = require(j, "correlation", p);
  if (!corr.is_array() || corr.size() != d)
    throw ConfigError(p + "/correlation", "expected a " + std::to_string(d) + "x" + std::to_string(d) + " array");
  m.correlation.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < d; ++r) {
    auto row = as_vector(corr[r], p + "/correlation/" + std::to_string(r));
    if (row.size() != d)
      throw ConfigError(p + "/correlation/" + std::to_string(r), "expected " + std::to_string(d) + " entries");
    for (std::size_t c = 0; c < d; ++c)
      m.correlation(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }

  if (auto it = j.find("contagion"); it != j.end()) {
    const std::string cp = p + "/contagion";
    const json& cj = *it;
    const json& mode = require(cj, "mode", cp);
    if (!mode.is_string()) throw ConfigError(cp + "/mode", "expected a string");
    if (mode == "none") {
      m.contagion.mode = ContagionMode::None;
    } else if (mode == "linear-in-defaults") {
      m.contagion.mode = ContagionMode::LinearInDefaults;
    } else {
      throw ConfigError(cp + "/mode", "expected \"none\" or \"linear-in-defaults\"");
    }
    if (auto jc = cj.find("jump_coeff"); jc != cj.end()) {
      m.contagion.jump_coeff = to_eigen(as_vector_or_scalar(*jc, d, cp + "/jump_coeff"));
    } else if (m.contagion.mode == ContagionMode::LinearInDefaults) {
      throw ConfigError(cp + "/jump_coeff", "required field is missing");
    }
    if (auto mj = cj.find("max_jumps"); mj != cj.end())
      m.contagion.max_jumps = static_cast<int>(as_integer(*mj, cp + "/max_jumps"));
  }
  if (m.contagion.jump_coeff.size() == 0) m.contagion.jump_coeff = Vector::Zero(static_cast<Eigen::Index>(d));
  if (auto it = j.find("k_bound"); it != j.end()) m.k_bound = as_number(*it, p + "/k_bound");
  if (auto it = j.find("names"); it != j.end()) {
    if (!it->is_array() || it->size() != d) throw ConfigError(p + "/names", "expected one name per firm");
    for (const auto& n : *it) {
      if (!n.is_string()) throw ConfigError(p + "/names", "expected strings");
      m.names.push_back(n.get<std::string>());
    }
  }
  return m;
}

DiscountRule parse_discount(const json& j, const std::string& p) {
  DiscountRule r;
  const json& mode = require(j, "mode", p);
  if (mode == "constant") {
    r.mode = DiscountMode::Constant;
    r.rate = as_number(require(j, "r", p), p + "/r");
  } else if (mode == "deterministic-curve") {
    r.mode = DiscountMode::Curve;
    r.curve = as_curve(j, p);
  } else if (mode == "vasicek-component") {
    r.mode = DiscountMode::Vasicek;
    r.vasicek.speed = as_number(require(j, "speed", p), p + "/speed");
    r.vasicek.long_run = as_number(require(j, "long_run", p), p + "/long_run");
    r.vasicek.vol = as_number(require(j, "vol", p), p + "/vol");
    r.vasicek.r0 = as_number(require(j, "r0", p), p + "/r0");
  } else {
    throw ConfigError(p + "/mode", "expected \"constant\", \"deterministic-curve\" or \"vasicek-component\"");
  }
  return r;
}

ContractSpec parse_contract(const json& j, int n_ref) {
  const std::string p = "/contract";
  ContractSpec c;
  c.maturity = as_number(require(j, "maturity", p), p + "/maturity");
  c.premium_dates = as_vector(require(j, "premium_dates", p), p + "/premium_dates");
  c.recovery = as_vector_or_scalar(require(j, "recovery", p), static_cast<std::size_t>(n_ref), p + "/recovery");
  c.seniority = static_cast<int>(as_integer(require(j, "seniority", p), p + "/seniority"));
  const json& barriers = require(j, "barriers", p);
  if (!barriers.is_array() || barriers.size() != static_cast<std::size_t>(n_ref + 1))
    throw ConfigError(p + "/barriers", "expected " + std::to_string(n_ref + 1) + " barrier objects");
  for (std::size_t i = 0; i < barriers.size(); ++i) {
    const std::string bp = p + "/barriers/" + std::to_string(i);
    Barrier b;
    b.level = as_number(require(barriers[i], "level", bp), bp + "/level");
    if (auto g = barriers[i].find("growth"); g != barriers[i].end()) b.growth = as_number(*g, bp + "/growth");
    c.barriers.push_back(b);
  }
  c.discount = parse_discount(require(j, "discount", p), p + "/discount");
  return c;
}

SimConfig parse_sim(const json& j) {
  const std::string p = "/sim";
  SimConfig s;
  if (auto it = j.find("steps"); it != j.end()) s.steps = static_cast<int>(as_integer(*it, p + "/steps"));
  if (auto it = j.find("paths"); it != j.end()) s.paths = as_integer(*it, p + "/paths");
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_integer() || (it->is_number_integer() && !it->is_number_unsigned() && it->get<long long>() < 0))
      throw ConfigError(p + "/seed", "expected a non-negative integer");
    s.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("workers"); it != j.end()) s.workers = static_cast<int>(as_integer(*it, p + "/workers"));
  if (auto it = j.find("chunk_size"); it != j.end())
    s.chunk_size = static_cast<int>(as_integer(*it, p + "/chunk_size"));
  return s;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "top-level document must be an object");
  RunConfig cfg;
  cfg.model = parse_model(require(doc, "model", ""));
  cfg.contract = parse_contract(require(doc, "contract", ""), cfg.model.n_ref);
  if (auto it = doc.find("sim"); it != doc.end()) cfg.sim = parse_sim(*it);
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

json to_json(const RunConfig& cfg) {
  const auto& m = cfg.model;
  const auto& c = cfg.contract;
  json drift = json::array();
  for (const auto& d : m.drift) drift.push_back(curve_json(d));
  json corr = json::array();
  for (Eigen::Index r = 0; r < m.correlation.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index col = 0; col < m.correlation.cols(); ++col) row.push_back(m.correlation(r, col));
    corr.push_back(row);
  }
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json model{{"v0", vec(m.v0)},
             {"drift", drift},
             {"base_vol", vec(m.base_vol)},
             {"correlation", corr},
             {"contagion",
              {{"mode", m.contagion.mode == ContagionMode::None ? "none" : "linear-in-defaults"},
               {"jump_coeff", vec(m.contagion.jump_coeff)},
               {"max_jumps", m.contagion.effective_max_jumps(m.n_ref)}}},
             {"k_bound", m.k_bound}};
  if (!m.names.empty()) model["names"] = m.names;

  json barriers = json::array();
  for (const auto& b : c.barriers) barriers.push_back({{"level", b.level}, {"growth", b.growth}});
  json disc;
  switch (c.discount.mode) {
    case DiscountMode::Constant: disc = {{"mode", "constant"}, {"r", c.discount.rate}}; break;
    case DiscountMode::Curve:
      disc = {{"mode", "deterministic-curve"}, {"times", c.discount.curve.times()}, {"values", c.discount.curve.values()}};
      break;
    case DiscountMode::Vasicek:
      disc = {{"mode", "vasicek-component"},
              {"speed", c.discount.vasicek.speed},
              {"long_run", c.discount.vasicek.long_run},
              {"vol", c.discount.vasicek.vol},
              {"r0", c.discount.vasicek.r0}};
      break;
  }
  json contract{{"maturity", c.maturity},   {"premium_dates", c.premium_dates}, {"recovery", c.recovery},
                {"seniority", c.seniority}, {"barriers", barriers},             {"discount", disc}};
  json sim{{"steps", cfg.sim.steps},
           {"paths", cfg.sim.paths},
           {"seed", cfg.sim.seed},
           {"chunk_size", cfg.sim.chunk_size}};
  return json{{"model", model}, {"contract", contract}, {"sim", sim}};
}

std::string fingerprint(const MarketModel& model, const ContractSpec& contract) {
  RunConfig cfg{model, contract, SimConfig{}};
  json doc = to_json(cfg);
  doc.erase("sim");
  const std::string text = doc.dump();
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace cdslab
