// SPDX-License-Identifier: Apache-2.0
#include "der/config.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "der/format.hpp"

namespace der {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
  }
}

const json* section(const json& root, const char* name) {
  if (!root.contains(name)) {
    return nullptr;
  }
  if (!root[name].is_object()) {
    throw std::invalid_argument(std::string("'") + name + "' must be an object");
  }
  return &root[name];
}

double read_number(const json& obj, const char* key, double fallback,
                   const std::string& where) {
  if (!obj.contains(key)) {
    return fallback;
  }
  if (!obj[key].is_number()) {
    throw std::invalid_argument("'" + std::string(key) + "' in " + where +
                                " must be a number");
  }
  return obj[key].get<double>();
}

std::uint64_t read_unsigned(const json& obj, const char* key, std::uint64_t fallback,
                            const std::string& where) {
  if (!obj.contains(key)) {
    return fallback;
  }
  if (!obj[key].is_number_unsigned()) {
    throw std::invalid_argument("'" + std::string(key) + "' in " + where +
                                " must be a non-negative integer");
  }
  return obj[key].get<std::uint64_t>();
}

void check_schema_version(const json& root, const std::string& what) {
  if (!root.contains("schema_version")) {
    throw std::invalid_argument(what + ": missing schema_version");
  }
  if (!root["schema_version"].is_number_integer() ||
      root["schema_version"].get<int>() != kConfigSchemaVersion) {
    throw std::invalid_argument(what + ": unsupported schema_version (expected " +
                                std::to_string(kConfigSchemaVersion) + ")");
  }
}

EngineConfig config_from_json(const json& root, const std::string& what) {
  if (!root.is_object()) {
    throw std::invalid_argument(what + ": top level must be a JSON object");
  }
  reject_unknown_keys(root, {"schema_version", "experience", "reputation", "trust",
                             "graph", "ledger"},
                      what);
  EngineConfig cfg;
  if (const json* e = section(root, "experience")) {
    reject_unknown_keys(*e,
                        {"exp0", "min_exp", "max_exp", "theta_co", "theta_unco",
                         "alpha", "beta", "delta", "gamma"},
                        what + ".experience");
    auto& p = cfg.experience;
    p.exp0 = read_number(*e, "exp0", p.exp0, "experience");
    p.min_exp = read_number(*e, "min_exp", p.min_exp, "experience");
    p.max_exp = read_number(*e, "max_exp", p.max_exp, "experience");
    p.theta_co = read_number(*e, "theta_co", p.theta_co, "experience");
    p.theta_unco = read_number(*e, "theta_unco", p.theta_unco, "experience");
    p.alpha = read_number(*e, "alpha", p.alpha, "experience");
    p.beta = read_number(*e, "beta", p.beta, "experience");
    p.delta = read_number(*e, "delta", p.delta, "experience");
    p.gamma = read_number(*e, "gamma", p.gamma, "experience");
  }
  if (const json* r = section(root, "reputation")) {
    reject_unknown_keys(*r, {"damping", "tol", "max_iters"}, what + ".reputation");
    auto& p = cfg.reputation;
    p.damping = read_number(*r, "damping", p.damping, "reputation");
    p.tol = read_number(*r, "tol", p.tol, "reputation");
    p.max_iters = static_cast<std::uint32_t>(
        read_unsigned(*r, "max_iters", p.max_iters, "reputation"));
  }
  if (const json* t = section(root, "trust")) {
    reject_unknown_keys(*t, {"w1", "w2"}, what + ".trust");
    cfg.reputation.w1 = read_number(*t, "w1", cfg.reputation.w1, "trust");
    cfg.reputation.w2 = read_number(*t, "w2", cfg.reputation.w2, "trust");
  }
  if (const json* g = section(root, "graph")) {
    reject_unknown_keys(*g, {"theta"}, what + ".graph");
    cfg.theta = read_number(*g, "theta", cfg.theta, "graph");
  }
  if (const json* l = section(root, "ledger")) {
    reject_unknown_keys(*l, {"decay_epoch"}, what + ".ledger");
    cfg.decay_epoch = read_unsigned(*l, "decay_epoch", cfg.decay_epoch, "ledger");
  }
  cfg.validate();
  return cfg;
}

}  // namespace

void EngineConfig::validate() const {
  experience.validate();
  reputation.validate();
  if (!(theta > 0.0 && theta < 1.0)) {
    throw std::invalid_argument("config: theta must lie in (0,1)");
  }
  if (decay_epoch == 0) {
    throw std::invalid_argument("config: decay_epoch must be >= 1");
  }
}

EngineConfig parse_config_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  check_schema_version(root, "config");
  return config_from_json(root, "config");
}

EngineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_json(buffer.str());
}

std::string config_to_json(const EngineConfig& cfg) {
  std::ostringstream out;
  const auto& e = cfg.experience;
  const auto& r = cfg.reputation;
  out << "{\n"
      << "  \"schema_version\": " << kConfigSchemaVersion << ",\n"
      << "  \"experience\": {\n"
      << "    \"exp0\": " << format_double(e.exp0) << ",\n"
      << "    \"min_exp\": " << format_double(e.min_exp) << ",\n"
      << "    \"max_exp\": " << format_double(e.max_exp) << ",\n"
      << "    \"theta_co\": " << format_double(e.theta_co) << ",\n"
      << "    \"theta_unco\": " << format_double(e.theta_unco) << ",\n"
      << "    \"alpha\": " << format_double(e.alpha) << ",\n"
      << "    \"beta\": " << format_double(e.beta) << ",\n"
      << "    \"delta\": " << format_double(e.delta) << ",\n"
      << "    \"gamma\": " << format_double(e.gamma) << "\n"
      << "  },\n"
      << "  \"reputation\": {\n"
      << "    \"damping\": " << format_double(r.damping) << ",\n"
      << "    \"tol\": " << format_double(r.tol) << ",\n"
      << "    \"max_iters\": " << r.max_iters << "\n"
      << "  },\n"
      << "  \"trust\": {\n"
      << "    \"w1\": " << format_double(r.w1) << ",\n"
      << "    \"w2\": " << format_double(r.w2) << "\n"
      << "  },\n"
      << "  \"graph\": {\n"
      << "    \"theta\": " << format_double(cfg.theta) << "\n"
      << "  },\n"
      << "  \"ledger\": {\n"
      << "    \"decay_epoch\": " << cfg.decay_epoch << "\n"
      << "  }\n"
      << "}\n";
  return out.str();
}

void save_config(const EngineConfig& cfg, std::ostream& out) {
  out << config_to_json(cfg);
}

Scenario parse_scenario_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw std::invalid_argument("scenario: top level must be a JSON object");
  }
  check_schema_version(root, "scenario");
  reject_unknown_keys(root,
                      {"schema_version", "seed", "n_users", "n_blocks", "tx_rate",
                       "client_fraction", "class_fractions", "score_distributions",
                       "attack", "tracked_edges", "engine"},
                      "scenario");

  Scenario sc;
  sc.seed = read_unsigned(root, "seed", sc.seed, "scenario");
  sc.n_users = static_cast<std::uint32_t>(
      read_unsigned(root, "n_users", sc.n_users, "scenario"));
  sc.n_blocks = read_unsigned(root, "n_blocks", sc.n_blocks, "scenario");
  sc.tx_rate = read_number(root, "tx_rate", sc.tx_rate, "scenario");
  sc.client_fraction =
      read_number(root, "client_fraction", sc.client_fraction, "scenario");

  if (const json* f = section(root, "class_fractions")) {
    reject_unknown_keys(*f, {"honest", "low_quality"}, "scenario.class_fractions");
    const double honest = read_number(*f, "honest", 1.0, "class_fractions");
    const double low = read_number(*f, "low_quality", 0.0, "class_fractions");
    if (std::abs(honest + low - 1.0) > 1e-9) {
      throw std::invalid_argument("scenario: class fractions must sum to 1");
    }
    sc.honest_fraction = honest;
  }

  if (const json* d = section(root, "score_distributions")) {
    reject_unknown_keys(*d, {"honest", "low_quality"}, "scenario.score_distributions");
    if (const json* h = section(*d, "honest")) {
      reject_unknown_keys(*h, {"mean", "sd"}, "score_distributions.honest");
      sc.honest_scores.mean = read_number(*h, "mean", sc.honest_scores.mean, "honest");
      sc.honest_scores.sd = read_number(*h, "sd", sc.honest_scores.sd, "honest");
    }
    if (const json* l = section(*d, "low_quality")) {
      reject_unknown_keys(*l, {"mean", "sd"}, "score_distributions.low_quality");
      sc.low_quality_scores.mean =
          read_number(*l, "mean", sc.low_quality_scores.mean, "low_quality");
      sc.low_quality_scores.sd =
          read_number(*l, "sd", sc.low_quality_scores.sd, "low_quality");
    }
  }

  if (const json* a = section(root, "attack")) {
    reject_unknown_keys(*a,
                        {"kind", "target", "attackers", "onset_block",
                         "feedbacks_per_attacker", "score"},
                        "scenario.attack");
    if (a->contains("kind")) {
      if (!(*a)["kind"].is_string()) {
        throw std::invalid_argument("scenario: attack kind must be a string");
      }
      sc.attack.kind = attack_kind_from_string((*a)["kind"].get<std::string>());
    }
    if (a->contains("target")) {
      if (!(*a)["target"].is_string()) {
        throw std::invalid_argument("scenario: attack target must be a string");
      }
      sc.attack.target = (*a)["target"].get<std::string>();
    }
    sc.attack.attackers = static_cast<std::uint32_t>(
        read_unsigned(*a, "attackers", sc.attack.attackers, "attack"));
    sc.attack.onset_block =
        read_unsigned(*a, "onset_block", sc.attack.onset_block, "attack");
    sc.attack.feedbacks_per_attacker = static_cast<std::uint32_t>(read_unsigned(
        *a, "feedbacks_per_attacker", sc.attack.feedbacks_per_attacker, "attack"));
    sc.attack.score = read_number(*a, "score", sc.attack.score, "attack");
  }

  if (root.contains("tracked_edges")) {
    const json& edges = root["tracked_edges"];
    if (!edges.is_array()) {
      throw std::invalid_argument("scenario: tracked_edges must be an array");
    }
    for (const auto& pair : edges) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
          !pair[1].is_string()) {
        throw std::invalid_argument(
            "scenario: tracked_edges entries must be [from, to] string pairs");
      }
      sc.tracked_edges.emplace_back(pair[0].get<std::string>(),
                                    pair[1].get<std::string>());
    }
  }

  if (root.contains("engine")) {
    json engine = root["engine"];
    if (!engine.is_object()) {
      throw std::invalid_argument("scenario: 'engine' must be an object");
    }
    const EngineConfig cfg = config_from_json(engine, "scenario.engine");
    sc.experience = cfg.experience;
    sc.reputation = cfg.reputation;
    sc.theta = cfg.theta;
    sc.decay_epoch = cfg.decay_epoch;
  }

  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw std::runtime_error("cannot open scenario file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_json(buffer.str());
}

std::string scenario_to_json(const Scenario& sc) {
  nlohmann::ordered_json root;
  root["schema_version"] = kConfigSchemaVersion;
  root["seed"] = sc.seed;
  root["n_users"] = sc.n_users;
  root["n_blocks"] = sc.n_blocks;
  root["tx_rate"] = sc.tx_rate;
  root["client_fraction"] = sc.client_fraction;
  root["class_fractions"] = {{"honest", sc.honest_fraction},
                             {"low_quality", 1.0 - sc.honest_fraction}};
  root["score_distributions"] = {
      {"honest", {{"mean", sc.honest_scores.mean}, {"sd", sc.honest_scores.sd}}},
      {"low_quality",
       {{"mean", sc.low_quality_scores.mean}, {"sd", sc.low_quality_scores.sd}}}};
  root["attack"] = {{"kind", to_string(sc.attack.kind)},
                    {"target", sc.attack.target},
                    {"attackers", sc.attack.attackers},
                    {"onset_block", sc.attack.onset_block},
                    {"feedbacks_per_attacker", sc.attack.feedbacks_per_attacker},
                    {"score", sc.attack.score}};
  root["tracked_edges"] = nlohmann::ordered_json::array();
  for (const auto& [from, to] : sc.tracked_edges) {
    root["tracked_edges"].push_back({from, to});
  }
  const auto& e = sc.experience;
  const auto& r = sc.reputation;
  root["engine"] = {
      {"experience",
       {{"exp0", e.exp0},
        {"min_exp", e.min_exp},
        {"max_exp", e.max_exp},
        {"theta_co", e.theta_co},
        {"theta_unco", e.theta_unco},
        {"alpha", e.alpha},
        {"beta", e.beta},
        {"delta", e.delta},
        {"gamma", e.gamma}}},
      {"reputation",
       {{"damping", r.damping}, {"tol", r.tol}, {"max_iters", r.max_iters}}},
      {"trust", {{"w1", r.w1}, {"w2", r.w2}}},
      {"graph", {{"theta", sc.theta}}},
      {"ledger", {{"decay_epoch", sc.decay_epoch}}}};
  return root.dump(2) + "\n";
}

}  // namespace der
