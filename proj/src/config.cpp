#include "kpent/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "kpent/errors.hpp"
#include "toml.hpp"

namespace kpent {

namespace {

const std::set<std::string> kKeys{"seed",   "samples", "max_samples", "escalate", "grid",     "tol",      "instances",
                                  "workers", "alpha",  "lambda",      "lip",      "t",        "k",        "d",
                                  "t_list", "t_ladder", "families",   "map_kind", "format",   "out"};

template <class T>
T integer_value(const toml::node& n, const std::string& key) {
  const auto v = n.value_exact<std::int64_t>();
  if (!v) throw ConfigError("config key '" + key + "' must be an integer");
  if (*v < 0) throw ConfigError("config key '" + key + "' must be nonnegative");
  return static_cast<T>(*v);
}

double real_value(const toml::node& n, const std::string& key) {
  const auto v = n.value<double>();
  if (!v) throw ConfigError("config key '" + key + "' must be a number");
  return *v;
}

std::vector<double> real_list(const toml::node& n, const std::string& key) {
  const auto* arr = n.as_array();
  if (!arr) throw ConfigError("config key '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : *arr) out.push_back(real_value(e, key));
  return out;
}

}  // namespace

MCParams HarnessConfig::mc(std::uint64_t instance_seed) const {
  MCParams p;
  p.samples = samples;
  p.seed = instance_seed;
  p.max_samples = std::max(max_samples, samples);
  p.escalate = escalate;
  return p;
}

void HarnessConfig::validate() const {
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (grid != 0 && grid < 4) throw ConfigError("grid must be >= 4 cells per axis");
  if (tol && !(*tol >= 0.0)) throw ConfigError("tol must be >= 0");
  if (instances < 1) throw ConfigError("instances must be >= 1");
  if (alpha && !(*alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (lambda && !(*lambda >= 0.0 && *lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  if (lip && !(*lip >= 0.0 && *lip <= 1.0)) throw ConfigError("lip must lie in [0, 1]");
  if (t && !(*t > 0.0)) throw ConfigError("t must be positive");
  if (k && *k < 1) throw ConfigError("k must be >= 1");
  if (d && (*d < 1 || *d > 8)) throw ConfigError("d must lie in [1, 8]");
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
  for (double v : t_list)
    if (!(v > 0.0)) throw ConfigError("t_list entries must be positive");
  for (std::size_t i = 0; i < t_ladder.size(); ++i)
    if (!(t_ladder[i] > 0.0) || (i > 0 && !(t_ladder[i] > t_ladder[i - 1]))) {
      throw ConfigError("t_ladder must be positive and increasing");
    }
}

HarnessConfig parse_config(std::string_view text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config parse error: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(msg.str());
  }
  HarnessConfig c;
  for (const auto& [k, node] : tbl) {
    const std::string key(k.str());
    if (!kKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
    if (key == "seed") c.seed = integer_value<std::uint64_t>(node, key);
    else if (key == "samples") c.samples = integer_value<std::uint64_t>(node, key);
    else if (key == "max_samples") c.max_samples = integer_value<std::uint64_t>(node, key);
    else if (key == "escalate") {
      const auto v = node.value_exact<bool>();
      if (!v) throw ConfigError("config key 'escalate' must be a boolean");
      c.escalate = *v;
    } else if (key == "grid") c.grid = integer_value<std::int64_t>(node, key);
    else if (key == "tol") c.tol = real_value(node, key);
    else if (key == "instances") c.instances = integer_value<int>(node, key);
    else if (key == "workers") c.workers = integer_value<unsigned>(node, key);
    else if (key == "alpha") c.alpha = real_value(node, key);
    else if (key == "lambda") c.lambda = real_value(node, key);
    else if (key == "lip") c.lip = real_value(node, key);
    else if (key == "t") c.t = real_value(node, key);
    else if (key == "k") c.k = integer_value<int>(node, key);
    else if (key == "d") c.d = integer_value<int>(node, key);
    else if (key == "t_list") c.t_list = real_list(node, key);
    else if (key == "t_ladder") c.t_ladder = real_list(node, key);
    else if (key == "families") {
      const auto* arr = node.as_array();
      if (!arr) throw ConfigError("config key 'families' must be an array of strings");
      for (const auto& e : *arr) {
        const auto s = e.value<std::string>();
        if (!s) throw ConfigError("config key 'families' must be an array of strings");
        c.families.push_back(*s);
      }
    } else {
      const auto s = node.value<std::string>();
      if (!s) throw ConfigError("config key '" + key + "' must be a string");
      if (key == "map_kind") c.map_kind = *s;
      else if (key == "format") c.format = *s;
      else c.out = *s;
    }
  }
  c.validate();
  return c;
}

HarnessConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return parse_config(s.str());
}

const std::vector<std::string>& sweep_knobs() {
  static const std::vector<std::string> knobs{"alpha", "lambda", "lip", "t", "k", "d", "samples"};
  return knobs;
}

void set_knob(HarnessConfig& cfg, const std::string& knob, double value) {
  auto as_int = [&](const char* name) {
    if (value != std::floor(value)) throw ConfigError(std::string(name) + " must be an integer");
    return static_cast<int>(value);
  };
  if (knob == "alpha") cfg.alpha = value;
  else if (knob == "lambda") cfg.lambda = value;
  else if (knob == "lip") cfg.lip = value;
  else if (knob == "t") cfg.t = value;
  else if (knob == "k") cfg.k = as_int("k");
  else if (knob == "d") cfg.d = as_int("d");
  else if (knob == "samples") {
    if (!(value >= 1.0) || value != std::floor(value)) throw ConfigError("samples must be a positive integer");
    cfg.samples = static_cast<std::uint64_t>(value);
  } else {
    throw ConfigError("'" + knob + "' is not a sweepable knob");
  }
  cfg.validate();
}

nlohmann::json to_json(const HarnessConfig& c) {
  nlohmann::json j{{"seed", c.seed},       {"samples", c.samples},   {"max_samples", c.max_samples},
                   {"escalate", c.escalate}, {"grid", c.grid},       {"instances", c.instances},
                   {"t_list", c.t_list},   {"t_ladder", c.t_ladder}, {"families", c.families},
                   {"map_kind", c.map_kind}};
  if (c.tol) j["tol"] = *c.tol;
  if (c.alpha) j["alpha"] = *c.alpha;
  if (c.lambda) j["lambda"] = *c.lambda;
  if (c.lip) j["lip"] = *c.lip;
  if (c.t) j["t"] = *c.t;
  if (c.k) j["k"] = *c.k;
  if (c.d) j["d"] = *c.d;
  return j;
}

}  // namespace kpent
