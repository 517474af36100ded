#pragma once

// Harness configuration: global knobs shared by every check plus the
// per-theorem parameters that can be set from TOML or swept.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kpent/mc.hpp"

namespace kpent {

struct HarnessConfig {
  std::uint64_t seed = 1;
  std::uint64_t samples = 1'000'000;
  std::uint64_t max_samples = 100'000'000;
  bool escalate = true;
  std::int64_t grid = 0;             // cells per axis; 0 picks the default per dimension
  std::optional<double> tol;         // replaces the calibrated grid budget
  int instances = 1;
  unsigned workers = 0;              // Monte Carlo threads; 0 = hardware

  std::optional<double> alpha;
  std::optional<double> lambda;
  std::optional<double> lip;
  std::optional<double> t;
  std::optional<int> k;
  std::optional<int> d;
  std::vector<double> t_list{0.5, 1.0, 2.0, 5.0};
  std::vector<double> t_ladder{10.0, 100.0, 1000.0};
  std::vector<std::string> families;  // X families; empty = theorem default
  std::string map_kind;               // empty = theorem default

  std::string format = "csv";
  std::string out;

  // Monte Carlo parameters for one instance seed.
  MCParams mc(std::uint64_t instance_seed) const;
  // Throws ConfigError on out-of-range values.
  void validate() const;
};

// Every key is optional; unknown keys are rejected.
HarnessConfig parse_config(std::string_view toml_text);
HarnessConfig load_config(const std::string& path);

// Sweepable knobs: alpha, lambda, lip, t, k, d, samples.
const std::vector<std::string>& sweep_knobs();
void set_knob(HarnessConfig& cfg, const std::string& knob, double value);

nlohmann::json to_json(const HarnessConfig& cfg);

}  // namespace kpent
