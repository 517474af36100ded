#pragma once

// Suite orchestration: verify, sweep, falsify and the registry self-test.
// Instances run in parallel; rows come back sorted by instance index.

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kpent/config.hpp"
#include "kpent/registry.hpp"

namespace kpent {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;

// Row results of cfg.instances instances, instance i seeded with
// mix_seed(cfg.seed, i).
std::vector<RowResult> run_entry(const TheoremEntry& entry, const HarnessConfig& cfg);

std::vector<CheckReport> verify(const std::string& id, const HarnessConfig& cfg);

// One verify per value; each row's param is prefixed with "<knob>=<value>;".
// The knob must be one the entry reads.
std::vector<CheckReport> sweep(const std::string& id, const std::string& knob, const std::vector<double>& values,
                               const HarnessConfig& cfg);

struct FalsifySummary {
  std::string id;
  int trials = 0;
  int flagged = 0;
  std::vector<CheckReport> reports;
  std::vector<nlohmann::json> candidates;  // reproduction bundles of flagged rows
};

// Runs `trials` instances of a conjecture or open question; a row with
// margin < -5 * tolerance becomes a candidate.
FalsifySummary falsify(const std::string& id, int trials, const HarnessConfig& cfg);
nlohmann::json to_json(const FalsifySummary& s);

struct SelftestResult {
  bool ok = true;
  std::vector<std::string> lines;
};

// Registry against the manifest, then quick smoke checks.
SelftestResult selftest();

int exit_status(const std::vector<CheckReport>& rows);
void emit(std::ostream& out, const std::vector<CheckReport>& rows, const std::string& format);
// Rows as CSV without the runtime column, for reproducibility comparisons.
std::string csv_without_runtime(const std::vector<CheckReport>& rows);

}  // namespace kpent
