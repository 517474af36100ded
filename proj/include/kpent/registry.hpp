#pragma once

// One entry per theorem, corollary, lemma, conjecture and open question. An
// entry turns a configuration and an instance seed into report rows plus the
// serialized inputs needed to reproduce them.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kpent/config.hpp"
#include "kpent/report.hpp"

namespace kpent {

struct RowResult {
  CheckReport report;
  nlohmann::json inputs;
};

enum class EntryKind { Theorem, Corollary, Lemma, Bound, Conjecture, Question };

struct TheoremEntry {
  std::string id;
  EntryKind kind = EntryKind::Theorem;
  std::string statement;
  std::vector<std::string> knobs;  // sweepable knobs the entry reads
  // Runs instance `instance` with its derived seed.
  std::function<std::vector<RowResult>(const HarnessConfig&, std::uint64_t seed, int instance)> run;

  bool falsifiable() const { return kind == EntryKind::Conjecture || kind == EntryKind::Question; }
};

const char* kind_name(EntryKind k);

const std::vector<TheoremEntry>& registry();
// Throws ConfigError for an unknown id.
const TheoremEntry& find_entry(const std::string& id);

// Ids every build must register, kept apart from the registry itself so the
// self-test can compare the two.
const std::vector<std::string>& theorem_manifest();

}  // namespace kpent
