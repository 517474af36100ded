#include "kpent/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <set>
#include <sstream>
#include <thread>

#include "kpent/errors.hpp"
#include "kpent/rng.hpp"

namespace kpent {

std::vector<RowResult> run_entry(const TheoremEntry& entry, const HarnessConfig& cfg) {
  cfg.validate();
  if (cfg.workers > 0) set_mc_workers(cfg.workers);
  const int n = cfg.instances;
  std::vector<std::vector<RowResult>> per(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        per[i] = entry.run(cfg, mix_seed(cfg.seed, static_cast<std::uint64_t>(i)), i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()), n);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<RowResult> rows;
  for (auto& p : per)
    for (auto& r : p) rows.push_back(std::move(r));
  return rows;
}

std::vector<CheckReport> verify(const std::string& id, const HarnessConfig& cfg) {
  std::vector<CheckReport> out;
  for (auto& r : run_entry(find_entry(id), cfg)) out.push_back(std::move(r.report));
  return out;
}

std::vector<CheckReport> sweep(const std::string& id, const std::string& knob, const std::vector<double>& values,
                               const HarnessConfig& cfg) {
  const TheoremEntry& entry = find_entry(id);
  const auto& all = sweep_knobs();
  if (std::find(all.begin(), all.end(), knob) == all.end()) throw ConfigError("'" + knob + "' is not a sweepable knob");
  if (std::find(entry.knobs.begin(), entry.knobs.end(), knob) == entry.knobs.end()) {
    throw ConfigError(id + " does not read the knob '" + knob + "'");
  }
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<CheckReport> out;
  for (double v : values) {
    HarnessConfig c = cfg;
    set_knob(c, knob, v);
    for (auto& r : verify(id, c)) {
      r.param = knob + "=" + format_real(v) + (r.param.empty() ? "" : ";" + r.param);
      out.push_back(std::move(r));
    }
  }
  return out;
}

FalsifySummary falsify(const std::string& id, int trials, const HarnessConfig& cfg) {
  const TheoremEntry& entry = find_entry(id);
  if (!entry.falsifiable()) throw ConfigError(id + " is a proved statement; falsify targets conjectures and questions");
  if (trials < 1) throw ConfigError("falsify needs at least one trial");
  HarnessConfig c = cfg;
  c.instances = trials;
  FalsifySummary s;
  s.id = id;
  s.trials = trials;
  for (auto& row : run_entry(entry, c)) {
    if (row.report.margin < -5.0 * row.report.tolerance) {
      ++s.flagged;
      s.candidates.push_back({{"theorem_id", id},
                              {"seed", row.report.seed},
                              {"master_seed", cfg.seed},
                              {"config", to_json(c)},
                              {"inputs", row.inputs},
                              {"report", to_json(row.report)}});
    }
    s.reports.push_back(std::move(row.report));
  }
  return s;
}

nlohmann::json to_json(const FalsifySummary& s) {
  return {{"theorem_id", s.id}, {"trials", s.trials}, {"flagged", s.flagged}, {"candidates", s.candidates}};
}

SelftestResult selftest() {
  SelftestResult res;
  auto fail = [&](const std::string& msg) {
    res.ok = false;
    res.lines.push_back("FAIL " + msg);
  };
  std::multiset<std::string> registered;
  for (const auto& e : registry()) registered.insert(e.id);
  const auto& manifest = theorem_manifest();
  for (const auto& id : manifest) {
    const auto n = registered.count(id);
    if (n != 1) fail("manifest id " + id + " registered " + std::to_string(n) + " times");
  }
  for (const auto& id : registered)
    if (std::find(manifest.begin(), manifest.end(), id) == manifest.end()) fail("registry id " + id + " not in manifest");
  if (res.ok) res.lines.push_back("ok registry matches manifest (" + std::to_string(manifest.size()) + " ids)");

  HarnessConfig c;
  c.grid = 256;
  c.lambda = 1.0;
  try {
    const auto rows = verify("T2.1-lambdaX", c);
    bool zero = true;
    for (const auto& r : rows) zero = zero && r.margin == 0.0;
    if (zero) res.lines.push_back("ok identity scaling gives zero margins");
    else fail("identity scaling produced a nonzero margin");
  } catch (const std::exception& e) {
    fail(std::string("identity scaling: ") + e.what());
  }
  for (const char* id : {"T3.2-linearT", "C2.3-intrinsicvolumeslinearcontractions", "L2.1-majorization-convex"}) {
    try {
      HarnessConfig q;
      q.instances = 3;
      const auto rows = verify(id, q);
      if (exit_status(rows) == kExitPass) res.lines.push_back(std::string("ok ") + id);
      else fail(std::string(id) + " smoke run failed");
    } catch (const std::exception& e) {
      fail(std::string(id) + ": " + e.what());
    }
  }
  return res;
}

int exit_status(const std::vector<CheckReport>& rows) {
  for (const auto& r : rows)
    if (!r.pass) return kExitFail;
  return kExitPass;
}

void emit(std::ostream& out, const std::vector<CheckReport>& rows, const std::string& format) {
  if (format == "csv") write_csv(out, rows);
  else if (format == "json") write_json(out, rows);
  else throw ConfigError("format must be csv or json");
}

std::string csv_without_runtime(const std::vector<CheckReport>& rows) {
  std::ostringstream s;
  for (auto r : rows) {
    r.runtime_ms = 0;
    s << csv_row(r) << '\n';
  }
  return s.str();
}

}  // namespace kpent
