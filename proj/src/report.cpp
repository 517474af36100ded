#include "kpent/report.hpp"

#include <cmath>
#include <cstdio>

namespace kpent {

const char* relation_symbol(Relation r) { return r == Relation::LessEq ? "<=" : ">="; }

void CheckReport::settle(const ToleranceBudget& budget) {
  margin = relation == Relation::LessEq ? rhs - lhs : lhs - rhs;
  tolerance = budget.value();
  std_error = budget.mc_stderr;
  pass = margin >= -tolerance;
}

CheckReport make_report(std::string theorem_id, Relation rel, double lhs, double rhs, const ToleranceBudget& budget,
                        std::string provenance) {
  CheckReport r;
  r.theorem_id = std::move(theorem_id);
  r.relation = rel;
  r.lhs = lhs;
  r.rhs = rhs;
  r.provenance = std::move(provenance);
  r.settle(budget);
  return r;
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string csv_header() {
  return "theorem_id,param,k,d,relation,lhs,rhs,margin,tolerance,stderr,samples,seed,provenance,pass,runtime_ms";
}

std::string csv_row(const CheckReport& r) {
  std::string s;
  s += csv_field(r.theorem_id) + ',';
  s += csv_field(r.param) + ',';
  s += std::to_string(r.k) + ',';
  s += std::to_string(r.d) + ',';
  s += std::string(relation_symbol(r.relation)) + ',';
  s += format_real(r.lhs) + ',';
  s += format_real(r.rhs) + ',';
  s += format_real(r.margin) + ',';
  s += format_real(r.tolerance) + ',';
  s += format_real(r.std_error) + ',';
  s += std::to_string(r.samples) + ',';
  s += std::to_string(r.seed) + ',';
  s += csv_field(r.provenance) + ',';
  s += std::string(r.pass ? "true" : "false") + ',';
  s += std::to_string(r.runtime_ms);
  return s;
}

void write_csv(std::ostream& out, const std::vector<CheckReport>& rows) {
  out << csv_header() << '\n';
  for (const auto& r : rows) out << csv_row(r) << '\n';
}

nlohmann::json to_json(const CheckReport& r) {
  auto real = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return format_real(x);
  };
  return {{"theorem_id", r.theorem_id},
          {"param", r.param},
          {"k", r.k},
          {"d", r.d},
          {"relation", relation_symbol(r.relation)},
          {"lhs", real(r.lhs)},
          {"rhs", real(r.rhs)},
          {"margin", real(r.margin)},
          {"tolerance", real(r.tolerance)},
          {"stderr", real(r.std_error)},
          {"samples", r.samples},
          {"seed", r.seed},
          {"provenance", r.provenance},
          {"pass", r.pass},
          {"runtime_ms", r.runtime_ms},
          {"note", r.note}};
}

void write_json(std::ostream& out, const std::vector<CheckReport>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) arr.push_back(to_json(r));
  out << arr.dump(2) << '\n';
}

}  // namespace kpent
