#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace kpent {

enum class Relation { LessEq, GreaterEq };

// Tolerance budget of one check: grid discretization plus 3 standard errors
// for every Monte Carlo side.
struct ToleranceBudget {
  double grid = 0.0;
  double mc_stderr = 0.0;  // sum of standard errors of the MC sides
  double value() const { return grid + 3.0 * mc_stderr; }
};

struct CheckReport {
  std::string theorem_id;
  std::string param;
  int k = 0;
  int d = 0;
  Relation relation = Relation::LessEq;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;     // rhs - lhs for <=, lhs - rhs for >=
  double tolerance = 0.0;
  double std_error = 0.0;  // combined MC standard error
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::string provenance;  // "<lhs source>/<rhs source>": closed-form, grid or mc
  bool pass = false;
  std::int64_t runtime_ms = 0;
  std::string note;

  // Sets margin, tolerance, std_error and pass from the sides and budget.
  void settle(const ToleranceBudget& budget);
};

CheckReport make_report(std::string theorem_id, Relation rel, double lhs, double rhs, const ToleranceBudget& budget,
                        std::string provenance);

const char* relation_symbol(Relation r);

std::string csv_header();
std::string csv_row(const CheckReport& r);
void write_csv(std::ostream& out, const std::vector<CheckReport>& rows);
nlohmann::json to_json(const CheckReport& r);
void write_json(std::ostream& out, const std::vector<CheckReport>& rows);

// %.17g formatting used for every real in reports.
std::string format_real(double x);

}  // namespace kpent
