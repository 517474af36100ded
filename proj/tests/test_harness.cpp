#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "kpent/config.hpp"
#include "kpent/errors.hpp"
#include "kpent/grid_io.hpp"
#include "kpent/harness.hpp"
#include "kpent/registry.hpp"
#include "test_support.hpp"

using namespace kpent;
using json = nlohmann::json;

namespace {

HarnessConfig quick(int instances = 2) {
  HarnessConfig c;
  c.instances = instances;
  c.samples = 20'000;
  c.max_samples = 200'000;
  return c;
}

bool all_pass(const std::vector<CheckReport>& rows) {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const CheckReport& r) { return r.pass; });
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "kpent_test_harness";
  std::filesystem::create_directories(dir);
  return dir / name;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KPENT_CLI) + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST_CASE("config parses every documented key") {
  const HarnessConfig c = parse_config(R"(
seed = 7
samples = 5000
max_samples = 50000
escalate = false
grid = 64
tol = 0.01
instances = 3
workers = 1
alpha = 2.0
lambda = 0.5
lip = 0.9
t = 2.0
k = 4
d = 2
t_list = [1.0, 3.0]
t_ladder = [10.0, 20.0]
families = ["gaussian", "laplace"]
map_kind = "diagonal"
format = "json"
out = "rows.json"
)");
  CHECK(c.seed == 7);
  CHECK(c.samples == 5000);
  CHECK(c.max_samples == 50000);
  CHECK_FALSE(c.escalate);
  CHECK(c.grid == 64);
  CHECK(*c.tol == 0.01);
  CHECK(c.instances == 3);
  CHECK(c.workers == 1);
  CHECK(*c.alpha == 2.0);
  CHECK(*c.lambda == 0.5);
  CHECK(*c.lip == 0.9);
  CHECK(*c.t == 2.0);
  CHECK(*c.k == 4);
  CHECK(*c.d == 2);
  CHECK(c.t_list == std::vector<double>{1.0, 3.0});
  CHECK(c.t_ladder == std::vector<double>{10.0, 20.0});
  CHECK(c.families == std::vector<std::string>{"gaussian", "laplace"});
  CHECK(c.map_kind == "diagonal");
  CHECK(c.format == "json");
  CHECK(c.out == "rows.json");

  const MCParams mc = c.mc(99);
  CHECK(mc.seed == 99);
  CHECK(mc.samples == 5000);
  CHECK(mc.max_samples == 50000);
  CHECK_FALSE(mc.escalate);
}

TEST_CASE("empty config gives the defaults") {
  const HarnessConfig c = parse_config("");
  CHECK(c.seed == 1);
  CHECK(c.samples == 1'000'000);
  CHECK(c.grid == 0);
  CHECK_FALSE(c.tol.has_value());
  CHECK(c.format == "csv");
}

TEST_CASE("config rejects unknown keys, wrong types and out-of-range values") {
  CHECK_THROWS_AS(parse_config("sead = 3"), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = \"three\""), ConfigError);
  CHECK_THROWS_AS(parse_config("escalate = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = 1.5"), ConfigError);
  CHECK_THROWS_AS(parse_config("families = \"gaussian\""), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = [1"), ConfigError);
  CHECK_THROWS_AS(parse_config("lambda = 1.5"), ConfigError);
  CHECK_THROWS_AS(parse_config("lip = -0.1"), ConfigError);
  CHECK_THROWS_AS(parse_config("d = 0"), ConfigError);
  CHECK_THROWS_AS(parse_config("d = 9"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid = 2"), ConfigError);
  CHECK_THROWS_AS(parse_config("format = \"xml\""), ConfigError);
  CHECK_THROWS_AS(parse_config("t_ladder = [10.0, 5.0]"), ConfigError);
  CHECK_THROWS_AS(load_config(scratch("missing.toml").string()), ConfigError);
}

TEST_CASE("config round-trips through a file") {
  const auto path = scratch("cfg.toml");
  std::ofstream(path) << "seed = 11\ninstances = 4\nmap_kind = \"affine\"\n";
  const HarnessConfig c = load_config(path.string());
  CHECK(c.seed == 11);
  CHECK(c.instances == 4);
  const json j = to_json(c);
  CHECK(j.at("seed") == 11);
  CHECK(j.at("map_kind") == "affine");
}

TEST_CASE("set_knob writes each sweepable knob and validates") {
  HarnessConfig c;
  set_knob(c, "alpha", 3.0);
  set_knob(c, "lambda", 0.25);
  set_knob(c, "lip", 0.5);
  set_knob(c, "t", 4.0);
  set_knob(c, "k", 6.0);
  set_knob(c, "d", 3.0);
  set_knob(c, "samples", 1000.0);
  CHECK(*c.alpha == 3.0);
  CHECK(*c.lambda == 0.25);
  CHECK(*c.lip == 0.5);
  CHECK(*c.t == 4.0);
  CHECK(*c.k == 6);
  CHECK(*c.d == 3);
  CHECK(c.samples == 1000);
  CHECK_THROWS_AS(set_knob(c, "k", 2.5), ConfigError);
  CHECK_THROWS_AS(set_knob(c, "lambda", 2.0), ConfigError);
  CHECK_THROWS_AS(set_knob(c, "gamma", 1.0), ConfigError);
  CHECK(sweep_knobs().size() == 7);
}

TEST_CASE("registry covers the manifest exactly once") {
  const auto& manifest = theorem_manifest();
  CHECK(manifest.size() == 27);
  std::set<std::string> ids;
  for (const auto& e : registry()) {
    CHECK(ids.insert(e.id).second);
    CHECK_FALSE(e.statement.empty());
    CHECK(static_cast<bool>(e.run));
    for (const auto& k : e.knobs) {
      CHECK(std::find(sweep_knobs().begin(), sweep_knobs().end(), k) != sweep_knobs().end());
    }
  }
  CHECK(ids == std::set<std::string>(manifest.begin(), manifest.end()));
  CHECK(find_entry("K1.1-kp-union").falsifiable());
  CHECK(find_entry("Q3.1-open-question").falsifiable());
  CHECK_FALSE(find_entry("T2.1-lambdaX").falsifiable());
  CHECK_THROWS_AS(find_entry("T9.9-nothing"), ConfigError);
}

TEST_CASE("every entry runs one quick instance and passes") {
  HarnessConfig c = quick(1);
  c.grid = 0;
  for (const auto& e : registry()) {
    CAPTURE(e.id);
    const auto rows = verify(e.id, c);
    CHECK(all_pass(rows));
    for (const auto& r : rows) {
      CHECK(r.theorem_id == e.id);
      CHECK(std::isfinite(r.margin));
      CHECK(r.tolerance >= 0.0);
    }
  }
}

TEST_CASE("same seed reproduces rows byte for byte") {
  HarnessConfig c = quick(3);
  c.seed = 5;
  for (const char* id : {"K1.1-kp-union", "T2.1-lambdaX", "T4.2-h2", "T3.4-isotropiclcXgaussianZ"}) {
    CAPTURE(id);
    const std::string a = csv_without_runtime(verify(id, c));
    const std::string b = csv_without_runtime(verify(id, c));
    CHECK(a == b);
    HarnessConfig other = c;
    other.seed = 6;
    CHECK(csv_without_runtime(verify(id, other)) != a);
  }
}

TEST_CASE("row order and values do not depend on the worker count") {
  HarnessConfig c = quick(3);
  c.workers = 1;
  const std::string one = csv_without_runtime(verify("K1.3-kp-intersection", c));
  c.workers = 4;
  CHECK(csv_without_runtime(verify("K1.3-kp-intersection", c)) == one);
}

TEST_CASE("lambda sweep on the scaling theorem has zero margins at lambda = 1") {
  HarnessConfig c = quick(1);
  c.grid = 512;
  const auto rows = sweep("T2.1-lambdaX", "lambda", {0.0, 0.25, 0.5, 0.75, 1.0}, c);
  CHECK(all_pass(rows));
  int at_one = 0;
  for (const auto& r : rows) {
    if (r.param.rfind("lambda=1;", 0) != 0) continue;
    ++at_one;
    CHECK(r.margin == 0.0);
  }
  CHECK(at_one == 4);
}

TEST_CASE("alpha sweep on the scaling theorem passes at every order") {
  HarnessConfig c = quick(1);
  c.grid = 512;
  const std::vector<double> orders{0.25, 0.5, 1.0, 2.0, 5.0};
  const auto rows = sweep("T2.1-lambdaX", "alpha", orders, c);
  CHECK(all_pass(rows));
  // One majorization row plus one entropy row per value.
  CHECK(rows.size() == 2 * orders.size());
}

TEST_CASE("sample sweep shrinks the standard error like 1/sqrt(n)") {
  HarnessConfig c = quick(1);
  c.escalate = false;
  c.k = 3;
  c.d = 2;
  const auto rows = sweep("K1.1-kp-union", "samples", {1e4, 1e5, 1e6}, c);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    CHECK(rows[i + 1].samples == rows[i].samples * 10);
    const double ratio = rows[i].std_error / rows[i + 1].std_error;
    CHECK(ratio > 2.5);
    CHECK(ratio < 4.0);
  }
}

TEST_CASE("sweeping a knob the entry does not read is a config error") {
  CHECK_THROWS_AS(sweep("T2.1-lambdaX", "k", {2.0}, quick()), ConfigError);
  CHECK_THROWS_AS(sweep("T2.1-lambdaX", "gamma", {2.0}, quick()), ConfigError);
}

TEST_CASE("violated hypotheses raise HypothesisError") {
  HarnessConfig c = quick(1);
  c.families = {"gaussian_mixture"};
  CHECK_THROWS_AS(verify("T2.1-lambdaX", c), HypothesisError);

  c = quick(1);
  c.map_kind = "affine";
  CHECK_THROWS_AS(verify("T2.3-lcXunconditionalWdiagT", c), HypothesisError);
  CHECK_THROWS_AS(verify("T2.1-lambdaX", c), HypothesisError);

  c = quick(1);
  c.d = 2;
  c.alpha = 7.0;
  CHECK_THROWS_AS(verify("C1.1-intenttrue", c), HypothesisError);
  c.alpha = 2.5;
  CHECK_THROWS_AS(verify("C1.1-intenttrue", c), HypothesisError);

  c = quick(1);
  c.families = {"uniform_box"};
  CHECK_THROWS_AS(verify("T2.2-radsymunimodXW", c), HypothesisError);
}

TEST_CASE("the question entries accept laws outside every hypothesis") {
  HarnessConfig c = quick(1);
  c.families = {"gaussian_mixture"};
  const auto rows = verify("Q1.1-big-question", c);
  CHECK_FALSE(rows.empty());
}

TEST_CASE("falsify only runs conjectures and open questions") {
  CHECK_THROWS_AS(falsify("T2.1-lambdaX", 3, quick()), ConfigError);
  CHECK_THROWS_AS(falsify("K1.1-kp-union", 0, quick()), ConfigError);
}

TEST_CASE("falsify finds nothing where the conjecture is known to hold") {
  HarnessConfig c = quick();
  c.k = 2;
  const FalsifySummary two_balls = falsify("K1.3-kp-intersection", 10, c);
  CHECK(two_balls.trials == 10);
  CHECK(two_balls.flagged == 0);
  CHECK(two_balls.candidates.empty());

  c = quick();
  c.d = 2;
  c.k = 4;
  const FalsifySummary plane = falsify("K1.1-kp-union", 10, c);
  CHECK(plane.flagged == 0);

  const json j = to_json(plane);
  CHECK(j.at("theorem_id") == "K1.1-kp-union");
  CHECK(j.at("trials") == 10);
  CHECK(j.at("flagged") == 0);
  CHECK(j.at("candidates").empty());
}

TEST_CASE("exit status and output formats") {
  CheckReport ok = make_report("X", Relation::LessEq, 1.0, 2.0, {}, "closed-form/closed-form");
  CheckReport bad = make_report("X", Relation::LessEq, 2.0, 1.0, {}, "closed-form/closed-form");
  CHECK(exit_status({ok}) == kExitPass);
  CHECK(exit_status({ok, bad}) == kExitFail);

  std::ostringstream csv;
  emit(csv, {ok, bad}, "csv");
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "theorem_id,param,k,d,relation,lhs,rhs,margin,tolerance,stderr,samples,seed,provenance,pass,runtime_ms");

  std::ostringstream js;
  emit(js, {ok, bad}, "json");
  const json j = json::parse(js.str());
  REQUIRE(j.is_array());
  CHECK(j.size() == 2);
  CHECK(j[0].at("pass") == true);
  CHECK(j[1].at("pass") == false);

  ok.runtime_ms = 17;
  CheckReport same = ok;
  same.runtime_ms = 3;
  CHECK(csv_without_runtime({ok}) == csv_without_runtime({same}));
}

TEST_CASE("selftest passes") {
  const SelftestResult r = selftest();
  CHECK(r.ok);
  CHECK_FALSE(r.lines.empty());
}

TEST_CASE("CLI maps outcomes to exit codes") {
  CHECK(run_cli("verify T3.2-linearT --samples 10000") == kExitPass);
  CHECK(run_cli("list") == kExitPass);
  CHECK(run_cli("verify T9.9-nothing") == kExitConfig);
  CHECK(run_cli("verify T2.1-lambdaX --map affine") == kExitConfig);
  CHECK(run_cli("frobnicate") == kExitConfig);
  CHECK(run_cli("falsify T2.1-lambdaX --trials 2") == kExitConfig);

  const auto bad_cfg = scratch("bad.toml");
  std::ofstream(bad_cfg) << "seeed = 1\n";
  CHECK(run_cli("verify T3.2-linearT --config " + bad_cfg.string()) == kExitConfig);

  // A point mass is not majorized by a spread-out law, so majorize fails.
  GridSpec s = testsupport::centered_spec(1, 2.0, 8);
  std::vector<double> spread(8, 1.0 / 8.0), peaked(8, 0.0);
  peaked[3] = 1.0;
  const auto g = scratch("spread.grid"), f = scratch("peaked.grid");
  write_grid(g.string(), DensityGrid(s, spread));
  write_grid(f.string(), DensityGrid(s, peaked));
  CHECK(run_cli("majorize " + g.string() + " " + f.string()) == kExitFail);
  CHECK(run_cli("majorize " + f.string() + " " + g.string()) == kExitPass);
}
