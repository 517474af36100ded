#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kpent/ballgeom.hpp"
#include "kpent/config.hpp"
#include "kpent/convolve.hpp"
#include "kpent/diversity.hpp"
#include "kpent/errors.hpp"
#include "kpent/gauss_epi.hpp"
#include "kpent/grid_io.hpp"
#include "kpent/harness.hpp"
#include "kpent/rearrange.hpp"

using namespace kpent;
using json = nlohmann::json;

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::optional<std::int64_t> grid;
  std::optional<double> tol;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> instances;
  std::optional<int> d;
  std::optional<int> k;
  std::optional<std::string> map_kind;
};

HarnessConfig resolve(const GlobalFlags& g) {
  HarnessConfig c = g.config.empty() ? HarnessConfig{} : load_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (g.samples) c.samples = *g.samples;
  if (g.grid) c.grid = *g.grid;
  if (g.tol) c.tol = *g.tol;
  if (g.out) c.out = *g.out;
  if (g.format) c.format = *g.format;
  if (g.instances) c.instances = *g.instances;
  if (g.d) c.d = *g.d;
  if (g.k) c.k = *g.k;
  if (g.map_kind) c.map_kind = *g.map_kind;
  c.validate();
  return c;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

double parse_order(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInfiniteOrder;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ConfigError("bad order '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad order '" + s + "'");
  }
}

// Writes text to cfg.out or stdout.
void deliver(const HarnessConfig& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw ConfigError("cannot write " + c.out);
  f << text;
}

int report_rows(const HarnessConfig& c, const std::vector<CheckReport>& rows) {
  std::ostringstream s;
  emit(s, rows, c.format);
  deliver(c, s.str());
  return exit_status(rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kpent: numerical checks for entropic Kneser-Poulsen inequalities"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags g;
  app.add_option("--config", g.config, "TOML configuration file");
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--samples", g.samples, "Monte Carlo samples per estimate");
  app.add_option("--grid", g.grid, "grid cells per axis");
  app.add_option("--tol", g.tol, "grid tolerance budget (replaces the calibrated one)");
  app.add_option("--out", g.out, "output path (default stdout)");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--instances", g.instances, "random instances per check");
  app.add_option("--dim", g.d, "dimension d");
  app.add_option("--k", g.k, "number of points");
  app.add_option("--map", g.map_kind, "contraction kind");

  std::string grid_a, grid_b, order = "1", input;
  double tol = 0.0, t = 1.0;
  bool direct = false;

  auto* entropy = app.add_subcommand("entropy", "Renyi entropy of a grid file");
  entropy->add_option("grid", grid_a)->required();
  entropy->add_option("--alpha", order, "order in [0, inf]");

  auto* conv = app.add_subcommand("convolve", "density of X + W from two grid files");
  conv->add_option("f", grid_a)->required();
  conv->add_option("g", grid_b)->required();
  conv->add_flag("--direct", direct, "use the pairwise oracle");

  auto* rearr = app.add_subcommand("rearrange", "symmetric decreasing rearrangement of a grid file");
  rearr->add_option("grid", grid_a)->required();

  auto* major = app.add_subcommand("majorize", "is f majorized by g");
  major->add_option("g", grid_b)->required();
  major->add_option("f", grid_a)->required();
  major->add_option("--cum-tol", tol, "cumulative tolerance");

  std::string mode = "union";
  int renyi_order = 2;
  auto* kp = app.add_subcommand("kp-check", "ball union/intersection check from a JSON configuration");
  kp->add_option("input", input, "JSON with configuration, map and optional weights")->required();
  kp->add_option("--mode", mode)->check(CLI::IsMember({"union", "intersection", "renyi"}));
  kp->add_option("--order", renyi_order, "integer order for --mode renyi");

  auto* epi = app.add_subcommand("epi-check", "entropy-power checks from a JSON input");
  epi->add_option("input", input, "JSON with gaussian or grid, plus map or S and Sigma")->required();

  auto* div = app.add_subcommand("diversity", "order-2 diversity of a grid file or a weighted point set");
  div->add_option("input", input, "grid file, or JSON with weights and points")->required();
  div->add_option("--t", t, "kernel scale")->check(CLI::PositiveNumber);

  std::string id;
  auto* ver = app.add_subcommand("verify", "run one registry entry");
  ver->add_option("id", id)->required();

  std::string knob;
  std::vector<double> values;
  auto* sw = app.add_subcommand("sweep", "verify over a grid of knob values");
  sw->add_option("id", id)->required();
  sw->add_option("--knob", knob)->required();
  sw->add_option("--values", values)->required()->delimiter(',');

  int trials = 100;
  std::string bundle;
  auto* fal = app.add_subcommand("falsify", "randomized search for counterexamples");
  fal->add_option("id", id)->required();
  fal->add_option("--trials", trials)->check(CLI::PositiveNumber);
  fal->add_option("--bundle", bundle, "write the summary and candidates as JSON");

  auto* self = app.add_subcommand("selftest", "registry coverage and smoke checks");
  auto* list = app.add_subcommand("list", "registry entries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const HarnessConfig c = resolve(g);
    if (*entropy) {
      const DensityGrid f = read_grid(grid_a);
      deliver(c, format_real(renyi_entropy(f.normalized(), parse_order(order))) + "\n");
      return 0;
    }
    if (*conv) {
      if (c.out.empty()) throw ConfigError("convolve needs --out");
      const DensityGrid f = read_grid(grid_a), h = read_grid(grid_b);
      write_grid(c.out, direct ? convolve_direct(f, h) : convolve(f, h));
      return 0;
    }
    if (*rearr) {
      if (c.out.empty()) throw ConfigError("rearrange needs --out");
      write_grid(c.out, rearrange(read_grid(grid_a)));
      return 0;
    }
    if (*major) {
      const MajorizationVerdict v = majorizes(read_grid(grid_b), read_grid(grid_a), tol);
      const json j{{"holds", v.holds},
                   {"worst_radius", v.worst_radius},
                   {"worst_deficit", v.worst_deficit},
                   {"tolerance", v.tolerance_used}};
      deliver(c, j.dump(2) + "\n");
      return v.holds ? kExitPass : kExitFail;
    }
    if (*kp) {
      const json j = read_json(input);
      if (!j.contains("configuration") || !j.contains("map")) throw ConfigError("kp-check needs configuration and map");
      const PointConfiguration x = configuration_from_json(j.at("configuration"));
      const ContractionSpec t = contraction_from_json(j.at("map"));
      const MCParams mc = c.mc(c.seed);
      CheckReport r;
      if (mode == "union") {
        r = kp_union_check(x, t, mc);
      } else if (mode == "intersection") {
        r = x.k() == 2 ? kp_two_ball_intersection_check(x, t) : kp_intersection_check(x, t, mc);
      } else {
        std::vector<double> w(x.k(), 1.0 / x.k());
        if (j.contains("weights")) w = j.at("weights").get<std::vector<double>>();
        r = integer_renyi_check(x, w, t, renyi_order, mc);
      }
      return report_rows(c, {r});
    }
    if (*epi) {
      const json j = read_json(input);
      const double eps = c.tol.value_or(-1.0);
      const bool has_grid = j.contains("grid");
      CheckReport r;
      if (j.contains("S") && j.contains("Sigma")) {
        auto mat = [&](const char* key) {
          const auto rows = j.at(key).get<std::vector<std::vector<double>>>();
          Matrix m(rows.size(), rows.size());
          for (std::size_t a = 0; a < rows.size(); ++a) {
            if (rows[a].size() != rows.size()) throw ConfigError(std::string(key) + " must be square");
            for (std::size_t b = 0; b < rows.size(); ++b) m(a, b) = rows[a][b];
          }
          return m;
        };
        r = has_grid ? check_vector_epi(read_grid(j.at("grid").get<std::string>()), mat("S"), mat("Sigma"), eps)
                     : check_vector_epi(gaussian_from_json(j.at("gaussian")), mat("S"), mat("Sigma"));
      } else {
        if (!j.contains("map")) throw ConfigError("epi-check needs a map, or S and Sigma");
        const ContractionSpec t = contraction_from_json(j.at("map"));
        if (has_grid) {
          const DensityGrid x = read_grid(j.at("grid").get<std::string>());
          r = t.is_affine() ? check_linear_epi(x, t, eps) : open_question_report(x, t, eps);
        } else {
          r = check_linear_epi(gaussian_from_json(j.at("gaussian")), t);
        }
      }
      return report_rows(c, {r});
    }
    if (*div) {
      double value = 0.0;
      if (input.size() > 5 && input.substr(input.size() - 5) == ".json") {
        const json j = read_json(input);
        value = diversity2_discrete(j.at("weights").get<std::vector<double>>(),
                                    j.at("points").get<std::vector<Point>>(), t);
      } else {
        value = diversity_grid(read_grid(input), 2.0, t);
      }
      deliver(c, format_real(value) + "\n");
      return 0;
    }
    if (*ver) return report_rows(c, verify(id, c));
    if (*sw) return report_rows(c, sweep(id, knob, values, c));
    if (*fal) {
      const FalsifySummary s = falsify(id, trials, c);
      if (!bundle.empty()) {
        std::ofstream f(bundle);
        if (!f) throw ConfigError("cannot write " + bundle);
        f << to_json(s).dump(2) << '\n';
      }
      std::cerr << id << ": " << s.trials << " trials, " << s.flagged << " flagged\n";
      report_rows(c, s.reports);
      return s.flagged == 0 ? kExitPass : kExitFail;
    }
    if (*self) {
      const SelftestResult r = selftest();
      std::ostringstream s;
      for (const auto& line : r.lines) s << line << '\n';
      deliver(c, s.str());
      return r.ok ? kExitPass : kExitFail;
    }
    if (*list) {
      std::ostringstream s;
      for (const auto& e : registry()) s << e.id << '\t' << kind_name(e.kind) << '\t' << e.statement << '\n';
      deliver(c, s.str());
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "kpent: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "kpent: bad JSON input: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
