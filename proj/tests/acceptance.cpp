// Acceptance run: one PASS/FAIL line per criterion, every tolerance and time
// limit pinned below. Exit status 1 when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kpent/convolve.hpp"
#include "kpent/diversity.hpp"
#include "kpent/families.hpp"
#include "kpent/gauss_epi.hpp"
#include "kpent/harness.hpp"
#include "kpent/rearrange.hpp"
#include "test_support.hpp"

using namespace kpent;

namespace {

constexpr std::uint64_t kMasterSeed = 1;
const double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  int number;
  std::string name;
  double limit_s;
  std::function<Outcome()> body;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

HarnessConfig suite_config(int instances) {
  HarnessConfig c;
  c.seed = kMasterSeed;
  c.instances = instances;
  c.samples = 1'000'000;
  c.max_samples = 10'000'000;
  return c;
}

int failures(const std::vector<CheckReport>& rows) {
  int n = 0;
  for (const auto& r : rows) n += r.pass ? 0 : 1;
  return n;
}

double worst_margin(const std::vector<CheckReport>& rows) {
  double w = INFINITY;
  for (const auto& r : rows) w = std::min(w, r.margin);
  return w;
}

DensityGrid uniform_unit(std::int64_t cells) {
  GridSpec s;
  s.dim = 1;
  s.spacing = 1.0 / static_cast<double>(cells);
  s.origin = {0.0};
  s.shape = {cells};
  return make_grid(s, [](std::span<const double>) { return 1.0; });
}

double max_rel_diff(const DensityGrid& a, const DensityGrid& b) {
  if (!(a.spec() == b.spec())) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.masses().size(); ++i) {
    const double x = a.mass(i), y = b.mass(i);
    if (x == y) continue;
    worst = std::max(worst, std::abs(x - y) / std::max(std::abs(x), std::abs(y)));
  }
  return worst;
}

// CSV of the first run of criteria 6, 7 and 11, compared by criterion 12.
std::string first_union, first_orders, first_h2;

std::vector<CheckReport> union_suite() {
  HarnessConfig c = suite_config(200);
  c.d = 2;
  c.map_kind = "affine";
  return verify("K1.1-kp-union", c);
}

std::vector<CheckReport> orders_suite() {
  HarnessConfig c = suite_config(100);
  c.d = 2;
  c.alpha = 2.0;
  std::vector<CheckReport> rows = verify("C1.1-intenttrue", c);
  c.alpha.reset();
  const std::vector<CheckReport> inter = verify("K1.3-kp-intersection", c);
  rows.insert(rows.end(), inter.begin(), inter.end());
  return rows;
}

std::vector<CheckReport> h2_suite() {
  HarnessConfig c = suite_config(50);
  c.d = 2;
  c.t_list = {0.5, 1.0, 2.0, 5.0};
  return verify("T4.2-h2", c);
}

Outcome closed_form_entropy() {
  const DensityGrid f =
      make_grid(testsupport::centered_spec(1, 8.0, 4096), [](std::span<const double> x) { return testsupport::gaussian_pdf(x); });
  const double h_err = std::abs(renyi_entropy(f, 1.0) - 0.5 * std::log(kTwoPiE));
  const double n_rel = std::abs(entropy_power(f) - kTwoPiE) / kTwoPiE;
  return {h_err <= 1e-4 && n_rel <= 1e-3, fmt("|h1 - log(2 pi e)/2| = %.3g, |N/(2 pi e) - 1| = %.3g", h_err, n_rel)};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(kMasterSeed);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 3;
    const int per_axis = d == 1 ? 1024 : (d == 2 ? 32 : 10);
    const DensityGrid f = testsupport::random_grid(rng, d, per_axis);
    const DensityGrid g = testsupport::random_grid(rng, d, per_axis);
    worst = std::max(worst, max_rel_diff(convolve(f, g), convolve_direct(f, g)));
  }
  return {worst <= 1e-12, fmt("50 pairs, worst relative cell difference %.3g (limit 1e-12)", worst)};
}

Outcome rearrangement_exactness() {
  std::mt19937_64 rng(kMasterSeed + 1);
  const double orders[] = {0.0, 0.5, 1.0, 2.0, kInfiniteOrder};
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const DensityGrid f = testsupport::random_grid(rng, 1 + trial % 3, trial % 3 == 0 ? 256 : 16);
    const DensityGrid star = rearrange(f);
    for (double a : orders) mismatches += renyi_entropy(star, a) == renyi_entropy(f, a) ? 0 : 1;
  }
  return {mismatches == 0, fmt("100 grids x 5 orders, %.0f entropies differ in any bit", mismatches)};
}

Outcome scaling_theorem() {
  const std::vector<CheckReport> rows = verify("T2.1-lambdaX", suite_config(30));
  const int fails = failures(rows);
  // Per instance: one majorization row and orders 0.5, 1, 2.
  const bool complete = rows.size() == 30 * 4;
  return {fails == 0 && complete,
          fmt("%.0f rows, %.0f failures, worst margin %.3g", static_cast<double>(rows.size()), fails, worst_margin(rows))};
}

Outcome radial_theorem() {
  HarnessConfig c = suite_config(20);
  c.d = 2;
  const std::vector<CheckReport> rows = verify("T2.2-radsymunimodXW", c);
  const int fails = failures(rows);
  return {fails == 0 && rows.size() == 20 * 4,
          fmt("%.0f rows, %.0f failures, worst margin %.3g", static_cast<double>(rows.size()), fails, worst_margin(rows))};
}

Outcome union_check() {
  const std::vector<CheckReport> rows = union_suite();
  first_union = csv_without_runtime(rows);
  int below = 0;
  int max_k = 0;
  for (const auto& r : rows) {
    below += r.margin < -3.0 * r.std_error ? 1 : 0;
    max_k = std::max(max_k, r.k);
  }
  return {below == 0 && rows.size() == 200 && max_k <= 8,
          fmt("%.0f rows, %.0f margins below -3 stderr, max k %.0f", static_cast<double>(rows.size()), below, max_k)};
}

Outcome orders_check() {
  const std::vector<CheckReport> rows = orders_suite();
  first_orders = csv_without_runtime(rows);
  const int fails = failures(rows);
  int max_k = 0;
  for (const auto& r : rows) max_k = std::max(max_k, r.k);
  return {fails == 0 && rows.size() == 200 && max_k <= 5,
          fmt("%.0f rows, %.0f failures, max k %.0f", static_cast<double>(rows.size()), fails, max_k)};
}

Outcome gaussian_suite() {
  SampleStream s(kMasterSeed, 0, 0);
  int bad = 0;
  double worst = INFINITY;
  for (int i = 0; i < 100; ++i) {
    const int d = 1 + static_cast<int>(s.next_u64() % 3);
    const Matrix q = random_orthogonal(s, d);
    Vec ev(d);
    for (auto& v : ev) v = s.uniform(0.05, 5.0);
    Matrix cov = q * Matrix::diagonal(ev) * q.transposed();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < a; ++b) cov(a, b) = cov(b, a);
    const CheckReport r = check_linear_epi(GaussianLaw{Vec(d, 0.0), cov}, random_affine_contraction(s, d, 0.0, 1.0, 1.0));
    bad += (r.pass && r.margin >= -1e-9) ? 0 : 1;
    worst = std::min(worst, r.margin);
  }
  // Equality boundary: Sigma = 4, T = x / 2 gives 5 = 2 + 3 in units of 2 pi e.
  const CheckReport eq = check_linear_epi(GaussianLaw{{0.0}, Matrix{{4.0}}}, ContractionSpec::scaling(1, 0.5));
  const bool eq_ok = eq.pass && std::abs(eq.margin) <= 1e-9;
  return {bad == 0 && eq_ok, fmt("%.0f violations, worst margin %.3g, equality-case margin %.3g", bad, worst, eq.margin)};
}

Outcome delta_anchors() {
  const DensityGrid u = uniform_unit(400);
  const double delta_err = std::abs(delta_gap(u) - 0.17649);
  const double lx_err = std::abs(isotropic_constant(u) - 0.288675);
  SampleStream s(kMasterSeed, 0, 1);
  int fails = 0;
  for (int i = 0; i < 50; ++i) {
    const LawSpec law = random_log_concave_law(s, 1, false);
    const DensityGrid f = grid_law(law, 2.0 * law.extent() / 400.0);
    fails += check_delta_isotropic_bound(f).pass ? 0 : 1;
  }
  return {delta_err <= 2e-3 && lx_err <= 1e-3 && fails == 0,
          fmt("|Delta - 0.17649| = %.3g, |L_X - 0.288675| = %.3g, bound failures %.0f/50", delta_err, lx_err, fails)};
}

Outcome diversity_constants() {
  const double bound = renyi_gap_bound(1.0);
  const double bound_err = std::abs(bound - 0.306853);
  const double factor_err = std::abs(std::exp(2.0 * bound) - 1.8473);
  const std::vector<double> ladder{10.0, 100.0, 1000.0};
  const ScalingLimitResult lim = scaling_limit_check(uniform_unit(400), ladder);
  const double top_rel = std::abs(lim.ratio.back() / lim.target - 1.0);
  const bool ok = bound_err <= 1e-6 && factor_err <= 1e-3 && std::abs(lim.target - 1.0) <= 1e-12 && top_rel <= 0.05 &&
                  lim.conclusive;
  return {ok, fmt("|bound - 0.306853| = %.3g, |e^(2 bound) - 1.8473| = %.3g, top-rung relative error %.3g", bound_err,
                  factor_err, top_rel)};
}

Outcome h2_check() {
  const std::vector<CheckReport> rows = h2_suite();
  first_h2 = csv_without_runtime(rows);
  const int fails = failures(rows);
  return {fails == 0 && rows.size() == 50 * 4,
          fmt("%.0f rows, %.0f failures, worst margin %.3g", static_cast<double>(rows.size()), fails, worst_margin(rows))};
}

Outcome determinism() {
  auto same = [](const std::string& first, const std::vector<CheckReport>& again) {
    return !first.empty() && csv_without_runtime(again) == first;
  };
  const bool a = same(first_union, union_suite());
  const bool b = same(first_orders, orders_suite());
  const bool c = same(first_h2, h2_suite());
  auto word = [](bool x) { return x ? "identical" : "differs"; };
  return {a && b && c, std::string("union ") + word(a) + ", orders " + word(b) + ", h2 " + word(c)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "closed-form Gaussian entropy", 1.0, closed_form_entropy},
      {2, "FFT convolution matches the direct oracle", 10.0, oracle_equivalence},
      {3, "rearrangement preserves entropies bit-exactly", 5.0, rearrangement_exactness},
      {4, "T2.1 scaling majorization, 30 instances", 60.0, scaling_theorem},
      {5, "T2.2 radial unimodal, 20 instances in d = 2", 300.0, radial_theorem},
      {6, "K1.1 ball unions, 200 affine instances in d = 2", 600.0, union_check},
      {7, "C1.1 order 2 and K1.3 intersections, 100 instances each", 600.0, orders_check},
      {8, "Gaussian linear EPI closed forms", 5.0, gaussian_suite},
      {9, "Delta and L_X anchors", 30.0, delta_anchors},
      {10, "diversity constants and scaling limit", 60.0, diversity_constants},
      {11, "T4.2 order-2 diversity, 50 instances in d = 2", 600.0, h2_check},
      {12, "rerun of 6, 7, 11 is byte-identical", 1800.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.ok && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s %2d %s: %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.number, c.name.c_str(),
                o.detail.c_str(), secs, c.limit_s, in_time ? "" : " over time");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
