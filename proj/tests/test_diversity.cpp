#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kpent/diversity.hpp"
#include "kpent/errors.hpp"
#include "test_support.hpp"

using namespace kpent;

namespace {

DensityGrid uniform_unit(std::int64_t cells) {
  GridSpec s;
  s.dim = 1;
  s.spacing = 1.0 / static_cast<double>(cells);
  s.origin = {0.0};
  s.shape = {cells};
  return make_grid(s, [](std::span<const double>) { return 1.0; });
}

// Average of exp(-t|u|) over the difference of two uniform points in one
// square cell of side h, by a midpoint sum over the product of two tents.
double brute_cell_kernel_2d(double h, double t, int n) {
  const double du = 2.0 * h / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = -h + (i + 0.5) * du;
    const double wu = (h - std::abs(u)) / (h * h);
    for (int j = 0; j < n; ++j) {
      const double v = -h + (j + 0.5) * du;
      s += wu * (h - std::abs(v)) / (h * h) * std::exp(-t * std::hypot(u, v)) * du * du;
    }
  }
  return s;
}

}  // namespace

TEST_CASE("diversity constant") {
  CHECK(diversity_constant(1) == doctest::Approx(2.0));
  CHECK(diversity_constant(2) == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(diversity_constant(3) == doctest::Approx(8.0 * std::numbers::pi));
  // Integral of exp(-|u|) over the plane by a midpoint sum on [-40, 40]^2.
  const int n = 4000;
  const double du = 80.0 / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += std::exp(-std::hypot(-40.0 + (i + 0.5) * du, -40.0 + (j + 0.5) * du));
  CHECK(s * du * du == doctest::Approx(diversity_constant(2)).epsilon(1e-3));
  CHECK_THROWS_AS(diversity_constant(0), DomainError);
}

TEST_CASE("discrete order-2 diversity") {
  const std::vector<Point> one{{0.3, 0.4}};
  const std::vector<double> w1{1.0};
  for (double t : {0.1, 1.0, 100.0}) CHECK(diversity2_discrete(w1, one, t) == 1.0);
  const std::vector<Point> two{{0.0}, {1.5}};
  const std::vector<double> half{0.5, 0.5};
  for (double t : {0.2, 1.0, 3.0}) {
    const double oracle = 1.0 / (0.25 * (1.0 + std::exp(-t * 1.5) + std::exp(-t * 1.5) + 1.0));
    CHECK(diversity2_discrete(half, two, t) == doctest::Approx(oracle).epsilon(1e-14));
    CHECK(diversity2_discrete(half, two, t) == doctest::Approx(2.0 / (1.0 + std::exp(-t * 1.5))).epsilon(1e-14));
  }
  const std::vector<Point> four{{0.0, 0.0}, {1.0, 0.0}, {0.0, 2.0}, {3.0, 3.0}};
  const std::vector<double> quarter(4, 0.25);
  CHECK(std::abs(diversity2_discrete(quarter, four, 1e3 / 1.0) - 4.0) < 1e-6);
  CHECK_THROWS_AS(diversity2_discrete(std::vector<double>{0.5, 0.4}, two, 1.0), DomainError);
  CHECK_THROWS_AS(diversity2_discrete(half, two, 0.0), DomainError);
}

TEST_CASE("discrete diversity properties") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 7);
    std::vector<Point> pts(m);
    std::vector<double> w(m);
    double tot = 0.0;
    for (int i = 0; i < m; ++i) {
      pts[i] = {u(rng), u(rng)};
      w[i] = 0.1 + std::abs(u(rng));
      tot += w[i];
    }
    for (double& x : w) x /= tot;
    const double t1 = 0.1 + std::abs(u(rng)), t2 = t1 * (1.0 + std::abs(u(rng)));
    const double d1 = diversity2_discrete(w, pts, t1);
    const double d2 = diversity2_discrete(w, pts, t2);
    CHECK(d1 >= 1.0 - 1e-12);
    CHECK(d1 <= m + 1e-12);
    CHECK(d2 >= d1 - 1e-12);
    // Rotation plus translation.
    const double a = u(rng), c = std::cos(a), s = std::sin(a);
    std::vector<Point> moved;
    for (const auto& p : pts) moved.push_back({c * p[0] - s * p[1] + 1.7, s * p[0] + c * p[1] - 0.4});
    CHECK(diversity2_discrete(w, moved, t1) == doctest::Approx(d1).epsilon(1e-12));
  }
}

TEST_CASE("Monte Carlo order-2 diversity") {
  MCParams mc;
  mc.samples = 200000;
  mc.seed = 9;
  const MCEstimate point = diversity2_mc(discrete_sampler({1.0}, {{2.0}}), 1, 1.0, mc);
  CHECK(point.value == 1.0);
  CHECK(point.std_error == 0.0);

  const std::vector<Point> two{{0.0}, {1.5}};
  const MCEstimate pair = diversity2_mc(discrete_sampler({0.5, 0.5}, two), 1, 1.0, mc);
  CHECK(std::abs(pair.value - diversity2_discrete(std::vector<double>{0.5, 0.5}, two, 1.0)) <= 3.0 * pair.std_error);

  // E exp(-|V|), V ~ N(0, 2), by the trapezoid rule.
  double e = 0.0;
  const double dv = 1e-4;
  for (double v = -20.0; v <= 20.0; v += dv) e += std::exp(-std::abs(v)) * std::exp(-v * v / 4.0) / std::sqrt(4.0 * std::numbers::pi) * dv;
  const MCEstimate g = diversity2_mc(law_sampler(LawSpec::gaussian({1.0})), 1, 1.0, mc);
  CHECK(std::abs(g.value - 1.0 / e) <= 3.0 * g.std_error);

  mc.samples = 100;
  CHECK_THROWS_AS(diversity2_mc(law_sampler(LawSpec::gaussian({1.0})), 1, 1.0, mc), DomainError);
}

TEST_CASE("grid diversity uses exact cell kernels") {
  // Two unit cells one apart, equal mass: closed-form double integrals.
  GridSpec s;
  s.dim = 1;
  s.spacing = 1.0;
  s.origin = {0.0};
  s.shape = {3};
  const DensityGrid f(s, {0.5, 0.0, 0.5});
  const double t = 0.7;
  // Same-cell average 2(t - 1 + e^-t)/t^2; cells two apart e^-t (1 - e^-t)^2 / t^2.
  const double same = 2.0 * (t - 1.0 + std::exp(-t)) / (t * t);
  const double apart = std::exp(-t) * std::pow(1.0 - std::exp(-t), 2) / (t * t);
  CHECK(diversity_grid(f, 2.0, t) == doctest::Approx(1.0 / (0.5 * same + 0.5 * apart)).epsilon(1e-13));

  GridSpec s2;
  s2.dim = 2;
  s2.spacing = 0.5;
  s2.origin = {0.0, 0.0};
  s2.shape = {1, 1};
  const DensityGrid cell(s2, {1.0});
  for (double tt : {0.5, 4.0, 40.0}) {
    CHECK(diversity_grid(cell, 2.0, tt) == doctest::Approx(1.0 / brute_cell_kernel_2d(0.5, tt, 2000)).epsilon(2e-4));
  }
  // Orders other than 2 reduce to the same value on a single cell.
  CHECK(diversity_grid(cell, 1.0, 4.0) == doctest::Approx(diversity_grid(cell, 2.0, 4.0)).epsilon(1e-12));
  CHECK(diversity_grid(cell, kInfiniteOrder, 4.0) == doctest::Approx(diversity_grid(cell, 2.0, 4.0)).epsilon(1e-12));
}

TEST_CASE("scaling limit") {
  const std::vector<double> ladder{10.0, 100.0, 1000.0};
  const ScalingLimitResult u = scaling_limit_check(uniform_unit(400), ladder);
  CHECK(u.conclusive);
  CHECK(u.target == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(u.ratio.back() - 1.0) < 0.05);
  CHECK(u.report.pass);
  CHECK(u.monotone);

  // Standard Gaussian: e^(h_2) = 2 sqrt(pi).
  const DensityGrid g = make_grid(testsupport::centered_spec(1, 8.0, 800),
                                  [](std::span<const double> x) { return testsupport::gaussian_pdf(x); });
  const ScalingLimitResult gr = scaling_limit_check(g, ladder);
  CHECK(gr.target == doctest::Approx(2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-3));
  CHECK(std::abs(gr.ratio.back() / (2.0 * std::sqrt(std::numbers::pi)) - 1.0) < 0.05);
  CHECK(gr.report.pass);

  // C_2 = 2 pi on a gridded planar Gaussian.
  const DensityGrid g2 = make_grid(testsupport::centered_spec(2, 6.0, 48),
                                   [](std::span<const double> x) { return testsupport::gaussian_pdf(x); });
  const std::vector<double> ladder2{5.0, 50.0, 200.0};
  const ScalingLimitResult p = scaling_limit_check(g2, ladder2);
  CHECK(p.conclusive);
  CHECK(std::abs(p.ratio.back() / (4.0 * std::numbers::pi) - 1.0) < 0.05);
  CHECK(p.report.pass);

  const std::vector<double> short_ladder{0.5, 1.0};
  const ScalingLimitResult in = scaling_limit_check(g, short_ladder);
  CHECK_FALSE(in.conclusive);
  CHECK(in.report.pass);
  CHECK(in.report.note.find("inconclusive") != std::string::npos);
  const std::vector<double> bad{2.0, 1.0};
  CHECK_THROWS_AS(scaling_limit_check(g, bad), DomainError);
}

TEST_CASE("order-2 contraction check") {
  MCParams mc;
  mc.samples = 100000;
  mc.seed = 21;
  const std::vector<double> ts{0.5, 1.0, 2.0, 5.0};
  const std::vector<Point> pts{{0.0, 0.0}, {2.0, 0.5}};
  const std::vector<double> w{0.5, 0.5};
  const auto ident = check_h2_contraction(w, pts, LawSpec::gaussian({1.0, 1.0}), ContractionSpec::identity(2), ts, mc);
  REQUIRE(ident.size() == 4);
  for (const auto& r : ident) {
    CHECK(r.margin == 0.0);
    CHECK(r.pass);
  }
  const auto ball = check_h2_contraction(w, pts, LawSpec::uniform_ball(2, 1.0), ContractionSpec::scaling(2, 0.5), ts, mc);
  for (const auto& r : ball) CHECK(r.pass);

  SampleStream s(4, 0, 0);
  std::vector<Point> five;
  for (int i = 0; i < 5; ++i) five.push_back({s.uniform(-2.0, 2.0), s.uniform(-2.0, 2.0)});
  const std::vector<double> w5(5, 0.2);
  mc.samples = 1000000;
  const auto rows = check_h2_contraction(w5, five, LawSpec::gaussian({1.0, 1.0}), random_affine_contraction(s, 2), ts, mc);
  for (const auto& r : rows) CHECK(r.pass);
  CHECK(worst_row(rows).theorem_id == "T4.2-h2");
  CHECK_THROWS_AS(check_h2_contraction(w5, five, LawSpec::uniform_box({1.0, 2.0}), ContractionSpec::identity(2), ts, mc),
                  HypothesisError);
}

TEST_CASE("Renyi gap bound") {
  CHECK(renyi_gap_bound(2.0) == 0.0);
  CHECK(std::abs(renyi_gap_bound(1.0) - 0.306853) < 1e-6);
  CHECK(std::abs(std::exp(2.0 * renyi_gap_bound(1.0)) - 1.8473) < 1e-3);
  CHECK(renyi_gap_bound(0.5) == doctest::Approx(std::log(0.5) / -0.5 - std::log(2.0)));
  CHECK(renyi_gap_bound(3.0) == doctest::Approx(-(std::log(3.0) / 2.0 - std::log(2.0))));
  CHECK(renyi_gap_bound(1.0 + 1e-7) == doctest::Approx(renyi_gap_bound(1.0)).epsilon(1e-6));
  for (double a : {0.1, 0.5, 0.9, 1.5, 2.5, 10.0}) CHECK(renyi_gap_bound(a) >= 0.0);
  CHECK_THROWS_AS(renyi_gap_bound(0.0), DomainError);
  CHECK_THROWS_AS(renyi_gap_bound(-1.0), DomainError);
}

TEST_CASE("log-concave comparison across orders") {
  SampleStream s(12, 0, 0);
  for (int i = 0; i < 10; ++i) {
    const LawSpec lx = random_log_concave_law(s, 1, false);
    const LawSpec lw = random_radial_law(s, 1);
    const std::vector<LawSpec> both{lx, lw};
    const double h = common_spacing(both, 300);
    const DensityGrid x = grid_law(lx, h);
    const DensityGrid w = grid_law(lw, h);
    const ContractionSpec t = random_affine_contraction(s, 1, 0.0, 1.0, 1.0);
    for (double a : {0.5, 1.0, 3.0}) CHECK(check_lc_comparison(x, w, t, a).pass);
  }
}
