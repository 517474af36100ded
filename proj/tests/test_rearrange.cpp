#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "kpent/convolve.hpp"
#include "kpent/errors.hpp"
#include "kpent/rearrange.hpp"
#include "test_support.hpp"

using namespace kpent;

namespace {

std::vector<double> sorted_masses(const DensityGrid& f) {
  std::vector<double> m;
  for (double x : f.masses())
    if (x > 0.0) m.push_back(x);
  std::sort(m.begin(), m.end());
  return m;
}

double value_at(const DensityGrid& f, Point x) { return f.mass(static_cast<std::size_t>(f.spec().locate(x))); }

}  // namespace

TEST_CASE("three-cell example follows the tie rule") {
  const DensityGrid f(GridSpec{1, {-1.5}, 1.0, {3}}, {0.1, 0.7, 0.2});
  const auto r = rearrange(f);
  REQUIRE(r.spec().shape[0] == 3);
  CHECK(r.spec().origin[0] == -1.5);
  CHECK(value_at(r, {0.0}) == 0.7);
  CHECK(value_at(r, {1.0}) == 0.2);
  CHECK(value_at(r, {-1.0}) == 0.1);
}

TEST_CASE("centered radially decreasing grid is a fixed point") {
  const auto s = testsupport::centered_spec(2, 3.0, 15);
  const auto f = make_grid(s, [](std::span<const double> x) {
    const double q = x[0] * x[0] + x[1] * x[1];
    return q <= 2.9 * 2.9 ? std::exp(-q) : 0.0;
  });
  const auto r = rearrange(f);
  CHECK(sorted_masses(r) == sorted_masses(f));
  for (std::size_t i = 0; i < f.masses().size(); ++i) {
    const auto c = f.spec().cell_center(i);
    CHECK(value_at(r, c) == doctest::Approx(f.mass(i)).epsilon(1e-12));
  }
}

TEST_CASE("translated square becomes a centered quasi-disk") {
  const GridSpec s{2, {3.0, -7.0}, 0.1, {20, 20}};
  const auto f = make_grid(s, [](std::span<const double>) { return 1.0; });
  const auto r = rearrange(f);
  CHECK(r.support_size() == f.support_size());
  CHECK(renyi_entropy(r, 0.0) == renyi_entropy(f, 0.0));
  // Quasi-disk: every positive cell lies closer to the origin than every empty one.
  double max_in = 0.0;
  double min_out = 1e9;
  for (std::size_t i = 0; i < r.masses().size(); ++i) {
    const auto c = r.spec().cell_center(i);
    const double dist = std::hypot(c[0], c[1]);
    if (r.mass(i) > 0.0) max_in = std::max(max_in, dist);
    else min_out = std::min(min_out, dist);
  }
  CHECK(max_in <= min_out + 1e-12);
}

TEST_CASE("ball cumulative examples") {
  std::mt19937_64 rng(301);
  const auto f = testsupport::random_grid(rng, 2, 6);
  CHECK(ball_cumulative(f, 1e3) == 1.0);
  const DensityGrid p(GridSpec{2, {5.0, 5.0}, 0.5, {1, 1}}, {1.0});
  CHECK(ball_cumulative(p, 0.5) == 1.0);
  CHECK(ball_cumulative(p, 7.0) == 1.0);
  const GridSpec s{1, {0.0}, 0.01, {100}};
  const auto u = make_grid(s, [](std::span<const double>) { return 1.0; });
  CHECK(std::abs(ball_cumulative(u, 0.25) - 0.5) <= s.spacing);
  CHECK_THROWS_AS(ball_cumulative(u, 0.0), DomainError);
}

TEST_CASE("majorization examples") {
  std::mt19937_64 rng(302);
  const auto f = testsupport::random_grid(rng, 2, 8);
  const auto self = majorizes(f, f, 0.0);
  CHECK(self.holds);
  CHECK(self.worst_deficit <= 0.0);

  const DensityGrid point(GridSpec{2, {0.0, 0.0}, f.spacing(), {1, 1}}, {1.0});
  CHECK(majorizes(point, f, 0.0).holds);

  const double h = 0.01;
  const auto u1 = make_grid(GridSpec{1, {0.0}, h, {100}}, [](std::span<const double>) { return 1.0; });
  const auto u2 = make_grid(GridSpec{1, {0.0}, h, {200}}, [](std::span<const double>) { return 1.0; });
  const auto ok = majorizes(u1, u2, 0.0);
  CHECK(ok.holds);
  CHECK(ok.worst_deficit <= 0.0);
  const auto bad = majorizes(u2, u1, 0.0);
  CHECK_FALSE(bad.holds);
  CHECK(std::abs(bad.worst_deficit - 0.5) <= h);

  const DensityGrid other(GridSpec{1, {0.0}, 0.02, {1}}, {1.0});
  CHECK_THROWS_AS(majorizes(u1, other, 0.0), IncompatibleGridError);
}

TEST_CASE("property: rearrangement preserves every entropy bit-exactly") {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = testsupport::random_grid(rng, 1 + trial % 3, 10);
    const auto r = rearrange(f);
    for (double a : {0.0, 0.5, 1.0, 2.0, kInfiniteOrder}) CHECK(renyi_entropy(r, a) == renyi_entropy(f, a));
  }
}

TEST_CASE("property: averaging is majorized and raises entropy") {
  std::mt19937_64 rng(304);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 1 + trial % 2;
    const auto g = testsupport::random_grid(rng, d, d == 1 ? 30 : 7);
    const auto k = testsupport::random_grid(rng, d, 4);
    const auto f = convolve_direct(g, k);
    const auto v = majorizes(g, f, 1e-14);
    CHECK(v.holds);
    for (double a : {0.5, 1.0, 2.0, 5.0, kInfiniteOrder}) CHECK(renyi_entropy(f, a) >= renyi_entropy(g, a) - 1e-12);
    double sq_f = 0.0;
    double sq_g = 0.0;
    for (double x : f.masses()) sq_f += x * x / std::pow(f.spacing(), d);
    for (double x : g.masses()) sq_g += x * x / std::pow(g.spacing(), d);
    CHECK(sq_f <= sq_g + 1e-12);
  }
}

TEST_CASE("property: ball cumulative is nondecreasing in r") {
  std::mt19937_64 rng(305);
  for (int trial = 0; trial < 30; ++trial) {
    const auto f = testsupport::random_grid(rng, 1 + trial % 3, 6);
    double prev = 0.0;
    for (double r = 0.05; r < 3.0; r += 0.05) {
      const double c = ball_cumulative(f, r);
      CHECK(c >= prev);
      CHECK(c <= 1.0);
      prev = c;
    }
    CHECK(prev == 1.0);
  }
}
