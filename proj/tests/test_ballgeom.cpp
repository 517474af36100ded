#include <cmath>
#include <random>

#include "doctest.h"
#include "kpent/ballgeom.hpp"
#include "kpent/errors.hpp"

using namespace kpent;

namespace {

const double kLens1 = 2.0 * M_PI / 3.0 - std::sqrt(3.0) / 2.0;

MCParams params(std::uint64_t n = 1'000'000, std::uint64_t seed = 9) {
  MCParams p;
  p.samples = n;
  p.seed = seed;
  p.max_samples = 10'000'000;
  return p;
}

PointConfiguration random_configuration(std::mt19937_64& rng, int k, int d) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  PointConfiguration c;
  c.radius = 1.0;
  for (int i = 0; i < k; ++i) {
    Point p(d);
    for (auto& v : p) v = u(rng);
    c.centers.push_back(p);
  }
  return c;
}

Matrix random_contraction(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = g(rng);
  std::uniform_real_distribution<double> s(0.3, 1.0);
  return (s(rng) / svd(a).singular.front()) * a;
}

}  // namespace

TEST_CASE("contractive pairs") {
  const PointConfiguration x{{{0.0, 0.0}, {2.0, 0.0}, {0.0, 1.0}}, 1.0};
  CHECK(is_contractive_pair(x, x));
  PointConfiguration half = x;
  for (auto& c : half.centers)
    for (auto& v : c) v *= 0.5;
  CHECK(is_contractive_pair(x, half));
  const PointConfiguration a{{{0.0, 0.0}, {2.0, 0.0}}, 1.0};
  const PointConfiguration b{{{0.0, 0.0}, {3.0, 0.0}}, 1.0};
  CHECK_FALSE(is_contractive_pair(a, b));
  CHECK_THROWS_AS(is_contractive_pair(a, x), DomainError);
}

TEST_CASE("lens and cap formulas") {
  CHECK(lens_area(0.0, 1.5) == doctest::Approx(M_PI * 2.25));
  CHECK(lens_area(2.0, 1.0) == 0.0);
  CHECK(lens_area(5.0, 1.0) == 0.0);
  CHECK(lens_area(1.0, 1.0) == doctest::Approx(kLens1).epsilon(1e-14));
  for (double dist : {0.0, 0.3, 1.0, 1.7, 2.5}) {
    CHECK(two_ball_intersection_volume(dist, 1.0, 2) == doctest::Approx(lens_area(dist, 1.0)).epsilon(1e-12));
    const double sphere = dist < 2.0 ? M_PI * (4.0 + dist) * (2.0 - dist) * (2.0 - dist) / 12.0 : 0.0;
    CHECK(two_ball_intersection_volume(dist, 1.0, 3) == doctest::Approx(sphere).epsilon(1e-12));
  }
  const auto mc = intersection_volume(PointConfiguration{{{0.0, 0.0}, {1.0, 0.0}}, 1.0}, params(10'000'000, 3));
  CHECK(std::abs(mc.value - kLens1) <= 3.0 * mc.std_error);
}

TEST_CASE("union volume examples") {
  const auto one = union_volume(PointConfiguration{{{0.0, 0.0}}, 1.0}, params());
  CHECK(std::abs(one.value - M_PI) <= 3.0 * one.std_error);
  const auto far = union_volume(PointConfiguration{{{0.0, 0.0}, {4.0, 0.0}}, 1.0}, params());
  CHECK(std::abs(far.value - 2.0 * M_PI) <= 3.0 * far.std_error);
  const auto near = union_volume(PointConfiguration{{{0.0, 0.0}, {1.0, 0.0}}, 1.0}, params());
  CHECK(std::abs(near.value - (2.0 * M_PI - kLens1)) <= 3.0 * near.std_error);
  CHECK(std::abs(near.value - 5.05482) < 0.02);
  CHECK_THROWS_AS(union_volume(PointConfiguration{{{0.0, 0.0}}, 1.0}, params(100)), DomainError);
}

TEST_CASE("intersection volume examples") {
  const auto one = intersection_volume(PointConfiguration{{{0.0, 0.0}}, 1.0}, params());
  CHECK(std::abs(one.value - M_PI) <= 3.0 * one.std_error);
  const auto far = intersection_volume(PointConfiguration{{{0.0, 0.0}, {4.0, 0.0}}, 1.0}, params());
  CHECK(far.value == 0.0);
  const auto near = intersection_volume(PointConfiguration{{{0.0, 0.0}, {1.0, 0.0}}, 1.0}, params());
  CHECK(std::abs(near.value - kLens1) <= 3.0 * near.std_error);
}

TEST_CASE("KP checks with the identity have zero margin") {
  std::mt19937_64 rng(601);
  const auto x = random_configuration(rng, 5, 2);
  const auto u = kp_union_check(x, ContractionSpec::identity(2), params(100'000));
  CHECK(u.pass);
  CHECK(u.margin == 0.0);
  CHECK(u.samples == 100'000);
  const auto i = kp_intersection_check(x, ContractionSpec::identity(2), params(100'000));
  CHECK(i.pass);
  CHECK(i.margin == 0.0);
}

TEST_CASE("KP union holds in the plane and for 4 balls in space") {
  std::mt19937_64 rng(602);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_configuration(rng, 5, 2);
    const auto r = kp_union_check(x, ContractionSpec::affine(random_contraction(rng, 2)), params(200'000, trial));
    CHECK(r.pass);
  }
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = random_configuration(rng, 4, 3);
    const auto r = kp_union_check(x, ContractionSpec::affine(random_contraction(rng, 3)), params(200'000, trial));
    CHECK(r.pass);
  }
}

TEST_CASE("KP intersection holds for d + 3 balls in the plane") {
  std::mt19937_64 rng(603);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = random_configuration(rng, 5, 2);
    for (auto& c : x.centers)
      for (auto& v : c) v *= 0.4;
    const auto r = kp_intersection_check(x, ContractionSpec::affine(random_contraction(rng, 2)), params(200'000, trial));
    CHECK(r.pass);
  }
}

TEST_CASE("two balls: closed-form intersection monotonicity") {
  std::mt19937_64 rng(604);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 5;
    const auto x = random_configuration(rng, 2, d);
    const auto r = kp_two_ball_intersection_check(x, ContractionSpec::affine(random_contraction(rng, d)));
    CHECK(r.pass);
    CHECK(r.margin >= -1e-12);
  }
}

TEST_CASE("noncontractive images are rejected") {
  const PointConfiguration x{{{0.0, 0.0}, {1.0, 0.0}}, 1.0};
  const auto grow = ContractionSpec::sampled(2, [](std::span<const double> p) { return Point{2.0 * p[0], p[1]}; }, "grow");
  CHECK_THROWS_AS(kp_union_check(x, grow, params(10'000)), PreconditionError);
}

TEST_CASE("property: single-ball bounds and inclusion-exclusion") {
  std::mt19937_64 rng(605);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_configuration(rng, 2 + trial % 4, 2);
    const auto u = union_volume(x, params(200'000, trial));
    const auto i = intersection_volume(x, params(200'000, trial));
    CHECK(u.value >= M_PI - 3.0 * u.std_error);
    CHECK(i.value <= M_PI + 3.0 * i.std_error);
  }
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_configuration(rng, 2, 2);
    const auto u = union_volume(x, params(500'000, trial));
    const auto i = intersection_volume(x, params(500'000, trial + 100));
    CHECK(std::abs(u.value + i.value - 2.0 * M_PI) <= 3.0 * (u.std_error + i.std_error));
  }
}

TEST_CASE("property: seed determinism") {
  std::mt19937_64 rng(606);
  const auto x = random_configuration(rng, 4, 3);
  const auto a = union_volume(x, params(100'000, 77));
  const auto b = union_volume(x, params(100'000, 77));
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  set_mc_workers(3);
  const auto c = union_volume(x, params(100'000, 77));
  set_mc_workers(0);
  CHECK(a.value == c.value);
  CHECK(a.std_error == c.std_error);
}

TEST_CASE("property: union volume grows with the radius on shared samples") {
  std::mt19937_64 rng(607);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = random_configuration(rng, 4, 2);
    Point lo{-4.0, -4.0}, hi{4.0, 4.0};
    const auto e = paired_box_integral(lo, hi, 9, params(100'000, trial), [&](const double* p, double* out) {
      bool small = false, big = false;
      for (const auto& c : x.centers) {
        const double d2 = (p[0] - c[0]) * (p[0] - c[0]) + (p[1] - c[1]) * (p[1] - c[1]);
        small = small || d2 <= 0.8 * 0.8;
        big = big || d2 <= 1.0;
      }
      out[0] = small;
      out[1] = big;
    });
    CHECK(e.first.value <= e.second.value);
  }
}

TEST_CASE("integer-order Renyi check") {
  std::mt19937_64 rng(608);
  auto x = random_configuration(rng, 5, 2);
  const std::vector<double> w(5, 0.2);
  const auto same = integer_renyi_check(x, w, ContractionSpec::identity(2), 2, params(100'000));
  CHECK(same.pass);
  CHECK(same.margin == 0.0);
  for (int n = 2; n <= 5; ++n) {
    const auto r = integer_renyi_check(x, w, ContractionSpec::scaling(2, 0.5), n, params(200'000, n));
    CHECK(r.pass);
  }
}

TEST_CASE("configuration JSON") {
  const PointConfiguration x{{{0.0, 1.0}, {2.0, 3.0}}, 0.5};
  const auto y = configuration_from_json(to_json(x));
  CHECK(y.centers == x.centers);
  CHECK(y.radius == x.radius);
  CHECK_THROWS_AS(configuration_from_json(nlohmann::json{{"radius", -1.0}, {"centers", {{0.0}}}}), ConfigError);
}
