#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kpent/calibration.hpp"
#include "kpent/errors.hpp"
#include "kpent/families.hpp"
#include "kpent/gauss_epi.hpp"
#include "test_support.hpp"

using namespace kpent;

namespace {

const double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;

DensityGrid uniform_unit(std::int64_t cells) {
  GridSpec s;
  s.dim = 1;
  s.spacing = 1.0 / static_cast<double>(cells);
  s.origin = {0.0};
  s.shape = {cells};
  return make_grid(s, [](std::span<const double>) { return 1.0; });
}

DensityGrid standard_gaussian_1d(std::int64_t cells) {
  return make_grid(testsupport::centered_spec(1, 8.0, cells), [](std::span<const double> x) { return testsupport::gaussian_pdf(x); });
}

Matrix rotation(double a) { return Matrix{{std::cos(a), -std::sin(a)}, {std::sin(a), std::cos(a)}}; }

}  // namespace

TEST_CASE("Gaussian entropy closed forms") {
  CHECK(gaussian_entropy(GaussianLaw::standard(1)) == doctest::Approx(0.5 * std::log(kTwoPiE)).epsilon(1e-14));
  CHECK(gaussian_entropy(GaussianLaw::standard(1)) == doctest::Approx(1.418939).epsilon(1e-6));
  const GaussianLaw g{{0.0, 0.0}, Matrix{{1.0, 0.0}, {0.0, 4.0}}};
  // 1/2 log(1 * 4) + log(2 pi e) evaluated term by term.
  const double oracle = 0.5 * std::log(4.0) + std::log(2.0) + std::log(std::numbers::pi) + 1.0;
  CHECK(gaussian_entropy(g) == doctest::Approx(oracle).epsilon(1e-13));
  CHECK(gaussian_entropy(g) == doctest::Approx(3.5310242).epsilon(1e-7));
  for (int d = 1; d <= 4; ++d) CHECK(gaussian_entropy(GaussianLaw::standard(d)) == doctest::Approx(0.5 * d * std::log(kTwoPiE)));
  CHECK_THROWS_AS(gaussian_entropy(GaussianLaw{{0.0, 0.0}, Matrix{{1.0, 1.0}, {1.0, 1.0}}}), DegenerateError);
  CHECK_THROWS_AS(GaussianLaw({{0.0}, Matrix{{-1.0}}}).validate(), DomainError);
}

TEST_CASE("Gaussian law JSON round trip") {
  const GaussianLaw g{{1.0, -2.0}, Matrix{{2.0, 0.5}, {0.5, 1.0}}};
  const GaussianLaw back = gaussian_from_json(to_json(g));
  CHECK(back.mean == g.mean);
  CHECK(back.cov == g.cov);
  CHECK_THROWS_AS(gaussian_from_json(nlohmann::json{{"mean", {0.0}}}), ConfigError);
  CHECK_THROWS_AS(gaussian_from_json(nlohmann::json{{"mean", {0.0, 0.0}}, {"cov", {{1.0, 2.0}, {0.0, 1.0}}}}), ConfigError);
}

TEST_CASE("delta gap anchors") {
  CHECK(std::abs(delta_gap(standard_gaussian_1d(4096))) < 2e-3);
  CHECK(std::abs(delta_gap(uniform_unit(400)) - 0.5 * std::log(kTwoPiE / 12.0)) < 2e-3);
  CHECK(std::abs(delta_gap(uniform_unit(400)) - 0.17649) < 2e-3);
  const DensityGrid lap = grid_law(LawSpec::laplace({1.0}), 0.02);
  const double lap_oracle = 0.5 * std::log(kTwoPiE * 2.0) - (1.0 + std::log(2.0));
  CHECK(std::abs(delta_gap(lap) - lap_oracle) < 5e-3);
}

TEST_CASE("isotropic constant anchors") {
  CHECK(std::abs(isotropic_constant(uniform_unit(400)) - 1.0 / std::sqrt(12.0)) < 1e-3);
  CHECK(isotropic_constant(standard_gaussian_1d(4096)) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(0.01));
  const DensityGrid wide = make_grid(testsupport::centered_spec(1, 16.0, 4096),
                                     [](std::span<const double> x) { return testsupport::gaussian_pdf(x, 2.0); });
  CHECK(isotropic_constant(wide) == doctest::Approx(isotropic_constant(standard_gaussian_1d(4096))).epsilon(1e-3));
}

TEST_CASE("Lipschitz thresholds for the isotropic corollary") {
  const double l = 1.0 / std::sqrt(12.0);
  CHECK(isotropic_lipschitz_threshold(l) == doctest::Approx(1.0 / (std::sqrt(kTwoPiE) * l)));
  CHECK(quoted_lipschitz_threshold(l) == doctest::Approx(std::sqrt(std::numbers::e / (2.0 * std::numbers::pi)) / l));
  // The corrected threshold implies e^Delta Lip <= 1 on the uniform law.
  const DensityGrid u = uniform_unit(400);
  CHECK(std::exp(delta_gap(u)) * isotropic_lipschitz_threshold(isotropic_constant(u)) <= 1.0 + 1e-9);
}

TEST_CASE("vector EPI closed form") {
  const GaussianLaw x{{0.0, 0.0}, Matrix{{2.0, 0.0}, {0.0, 3.0}}};
  const Matrix id = Matrix::identity(2);
  const CheckReport all = check_vector_epi(x, id, id);
  CHECK(std::abs(all.margin) < 1e-10);
  CHECK(all.pass);
  const CheckReport none = check_vector_epi(x, Matrix(2, 2), id);
  CHECK(std::abs(none.margin) < 1e-10);
  CHECK(none.pass);
  const CheckReport quarter = check_vector_epi(x, 0.25 * id, id);
  const double lhs = kTwoPiE * std::sqrt(2.25 * 3.25);
  const double rhs = 0.75 * kTwoPiE * std::sqrt(6.0) + 0.25 * kTwoPiE * std::sqrt(12.0);
  CHECK(quarter.lhs == doctest::Approx(lhs).epsilon(1e-13));
  CHECK(quarter.rhs == doctest::Approx(rhs).epsilon(1e-13));
  CHECK(quarter.pass);
  CHECK(quarter.margin > 0.0);
  const Matrix s{{0.5, 0.2}, {0.2, 0.3}};
  CHECK_THROWS_AS(check_vector_epi(x, s, Matrix{{1.0, 0.0}, {0.0, 2.0}}), PreconditionError);
  CHECK_THROWS_AS(check_vector_epi(x, 2.0 * id, id), PreconditionError);
}

TEST_CASE("vector EPI grid path") {
  const DensityGrid u = grid_law(LawSpec::uniform_box({0.5}), 0.02);
  const Matrix id = Matrix::identity(1);
  CHECK(check_vector_epi(u, 0.5 * id, id).pass);
  CHECK(check_vector_epi(u, id, id).pass);
  CHECK(check_vector_epi(u, Matrix(1, 1), id).pass);
}

TEST_CASE("linear EPI closed form") {
  const GaussianLaw x{{0.0}, Matrix{{4.0}}};
  const CheckReport eq = check_linear_epi(x, ContractionSpec::scaling(1, 0.5));
  CHECK(eq.lhs == doctest::Approx(kTwoPiE * 5.0).epsilon(1e-14));
  CHECK(eq.rhs == doctest::Approx(kTwoPiE * 2.0 + 0.75 * kTwoPiE * 4.0).epsilon(1e-14));
  CHECK(std::abs(eq.margin) <= 1e-9);
  CHECK(eq.pass);

  const GaussianLaw y{{0.0, 1.0}, Matrix{{2.0, 0.3}, {0.3, 1.0}}};
  const CheckReport ident = check_linear_epi(y, ContractionSpec::identity(2));
  CHECK(std::abs(ident.margin) < 1e-9);
  CHECK(ident.pass);
  // Zero map: N(X+Z) >= N(Z) + N(X).
  const CheckReport zero = check_linear_epi(y, ContractionSpec::affine(Matrix(2, 2)));
  CHECK(zero.rhs == doctest::Approx(kTwoPiE + kTwoPiE * std::sqrt(determinant(y.cov))));
  CHECK(zero.pass);
  CHECK_THROWS_AS(check_linear_epi(y, ContractionSpec::scaling(2, 1.5)), DomainError);
  CHECK_THROWS_AS(check_linear_epi(y, ContractionSpec::ball_projection(2, 1.0)), PreconditionError);
}

TEST_CASE("linear EPI passes on random Gaussian instances") {
  SampleStream s(11, 0, 0);
  for (int i = 0; i < 200; ++i) {
    const int d = 1 + static_cast<int>(s.next_u64() % 3);
    const Matrix q = random_orthogonal(s, d);
    Vec ev(d);
    for (auto& v : ev) v = s.uniform(0.05, 5.0);
    Matrix cov = q * Matrix::diagonal(ev) * q.transposed();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < a; ++b) cov(a, b) = cov(b, a);
    const ContractionSpec t = random_affine_contraction(s, d, 0.0, 1.0, 1.0);
    const CheckReport r = check_linear_epi(GaussianLaw{Vec(d, 0.0), cov}, t);
    CHECK(r.pass);
    CHECK(r.margin >= -1e-9);
  }
}

TEST_CASE("linear EPI margins converge for T_eps = (1 - eps) T + eps I") {
  const GaussianLaw x{{0.0, 0.0}, Matrix{{1.5, 0.2}, {0.2, 0.7}}};
  const Matrix p = rotation(0.4) * Matrix{{1.0, 0.0}, {0.0, 0.0}} * rotation(0.4).transposed();
  const double m0 = check_linear_epi(x, ContractionSpec::affine(p)).margin;
  double prev = INFINITY;
  for (double eps : {0.1, 0.01, 0.001}) {
    const Matrix te = (1.0 - eps) * p + eps * Matrix::identity(2);
    const double gap = std::abs(check_linear_epi(x, ContractionSpec::affine(te)).margin - m0);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("linear EPI grid path") {
  const DensityGrid u = grid_law(LawSpec::uniform_box({0.5}), 0.02);
  CHECK(check_linear_epi(u, ContractionSpec::scaling(1, 0.5)).pass);
  CHECK(check_linear_epi(u, ContractionSpec::identity(1)).pass);
  CHECK(check_linear_epi(u, ContractionSpec::affine(Matrix(1, 1))).pass);
  const DensityGrid g2 = grid_law(LawSpec::gaussian({1.0, 0.7}), 0.16);
  CHECK(check_linear_epi(g2, ContractionSpec::affine(0.8 * rotation(0.7))).pass);
}

TEST_CASE("Gaussian input with a strong contraction") {
  MCParams mc;
  mc.samples = 200000;
  mc.seed = 5;
  const CheckReport ident = check_gaussian_strong({0.0, 0.0}, {1.0, 1.0}, ContractionSpec::identity(2), mc);
  CHECK(ident.pass);
  CHECK(std::abs(ident.margin) <= ident.tolerance);
  CHECK(ident.samples == mc.samples);

  // Isotropic Lambda with a non-strong contraction: det(I+Sigma)^(1/d) <= 1 + Lip^2 alpha.
  const ContractionSpec rot = ContractionSpec::affine(0.9 * rotation(0.6));
  const CheckReport iso = check_gaussian_strong({0.0, 0.0}, {1.0, 1.0}, rot, mc);
  CHECK(iso.pass);
  CHECK(iso.rhs - (1.0 - 0.81) * kTwoPiE <= kTwoPiE * (1.0 + 0.81) + 3.0 * iso.std_error);

  const ContractionSpec soft = ContractionSpec::coordinatewise({ScalarMap::soft_clamp(1.0), ScalarMap::soft_clamp(1.5)});
  mc.samples = 1000000;
  const CheckReport strong = check_gaussian_strong({0.3, -0.2}, {1.0, 2.0}, soft, mc);
  CHECK(strong.pass);
  CHECK(strong.margin > 0.0);
  CHECK_THROWS_AS(check_gaussian_strong({0.0, 0.0}, {1.0, 2.0}, rot, mc), PreconditionError);
}

TEST_CASE("strong Gaussian check is reproducible and worker independent") {
  MCParams mc;
  mc.samples = 100000;
  mc.seed = 17;
  const ContractionSpec soft = ContractionSpec::coordinatewise({ScalarMap::soft_clamp(1.0), ScalarMap::linear(0.5)});
  set_mc_workers(1);
  const CheckReport a = check_gaussian_strong({0.0, 0.0}, {1.0, 2.0}, soft, mc);
  set_mc_workers(4);
  const CheckReport b = check_gaussian_strong({0.0, 0.0}, {1.0, 2.0}, soft, mc);
  set_mc_workers(0);
  CHECK(a.rhs == b.rhs);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("isotropic log-concave check") {
  const DensityGrid g = standard_gaussian_1d(400);
  const CheckReport ident = check_isotropic_lc(g, ContractionSpec::identity(1));
  CHECK(ident.pass);
  const DensityGrid square = grid_law(LawSpec::uniform_box({0.5, 0.5}), 0.125);
  CHECK(check_isotropic_lc(square, ContractionSpec::scaling(2, 0.5)).pass);
  const DensityGrid oblong = grid_law(LawSpec::uniform_box({0.5, 1.0}), 0.125);
  CHECK_THROWS_AS(check_isotropic_lc(oblong, ContractionSpec::identity(2)), PreconditionError);
  const DensityGrid bimodal = grid_law(LawSpec::gaussian_mixture(1, 1.0, 3.0), 0.05);
  CHECK_THROWS_AS(check_isotropic_lc(bimodal, ContractionSpec::identity(1)), HypothesisError);
}

TEST_CASE("isotropic threshold corollary") {
  const DensityGrid u = uniform_unit(400);
  const double thr = isotropic_lipschitz_threshold(isotropic_constant(u));
  CHECK(check_isotropic_threshold(u, ContractionSpec::scaling(1, thr)).pass);
  CHECK(check_isotropic_threshold(u, ContractionSpec::coordinatewise({ScalarMap::compose(
                                        {ScalarMap::linear(0.8), ScalarMap::soft_clamp(0.2)})}))
            .pass);
  CHECK_THROWS_AS(check_isotropic_threshold(u, ContractionSpec::scaling(1, 0.95)), HypothesisError);
}

TEST_CASE("Delta bounds log(sqrt(2 pi / e) L_X) on random 1-D log-concave grids") {
  SampleStream s(3, 0, 0);
  for (int i = 0; i < 50; ++i) {
    const LawSpec law = random_log_concave_law(s, 1, false);
    const DensityGrid f = grid_law(law, 2.0 * law.extent() / 400.0);
    const CheckReport r = check_delta_isotropic_bound(f);
    CHECK_MESSAGE(r.pass, law.family);
  }
}

TEST_CASE("Gaussian maximum entropy on random grids") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 100; ++i) {
    const DensityGrid f = testsupport::random_grid(rng, 1 + static_cast<int>(i % 2), 12, true);
    if (determinant(covariance(f).cov) <= 1e-12) continue;
    CHECK(delta_gap(f) >= -1e-12);
  }
}

TEST_CASE("open question stress runs") {
  const DensityGrid g = grid_law(LawSpec::laplace({1.0}), 0.1);
  const StressSummary ident = stress_open_question(g, [](int) { return ContractionSpec::identity(1); }, 2);
  CHECK(ident.flagged == 0);
  for (const auto& r : ident.reports) CHECK(std::abs(r.margin) <= r.tolerance);

  SampleStream s(8, 0, 0);
  const StressSummary linear = stress_open_question(g, [&](int) { return random_affine_contraction(s, 1); }, 10);
  CHECK(linear.flagged == 0);

  const StressSummary coord = stress_open_question(g, [&](int) { return random_coordinatewise_contraction(s, 1); }, 10);
  CHECK(coord.trials == 10);
  CHECK(coord.reports.size() == 10);
  CHECK_THROWS_AS(stress_open_question(g, [](int) { return ContractionSpec::identity(1); }, 0), DomainError);
}
