#pragma once

// Gaussian entropy algebra and entropy-power checks with a standard Gaussian
// perturbation Z.

#include <functional>
#include <vector>

#include "json.hpp"
#include "kpent/contract.hpp"
#include "kpent/grid.hpp"
#include "kpent/mc.hpp"
#include "kpent/report.hpp"

namespace kpent {

struct GaussianLaw {
  Vec mean;
  Matrix cov;

  static GaussianLaw standard(int dim);
  int dim() const { return static_cast<int>(mean.size()); }
  // Symmetric within 1e-12, eigenvalues >= -1e-12.
  void validate() const;
};

nlohmann::json to_json(const GaussianLaw& g);
GaussianLaw gaussian_from_json(const nlohmann::json& j);

// 1/2 log det(cov) + d/2 log(2 pi e). DegenerateError if det <= 1e-300.
double gaussian_entropy(const GaussianLaw& g);
// 2 pi e det(cov)^(1/d); zero for singular cov.
double gaussian_entropy_power(const Matrix& cov);

// Grid of N(mean, cov) on +-8 standard deviations per axis at `spacing`.
DensityGrid grid_gaussian(const GaussianLaw& g, double spacing);

// (h(matched Gaussian) - h(f)) / d.
double delta_gap(const DensityGrid& f);
// max density^(1/d) * det(cov)^(1/(2d)).
double isotropic_constant(const DensityGrid& f);

// Lip(T) <= 1 / (sqrt(2 pi e) L_X) forces e^Delta Lip(T) <= 1, because
// Delta <= log(sqrt(2 pi e) L_X) for every density.
double isotropic_lipschitz_threshold(double isotropic_const);
// sqrt(e / (2 pi L_X^2)): the threshold as usually quoted, kept for reports.
double quoted_lipschitz_threshold(double isotropic_const);

// Grid budget eps for a density on this grid: calibrated C_d * spacing.
double default_grid_budget(const DensityGrid& f);

// N(X + S^(1/2) Z_Sigma) >= det(I-S)^(1/d) N(X) + det(S)^(1/d) N(X + Z_Sigma).
CheckReport check_vector_epi(const GaussianLaw& x, const Matrix& s, const Matrix& sigma);
CheckReport check_vector_epi(const DensityGrid& x, const Matrix& s, const Matrix& sigma, double eps_grid = -1.0);

// N(X+Z) >= N(T(X)+Z) + (1 - Lip^2(T)) N(X) for affine T.
CheckReport check_linear_epi(const GaussianLaw& x, const ContractionSpec& t);
CheckReport check_linear_epi(const DensityGrid& x, const ContractionSpec& t, double eps_grid = -1.0);

// G ~ N(mean, diag(lambda)); the right side uses the max-entropy bound
// 2 pi e det(I + Cov(T(G)))^(1/d) with Cov(T(G)) from Monte Carlo.
CheckReport check_gaussian_strong(const Vec& mean, const Vec& lambda, const ContractionSpec& t, const MCParams& mc);

// N(X+Z) >= N(T(X)+Z) + (1 - (e^Delta Lip(T))^2) N(X) for isotropic
// log-concave X.
CheckReport check_isotropic_lc(const DensityGrid& x, const ContractionSpec& t, double eps_grid = -1.0);
// h(T(X)+Z) <= h(X+Z) for Lip(T) below isotropic_lipschitz_threshold.
CheckReport check_isotropic_threshold(const DensityGrid& x, const ContractionSpec& t, double eps_grid = -1.0);
// log(sqrt(2 pi / e) L_X) <= Delta(X).
CheckReport check_delta_isotropic_bound(const DensityGrid& x, double eps_grid = -1.0);

// Throws PreconditionError unless cov is within 1e-2 of a multiple of I.
void require_isotropic(const DensityGrid& f);

struct StressSummary {
  int trials = 0;
  int flagged = 0;
  std::vector<CheckReport> reports;
  std::vector<ContractionSpec> maps;  // maps[i] produced reports[i]
};

// The linear-contraction inequality with an arbitrary contraction. A trial is
// flagged when margin < -5 * tolerance; flags are findings, not errors.
StressSummary stress_open_question(const DensityGrid& x, const std::function<ContractionSpec(int trial)>& generator,
                                   int trials, double eps_grid = -1.0);

// Strengthened-inequality report for one (X, T) pair on grids.
CheckReport open_question_report(const DensityGrid& x, const ContractionSpec& t, double eps_grid = -1.0);

}  // namespace kpent
