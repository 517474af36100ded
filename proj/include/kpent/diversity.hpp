#pragma once

// Diversities with the kernel exp(-t |x - y|), their scaling limit, and the
// order-2 contraction check.

#include <functional>
#include <span>
#include <vector>

#include "kpent/contract.hpp"
#include "kpent/families.hpp"
#include "kpent/grid.hpp"
#include "kpent/mc.hpp"
#include "kpent/report.hpp"

namespace kpent {

// C_d = d! * Vol(unit ball), the constant with C_d D_2^t / t^d -> e^(h_2).
double diversity_constant(int d);

// (sum_ij w_i w_j exp(-t |p_i - p_j|))^(-1).
double diversity2_discrete(std::span<const double> weights, std::span<const Point> points, double t);

// Writes one draw of a dim-dimensional random vector into `out`.
using PointSampler = std::function<void(SampleStream&, double* out)>;

PointSampler discrete_sampler(std::vector<double> weights, std::vector<Point> points);
PointSampler law_sampler(LawSpec law);

// Reciprocal of the pair-averaged kernel; delta-method standard error.
MCEstimate diversity2_mc(const PointSampler& sampler, int dim, double t, const MCParams& mc);

// Diversity of a grid density using exact cell-pair kernel averages (closed
// form in 1-D, graded Gauss-Legendre in 2-D). alpha = 2 is the primary order;
// other orders are reporting extras.
double diversity_grid(const DensityGrid& f, double alpha, double t);

struct ScalingLimitResult {
  CheckReport report;
  std::vector<double> t;
  std::vector<double> ratio;   // C_d D_2^t / t^d
  double target = 0.0;         // e^(h_2(f))
  bool monotone = false;       // |ratio - target| nonincreasing along the ladder
  bool conclusive = false;     // t_max * (smallest standard deviation) >= 50
};

// Passes when the last rung is within rel_tol of the target; an inconclusive
// ladder passes with verdict "inconclusive" in the note.
ScalingLimitResult scaling_limit_check(const DensityGrid& f, std::span<const double> t_ladder, double rel_tol = 0.05);

// D_2^t(T(X) + W) <= D_2^t(X + W) for discrete X, paired across both sides.
// One row per t; W must be radially symmetric and log-concave.
std::vector<CheckReport> check_h2_contraction(std::span<const double> weights, std::span<const Point> points,
                                              const LawSpec& w, const ContractionSpec& t, std::span<const double> t_list,
                                              const MCParams& mc);

// Row with the least slack (margin + tolerance) relative to the side sizes.
const CheckReport& worst_row(const std::vector<CheckReport>& rows);

// sgn(2 - alpha) (log alpha / (alpha - 1) - log 2); 1 - log 2 at alpha = 1.
double renyi_gap_bound(double alpha);

// h_alpha(T(X)+W) <= h_alpha(X+W) + d * renyi_gap_bound(alpha) on grids.
CheckReport check_lc_comparison(const DensityGrid& x, const DensityGrid& w, const ContractionSpec& t, double alpha,
                                double eps_grid = -1.0);

}  // namespace kpent
