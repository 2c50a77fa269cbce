#pragma once

// Posterior predictive densities on grids, grid error metrics, and the
// LPML / WAIC model-comparison criteria.

#include <cstddef>
#include <functional>
#include <vector>

#include "dmbpp/loglik.hpp"
#include "dmbpp/model.hpp"
#include "dmbpp/sampler.hpp"
#include "dmbpp/simplex.hpp"

namespace dmbpp {

/// Densities on x_grid × y_grid; values is row-major, one row per x.
struct DensityGrid {
  std::vector<Covariate> x_grid;
  SimplexGrid y_grid;
  std::vector<double> values;

  std::size_t rows() const { return x_grid.size(); }
  std::size_t cols() const { return y_grid.size(); }
  double operator()(std::size_t l, std::size_t i) const { return values[l * cols() + i]; }
  double& operator()(std::size_t l, std::size_t i) { return values[l * cols() + i]; }
};

/// L equispaced midpoints (l - 1/2) / L of (0,1), one covariate each.
std::vector<Covariate> covariate_grid(int L);

/// Fills a grid from a pointwise density; rows run in parallel on `jobs`
/// threads. Each row is computed by exactly one thread, so the result does
/// not depend on `jobs`.
DensityGrid tabulate(const std::vector<Covariate>& x_grid, const SimplexGrid& y_grid,
                     const std::function<void(const Covariate&, const SimplexGrid&, std::span<double>)>& row,
                     int jobs = 1);

/// Average over retained states of f_x(y) for every grid cell. Throws
/// DomainError for empty samples.
DensityGrid predictive_density(const std::vector<ModelState>& states, const std::vector<Covariate>& x_grid,
                               const SimplexGrid& y_grid, int jobs = 1);
DensityGrid predictive_density(const PosteriorSamples& samples, const std::vector<Covariate>& x_grid,
                               const SimplexGrid& y_grid, int jobs = 1);

/// (1/L)(1/M) Σ_l Σ_i |est - truth|. Throws GridMismatch unless both grids
/// share their x and y points.
double integrated_l1(const DensityGrid& est, const DensityGrid& truth);
/// max_l max_i |est - truth|.
double l_infinity(const DensityGrid& est, const DensityGrid& truth);

struct FitCriteria {
  double lpml = 0.0;
  double neg_n_waic = 0.0;
  std::vector<double> cpo;  // linear scale
  /// Draws dropped because some observation had zero likelihood under them.
  std::size_t excluded_draws = 0;
};

struct LpmlResult {
  double lpml = 0.0;
  std::vector<double> cpo;
  std::size_t excluded_draws = 0;
};

/// log CPO_i = log T - log Σ_t exp(-ℓ_{t,i}); lpml = Σ log CPO_i. Draws
/// holding a -inf entry are excluded. Throws DegenerateAllocation naming
/// the observation when its whole column is -inf, DomainError when no
/// draws remain.
LpmlResult lpml(const LogLikMatrix& ll);

/// -n WAIC = Σ_i log mean_t exp(ℓ_{t,i}) - Σ_i var_t ℓ_{t,i}, with the
/// sample variance (divisor T - 1, zero when T = 1). Same exclusion rule.
double waic(const LogLikMatrix& ll);

FitCriteria fit_criteria(const LogLikMatrix& ll);

}  // namespace dmbpp
