#pragma once

// Parametric Dirichlet regression baseline:
//
//   y*_i | x_i ~ Dir(γ_1(x_i), .., γ_{m+1}(x_i)),   log γ_l(x) = [1, xᵀ] β_l,
//
// with β_l ~ N_{p+1}(0, σ² I). Responses are first pulled off the boundary
// by y* = (y (n - 1) + 1/D) / n with D = m + 1 parts.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dmbpp/data.hpp"
#include "dmbpp/inference.hpp"
#include "dmbpp/loglik.hpp"
#include "dmbpp/sampler.hpp"

namespace dmbpp {

/// Full composition (D parts) in, full composition out. Computed as
/// (y D (n - 1) + 1) / (D n). Throws DomainError unless n >= 2.
std::vector<double> smithson_transform(std::span<const double> full, int n);
SimplexPoint smithson_transform(const SimplexPoint& y, int n);
/// Every response transformed with n = data.size().
Dataset smithson_transform(const Dataset& data);

enum class PdrVariant {
  FullParts,  // one coefficient vector per part, m + 1 in total
  FixedLast,  // γ_{m+1} = 1; m coefficient vectors
};

PdrVariant parse_pdr_variant(const std::string& name);
std::string pdr_variant_name(PdrVariant v);

struct PdrState {
  int m = 2;
  int p = 1;
  /// (m+1)×(p+1), row l = β_l with the intercept first. Under FixedLast the
  /// last row stays zero.
  std::vector<double> beta;

  static PdrState zeros(int m, int p);
  std::span<const double> row(int l) const { return {beta.data() + l * (p + 1), static_cast<std::size_t>(p + 1)}; }
  std::span<double> row(int l) { return {beta.data() + l * (p + 1), static_cast<std::size_t>(p + 1)}; }
  friend bool operator==(const PdrState&, const PdrState&) = default;
};

/// γ(x) written into alpha (m+1 entries).
void pdr_alpha(const PdrState& s, std::span<const double> x, std::span<double> alpha);

double pdr_observation_log_density(std::span<const double> log_y, std::span<const double> x, const PdrState& s);
/// Σ_i log Dir(y_i | γ(x_i)); the data are used as given.
double pdr_log_likelihood(const Dataset& data, const PdrState& s);

struct PdrConfig {
  double sigma2 = 100.0;
  PdrVariant variant = PdrVariant::FullParts;

  void validate() const;
};

struct PdrSamples {
  int m = 2;
  int p = 1;
  PdrVariant variant = PdrVariant::FullParts;
  std::vector<int> iterations;
  std::vector<PdrState> states;
  /// Against the transformed responses.
  LogLikMatrix loglik;
  std::vector<double> log_posterior;
  SamplerDiagnostics diagnostics;
};

/// Coordinate-wise slice sampling of every free coefficient. The responses
/// are transformed first. Throws RankError when [1, X] is rank deficient.
PdrSamples fit_pdr(const Dataset& data, const PdrConfig& cfg, const ChainConfig& chain);

/// x ~ U(0,1)^p and y ~ Dir(γ(x)).
Dataset sample_pdr_dataset(const PdrState& truth, int n, std::uint64_t seed);

/// Posterior mean of the Dirichlet density on the grid.
DensityGrid pdr_predictive_density(const std::vector<PdrState>& states, const std::vector<Covariate>& x_grid,
                                   const SimplexGrid& y_grid, int jobs = 1);

}  // namespace dmbpp
