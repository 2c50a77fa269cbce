#pragma once

// Dependent MBP process with linear predictors.
//
// For a covariate x ∈ R^p and truncation level N the conditional density is
//
//   f_x(y) = Σ_{j<N} w_j(x) dir(y | α(k, ⌈k θ_j(x)⌉))
//
// with stick-breaking weights w_j(x) = V_j(x) Π_{l<j} (1 - V_l(x)),
// V_j(x) = logistic(η_j(x)) for j < N-1 and V_{N-1} = 1, and atoms
// θ_j(x) = h(z_j(x)) where h is the additive-logistic map onto the open
// simplex. Both predictors are linear:
//
//   η_j(x)   = β0η_j   + xᵀ βη_j
//   z_jl(x)  = β0z_jl  + xᵀ βz_jl,   l = 0..m-1.
//
// Slopes carry a continuous spike-and-slab prior N_p(0, τ (XᵀX)⁻¹) whose
// scale τ is switched by the shared indicators (γη, γz). The indicators only
// change the prior; evaluation always uses the stored slopes. All four
// dependency structures (full, single-weights, single-atoms, independent)
// are therefore one state type.

#include <array>
#include <string>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dmbpp/mbp.hpp"
#include "dmbpp/rng.hpp"
#include "dmbpp/simplex.hpp"

namespace dmbpp {

using Covariate = std::vector<double>;

struct ModelDims {
  int N = 20;  // truncation level
  int m = 2;   // simplex dimension
  int p = 1;   // covariates, intercept excluded
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// β0η (N) and βη (N×p, row-major; row j is the slope block of stick j).
struct WeightCoeffs {
  std::vector<double> intercept;
  std::vector<double> slope;
  friend bool operator==(const WeightCoeffs&, const WeightCoeffs&) = default;
};

/// β0z (N×m, entry (j,l) at j*m+l) and βz ((N·m)×p, row j*m+l is the slope
/// block of coordinate l of atom j).
struct AtomCoeffs {
  std::vector<double> intercept;
  std::vector<double> slope;
  friend bool operator==(const AtomCoeffs&, const AtomCoeffs&) = default;
};

/// (γη, γz). Categories follow the prior's order:
/// 0 = (1,1) full, 1 = (0,1) single-weights, 2 = (1,0) single-atoms,
/// 3 = (0,0) predictor-independent.
struct SelectionIndicators {
  int eta = 1;
  int z = 1;

  int category() const;
  static SelectionIndicators from_category(int c);
  friend bool operator==(const SelectionIndicators&, const SelectionIndicators&) = default;
};

struct ModelState {
  int k = 1;
  ModelDims dims;
  WeightCoeffs weights;
  AtomCoeffs atoms;
  SelectionIndicators gammas;
  std::vector<int> allocations;  // 0-based component per observation

  /// All coefficients zero, no allocations.
  static ModelState zeros(ModelDims dims, int k);

  std::span<const double> weight_slope(int j) const;
  std::span<double> weight_slope(int j);
  std::span<const double> atom_slope(int j, int l) const;
  std::span<double> atom_slope(int j, int l);
  double atom_intercept(int j, int l) const { return atoms.intercept[j * dims.m + l]; }
  double& atom_intercept(int j, int l) { return atoms.intercept[j * dims.m + l]; }

  /// Throws DomainError on inconsistent sizes, k outside [1, kMaxDegree],
  /// indicators outside {0,1} or allocations outside [0, N).
  void validate() const;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

struct PriorConfig {
  double lambda = 25.0;
  double sigma2_eta = 100.0;
  double sigma2_z = 100.0;
  double tau1_eta = 0.01;
  double tau2_eta = 100.0;
  double tau1_z = 0.01;
  double tau2_z = 100.0;
  double t = 2.0;
  int N = 20;
  int k_max = kMaxDegree;
  /// (XᵀX)⁻¹ of the design without intercept. Empty means "derive from data".
  Eigen::MatrixXd xtx_inv;

  /// (π1, π2, π3, π4) = (1/t², (t-1)/(2t²), (t-1)/(2t²), (t-1)/t).
  std::array<double, 4> category_probs() const;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  double slope_scale_eta(int gamma) const { return gamma ? tau2_eta : tau1_eta; }
  double slope_scale_z(int gamma) const { return gamma ? tau2_z : tau1_z; }
};

/// Named presets: t = 2 for "prior-I", t = 10 for "prior-II".
PriorConfig named_prior(const std::string& name);

/// N_p(0, τ S) with S = (XᵀX)⁻¹ fixed; only τ varies between spike and slab.
class SlopePrior {
 public:
  /// Throws RankError unless S is symmetric positive definite.
  explicit SlopePrior(const Eigen::MatrixXd& cov);

  int dim() const { return static_cast<int>(precision_.rows()); }
  double log_density(std::span<const double> beta, double tau) const;
  void draw(double tau, Rng& rng, std::span<double> out) const;

 private:
  Eigen::MatrixXd precision_;
  Eigen::MatrixXd chol_;  // lower Cholesky factor of S
  double log_det_cov_ = 0.0;
};

/// e^a / (1 + e^a).
double link_weight(double a);
/// log(e^a / (1 + e^a)), accurate in both tails.
double log_link_weight(double a);

/// (e^{b_1}, .., e^{b_m}) / (1 + Σ e^{b_l}).
SimplexPoint link_atom(std::span<const double> b);
/// In-place form for hot loops; theta receives the m free coordinates.
void link_atom(std::span<const double> b, std::span<double> theta);
/// b_l = log θ_l - log(1 - Σθ). Throws DomainError for non-interior θ.
std::vector<double> link_atom_inv(const SimplexPoint& theta);

/// Stick-breaking weights with V.back() treated as 1; the last weight is the
/// remainder 1 - Σ_{j<N-1} w_j so the weights sum to exactly one.
std::vector<double> stick_weights(std::span<const double> V);

double weight_predictor(const ModelState& s, int j, std::span<const double> x);
/// θ_j(x) written into theta (m entries).
void atom_location(const ModelState& s, int j, std::span<const double> x, std::span<double> theta);
/// log w_j(x) for all j, computed in log space.
void log_stick_weights(const ModelState& s, std::span<const double> x, std::span<double> out);

/// log f_x(y); -inf where every component vanishes at y.
double conditional_log_density(const SimplexPoint& y, std::span<const double> x, const ModelState& s);
/// Same against cached log parts of y.
double conditional_log_density_cached(std::span<const double> log_y, std::span<const double> x,
                                      const ModelState& s);

/// W_{k,j,x} = Σ_l w_l(x) 1{⌈k θ_l(x)⌉ = j}: the same density written as an
/// MBP mixture with fixed support and covariate-dependent weights.
LatticeWeights aggregated_weights(std::span<const double> x, const ModelState& s);

/// k ~ Poisson(λ) restricted to k >= 1.
double log_truncated_poisson(int k, double lambda);

double log_prior(const ModelState& s, const PriorConfig& prior, const SlopePrior& slopes);
double log_prior(const ModelState& s, const PriorConfig& prior);

}  // namespace dmbpp
