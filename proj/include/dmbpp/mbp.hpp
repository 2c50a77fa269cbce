#pragma once

// Modified multivariate Bernstein polynomial densities on the m-simplex:
// mixtures of Dirichlet kernels dir(y | α(k, j)) indexed by the lattice set
// H⁰_{k,m} = { j ∈ {1..k}^m : Σ j_l <= k + m - 1 } with
// α(k, j) = (j_1, .., j_m, k + m - Σ j_l).

#include <map>
#include <memory>
#include <span>
#include <vector>

#include "dmbpp/simplex.hpp"

namespace dmbpp {

/// Hard cap on the polynomial degree; bounds the size of cached index sets.
inline constexpr int kMaxDegree = 200;

class DegreeK {
 public:
  /// Throws DomainError unless k >= 1.
  explicit DegreeK(int k);
  int value() const { return k_; }
  friend auto operator<=>(const DegreeK&, const DegreeK&) = default;

 private:
  int k_;
};

using LatticeIndex = std::vector<int>;

struct IndexSetH0 {
  int k = 0;
  int m = 0;
  std::vector<LatticeIndex> indices;  // lexicographic order

  bool contains(std::span<const int> j) const;
};

/// Cached; safe for concurrent callers.
std::shared_ptr<const IndexSetH0> enumerate_H0(DegreeK k, int m);

/// True when j ∈ H⁰_{k,m} for m = j.size().
bool in_H0(int k, std::span<const int> j);

/// (⌈kθ_1⌉, .., ⌈kθ_m⌉). Throws DomainError unless θ is strictly inside the
/// simplex (all coordinates > 0, sum < 1).
LatticeIndex ceil_index(DegreeK k, const SimplexPoint& theta);

/// Unchecked form for hot loops. Each product kθ_l is nudged down by 1e-12
/// before rounding up, so exact lattice hits map to the lower cell; results
/// are clamped to [1, k] and, if rounding ever pushes Σ j past k + m - 1,
/// the largest entry is lowered. Writes theta.size() entries into out.
void lattice_cell(int k, std::span<const double> theta, std::span<int> out);

/// α(k, j). Throws DomainError if j ∉ H⁰_{k,m}.
DirichletParam alpha_of(DegreeK k, std::span<const int> j);

/// log dir(y | α(k, j)) from cached log parts; j is trusted to lie in H⁰.
/// All exponents are integers, so the normalizer comes from log factorials.
double lattice_log_density(std::span<const double> log_y, int k, std::span<const int> j);

/// Mixture weights over lattice indices; missing keys carry weight zero.
using LatticeWeights = std::map<LatticeIndex, double>;

/// log Σ_j w_j dir(y | α(k, j)). Throws DomainError if a key lies outside
/// H⁰_{k,m}, a weight is negative, or the weights sum differs from 1 by
/// more than 1e-6.
double mbp_mixture_log_density(const SimplexPoint& y, DegreeK k, const LatticeWeights& weights);

}  // namespace dmbpp
