#pragma once

// Geometry of the m-simplex, Dirichlet and multinomial kernels, and the
// quadrature lattices used for normalization checks and error metrics.
//
// A point of the m-simplex is stored by its m free coordinates y_1..y_m;
// the (m+1)-th part is implicit, 1 - sum(y).

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace dmbpp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// A point is interior when every part, the implicit one included, is at
/// least this far from zero.
inline constexpr double kInteriorTolerance = 1e-9;

/// Slack allowed on sum(y) <= 1.
inline constexpr double kSumTolerance = 1e-12;

class SimplexPoint {
 public:
  SimplexPoint() = default;

  /// Throws DomainError if a coordinate is negative or not finite, or if the
  /// coordinates sum to more than 1 + kSumTolerance.
  explicit SimplexPoint(std::vector<double> coords);

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t l) const { return coords_[l]; }
  std::span<const double> coords() const { return coords_; }

  /// The implicit last part 1 - sum(y), clamped at zero.
  double last() const;

  /// Part l of the full composition, l in [0, dim()].
  double part(std::size_t l) const { return l < coords_.size() ? coords_[l] : last(); }

  bool is_interior() const;

  friend bool operator==(const SimplexPoint&, const SimplexPoint&) = default;

 private:
  std::vector<double> coords_;
};

/// log of each of the m+1 parts of a composition; -inf for empty parts.
/// Hot loops evaluate Dirichlet kernels against this cached form.
std::vector<double> log_parts(const SimplexPoint& y);

class DirichletParam {
 public:
  DirichletParam() = default;
  /// Throws DomainError unless every component is finite and > 0.
  explicit DirichletParam(std::vector<double> alpha);

  std::size_t size() const { return alpha_.size(); }
  double operator[](std::size_t l) const { return alpha_[l]; }
  std::span<const double> values() const { return alpha_; }
  double sum() const;

  friend bool operator==(const DirichletParam&, const DirichletParam&) = default;

 private:
  std::vector<double> alpha_;
};

/// log Γ(n+1) = log n!, tabulated for small n and computed past the table.
double log_factorial(int n);

/// Log of the Dirichlet density with respect to Lebesgue measure on the m
/// free coordinates. A zero part is admissible only against a unit
/// exponent; a zero part paired with a component > 1 has density zero and
/// yields -inf. A zero part paired with a component < 1 throws DomainError.
double dirichlet_log_density(const SimplexPoint& y, const DirichletParam& a);

/// Same kernel against cached log parts.
double dirichlet_log_density(std::span<const double> log_y, std::span<const double> alpha);

/// log Mult(j | n, y) with implicit last count n - sum(j) and probability
/// 1 - sum(y). Throws DomainError if sum(j) > n or a count is negative.
double multinomial_log_pmf(std::span<const int> j, int n, const SimplexPoint& y);

/// Numerically stable log(sum(exp(v))); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> v);

/// Points on the 2-simplex with quadrature weights.
///
/// Two lattices are provided, both with n = 1/h cells per side:
///  - interior(h):   {(i h, j h) : i, j >= 1, i + j <= n - 1}, weight h^2.
///                   Every point is strictly interior; at h = 0.02 this is
///                   M = 1176 points. Used for density grids and L1/Linf.
///  - quadrature(h): the midpoints ((i - 1/2) h, (j - 1/2) h) of the n(n-1)/2
///                   squares with i + j <= n, weight h^2, followed by the
///                   centroids ((i - 2/3) h, (j - 2/3) h) of the n half-squares
///                   along the hypotenuse, i + j = n + 1, weight h^2 / 2.
///                   Weights sum to 1/2 exactly; the rule is second order.
/// Points are ordered by i, then j.
struct SimplexGrid {
  enum class Kind { Interior, Quadrature };

  Kind kind = Kind::Interior;
  std::vector<SimplexPoint> points;
  std::vector<double> weights;
  double spacing = 0.0;
  double cell_volume = 0.0;

  std::size_t size() const { return points.size(); }

  /// Both factories require 1/h to be an integer >= 2.
  static SimplexGrid interior(double h);
  static SimplexGrid quadrature(double h);
};

/// Σ g(y_i) w_i in grid order.
double simplex_quadrature(const std::function<double(const SimplexPoint&)>& g,
                          const SimplexGrid& grid);

}  // namespace dmbpp
