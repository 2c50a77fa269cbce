#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dmbpp/simplex.hpp"

namespace dmbpp {

/// Regression data: compositional responses on the m-simplex with p
/// covariates per observation (no intercept column).
struct Dataset {
  int m = 2;
  int p = 1;
  std::vector<SimplexPoint> y;
  std::vector<double> x;  // n×p, row-major

  std::size_t size() const { return y.size(); }
  bool empty() const { return y.empty(); }
  std::span<const double> covariate(std::size_t i) const {
    return {x.data() + i * p, static_cast<std::size_t>(p)};
  }
  /// Throws DomainError on dimension mismatch or non-finite covariates.
  void add(SimplexPoint yi, std::span<const double> xi);
};

/// XᵀX of the covariate matrix.
Eigen::MatrixXd gram_matrix(const Dataset& data);

/// (XᵀX)⁻¹. Throws RankError when XᵀX is singular or numerically so.
Eigen::MatrixXd zellner_covariance(const Dataset& data);

}  // namespace dmbpp
