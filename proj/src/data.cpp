#include "dmbpp/data.hpp"

#include <cmath>

#include "dmbpp/error.hpp"

namespace dmbpp {

void Dataset::add(SimplexPoint yi, std::span<const double> xi) {
  if (static_cast<int>(yi.dim()) != m) throw DomainError("response dimension does not match the dataset");
  if (static_cast<int>(xi.size()) != p) throw DomainError("covariate dimension does not match the dataset");
  for (double v : xi)
    if (!std::isfinite(v)) throw DomainError("non-finite covariate");
  y.push_back(std::move(yi));
  x.insert(x.end(), xi.begin(), xi.end());
}

Eigen::MatrixXd gram_matrix(const Dataset& data) {
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
      data.x.data(), static_cast<Eigen::Index>(data.size()), data.p);
  return X.transpose() * X;
}

Eigen::MatrixXd zellner_covariance(const Dataset& data) {
  const Eigen::MatrixXd xtx = gram_matrix(data);
  if (data.p == 0) return xtx;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xtx);
  const double hi = eig.eigenvalues().maxCoeff();
  const double lo = eig.eigenvalues().minCoeff();
  if (!(hi > 0.0) || lo <= 1e-12 * hi)
    throw RankError("design matrix is rank deficient: XᵀX is not invertible");
  return xtx.ldlt().solve(Eigen::MatrixXd::Identity(data.p, data.p));
}

}  // namespace dmbpp
