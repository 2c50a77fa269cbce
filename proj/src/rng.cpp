#include "dmbpp/rng.hpp"

#include <cmath>

#include "dmbpp/error.hpp"
#include "dmbpp/simplex.hpp"

namespace dmbpp {

std::size_t Rng::categorical_log(std::span<const double> log_weights) {
  const double norm = log_sum_exp(log_weights);
  if (norm == kNegInf) throw DomainError("categorical draw with no positive weight");
  double u = uniform();
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < log_weights.size(); ++j) {
    if (log_weights[j] == kNegInf) continue;
    last_positive = j;
    u -= std::exp(log_weights[j] - norm);
    if (u <= 0.0) return j;
  }
  return last_positive;
}

std::vector<double> Rng::dirichlet(std::span<const double> alpha) {
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (std::size_t l = 0; l < alpha.size(); ++l) {
    out[l] = gamma(alpha[l]);
    total += out[l];
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace dmbpp
