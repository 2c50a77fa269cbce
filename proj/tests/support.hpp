#pragma once

#include <cstdint>

#include "dmbpp/model.hpp"
#include "dmbpp/rng.hpp"

namespace testing_support {

/// Random state with coefficients N(0, scale²), no allocations.
inline dmbpp::ModelState random_state(dmbpp::Rng& rng, int N, int k, int m, int p, double scale = 1.5) {
  dmbpp::ModelState s = dmbpp::ModelState::zeros({N, m, p}, k);
  for (double& v : s.weights.intercept) v = scale * rng.normal();
  for (double& v : s.weights.slope) v = scale * rng.normal();
  for (double& v : s.atoms.intercept) v = scale * rng.normal();
  for (double& v : s.atoms.slope) v = scale * rng.normal();
  s.gammas = dmbpp::SelectionIndicators::from_category(rng.uniform_int(0, 3));
  return s;
}

}  // namespace testing_support
