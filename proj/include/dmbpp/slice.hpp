#pragma once

#include <functional>

#include "dmbpp/rng.hpp"

namespace dmbpp {

struct SliceResult {
  double value;
  double log_density;
  bool failed;
};

/// One univariate slice-sampling update: stepping out in steps of `width`
/// with at most `max_steps` expansions in total, then shrinkage. If
/// shrinkage has not found a point after 200 proposals, or the current
/// point has zero density, the current value is returned with failed set.
SliceResult slice_sample(double x0, double log_f0, const std::function<double(double)>& log_f,
                         double width, int max_steps, Rng& rng);

}  // namespace dmbpp
