#include "dmbpp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "dmbpp/error.hpp"

namespace dmbpp {

std::vector<Covariate> covariate_grid(int L) {
  if (L < 1) throw DomainError("covariate grid needs L >= 1");
  std::vector<Covariate> out;
  out.reserve(L);
  for (int l = 1; l <= L; ++l) out.push_back({(l - 0.5) / L});
  return out;
}

DensityGrid tabulate(const std::vector<Covariate>& x_grid, const SimplexGrid& y_grid,
                     const std::function<void(const Covariate&, const SimplexGrid&, std::span<double>)>& row,
                     int jobs) {
  DensityGrid g{x_grid, y_grid, std::vector<double>(x_grid.size() * y_grid.size(), 0.0)};
  const std::size_t L = x_grid.size();
  const std::size_t M = y_grid.size();
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t l = first; l < L; l += stride)
      row(x_grid[l], y_grid, std::span<double>(g.values.data() + l * M, M));
  };
  const std::size_t workers = std::clamp<std::size_t>(jobs < 1 ? 1 : jobs, 1, std::max<std::size_t>(L, 1));
  if (workers == 1) {
    work(0, 1);
    return g;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  for (auto& t : pool) t.join();
  return g;
}

DensityGrid predictive_density(const std::vector<ModelState>& states, const std::vector<Covariate>& x_grid,
                               const SimplexGrid& y_grid, int jobs) {
  if (states.empty()) throw DomainError("predictive density needs at least one retained state");
  const int m = states.front().dims.m;
  std::vector<std::vector<double>> log_y;
  log_y.reserve(y_grid.size());
  for (const auto& y : y_grid.points) {
    if (static_cast<int>(y.dim()) != m) throw DomainError("y grid dimension differs from the model");
    log_y.push_back(log_parts(y));
  }
  const double inv_t = 1.0 / static_cast<double>(states.size());

  auto row = [&](const Covariate& x, const SimplexGrid&, std::span<double> out) {
    std::vector<double> lw(states.front().dims.N), theta(m);
    std::vector<int> cell(m);
    std::map<std::vector<int>, double> merged;
    for (const auto& s : states) {
      lw.resize(s.dims.N);
      log_stick_weights(s, x, lw);
      merged.clear();
      for (int j = 0; j < s.dims.N; ++j) {
        if (lw[j] == kNegInf) continue;
        atom_location(s, j, x, theta);
        lattice_cell(s.k, theta, cell);
        merged[cell] += std::exp(lw[j]);
      }
      for (std::size_t i = 0; i < out.size(); ++i) {
        double f = 0.0;
        for (const auto& [c, w] : merged) f += w * std::exp(lattice_log_density(log_y[i], s.k, c));
        out[i] += f * inv_t;
      }
    }
  };
  return tabulate(x_grid, y_grid, row, jobs);
}

DensityGrid predictive_density(const PosteriorSamples& samples, const std::vector<Covariate>& x_grid,
                               const SimplexGrid& y_grid, int jobs) {
  return predictive_density(samples.states, x_grid, y_grid, jobs);
}

namespace {

void check_matching(const DensityGrid& a, const DensityGrid& b) {
  if (a.x_grid != b.x_grid) throw GridMismatch("density grids have different covariate points");
  if (a.y_grid.points != b.y_grid.points) throw GridMismatch("density grids have different simplex points");
  if (a.values.size() != b.values.size()) throw GridMismatch("density grids have different sizes");
  if (a.values.empty()) throw GridMismatch("density grids are empty");
}

}  // namespace

double integrated_l1(const DensityGrid& est, const DensityGrid& truth) {
  check_matching(est, truth);
  double total = 0.0;
  for (std::size_t l = 0; l < est.rows(); ++l) {
    double row = 0.0;
    for (std::size_t i = 0; i < est.cols(); ++i) row += std::abs(est(l, i) - truth(l, i));
    total += row / static_cast<double>(est.cols());
  }
  return total / static_cast<double>(est.rows());
}

double l_infinity(const DensityGrid& est, const DensityGrid& truth) {
  check_matching(est, truth);
  double out = 0.0;
  for (std::size_t k = 0; k < est.values.size(); ++k) out = std::max(out, std::abs(est.values[k] - truth.values[k]));
  return out;
}

namespace {

std::vector<std::size_t> usable_draws(const LogLikMatrix& ll) {
  const std::size_t T = ll.draws();
  const std::size_t n = ll.observations();
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t t = 0; t < T && !any; ++t) any = ll(t, i) > kNegInf;
    if (!any)
      throw DegenerateAllocation(i, "observation " + std::to_string(i) + " has zero likelihood under every draw");
  }
  std::vector<std::size_t> keep;
  for (std::size_t t = 0; t < T; ++t) {
    const auto r = ll.row(t);
    if (std::none_of(r.begin(), r.end(), [](double v) { return v == kNegInf; })) keep.push_back(t);
  }
  if (keep.empty()) throw DomainError("every draw has an observation with zero likelihood");
  for (std::size_t t : keep)
    for (double v : ll.row(t))
      if (!std::isfinite(v)) throw DomainError("log-likelihood matrix holds a non-finite entry");
  return keep;
}

}  // namespace

LpmlResult lpml(const LogLikMatrix& ll) {
  const auto keep = usable_draws(ll);
  const double log_t = std::log(static_cast<double>(keep.size()));
  LpmlResult out;
  out.excluded_draws = ll.draws() - keep.size();
  out.cpo.resize(ll.observations());
  std::vector<double> neg(keep.size());
  for (std::size_t i = 0; i < ll.observations(); ++i) {
    for (std::size_t a = 0; a < keep.size(); ++a) neg[a] = -ll(keep[a], i);
    const double log_cpo = log_t - log_sum_exp(neg);
    out.cpo[i] = std::exp(log_cpo);
    out.lpml += log_cpo;
  }
  return out;
}

double waic(const LogLikMatrix& ll) {
  const auto keep = usable_draws(ll);
  const double T = static_cast<double>(keep.size());
  const double log_t = std::log(T);
  std::vector<double> col(keep.size());
  double lppd = 0.0;
  double penalty = 0.0;
  for (std::size_t i = 0; i < ll.observations(); ++i) {
    double mean = 0.0;
    for (std::size_t a = 0; a < keep.size(); ++a) {
      col[a] = ll(keep[a], i);
      mean += col[a];
    }
    lppd += log_sum_exp(col) - log_t;
    if (keep.size() > 1) {
      mean /= T;
      double ss = 0.0;
      for (double v : col) ss += (v - mean) * (v - mean);
      penalty += ss / (T - 1.0);
    }
  }
  return lppd - penalty;
}

FitCriteria fit_criteria(const LogLikMatrix& ll) {
  auto l = lpml(ll);
  return {l.lpml, waic(ll), std::move(l.cpo), l.excluded_draws};
}

}  // namespace dmbpp
