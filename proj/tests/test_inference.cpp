#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "dmbpp/error.hpp"
#include "dmbpp/inference.hpp"
#include "dmbpp/simgen.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dmbpp;
using testing_support::random_state;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DensityGrid constant_grid(std::size_t L, double h, double value) {
  DensityGrid g;
  g.x_grid = covariate_grid(static_cast<int>(L));
  g.y_grid = SimplexGrid::interior(h);
  g.values.assign(g.rows() * g.cols(), value);
  return g;
}

double oracle_il1(const DensityGrid& a, const DensityGrid& b) {
  double total = 0.0;
  for (std::size_t l = 0; l < a.rows(); ++l)
    for (std::size_t i = 0; i < a.cols(); ++i) total += std::abs(a(l, i) - b(l, i));
  return total / static_cast<double>(a.rows()) / static_cast<double>(a.cols());
}

}  // namespace

TEST_CASE("covariate grid midpoints") {
  const auto g = covariate_grid(20);
  REQUIRE(g.size() == 20);
  CHECK(g.front()[0] == doctest::Approx(0.025));
  CHECK(g.back()[0] == doctest::Approx(0.975));
  for (std::size_t l = 1; l < g.size(); ++l) CHECK(g[l][0] - g[l - 1][0] == doctest::Approx(0.05));
}

TEST_CASE("predictive density of one state is that state's density") {
  Rng rng(51);
  const auto s = random_state(rng, 4, 7, 2, 1);
  const auto xg = covariate_grid(5);
  const auto yg = SimplexGrid::interior(0.05);
  const auto d = predictive_density(std::vector<ModelState>{s}, xg, yg);
  REQUIRE(d.rows() == 5);
  REQUIRE(d.cols() == yg.size());
  for (std::size_t l = 0; l < d.rows(); ++l)
    for (std::size_t i = 0; i < d.cols(); ++i) {
      const std::vector<double> y{yg.points[i][0], yg.points[i][1]};
      CHECK(d(l, i) == doctest::Approx(oracle::conditional_density(y, xg[l], s)).epsilon(1e-10));
    }
}

TEST_CASE("predictive density of two states is their mean") {
  Rng rng(52);
  const auto a = random_state(rng, 3, 4, 2, 1);
  const auto b = random_state(rng, 3, 11, 2, 1);
  const auto xg = covariate_grid(4);
  const auto yg = SimplexGrid::interior(0.05);
  const auto d = predictive_density(std::vector<ModelState>{a, b}, xg, yg);
  for (std::size_t l = 0; l < d.rows(); ++l)
    for (std::size_t i = 0; i < d.cols(); ++i) {
      const std::vector<double> y{yg.points[i][0], yg.points[i][1]};
      const double expect =
          0.5 * (oracle::conditional_density(y, xg[l], a) + oracle::conditional_density(y, xg[l], b));
      CHECK(d(l, i) == doctest::Approx(expect).epsilon(1e-10));
    }
  CHECK_THROWS_AS(predictive_density(std::vector<ModelState>{}, xg, yg), DomainError);
}

TEST_CASE("predictive density does not depend on the thread count") {
  Rng rng(53);
  std::vector<ModelState> states;
  for (int t = 0; t < 5; ++t) states.push_back(random_state(rng, 5, rng.uniform_int(1, 30), 2, 1));
  const auto xg = covariate_grid(7);
  const auto yg = SimplexGrid::interior(0.02);
  const auto one = predictive_density(states, xg, yg, 1);
  const auto three = predictive_density(states, xg, yg, 3);
  CHECK(one.values == three.values);
}

TEST_CASE("predictive slices integrate to one") {
  Rng rng(54);
  std::vector<ModelState> states;
  for (int t = 0; t < 4; ++t) states.push_back(random_state(rng, 6, rng.uniform_int(1, 25), 2, 1));
  const auto xg = covariate_grid(4);
  const auto yg = SimplexGrid::quadrature(0.005);
  const auto d = predictive_density(states, xg, yg);
  for (std::size_t l = 0; l < d.rows(); ++l) {
    double mass = 0.0;
    for (std::size_t i = 0; i < d.cols(); ++i) mass += d(l, i) * yg.weights[i];
    CHECK(std::abs(mass - 1.0) < 0.03);
  }
}

TEST_CASE("integrated L1 and L-infinity") {
  auto truth = constant_grid(3, 0.05, 2.0);
  SUBCASE("identical grids") {
    CHECK(integrated_l1(truth, truth) == 0.0);
    CHECK(l_infinity(truth, truth) == 0.0);
  }
  SUBCASE("constant offset") {
    auto est = constant_grid(3, 0.05, 2.1);
    CHECK(integrated_l1(est, truth) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(l_infinity(est, truth) == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("single perturbed cell") {
    auto est = truth;
    est(1, 5) += 0.7;
    CHECK(l_infinity(est, truth) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(integrated_l1(est, truth) ==
          doctest::Approx(0.7 / (3.0 * static_cast<double>(truth.cols()))).epsilon(1e-12));
  }
  SUBCASE("random grids against a double loop") {
    Rng rng(55);
    auto est = truth;
    for (double& v : est.values) v = 5 * rng.uniform();
    for (double& v : truth.values) v = 5 * rng.uniform();
    CHECK(integrated_l1(est, truth) == doctest::Approx(oracle_il1(est, truth)).epsilon(1e-12));
    CHECK(integrated_l1(est, truth) == doctest::Approx(integrated_l1(truth, est)).epsilon(1e-14));
  }
  SUBCASE("mismatched grids") {
    CHECK_THROWS_AS(integrated_l1(constant_grid(4, 0.05, 2.0), truth), GridMismatch);
    CHECK_THROWS_AS(l_infinity(constant_grid(3, 0.1, 2.0), truth), GridMismatch);
    auto shifted = truth;
    shifted.x_grid[0][0] += 0.01;
    CHECK_THROWS_AS(integrated_l1(shifted, truth), GridMismatch);
  }
}

TEST_CASE("L1 between two dirichlet truths matches the oracle") {
  const auto xg = covariate_grid(1);
  const auto yg = SimplexGrid::interior(0.02);
  const auto iv = truth_grid(Scenario::IV, xg, yg);
  DensityGrid other = iv;
  for (std::size_t i = 0; i < yg.size(); ++i) {
    const auto full = oracle::full_parts({yg.points[i][0], yg.points[i][1]});
    other(0, i) = oracle::dirichlet_density(full, {30, 25, 40});
  }
  double expect = 0.0, top = 0.0;
  for (std::size_t i = 0; i < yg.size(); ++i) {
    const auto full = oracle::full_parts({yg.points[i][0], yg.points[i][1]});
    const double diff =
        std::abs(oracle::dirichlet_density(full, {35, 25, 40}) - oracle::dirichlet_density(full, {30, 25, 40}));
    expect += diff;
    top = std::max(top, diff);
  }
  expect /= static_cast<double>(yg.size());
  CHECK(integrated_l1(other, iv) == doctest::Approx(expect).epsilon(1e-9));
  CHECK(l_infinity(other, iv) == doctest::Approx(top).epsilon(1e-9));
}

TEST_CASE("criteria with a single draw") {
  const auto ll = oracle::to_matrix({{-1.0, -2.5, 0.3}});
  CHECK(lpml(ll).lpml == doctest::Approx(-3.2).epsilon(1e-14));
  CHECK(waic(ll) == doctest::Approx(-3.2).epsilon(1e-14));
  const auto c = fit_criteria(ll);
  CHECK(c.lpml == doctest::Approx(c.neg_n_waic).epsilon(1e-14));
  REQUIRE(c.cpo.size() == 3);
  CHECK(c.cpo[1] == doctest::Approx(std::exp(-2.5)).epsilon(1e-14));
}

TEST_CASE("criteria for constant draws") {
  const auto ll = oracle::to_matrix(std::vector<std::vector<double>>(6, std::vector<double>{-0.7, -1.3}));
  CHECK(lpml(ll).lpml == doctest::Approx(-2.0).epsilon(1e-13));
  CHECK(waic(ll) == doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("criteria match the plain-arithmetic oracle on hand matrices") {
  const std::vector<std::vector<double>> a{{-1.0, -2.0}, {-1.5, -0.5}, {-0.2, -3.0}};
  const std::vector<std::vector<double>> b{{-0.3, -1.1, -2.2}, {-0.9, -0.4, -1.7}, {-1.4, -0.8, -2.9}, {-0.6, -1.5, -2.0}};
  for (const auto& m : {a, b}) {
    const auto ll = oracle::to_matrix(m);
    CHECK(std::abs(lpml(ll).lpml - oracle::lpml(m)) < 1e-12);
    CHECK(std::abs(waic(ll) - oracle::neg_n_waic(m)) < 1e-12);
  }
}

TEST_CASE("criteria are invariant to draw order and stable for large magnitudes") {
  Rng rng(56);
  std::vector<std::vector<double>> m(40, std::vector<double>(7));
  for (auto& r : m)
    for (double& v : r) v = -3.0 + 2.0 * rng.normal();
  const double base_lpml = lpml(oracle::to_matrix(m)).lpml;
  const double base_waic = waic(oracle::to_matrix(m));
  CHECK(base_lpml == doctest::Approx(oracle::lpml(m)).epsilon(1e-11));
  CHECK(base_waic == doctest::Approx(oracle::neg_n_waic(m)).epsilon(1e-11));
  std::shuffle(m.begin(), m.end(), rng.engine());
  CHECK(lpml(oracle::to_matrix(m)).lpml == doctest::Approx(base_lpml).epsilon(1e-12));
  CHECK(waic(oracle::to_matrix(m)) == doctest::Approx(base_waic).epsilon(1e-12));
  // linear-space arithmetic underflows here; log-sum-exp does not
  for (auto& r : m)
    for (double& v : r) v -= 2000.0;
  const auto shifted = lpml(oracle::to_matrix(m)).lpml;
  CHECK(std::isfinite(shifted));
  CHECK(shifted == doctest::Approx(base_lpml - 7 * 2000.0).epsilon(1e-12));
}

TEST_CASE("waic penalty is nonnegative") {
  Rng rng(57);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t T = rng.uniform_int(2, 30), n = rng.uniform_int(1, 10);
    std::vector<std::vector<double>> m(T, std::vector<double>(n));
    for (auto& r : m)
      for (double& v : r) v = -1.0 + rng.normal();
    const auto ll = oracle::to_matrix(m);
    double lppd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t t = 0; t < T; ++t) s += std::exp(m[t][i]);
      lppd += std::log(s / T);
    }
    CHECK(waic(ll) <= lppd + 1e-12);
    // CPO is a harmonic mean, so it never exceeds the arithmetic mean
    CHECK(lpml(ll).lpml <= lppd + 1e-12);
  }
}

TEST_CASE("draws with zero likelihood are excluded") {
  const std::vector<std::vector<double>> kept{{-1.0, -2.0}, {-1.5, -0.5}};
  auto with_bad = kept;
  with_bad.push_back({-0.3, -kInf});
  const auto r = lpml(oracle::to_matrix(with_bad));
  CHECK(r.excluded_draws == 1);
  CHECK(r.lpml == doctest::Approx(oracle::lpml(kept)).epsilon(1e-12));
  CHECK(waic(oracle::to_matrix(with_bad)) == doctest::Approx(oracle::neg_n_waic(kept)).epsilon(1e-12));
  CHECK(fit_criteria(oracle::to_matrix(with_bad)).excluded_draws == 1);
}

TEST_CASE("an observation with zero likelihood under every draw is named") {
  const auto ll = oracle::to_matrix({{-1.0, -kInf, -0.5}, {-1.2, -kInf, -0.4}});
  try {
    lpml(ll);
    FAIL("expected a degenerate allocation");
  } catch (const DegenerateAllocation& e) {
    CHECK(e.observation() == 1);
  }
  CHECK_THROWS_AS(waic(ll), DegenerateAllocation);
  CHECK_THROWS_AS(lpml(LogLikMatrix{}), DomainError);
}
