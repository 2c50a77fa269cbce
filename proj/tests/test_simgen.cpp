#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "dmbpp/error.hpp"
#include "dmbpp/simgen.hpp"
#include "oracles.hpp"

using namespace dmbpp;

namespace {

// Regularized incomplete beta by the Lentz continued fraction.
double beta_cf(double a, double b, double x) {
  const double tiny = 1e-300;
  double c = 1.0, d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < 500; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((a - 1.0 + m2) * (a + m2));
    d = 1.0 + aa * d;
    c = 1.0 + aa / c;
    d = 1.0 / (std::abs(d) < tiny ? tiny : d);
    c = std::abs(c) < tiny ? tiny : c;
    h *= d * c;
    aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + 1.0 + m2));
    d = 1.0 + aa * d;
    c = 1.0 + aa / c;
    d = 1.0 / (std::abs(d) < tiny ? tiny : d);
    c = std::abs(c) < tiny ? tiny : c;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return h;
}

double beta_cdf(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace

TEST_CASE("scenario names") {
  CHECK(parse_scenario("I") == Scenario::I);
  CHECK(parse_scenario("4") == Scenario::IV);
  CHECK(parse_scenario("III") == Scenario::III);
  CHECK(scenario_name(Scenario::II) == "II");
  CHECK_THROWS_AS(parse_scenario("V"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(""), ConfigError);
}

TEST_CASE("scenario hand values") {
  CHECK(scenario_w1(0.5) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(scenario_w1(1e-9) == doctest::Approx(0.25e-9).epsilon(1e-6));
  const std::vector<double> y{0.3, 0.4};
  const auto full = oracle::full_parts(y);
  const double expect_i =
      0.2 * oracle::dirichlet_density(full, {15, 17.5, 3}) + 0.8 * oracle::dirichlet_density(full, {5, 12.5, 21.5});
  CHECK(std::exp(true_log_density(Scenario::I, SimplexPoint({0.3, 0.4}), 0.5)) ==
        doctest::Approx(expect_i).epsilon(1e-10));
  for (double x : {0.1, 0.5, 0.9})
    CHECK(std::exp(true_log_density(Scenario::IV, SimplexPoint({0.3, 0.4}), x)) ==
          doctest::Approx(oracle::dirichlet_density(full, {35, 25, 40})).epsilon(1e-10));
  const double x = 0.3;
  const double expect_ii = 0.6 * oracle::dirichlet_density(full, {25 - 20 * x, 5 + 25 * x, 3}) +
                           0.2 * oracle::dirichlet_density(full, {5, 5 + 15 * x, 30 - 17 * x}) +
                           0.2 * oracle::dirichlet_density(full, {5 + 9 * x, 30 + 9 * x, 3 + 9 * x});
  CHECK(std::exp(true_log_density(Scenario::II, SimplexPoint({0.3, 0.4}), x)) ==
        doctest::Approx(expect_ii).epsilon(1e-10));
  const double w = x / (4 - 3 * x);
  const double expect_iii =
      w * oracle::dirichlet_density(full, {10, 12, 12}) + (1 - w) * oracle::dirichlet_density(full, {24, 6, 6});
  CHECK(std::exp(true_log_density(Scenario::III, SimplexPoint({0.3, 0.4}), x)) ==
        doctest::Approx(expect_iii).epsilon(1e-10));
}

TEST_CASE("scenario domain checks") {
  CHECK_THROWS_AS(scenario_components(Scenario::I, 0.0), DomainError);
  CHECK_THROWS_AS(scenario_components(Scenario::I, 1.0), DomainError);
  CHECK_THROWS_AS(true_log_density(Scenario::IV, SimplexPoint({0.0, 0.4}), 0.5), DomainError);
  CHECK_THROWS_AS(sample_dataset(Scenario::IV, 0, 1), DomainError);
}

TEST_CASE("scenario weights sum to one") {
  for (Scenario s : kAllScenarios)
    for (double x : {0.01, 0.3, 0.77, 0.99}) {
      double total = 0.0;
      for (const auto& c : scenario_components(s, x)) {
        CHECK(c.weight >= 0.0);
        for (double a : c.alpha) CHECK(a > 0.0);
        total += c.weight;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("true structures") {
  CHECK(true_structure(Scenario::I) == SelectionIndicators{1, 1});
  CHECK(true_structure(Scenario::II) == SelectionIndicators{0, 1});
  CHECK(true_structure(Scenario::III) == SelectionIndicators{1, 0});
  CHECK(true_structure(Scenario::IV) == SelectionIndicators{0, 0});
}

TEST_CASE("truths integrate to one") {
  const auto g = SimplexGrid::quadrature(0.005);
  for (Scenario s : kAllScenarios)
    for (double x : {0.25, 0.5, 0.75}) {
      const double mass = simplex_quadrature([&](const SimplexPoint& y) { return std::exp(true_log_density(s, y, x)); }, g);
      CHECK(std::abs(mass - 1.0) < 0.02);
    }
}

TEST_CASE("truth grid layout") {
  const auto xg = covariate_grid(20);
  const auto yg = SimplexGrid::interior(0.02);
  const auto t = truth_grid(Scenario::II, xg, yg);
  CHECK(t.rows() == 20);
  CHECK(t.cols() == 1176);
  CHECK(t(3, 100) == doctest::Approx(std::exp(true_log_density(Scenario::II, yg.points[100], xg[3][0]))).epsilon(1e-14));
}

TEST_CASE("sampled datasets are deterministic and well formed") {
  const auto a = sample_dataset(Scenario::I, 300, 7);
  const auto b = sample_dataset(Scenario::I, 300, 7);
  const auto c = sample_dataset(Scenario::I, 300, 8);
  REQUIRE(a.size() == 300);
  CHECK(a.x == b.x);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.y[i][0] == b.y[i][0]);
    CHECK(a.y[i][1] == b.y[i][1]);
    CHECK(a.y[i].is_interior());
    CHECK(a.covariate(i)[0] > 0.0);
    CHECK(a.covariate(i)[0] < 1.0);
    differs = differs || a.y[i][0] != c.y[i][0];
  }
  CHECK(differs);
}

TEST_CASE("scenario IV sample mean") {
  const auto d = sample_dataset(Scenario::IV, 100000, 9);
  double m0 = 0.0, m1 = 0.0;
  for (const auto& y : d.y) {
    m0 += y[0];
    m1 += y[1];
  }
  CHECK(std::abs(m0 / d.size() - 0.35) < 0.005);
  CHECK(std::abs(m1 / d.size() - 0.25) < 0.005);
}

TEST_CASE("scenario III at small x draws from the second component") {
  // w1(x) < 0.0025 below x = 0.01, where the second component has mean 24/36 in y1
  Dataset d = sample_dataset(Scenario::III, 20000, 10);
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.covariate(i)[0] < 0.01) {
      sum += d.y[i][0];
      ++count;
    }
  REQUIRE(count > 100);
  CHECK(std::abs(sum / count - 24.0 / 36.0) < 0.02);
}

TEST_CASE("first-part marginals pass a Kolmogorov-Smirnov test") {
  const int n = 2000;
  const double critical = 1.628 / std::sqrt(static_cast<double>(n));  // level 0.01
  SUBCASE("scenario IV") {
    const auto d = sample_dataset(Scenario::IV, n, 11);
    std::vector<double> y1;
    for (const auto& y : d.y) y1.push_back(y[0]);
    CHECK(ks_statistic(y1, [](double t) { return beta_cdf(t, 35, 65); }) < critical);
  }
  SUBCASE("scenario I averaged over x") {
    const auto d = sample_dataset(Scenario::I, n, 12);
    std::vector<double> y1;
    for (const auto& y : d.y) y1.push_back(y[0]);
    auto cdf = [](double t) {
      const int nodes = 200;
      double acc = 0.0;
      for (int q = 0; q < nodes; ++q) {
        const double x = (q + 0.5) / nodes;
        const double w = x / (4 - 3 * x);
        const double a1 = 25 - 20 * x, s1 = a1 + 5 + 25 * x + 3;
        const double s2 = 5 + 5 + 15 * x + 30 - 17 * x;
        acc += w * beta_cdf(t, a1, s1 - a1) + (1 - w) * beta_cdf(t, 5, s2 - 5);
      }
      return acc / nodes;
    };
    CHECK(ks_statistic(y1, cdf) < critical);
  }
}
