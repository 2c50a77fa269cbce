#include <doctest.h>

#include <cmath>
#include <set>

#include "dmbpp/error.hpp"
#include "dmbpp/rng.hpp"
#include "dmbpp/simplex.hpp"
#include "oracles.hpp"

using namespace dmbpp;

TEST_CASE("simplex point validation") {
  CHECK_NOTHROW(SimplexPoint({0.2, 0.3}));
  CHECK_NOTHROW(SimplexPoint({1.0, 0.0}));
  CHECK_NOTHROW(SimplexPoint({0.5, 0.5 + 1e-13}));
  CHECK_THROWS_AS(SimplexPoint({-0.1, 0.3}), DomainError);
  CHECK_THROWS_AS(SimplexPoint({0.7, 0.4}), DomainError);
  CHECK_THROWS_AS(SimplexPoint({NAN, 0.1}), DomainError);
  const SimplexPoint y({0.2, 0.3});
  CHECK(y.last() == doctest::Approx(0.5));
  CHECK(y.is_interior());
  CHECK_FALSE(SimplexPoint({0.0, 0.3}).is_interior());
  CHECK_FALSE(SimplexPoint({0.5, 0.5}).is_interior());
}

TEST_CASE("dirichlet parameter validation") {
  CHECK_THROWS_AS(DirichletParam({1.0, 0.0, 2.0}), DomainError);
  CHECK_THROWS_AS(DirichletParam({1.0}), DomainError);
  CHECK(DirichletParam({1.0, 2.0, 3.0}).sum() == 6.0);
}

TEST_CASE("dirichlet log density hand values") {
  CHECK(dirichlet_log_density(SimplexPoint({1.0 / 3, 1.0 / 3}), DirichletParam({1, 1, 1})) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(dirichlet_log_density(SimplexPoint({0.5, 0.25}), DirichletParam({2, 1, 1})) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-14));
  // zero part against a unit exponent stays finite
  CHECK(dirichlet_log_density(SimplexPoint({0.0, 0.5}), DirichletParam({1, 2, 2})) ==
        doctest::Approx(std::log(6.0)).epsilon(1e-14));
  CHECK(dirichlet_log_density(SimplexPoint({0.0, 0.5}), DirichletParam({2, 2, 2})) == kNegInf);
  CHECK(dirichlet_log_density(SimplexPoint({0.5, 0.5}), DirichletParam({1, 1, 3})) == kNegInf);
  CHECK_THROWS_AS(dirichlet_log_density(SimplexPoint({0.0, 0.5}), DirichletParam({0.5, 2, 2})), DomainError);
}

TEST_CASE("dirichlet log density matches the linear-space oracle") {
  Rng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> alpha{0.5 + 20 * rng.uniform(), 0.5 + 20 * rng.uniform(), 0.5 + 20 * rng.uniform()};
    const auto full = rng.dirichlet(std::vector<double>{2, 2, 2});
    const SimplexPoint y({full[0], full[1]});
    const double expect = std::log(oracle::dirichlet_density(oracle::full_parts({full[0], full[1]}), alpha));
    CHECK(dirichlet_log_density(y, DirichletParam(alpha)) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(dirichlet_log_density(log_parts(y), alpha) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("dirichlet log density is symmetric under joint permutation") {
  Rng rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    const auto full = rng.dirichlet(std::vector<double>{3, 3, 3});
    const std::vector<double> a{1 + 5 * rng.uniform(), 1 + 5 * rng.uniform(), 1 + 5 * rng.uniform()};
    const double base = dirichlet_log_density(SimplexPoint({full[0], full[1]}), DirichletParam(a));
    // rotate so the implicit last part becomes a free coordinate
    const double rotated = dirichlet_log_density(SimplexPoint({full[2], full[0]}), DirichletParam({a[2], a[0], a[1]}));
    CHECK(rotated == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("multinomial log pmf") {
  CHECK(multinomial_log_pmf(std::vector<int>{1, 1}, 2, SimplexPoint({0.3, 0.3})) ==
        doctest::Approx(std::log(0.18)).epsilon(1e-14));
  CHECK(multinomial_log_pmf(std::vector<int>{0, 0}, 0, SimplexPoint({0.2, 0.7})) == 0.0);
  CHECK(multinomial_log_pmf(std::vector<int>{2, 0}, 2, SimplexPoint({1.0, 0.0})) == 0.0);
  CHECK_THROWS_AS(multinomial_log_pmf(std::vector<int>{2, 1}, 2, SimplexPoint({0.2, 0.2})), DomainError);
  CHECK_THROWS_AS(multinomial_log_pmf(std::vector<int>{-1, 1}, 2, SimplexPoint({0.2, 0.2})), DomainError);
}

TEST_CASE("multinomial pmf sums to one and matches the oracle") {
  Rng rng(13);
  for (int n = 0; n <= 12; ++n) {
    const auto full = rng.dirichlet(std::vector<double>{2, 2, 2});
    const SimplexPoint y({full[0], full[1]});
    double total = 0.0;
    for (int a = 0; a <= n; ++a)
      for (int b = 0; a + b <= n; ++b) {
        const std::vector<int> j{a, b};
        const double p = std::exp(multinomial_log_pmf(j, n, y));
        CHECK(p == doctest::Approx(oracle::multinomial_pmf(j, n, {full[0], full[1]})).epsilon(1e-10));
        total += p;
      }
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}

TEST_CASE("log factorial and log-sum-exp") {
  CHECK(log_factorial(0) == 0.0);
  CHECK(log_factorial(5) == doctest::Approx(std::log(120.0)).epsilon(1e-14));
  CHECK(log_factorial(2000) == doctest::Approx(std::lgamma(2001.0)).epsilon(1e-14));
  CHECK(log_sum_exp(std::vector<double>{}) == kNegInf);
  CHECK(log_sum_exp(std::vector<double>{kNegInf, kNegInf}) == kNegInf);
  CHECK(log_sum_exp(std::vector<double>{1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log_sum_exp(std::vector<double>{std::log(0.25), std::log(0.75)}) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("interior lattice layout") {
  const auto g = SimplexGrid::interior(0.02);
  CHECK(g.size() == 1176);
  std::set<std::vector<double>> seen;
  for (const auto& p : g.points) {
    CHECK(p.is_interior());
    seen.insert({p[0], p[1]});
  }
  CHECK(seen.size() == g.size());
  CHECK(g.points.front()[0] == doctest::Approx(0.02));
  CHECK(g.points.front()[1] == doctest::Approx(0.02));
  CHECK_THROWS_AS(SimplexGrid::interior(0.03), DomainError);
}

TEST_CASE("quadrature grid integrates constants and dirichlet densities") {
  for (double h : {0.02, 0.01, 0.005}) {
    const auto g = SimplexGrid::quadrature(h);
    const int n = static_cast<int>(std::lround(1.0 / h));
    CHECK(g.size() == static_cast<std::size_t>(n * (n - 1) / 2 + n));
    CHECK(simplex_quadrature([](const SimplexPoint&) { return 1.0; }, g) == doctest::Approx(0.5).epsilon(1e-12));
    for (const auto& p : g.points) CHECK(p.is_interior());
  }
  const auto g01 = SimplexGrid::quadrature(0.01);
  const auto uniform = [](const SimplexPoint& y) { return std::exp(dirichlet_log_density(y, DirichletParam({1, 1, 1}))); };
  CHECK(std::abs(simplex_quadrature(uniform, g01) - 1.0) < 0.02);
  const auto g005 = SimplexGrid::quadrature(0.005);
  const auto peaked = [](const SimplexPoint& y) {
    return std::exp(dirichlet_log_density(y, DirichletParam({35, 25, 40})));
  };
  CHECK(std::abs(simplex_quadrature(peaked, g005) - 1.0) < 0.02);
}

TEST_CASE("dirichlet densities integrate to one for random parameters up to 50") {
  const auto g = SimplexGrid::quadrature(0.005);
  Rng rng(14);
  for (int rep = 0; rep < 15; ++rep) {
    const DirichletParam a({1 + 49 * rng.uniform(), 1 + 49 * rng.uniform(), 1 + 49 * rng.uniform()});
    const double total = simplex_quadrature([&](const SimplexPoint& y) { return std::exp(dirichlet_log_density(y, a)); }, g);
    CHECK(std::abs(total - 1.0) < 0.02);
  }
}
