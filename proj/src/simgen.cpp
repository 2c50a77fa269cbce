#include "dmbpp/simgen.hpp"

#include <cmath>

#include "dmbpp/error.hpp"
#include "dmbpp/rng.hpp"

namespace dmbpp {

Scenario parse_scenario(const std::string& name) {
  if (name == "I" || name == "1") return Scenario::I;
  if (name == "II" || name == "2") return Scenario::II;
  if (name == "III" || name == "3") return Scenario::III;
  if (name == "IV" || name == "4") return Scenario::IV;
  throw ConfigError("scenario must be one of I, II, III, IV (got '" + name + "')");
}

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::I: return "I";
    case Scenario::II: return "II";
    case Scenario::III: return "III";
    case Scenario::IV: return "IV";
  }
  return "?";
}

double scenario_w1(double x) { return x / (4.0 - 3.0 * x); }

std::vector<ScenarioComponent> scenario_components(Scenario s, double x) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("scenario covariate must lie in (0,1)");
  const std::array<double, 3> t1{25.0 - 20.0 * x, 5.0 + 25.0 * x, 3.0};
  const std::array<double, 3> t2{5.0, 5.0 + 15.0 * x, 30.0 - 17.0 * x};
  const std::array<double, 3> t3{5.0 + 9.0 * x, 30.0 + 9.0 * x, 3.0 + 9.0 * x};
  const double w1 = scenario_w1(x);
  switch (s) {
    case Scenario::I: return {{w1, t1}, {1.0 - w1, t2}};
    case Scenario::II: return {{0.6, t1}, {0.2, t2}, {0.2, t3}};
    case Scenario::III: return {{w1, {10.0, 12.0, 12.0}}, {1.0 - w1, {24.0, 6.0, 6.0}}};
    case Scenario::IV: return {{1.0, {35.0, 25.0, 40.0}}};
  }
  return {};
}

SelectionIndicators true_structure(Scenario s) {
  switch (s) {
    case Scenario::I: return {1, 1};
    case Scenario::II: return {0, 1};
    case Scenario::III: return {1, 0};
    case Scenario::IV: return {0, 0};
  }
  return {};
}

double true_log_density(Scenario s, const SimplexPoint& y, double x) {
  if (y.dim() != 2) throw DomainError("scenario densities live on the 2-simplex");
  if (!y.is_interior()) throw DomainError("scenario densities are evaluated at interior points only");
  const auto comps = scenario_components(s, x);
  std::vector<double> terms;
  terms.reserve(comps.size());
  for (const auto& c : comps)
    terms.push_back(std::log(c.weight) +
                    dirichlet_log_density(y, DirichletParam({c.alpha.begin(), c.alpha.end()})));
  return log_sum_exp(terms);
}

Dataset sample_dataset(Scenario s, int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample size must be >= 1");
  Rng rng(seed);
  Dataset d;
  d.m = 2;
  d.p = 1;
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform();
    const auto comps = scenario_components(s, x);
    const double u = rng.uniform();
    std::size_t c = 0;
    double acc = comps[0].weight;
    while (u > acc && c + 1 < comps.size()) acc += comps[++c].weight;
    const auto y = rng.dirichlet(comps[c].alpha);
    const double xi[1] = {x};
    d.add(SimplexPoint({y[0], y[1]}), xi);
  }
  return d;
}

DensityGrid truth_grid(Scenario s, const std::vector<Covariate>& x_grid, const SimplexGrid& y_grid) {
  return tabulate(x_grid, y_grid, [s](const Covariate& x, const SimplexGrid& g, std::span<double> out) {
    if (x.size() != 1) throw DomainError("scenario truths take one covariate");
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::exp(true_log_density(s, g.points[i], x[0]));
  });
}

}  // namespace dmbpp
