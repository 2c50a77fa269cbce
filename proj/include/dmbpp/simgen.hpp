#pragma once

// The four simulation truths on the 2-simplex with one covariate x in (0,1):
//
//   w1(x) = x / (4 - 3x)
//   θ1(x) = (25 - 20x, 5 + 25x, 3)
//   θ2(x) = (5, 5 + 15x, 30 - 17x)
//   θ3(x) = (5 + 9x, 30 + 9x, 3 + 9x)
//
//   I    w1 dir(θ1) + (1 - w1) dir(θ2)                 weights and atoms vary
//   II   0.6 dir(θ1) + 0.2 dir(θ2) + 0.2 dir(θ3)       atoms vary
//   III  w1 dir(10,12,12) + (1 - w1) dir(24,6,6)       weights vary
//   IV   dir(35,25,40)                                 no dependence

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dmbpp/data.hpp"
#include "dmbpp/inference.hpp"
#include "dmbpp/model.hpp"

namespace dmbpp {

enum class Scenario { I, II, III, IV };

inline constexpr std::array<Scenario, 4> kAllScenarios{Scenario::I, Scenario::II, Scenario::III, Scenario::IV};

/// Accepts "I".."IV" and "1".."4". Throws ConfigError otherwise.
Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);

struct ScenarioComponent {
  double weight;
  std::array<double, 3> alpha;
};

double scenario_w1(double x);

/// Mixture components at x. Throws DomainError unless 0 < x < 1.
std::vector<ScenarioComponent> scenario_components(Scenario s, double x);

/// (γη, γz) of the data-generating structure.
SelectionIndicators true_structure(Scenario s);

/// Throws DomainError unless 0 < x < 1 and y is strictly interior.
double true_log_density(Scenario s, const SimplexPoint& y, double x);

/// n draws with x ~ U(0,1), a component picked by its weight at x and y
/// from that Dirichlet. Deterministic in the seed.
Dataset sample_dataset(Scenario s, int n, std::uint64_t seed);

/// exp(true_log_density) on the grid.
DensityGrid truth_grid(Scenario s, const std::vector<Covariate>& x_grid, const SimplexGrid& y_grid);

}  // namespace dmbpp
