#pragma once

// Subcommands behind the dmbpp executable. Every command writes its
// artifacts and a manifest.json into an output directory and returns a
// process exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dmbpp/io.hpp"
#include "dmbpp/simgen.hpp"

namespace dmbpp {

struct SimulateOptions {
  std::string scenario = "IV";
  int n = 250;
  std::uint64_t seed = 1;
  fs::path out;
};
int cmd_simulate(const SimulateOptions& o, std::ostream& log);

struct FitOptions {
  fs::path data;
  std::optional<fs::path> config;  // built-in defaults when unset
  std::optional<std::string> model;    // overrides the config's model
  std::optional<std::uint64_t> seed;   // overrides chain.seed
  fs::path out;
};
/// Writes samples.jsonl, loglik.csv, traces.csv, config.json.
int cmd_fit(const FitOptions& o, std::ostream& log);

struct PredictOptions {
  fs::path fit;  // output directory of fit
  std::optional<fs::path> config;  // grid settings; defaults to the fit's config.json
  int jobs = 1;
  fs::path out;
};
/// Writes grid.csv.
int cmd_predict(const PredictOptions& o, std::ostream& log);

struct EvaluateOptions {
  fs::path fit;
  std::optional<std::string> scenario;
  std::optional<fs::path> truth_grid;
  std::optional<fs::path> config;
  int jobs = 1;
  fs::path out;
};
/// Writes grid.csv, truth.csv (scenario truths only) and metrics.json.
int cmd_evaluate(const EvaluateOptions& o, std::ostream& log);

struct CompareOptions {
  std::vector<fs::path> fits;
  std::optional<fs::path> out;
};
/// Prints fits ranked by LPML; writes criteria.csv when out is set.
int cmd_compare(const CompareOptions& o, std::ostream& log);

enum class StudyScale { Desk, Full };
StudyScale parse_scale(const std::string& s);

struct StudyOptions {
  StudyScale scale = StudyScale::Desk;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::optional<fs::path> config;  // prior and grid settings; chain lengths come from the scale
  std::optional<int> replicates;
  std::vector<std::string> scenarios;  // empty means all four
  std::vector<std::string> priors;     // empty means prior-I and prior-II
  std::vector<int> sizes;              // empty means the scale's sizes
  fs::path out;
};

struct StudyPlan {
  int replicates;
  std::vector<int> sizes;
  /// Chain settings for sample size n.
  ChainConfig chain_for(int n) const;
  StudyScale scale;
};
StudyPlan study_plan(StudyScale scale);

/// Writes table2.csv (mean IL1), table3.csv (structure agreement),
/// replicates.csv and failures.csv. Returns non-zero only when every
/// replicate failed.
int cmd_replicate_study(const StudyOptions& o, std::ostream& log);

}  // namespace dmbpp
