#include <iostream>

#include <CLI11.hpp>

#include "dmbpp/cli.hpp"
#include "dmbpp/error.hpp"

using namespace dmbpp;

int main(int argc, char** argv) {
  CLI::App app{"Density regression for compositional data with dependent Bernstein polynomial mixtures"};
  app.require_subcommand(1);

  SimulateOptions sim;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Draw a dataset from a simulation scenario");
  simulate->add_option("--scenario", sim.scenario, "I, II, III or IV")->required();
  simulate->add_option("-n,--n", sim.n, "Sample size")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_option("--out", sim_out, "Output directory")->required();

  FitOptions fit;
  std::string fit_data, fit_out, fit_config, fit_model;
  std::uint64_t fit_seed = 0;
  auto* fitc = app.add_subcommand("fit", "Run the posterior sampler on a data file");
  fitc->add_option("--data", fit_data, "Data CSV (y1..ym,x1..xp)")->required()->check(CLI::ExistingFile);
  auto* fit_config_opt = fitc->add_option("--config", fit_config, "Config JSON")->check(CLI::ExistingFile);
  auto* fit_model_opt = fitc->add_option("--model", fit_model, "dmbpp or pdr")->check(CLI::IsMember({"dmbpp", "pdr"}));
  auto* fit_seed_opt = fitc->add_option("--seed", fit_seed, "Chain seed (overrides chain.seed)");
  fitc->add_option("--out", fit_out, "Output directory")->required();

  PredictOptions pred;
  std::string pred_fit, pred_out, pred_config;
  auto* predict = app.add_subcommand("predict", "Posterior predictive density on the evaluation grid");
  predict->add_option("--fit", pred_fit, "Output directory of fit")->required()->check(CLI::ExistingDirectory);
  auto* pred_config_opt = predict->add_option("--config", pred_config, "Config JSON for grid settings");
  predict->add_option("--jobs", pred.jobs, "Worker threads")->check(CLI::PositiveNumber);
  predict->add_option("--out", pred_out, "Output directory")->required();

  EvaluateOptions ev;
  std::string ev_fit, ev_out, ev_config, ev_scenario, ev_truth;
  auto* evaluate = app.add_subcommand("evaluate", "Error metrics against a true density and fit criteria");
  evaluate->add_option("--fit", ev_fit, "Output directory of fit")->required()->check(CLI::ExistingDirectory);
  auto* ev_scenario_opt = evaluate->add_option("--scenario", ev_scenario, "Simulation scenario supplying the truth");
  auto* ev_truth_opt = evaluate->add_option("--truth-grid", ev_truth, "Density-grid CSV of the truth");
  ev_scenario_opt->excludes(ev_truth_opt);
  auto* ev_config_opt = evaluate->add_option("--config", ev_config, "Config JSON for grid settings");
  evaluate->add_option("--jobs", ev.jobs, "Worker threads")->check(CLI::PositiveNumber);
  evaluate->add_option("--out", ev_out, "Output directory")->required();

  CompareOptions cmp;
  std::vector<std::string> cmp_fits;
  std::string cmp_out;
  auto* compare = app.add_subcommand("compare", "Rank fits by LPML and -nWAIC");
  compare->add_option("--fit", cmp_fits, "Fit output directories (two or more)")->required()->expected(2, -1);
  auto* cmp_out_opt = compare->add_option("--out", cmp_out, "Output directory for criteria.csv");

  StudyOptions st;
  std::string st_scale = "desk", st_out, st_config;
  int st_reps = 0;
  auto* study = app.add_subcommand("replicate-study", "Monte Carlo study of fit quality and structure recovery");
  study->add_option("--scale", st_scale, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  study->add_option("--seed", st.seed, "Master seed");
  study->add_option("--jobs", st.jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* st_config_opt = study->add_option("--config", st_config, "Config JSON for prior and grid settings");
  auto* st_reps_opt = study->add_option("--replicates", st_reps, "Override the number of replicates");
  study->add_option("--scenarios", st.scenarios, "Subset of scenarios");
  study->add_option("--priors", st.priors, "Subset of prior-I, prior-II");
  study->add_option("--sizes", st.sizes, "Override the sample sizes");
  study->add_option("--out", st_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      sim.out = sim_out;
      return cmd_simulate(sim, std::cout);
    }
    if (*fitc) {
      fit.data = fit_data;
      fit.out = fit_out;
      if (*fit_config_opt) fit.config = fit_config;
      if (*fit_model_opt) fit.model = fit_model;
      if (*fit_seed_opt) fit.seed = fit_seed;
      return cmd_fit(fit, std::cout);
    }
    if (*predict) {
      pred.fit = pred_fit;
      pred.out = pred_out;
      if (*pred_config_opt) pred.config = pred_config;
      return cmd_predict(pred, std::cout);
    }
    if (*evaluate) {
      ev.fit = ev_fit;
      ev.out = ev_out;
      if (*ev_scenario_opt) ev.scenario = ev_scenario;
      if (*ev_truth_opt) ev.truth_grid = ev_truth;
      if (*ev_config_opt) ev.config = ev_config;
      return cmd_evaluate(ev, std::cout);
    }
    if (*compare) {
      for (const auto& f : cmp_fits) cmp.fits.emplace_back(f);
      if (*cmp_out_opt) cmp.out = cmp_out;
      return cmd_compare(cmp, std::cout);
    }
    if (*study) {
      st.scale = parse_scale(st_scale);
      st.out = st_out;
      if (*st_config_opt) st.config = st_config;
      if (*st_reps_opt) st.replicates = st_reps;
      return cmd_replicate_study(st, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
