#include "dmbpp/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "dmbpp/error.hpp"
#include "dmbpp/inference.hpp"
#include "dmbpp/pdr.hpp"
#include "dmbpp/sampler.hpp"

namespace dmbpp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

RunConfig resolve_config(const std::optional<fs::path>& path) {
  if (!path) return RunConfig{};
  return load_config(*path);
}

std::vector<Covariate> x_grid_for(const GridConfig& g, int p) {
  if (p != 1) throw ConfigError("density grids are supported for a single covariate only (p = " + std::to_string(p) + ")");
  return covariate_grid(g.x_points);
}

fs::path write_to(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  write_text(p, text);
  return p;
}

template <class F>
std::string render(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

}  // namespace

int cmd_simulate(const SimulateOptions& o, std::ostream& log) {
  const auto t0 = Clock::now();
  const Scenario s = parse_scenario(o.scenario);
  const Dataset d = sample_dataset(s, o.n, o.seed);
  const auto data = write_to(o.out, "data.csv", render([&](std::ostream& os) { write_dataset_csv(os, d); }));
  const std::string settings = "{\"scenario\":\"" + scenario_name(s) + "\",\"n\":" + std::to_string(o.n) + "}";
  write_manifest(o.out, {"simulate", sha256_hex(settings), o.seed, {}, {data}, seconds_since(t0)});
  log << "wrote " << d.size() << " observations of scenario " << scenario_name(s) << " to " << data.string() << '\n';
  return 0;
}

int cmd_fit(const FitOptions& o, std::ostream& log) {
  const auto t0 = Clock::now();
  RunConfig cfg = resolve_config(o.config);
  if (o.model) cfg.model = *o.model;
  if (o.seed) cfg.chain.seed = *o.seed;
  cfg.validate();
  const Dataset d = read_dataset_csv(o.data);
  const std::string config_text = config_to_json(cfg);

  std::vector<fs::path> outputs;
  outputs.push_back(write_to(o.out, "config.json", config_text));
  if (cfg.model == "dmbpp") {
    const auto s = run_chain(d, cfg.prior, cfg.chain);
    outputs.push_back(write_to(o.out, "samples.jsonl", render([&](std::ostream& os) { write_samples_jsonl(os, s); })));
    outputs.push_back(
        write_to(o.out, "loglik.csv", render([&](std::ostream& os) { write_loglik_csv(os, s.loglik, s.iterations); })));
    outputs.push_back(write_to(o.out, "traces.csv", render([&](std::ostream& os) { write_traces_csv(os, s); })));
    const auto f = gamma_frequencies(s);
    char buf[160];
    std::snprintf(buf, sizeof buf, "gamma frequencies (1,1) %.3f  (0,1) %.3f  (1,0) %.3f  (0,0) %.3f\n", f[0], f[1],
                  f[2], f[3]);
    log << "retained " << s.states.size() << " draws; k acceptance " << s.diagnostics.k_acceptance_rate() << '\n'
        << buf;
  } else {
    const auto s = fit_pdr(d, cfg.pdr, cfg.chain);
    outputs.push_back(write_to(o.out, "samples.jsonl", render([&](std::ostream& os) { write_samples_jsonl(os, s); })));
    outputs.push_back(
        write_to(o.out, "loglik.csv", render([&](std::ostream& os) { write_loglik_csv(os, s.loglik, s.iterations); })));
    outputs.push_back(write_to(o.out, "traces.csv", render([&](std::ostream& os) {
      os << "iter,log_posterior\n";
      for (std::size_t t = 0; t < s.states.size(); ++t)
        os << s.iterations[t] << ',' << format_real(s.log_posterior[t]) << '\n';
    })));
    log << "retained " << s.states.size() << " pdr draws\n";
  }
  write_manifest(o.out, {"fit", sha256_hex(config_text), cfg.chain.seed, {o.data}, outputs, seconds_since(t0)});
  return 0;
}

namespace {

DensityGrid predict_from(const fs::path& fit_dir, const GridConfig& grid, int jobs) {
  const auto loaded = read_samples_jsonl(fit_dir / "samples.jsonl");
  const SimplexGrid y_grid = SimplexGrid::interior(grid.spacing);
  if (loaded.dmbpp) return predictive_density(*loaded.dmbpp, x_grid_for(grid, loaded.dmbpp->dims.p), y_grid, jobs);
  return pdr_predictive_density(loaded.pdr->states, x_grid_for(grid, loaded.pdr->p), y_grid, jobs);
}

GridConfig grid_settings(const fs::path& fit_dir, const std::optional<fs::path>& config) {
  if (config) return load_config(*config).grid;
  const fs::path saved = fit_dir / "config.json";
  if (fs::exists(saved)) return load_config(saved).grid;
  return GridConfig{};
}

}  // namespace

int cmd_predict(const PredictOptions& o, std::ostream& log) {
  const auto t0 = Clock::now();
  const GridConfig grid = grid_settings(o.fit, o.config);
  const DensityGrid g = predict_from(o.fit, grid, o.jobs);
  const auto path = write_to(o.out, "grid.csv", render([&](std::ostream& os) { write_grid_csv(os, g); }));
  std::vector<fs::path> inputs{o.fit / "samples.jsonl"};
  if (o.config) inputs.push_back(*o.config);
  write_manifest(o.out, {"predict", "", 0, inputs, {path}, seconds_since(t0)});
  log << "wrote " << g.rows() << " x " << g.cols() << " density grid to " << path.string() << '\n';
  return 0;
}

int cmd_evaluate(const EvaluateOptions& o, std::ostream& log) {
  const auto t0 = Clock::now();
  if (o.scenario.has_value() == o.truth_grid.has_value())
    throw ConfigError("evaluate needs exactly one of --scenario and --truth-grid");
  const GridConfig grid = grid_settings(o.fit, o.config);
  const DensityGrid est = predict_from(o.fit, grid, o.jobs);

  std::vector<fs::path> inputs{o.fit / "samples.jsonl", o.fit / "loglik.csv"};
  std::vector<fs::path> outputs;
  DensityGrid truth;
  if (o.scenario) {
    truth = truth_grid(parse_scenario(*o.scenario), est.x_grid, est.y_grid);
    outputs.push_back(write_to(o.out, "truth.csv", render([&](std::ostream& os) { write_grid_csv(os, truth); })));
  } else {
    const int m = static_cast<int>(est.y_grid.points.front().dim());
    const int p = static_cast<int>(est.x_grid.front().size());
    truth = read_grid_csv(*o.truth_grid, m, p);
    inputs.push_back(*o.truth_grid);
  }
  outputs.insert(outputs.begin(), write_to(o.out, "grid.csv", render([&](std::ostream& os) { write_grid_csv(os, est); })));

  Metrics mx;
  mx.il1 = integrated_l1(est, truth);
  mx.linf = l_infinity(est, truth);
  const auto crit = fit_criteria(read_loglik_csv(o.fit / "loglik.csv"));
  mx.lpml = crit.lpml;
  mx.neg_n_waic = crit.neg_n_waic;
  const std::string metrics = metrics_json(mx);
  outputs.push_back(write_to(o.out, "metrics.json", metrics));
  if (o.config) inputs.push_back(*o.config);
  write_manifest(o.out, {"evaluate", "", 0, inputs, outputs, seconds_since(t0)});
  log << metrics;
  return 0;
}

int cmd_compare(const CompareOptions& o, std::ostream& log) {
  if (o.fits.size() < 2) throw ConfigError("compare needs at least two fits");
  struct Row {
    std::string name;
    FitCriteria c;
  };
  std::vector<Row> rows;
  for (const auto& f : o.fits) rows.push_back({f.string(), fit_criteria(read_loglik_csv(f / "loglik.csv"))});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.c.lpml > b.c.lpml; });

  std::ostringstream csv;
  csv << "rank,fit,lpml,neg_n_waic,excluded_draws\n";
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-4s %-40s %16s %16s\n", "rank", "fit", "LPML", "-nWAIC");
  log << buf;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    std::snprintf(buf, sizeof buf, "%-4zu %-40s %16.6f %16.6f\n", r + 1, row.name.c_str(), row.c.lpml, row.c.neg_n_waic);
    log << buf;
    csv << r + 1 << ',' << row.name << ',' << format_real(row.c.lpml) << ',' << format_real(row.c.neg_n_waic) << ','
        << row.c.excluded_draws << '\n';
  }
  if (o.out) {
    const auto t0 = Clock::now();
    std::vector<fs::path> inputs;
    for (const auto& f : o.fits) inputs.push_back(f / "loglik.csv");
    const auto path = write_to(*o.out, "criteria.csv", csv.str());
    write_manifest(*o.out, {"compare", "", 0, inputs, {path}, seconds_since(t0)});
  }
  return 0;
}

StudyScale parse_scale(const std::string& s) {
  if (s == "desk") return StudyScale::Desk;
  if (s == "full") return StudyScale::Full;
  throw ConfigError("scale must be 'desk' or 'full' (got '" + s + "')");
}

StudyPlan study_plan(StudyScale scale) {
  if (scale == StudyScale::Desk) return {10, {250}, StudyScale::Desk};
  return {100, {250, 500, 1000}, StudyScale::Full};
}

ChainConfig StudyPlan::chain_for(int n) const {
  ChainConfig c;
  if (scale == StudyScale::Desk) {
    c.n_iter = 11000;
    c.burn_in = 1000;
  } else {
    c.n_iter = 110000;
    c.burn_in = n >= 1000 ? 50000 : 10000;
  }
  c.thin = 10;
  return c;
}

int cmd_replicate_study(const StudyOptions& o, std::ostream& log) {
  const auto t0 = Clock::now();
  const RunConfig base = resolve_config(o.config);
  StudyPlan plan = study_plan(o.scale);
  if (o.replicates) {
    if (*o.replicates < 1) throw ConfigError("replicates must be >= 1");
    plan.replicates = *o.replicates;
  }
  if (!o.sizes.empty()) plan.sizes = o.sizes;

  std::vector<Scenario> scenarios;
  for (const auto& s : o.scenarios) scenarios.push_back(parse_scenario(s));
  if (scenarios.empty()) scenarios.assign(kAllScenarios.begin(), kAllScenarios.end());
  std::vector<std::string> priors = o.priors.empty() ? std::vector<std::string>{"prior-I", "prior-II"} : o.priors;
  for (const auto& p : priors) named_prior(p);

  struct Task {
    Scenario scenario;
    std::string prior;
    int n;
    int replicate;
    std::uint64_t data_seed;
    std::uint64_t chain_seed;
  };
  struct Result {
    bool ok = false;
    double il1 = 0.0;
    SelectionIndicators mode;
    std::string error;
  };
  std::vector<Task> tasks;
  for (Scenario s : scenarios)
    for (int n : plan.sizes)
      for (int r = 0; r < plan.replicates; ++r) {
        const std::uint64_t data_seed =
            split_seed(split_seed(o.seed, 1000u * static_cast<unsigned>(s) + static_cast<unsigned>(n)), r);
        for (std::size_t pi = 0; pi < priors.size(); ++pi)
          tasks.push_back({s, priors[pi], n, r, data_seed, split_seed(data_seed, 1 + pi)});
      }

  const SimplexGrid y_grid = SimplexGrid::interior(base.grid.spacing);
  const auto x_grid = covariate_grid(base.grid.x_points);
  std::vector<Result> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      Result res;
      try {
        const Dataset d = sample_dataset(t.scenario, t.n, t.data_seed);
        PriorConfig prior = named_prior(t.prior);
        prior.lambda = base.prior.lambda;
        prior.sigma2_eta = base.prior.sigma2_eta;
        prior.sigma2_z = base.prior.sigma2_z;
        prior.tau1_eta = base.prior.tau1_eta;
        prior.tau2_eta = base.prior.tau2_eta;
        prior.tau1_z = base.prior.tau1_z;
        prior.tau2_z = base.prior.tau2_z;
        prior.N = base.prior.N;
        prior.k_max = base.prior.k_max;
        ChainConfig chain = plan.chain_for(t.n);
        chain.seed = t.chain_seed;
        const auto samples = run_chain(d, prior, chain);
        const auto est = predictive_density(samples, x_grid, y_grid);
        res.il1 = integrated_l1(est, truth_grid(t.scenario, x_grid, y_grid));
        res.mode = posterior_mode_gammas(samples);
        res.ok = true;
      } catch (const std::exception& e) {
        res.error = e.what();
      }
      results[i] = std::move(res);
      std::lock_guard<std::mutex> lock(log_mutex);
      log << "replicate " << t.replicate << " scenario " << scenario_name(t.scenario) << ' ' << t.prior
          << " n=" << t.n << (results[i].ok ? " done" : " FAILED: " + results[i].error) << '\n';
    }
  };
  const int workers = std::max(1, std::min<int>(o.jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  struct Cell {
    double il1_sum = 0.0;
    int agree = 0;
    int ok = 0;
  };
  std::map<std::tuple<int, int, int>, Cell> cells;  // (scenario, prior index, n)
  std::ostringstream reps, fails;
  reps << "scenario,prior,n,replicate,il1,gamma_eta,gamma_z,agrees\n";
  fails << "scenario,prior,n,replicate,error\n";
  std::size_t failed = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    const Result& r = results[i];
    const int pidx = static_cast<int>(std::find(priors.begin(), priors.end(), t.prior) - priors.begin());
    Cell& c = cells[{static_cast<int>(t.scenario), pidx, t.n}];
    if (!r.ok) {
      ++failed;
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      fails << scenario_name(t.scenario) << ',' << t.prior << ',' << t.n << ',' << t.replicate << ',' << msg << '\n';
      continue;
    }
    const bool agrees = r.mode == true_structure(t.scenario);
    ++c.ok;
    c.il1_sum += r.il1;
    c.agree += agrees;
    reps << scenario_name(t.scenario) << ',' << t.prior << ',' << t.n << ',' << t.replicate << ','
         << format_real(r.il1) << ',' << r.mode.eta << ',' << r.mode.z << ',' << (agrees ? 1 : 0) << '\n';
  }
  std::ostringstream t2, t3;
  t2 << "scenario,prior,n,mean_IL1,replicates\n";
  t3 << "scenario,prior,n,agreement,replicates\n";
  for (const auto& [key, c] : cells) {
    const auto [s, pidx, n] = key;
    const std::string head = scenario_name(static_cast<Scenario>(s)) + "," + priors[pidx] + "," + std::to_string(n) + ",";
    const std::string il1 = c.ok ? format_real(c.il1_sum / c.ok) : "nan";
    const std::string agr = c.ok ? format_real(static_cast<double>(c.agree) / c.ok) : "nan";
    t2 << head << il1 << ',' << c.ok << '\n';
    t3 << head << agr << ',' << c.ok << '\n';
  }
  std::vector<fs::path> outputs{write_to(o.out, "table2.csv", t2.str()), write_to(o.out, "table3.csv", t3.str()),
                                write_to(o.out, "replicates.csv", reps.str()),
                                write_to(o.out, "failures.csv", fails.str())};
  std::vector<fs::path> inputs;
  if (o.config) inputs.push_back(*o.config);
  write_manifest(o.out, {"replicate-study", sha256_hex(config_to_json(base)), o.seed, inputs, outputs,
                         seconds_since(t0)});
  log << tasks.size() - failed << " of " << tasks.size() << " replicates succeeded\n" << t3.str();
  return failed == tasks.size() ? 1 : 0;
}

}  // namespace dmbpp
