#include "dmbpp/pdr.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "dmbpp/error.hpp"
#include "dmbpp/slice.hpp"

namespace dmbpp {

std::vector<double> smithson_transform(std::span<const double> full, int n) {
  if (n < 2) throw DomainError("smithson transform needs n >= 2");
  const double D = static_cast<double>(full.size());
  std::vector<double> out(full.size());
  for (std::size_t d = 0; d < full.size(); ++d) out[d] = (full[d] * D * (n - 1) + 1.0) / (D * n);
  return out;
}

SimplexPoint smithson_transform(const SimplexPoint& y, int n) {
  std::vector<double> full(y.dim() + 1);
  for (std::size_t l = 0; l <= y.dim(); ++l) full[l] = y.part(l);
  auto t = smithson_transform(full, n);
  t.pop_back();
  return SimplexPoint(std::move(t));
}

Dataset smithson_transform(const Dataset& data) {
  Dataset out;
  out.m = data.m;
  out.p = data.p;
  const int n = static_cast<int>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out.add(smithson_transform(data.y[i], n), data.covariate(i));
  return out;
}

PdrVariant parse_pdr_variant(const std::string& name) {
  if (name == "full-parts") return PdrVariant::FullParts;
  if (name == "fixed-last") return PdrVariant::FixedLast;
  throw ConfigError("pdr.variant must be 'full-parts' or 'fixed-last' (got '" + name + "')");
}

std::string pdr_variant_name(PdrVariant v) { return v == PdrVariant::FullParts ? "full-parts" : "fixed-last"; }

PdrState PdrState::zeros(int m, int p) {
  PdrState s;
  s.m = m;
  s.p = p;
  s.beta.assign(static_cast<std::size_t>(m + 1) * (p + 1), 0.0);
  return s;
}

void pdr_alpha(const PdrState& s, std::span<const double> x, std::span<double> alpha) {
  for (int l = 0; l <= s.m; ++l) {
    const auto b = s.row(l);
    double eta = b[0];
    for (int r = 0; r < s.p; ++r) eta += b[r + 1] * x[r];
    alpha[l] = std::exp(eta);
  }
}

double pdr_observation_log_density(std::span<const double> log_y, std::span<const double> x, const PdrState& s) {
  std::vector<double> alpha(s.m + 1);
  pdr_alpha(s, x, alpha);
  return dirichlet_log_density(log_y, alpha);
}

double pdr_log_likelihood(const Dataset& data, const PdrState& s) {
  double out = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    out += pdr_observation_log_density(log_parts(data.y[i]), data.covariate(i), s);
  return out;
}

void PdrConfig::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ConfigError("pdr.sigma2 must be finite and > 0");
}

namespace {

void check_design(const Dataset& data) {
  if (data.empty()) return;
  Eigen::MatrixXd X(data.size(), data.p + 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    X(i, 0) = 1.0;
    for (int r = 0; r < data.p; ++r) X(i, r + 1) = data.covariate(i)[r];
  }
  if (Eigen::FullPivLU<Eigen::MatrixXd>(X).rank() < data.p + 1)
    throw RankError("design matrix with intercept is rank deficient");
}

}  // namespace

PdrSamples fit_pdr(const Dataset& raw, const PdrConfig& cfg, const ChainConfig& chain) {
  cfg.validate();
  chain.validate();
  check_design(raw);
  const Dataset data = raw.empty() ? raw : smithson_transform(raw);
  const int m = data.m;
  const int p = data.p;
  const int D = m + 1;
  const std::size_t n = data.size();
  const int free_rows = cfg.variant == PdrVariant::FullParts ? D : m;

  std::vector<double> log_y(n * D);
  for (std::size_t i = 0; i < n; ++i) {
    const auto lp = log_parts(data.y[i]);
    std::copy(lp.begin(), lp.end(), log_y.begin() + i * D);
  }
  auto ly = [&](std::size_t i) { return std::span<const double>(log_y.data() + i * D, D); };

  Rng rng(chain.seed);
  PdrState s = PdrState::zeros(m, p);
  std::vector<double> alpha(n * D, 1.0);  // γ(x_i), kept current
  std::vector<double> trial(D);

  PdrSamples out;
  out.m = m;
  out.p = p;
  out.variant = cfg.variant;
  std::vector<double> ll(n);

  for (int it = 0; it < chain.n_iter; ++it) {
    for (int l = 0; l < free_rows; ++l) {
      for (int r = 0; r <= p; ++r) {
        double& coef = s.row(l)[r];
        const double current = coef;
        auto log_f = [&](double v) {
          double acc = -0.5 * v * v / cfg.sigma2;
          for (std::size_t i = 0; i < n; ++i) {
            std::copy_n(alpha.begin() + i * D, D, trial.begin());
            const double xr = r == 0 ? 1.0 : data.covariate(i)[r - 1];
            trial[l] *= std::exp((v - current) * xr);
            acc += dirichlet_log_density(ly(i), trial);
          }
          return acc;
        };
        const auto res = slice_sample(current, log_f(current), log_f, chain.slice_width, chain.slice_max_steps, rng);
        coef = res.value;
        ++out.diagnostics.slice_updates;
        if (res.failed) ++out.diagnostics.slice_failures;
        for (std::size_t i = 0; i < n; ++i) {
          const double xr = r == 0 ? 1.0 : data.covariate(i)[r - 1];
          alpha[i * D + l] *= std::exp((res.value - current) * xr);
        }
      }
    }
    // refresh from the coefficients so rounding cannot drift across sweeps
    for (std::size_t i = 0; i < n; ++i) pdr_alpha(s, data.covariate(i), std::span<double>(alpha.data() + i * D, D));

    if (it >= chain.burn_in && (it - chain.burn_in + 1) % chain.thin == 0) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        ll[i] = dirichlet_log_density(ly(i), std::span<const double>(alpha.data() + i * D, D));
        total += ll[i];
      }
      double lp = 0.0;
      for (int l = 0; l < free_rows; ++l)
        for (double b : s.row(l)) lp += -0.5 * b * b / cfg.sigma2 - 0.5 * std::log(2.0 * M_PI * cfg.sigma2);
      out.iterations.push_back(it);
      out.states.push_back(s);
      out.loglik.push_back(ll);
      out.log_posterior.push_back(total + lp);
    }
  }
  if (out.loglik.draws() == 0) out.loglik = LogLikMatrix(0, n);
  return out;
}

Dataset sample_pdr_dataset(const PdrState& truth, int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample size must be >= 1");
  Rng rng(seed);
  Dataset d;
  d.m = truth.m;
  d.p = truth.p;
  std::vector<double> x(truth.p), alpha(truth.m + 1);
  for (int i = 0; i < n; ++i) {
    for (double& v : x) v = rng.uniform();
    pdr_alpha(truth, x, alpha);
    auto y = rng.dirichlet(alpha);
    y.pop_back();
    d.add(SimplexPoint(std::move(y)), x);
  }
  return d;
}

DensityGrid pdr_predictive_density(const std::vector<PdrState>& states, const std::vector<Covariate>& x_grid,
                                   const SimplexGrid& y_grid, int jobs) {
  if (states.empty()) throw DomainError("predictive density needs at least one retained state");
  std::vector<std::vector<double>> log_y;
  for (const auto& y : y_grid.points) log_y.push_back(log_parts(y));
  const double inv_t = 1.0 / static_cast<double>(states.size());
  return tabulate(x_grid, y_grid, [&](const Covariate& x, const SimplexGrid&, std::span<double> out) {
    std::vector<double> alpha(states.front().m + 1);
    for (const auto& s : states) {
      pdr_alpha(s, x, alpha);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += std::exp(dirichlet_log_density(log_y[i], alpha)) * inv_t;
    }
  }, jobs);
}

}  // namespace dmbpp
