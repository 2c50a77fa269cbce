#include "dmbpp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dmbpp/error.hpp"
#include "dmbpp/slice.hpp"

namespace dmbpp {

LogLikMatrix::LogLikMatrix(std::size_t draws, std::size_t observations, std::vector<double> values)
    : rows_(draws), cols_(observations), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) throw DomainError("log-likelihood matrix size mismatch");
}

void LogLikMatrix::push_back(std::span<const double> draw) {
  if (rows_ == 0 && values_.empty()) cols_ = draw.size();
  if (draw.size() != cols_) throw DomainError("log-likelihood row has the wrong length");
  values_.insert(values_.end(), draw.begin(), draw.end());
  ++rows_;
}

SliceResult slice_sample(double x0, double log_f0, const std::function<double(double)>& log_f,
                         double width, int max_steps, Rng& rng) {
  if (!(log_f0 > kNegInf)) return {x0, log_f0, true};
  const double level = log_f0 + std::log(rng.uniform());
  double lo = x0 - width * rng.uniform();
  double hi = lo + width;
  int left = static_cast<int>(std::floor(max_steps * rng.uniform()));
  int right = max_steps - 1 - left;
  while (left > 0 && log_f(lo) > level) {
    lo -= width;
    --left;
  }
  while (right > 0 && log_f(hi) > level) {
    hi += width;
    --right;
  }
  for (int attempt = 0; attempt < 200; ++attempt) {
    const double x1 = lo + rng.uniform() * (hi - lo);
    const double f1 = log_f(x1);
    if (f1 > level) return {x1, f1, false};
    if (x1 < x0) lo = x1; else hi = x1;
  }
  return {x0, log_f0, true};
}

void ChainConfig::validate() const {
  if (n_iter < 1) throw ConfigError("chain.n_iter must be >= 1");
  if (burn_in < 0 || burn_in >= n_iter) throw ConfigError("chain.burn_in must lie in [0, n_iter)");
  if (thin < 1) throw ConfigError("chain.thin must be >= 1");
  if (!(slice_width > 0.0)) throw ConfigError("chain.slice_width must be > 0");
  if (slice_max_steps < 1) throw ConfigError("chain.slice_max_steps must be >= 1");
  if (k_proposal_halfwidth < 1) throw ConfigError("chain.k_proposal_halfwidth must be >= 1");
}

std::size_t ChainConfig::retained() const {
  return static_cast<std::size_t>((n_iter - burn_in) / thin);
}

std::array<double, 4> gamma_frequencies(const PosteriorSamples& samples) {
  std::array<double, 4> f{};
  for (const auto& g : samples.gamma_trace) f[g.category()] += 1.0;
  if (!samples.gamma_trace.empty())
    for (double& v : f) v /= static_cast<double>(samples.gamma_trace.size());
  return f;
}

SelectionIndicators posterior_mode_gammas(const PosteriorSamples& samples) {
  const auto f = gamma_frequencies(samples);
  return SelectionIndicators::from_category(static_cast<int>(std::max_element(f.begin(), f.end()) - f.begin()));
}

namespace {

PriorConfig with_covariance(const Dataset& data, PriorConfig prior) {
  prior.validate();
  if (prior.xtx_inv.size() == 0 && data.p > 0) {
    if (data.empty()) throw ConfigError("prior.xtx_inv is required when there are no observations");
    prior.xtx_inv = zellner_covariance(data);
  }
  if (data.p == 0) prior.xtx_inv.resize(0, 0);
  if (prior.xtx_inv.rows() != data.p) throw ConfigError("prior.xtx_inv must be p x p");
  return prior;
}

}  // namespace

ModelContext::ModelContext(const Dataset& data, PriorConfig prior)
    : data_(&data), prior_(with_covariance(data, std::move(prior))), slopes_(prior_.xtx_inv) {
  log_y_.reserve(data.size() * (data.m + 1));
  for (const auto& y : data.y) {
    const auto lp = log_parts(y);
    log_y_.insert(log_y_.end(), lp.begin(), lp.end());
  }
}

BlockMask BlockMask::all(int N) {
  BlockMask m;
  m.weight.assign(N, 1);
  m.atom.assign(N, 1);
  return m;
}

BlockMask informed_blocks(const ModelState& s) {
  const int N = s.dims.N;
  BlockMask mask;
  mask.weight.assign(N, 0);
  mask.atom.assign(N, 0);
  int top = -1;
  for (int a : s.allocations) {
    mask.atom[a] = 1;
    top = std::max(top, a);
  }
  for (int j = 0; j <= top && j < N - 1; ++j) mask.weight[j] = 1;
  return mask;
}

ModelState initial_state(const ModelContext& ctx, Rng& rng) {
  const auto& prior = ctx.prior();
  const int k = std::clamp(static_cast<int>(std::lround(prior.lambda)), 1, prior.k_max);
  ModelState s = ModelState::zeros(ctx.dims(), k);
  s.gammas = {1, 1};
  for (double& b : s.atoms.intercept) b = rng.normal();
  return s;
}

std::vector<double> allocation_log_probs(const ModelState& s, const ModelContext& ctx, std::size_t i) {
  const int N = s.dims.N;
  const int m = s.dims.m;
  const auto x = ctx.data().covariate(i);
  const auto ly = ctx.log_y(i);
  std::vector<double> lp(N);
  log_stick_weights(s, x, lp);
  std::vector<double> theta(m);
  std::vector<int> cell(m);
  for (int j = 0; j < N; ++j) {
    if (lp[j] == kNegInf) continue;
    atom_location(s, j, x, theta);
    lattice_cell(s.k, theta, cell);
    lp[j] += lattice_log_density(ly, s.k, cell);
  }
  const double norm = log_sum_exp(lp);
  if (norm == kNegInf)
    throw DegenerateAllocation(i, "observation " + std::to_string(i) +
                                      " has zero density under every mixture component");
  for (double& v : lp) v -= norm;
  return lp;
}

void update_allocations(ModelState& s, const ModelContext& ctx, Rng& rng) {
  const std::size_t n = ctx.data().size();
  // compute every row before mutating so a degenerate row leaves s untouched
  std::vector<std::vector<double>> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = allocation_log_probs(s, ctx, i);
  s.allocations.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.allocations[i] = static_cast<int>(rng.categorical_log(rows[i]));
}

namespace {

double log_normal_kernel(double v, double var) { return -0.5 * v * v / var; }

std::vector<std::vector<std::size_t>> members_by_component(const ModelState& s) {
  std::vector<std::vector<std::size_t>> members(s.dims.N);
  for (std::size_t i = 0; i < s.allocations.size(); ++i) members[s.allocations[i]].push_back(i);
  return members;
}

void draw_weight_block(ModelState& s, const ModelContext& ctx, int j, Rng& rng) {
  const auto& prior = ctx.prior();
  s.weights.intercept[j] = rng.normal(0.0, std::sqrt(prior.sigma2_eta));
  if (s.dims.p > 0) ctx.slopes().draw(prior.slope_scale_eta(s.gammas.eta), rng, s.weight_slope(j));
}

void draw_atom_block(ModelState& s, const ModelContext& ctx, int j, Rng& rng) {
  const auto& prior = ctx.prior();
  for (int l = 0; l < s.dims.m; ++l) {
    s.atom_intercept(j, l) = rng.normal(0.0, std::sqrt(prior.sigma2_z));
    if (s.dims.p > 0) ctx.slopes().draw(prior.slope_scale_z(s.gammas.z), rng, s.atom_slope(j, l));
  }
}

// Coefficient r of a block: r < 0 is the intercept, otherwise slope entry r.
struct Coordinate {
  double* value;
  int r;
};

void slice_weight_block(ModelState& s, const ModelContext& ctx, int j,
                        const std::vector<std::vector<std::size_t>>& members, const ChainConfig& cfg,
                        Rng& rng, SamplerDiagnostics& diag) {
  const auto& data = ctx.data();
  const auto& prior = ctx.prior();
  const int p = s.dims.p;
  const double tau = prior.slope_scale_eta(s.gammas.eta);

  // observations with s_i >= j: the first `hits` have s_i == j
  std::vector<std::size_t> obs(members[j].begin(), members[j].end());
  const std::size_t hits = obs.size();
  for (int c = j + 1; c < s.dims.N; ++c) obs.insert(obs.end(), members[c].begin(), members[c].end());
  std::vector<double> base(obs.size());

  auto slope = s.weight_slope(j);
  std::vector<double> block(slope.begin(), slope.end());

  for (int r = -1; r < p; ++r) {
    Coordinate coord{r < 0 ? &s.weights.intercept[j] : &slope[r], r};
    const double current = *coord.value;
    for (std::size_t a = 0; a < obs.size(); ++a) {
      const double xr = r < 0 ? 1.0 : data.covariate(obs[a])[r];
      base[a] = weight_predictor(s, j, data.covariate(obs[a])) - current * xr;
    }
    auto log_f = [&](double v) {
      double out = 0.0;
      for (std::size_t a = 0; a < obs.size(); ++a) {
        const double xr = r < 0 ? 1.0 : data.covariate(obs[a])[r];
        const double eta = base[a] + v * xr;
        out += a < hits ? log_link_weight(eta) : log_link_weight(-eta);
      }
      if (r < 0) return out + log_normal_kernel(v, prior.sigma2_eta);
      block[r] = v;
      return out + ctx.slopes().log_density(block, tau);
    };
    const double f0 = log_f(current);
    const auto res = slice_sample(current, f0, log_f, cfg.slice_width, cfg.slice_max_steps, rng);
    *coord.value = res.value;
    if (r >= 0) block[r] = res.value;
    ++diag.slice_updates;
    if (res.failed) ++diag.slice_failures;
  }
}

void slice_atom_block(ModelState& s, const ModelContext& ctx, int j, const std::vector<std::size_t>& obs,
                      const ChainConfig& cfg, Rng& rng, SamplerDiagnostics& diag) {
  const auto& data = ctx.data();
  const auto& prior = ctx.prior();
  const int p = s.dims.p;
  const int m = s.dims.m;
  const int k = s.k;
  const double tau = prior.slope_scale_z(s.gammas.z);

  // z_jl'(x_i) for every member and coordinate, kept current across updates
  std::vector<double> z(obs.size() * m);
  for (std::size_t a = 0; a < obs.size(); ++a) {
    const auto x = data.covariate(obs[a]);
    for (int l = 0; l < m; ++l) {
      double v = s.atom_intercept(j, l);
      const auto sl = s.atom_slope(j, l);
      for (int r = 0; r < p; ++r) v += sl[r] * x[r];
      z[a * m + l] = v;
    }
  }
  std::vector<double> zi(m), theta(m);
  std::vector<int> cell(m);

  for (int l = 0; l < m; ++l) {
    auto slope = s.atom_slope(j, l);
    std::vector<double> block(slope.begin(), slope.end());
    for (int r = -1; r < p; ++r) {
      double* value = r < 0 ? &s.atom_intercept(j, l) : &slope[r];
      const double current = *value;
      auto log_f = [&](double v) {
        double out = 0.0;
        for (std::size_t a = 0; a < obs.size(); ++a) {
          const double xr = r < 0 ? 1.0 : data.covariate(obs[a])[r];
          std::copy_n(z.begin() + a * m, m, zi.begin());
          zi[l] += (v - current) * xr;
          link_atom(zi, theta);
          lattice_cell(k, theta, cell);
          out += lattice_log_density(ctx.log_y(obs[a]), k, cell);
          if (out == kNegInf) return out;
        }
        if (r < 0) return out + log_normal_kernel(v, prior.sigma2_z);
        block[r] = v;
        return out + ctx.slopes().log_density(block, tau);
      };
      const double f0 = log_f(current);
      const auto res = slice_sample(current, f0, log_f, cfg.slice_width, cfg.slice_max_steps, rng);
      *value = res.value;
      if (r >= 0) block[r] = res.value;
      for (std::size_t a = 0; a < obs.size(); ++a) {
        const double xr = r < 0 ? 1.0 : data.covariate(obs[a])[r];
        z[a * m + l] += (res.value - current) * xr;
      }
      ++diag.slice_updates;
      if (res.failed) ++diag.slice_failures;
    }
  }
}

}  // namespace

void update_coefficients_slice(ModelState& s, const ModelContext& ctx, const ChainConfig& cfg, Rng& rng,
                               SamplerDiagnostics& diag) {
  const auto members = members_by_component(s);
  const auto mask = informed_blocks(s);
  for (int j = 0; j < s.dims.N; ++j) {
    if (mask.weight[j])
      slice_weight_block(s, ctx, j, members, cfg, rng, diag);
    else
      draw_weight_block(s, ctx, j, rng);
    if (mask.atom[j])
      slice_atom_block(s, ctx, j, members[j], cfg, rng, diag);
    else
      draw_atom_block(s, ctx, j, rng);
  }
}

std::vector<int> degree_proposal_support(int k, int halfwidth, int k_max) {
  std::vector<int> out;
  for (int c = std::max(1, k - halfwidth); c <= std::min(k_max, k + halfwidth); ++c)
    if (c != k) out.push_back(c);
  return out;
}

namespace {

double degree_log_likelihood(int k, const std::vector<double>& theta, const ModelContext& ctx, int m) {
  std::vector<int> cell(m);
  double out = 0.0;
  const std::size_t n = ctx.data().size();
  for (std::size_t i = 0; i < n; ++i) {
    lattice_cell(k, std::span<const double>(theta.data() + i * m, m), cell);
    out += lattice_log_density(ctx.log_y(i), k, cell);
    if (out == kNegInf) return out;
  }
  return out;
}

}  // namespace

void update_degree_mh(ModelState& s, const ModelContext& ctx, const ChainConfig& cfg, Rng& rng,
                      SamplerDiagnostics& diag) {
  const auto& prior = ctx.prior();
  const auto support = degree_proposal_support(s.k, cfg.k_proposal_halfwidth, prior.k_max);
  if (support.empty()) return;
  const int proposal = support[rng.uniform_int(0, static_cast<int>(support.size()) - 1)];
  const auto reverse = degree_proposal_support(proposal, cfg.k_proposal_halfwidth, prior.k_max);

  const int m = s.dims.m;
  const std::size_t n = ctx.data().size();
  std::vector<double> theta(n * m);
  for (std::size_t i = 0; i < n; ++i)
    atom_location(s, s.allocations[i], ctx.data().covariate(i), std::span<double>(theta.data() + i * m, m));

  const double ll_new = degree_log_likelihood(proposal, theta, ctx, m);
  ++diag.k_proposals;
  if (ll_new == kNegInf) return;
  const double ll_old = degree_log_likelihood(s.k, theta, ctx, m);
  const double log_ratio = ll_new - ll_old + log_truncated_poisson(proposal, prior.lambda) -
                           log_truncated_poisson(s.k, prior.lambda) +
                           std::log(static_cast<double>(support.size())) -
                           std::log(static_cast<double>(reverse.size()));
  if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio) {
    s.k = proposal;
    ++diag.k_accepted;
  }
}

std::array<double, 4> gamma_posterior(const ModelState& s, const PriorConfig& prior, const SlopePrior& slopes,
                                      const BlockMask& mask) {
  const auto pi = prior.category_probs();
  // slope log densities under spike (0) and slab (1), per block family
  std::array<double, 2> eta_ll{0.0, 0.0}, z_ll{0.0, 0.0};
  if (s.dims.p > 0) {
    for (int j = 0; j < s.dims.N; ++j) {
      if (mask.weight[j])
        for (int g = 0; g < 2; ++g) eta_ll[g] += slopes.log_density(s.weight_slope(j), prior.slope_scale_eta(g));
      if (mask.atom[j])
        for (int l = 0; l < s.dims.m; ++l)
          for (int g = 0; g < 2; ++g) z_ll[g] += slopes.log_density(s.atom_slope(j, l), prior.slope_scale_z(g));
    }
  }
  std::array<double, 4> lw{};
  for (int c = 0; c < 4; ++c) {
    const auto g = SelectionIndicators::from_category(c);
    lw[c] = pi[c] > 0.0 ? std::log(pi[c]) + eta_ll[g.eta] + z_ll[g.z] : kNegInf;
  }
  const double norm = log_sum_exp(lw);
  std::array<double, 4> out{};
  for (int c = 0; c < 4; ++c) out[c] = std::exp(lw[c] - norm);
  return out;
}

void update_gammas(ModelState& s, const PriorConfig& prior, const SlopePrior& slopes, Rng& rng,
                   const BlockMask& mask) {
  const auto probs = gamma_posterior(s, prior, slopes, mask);
  std::array<double, 4> lp{};
  for (int c = 0; c < 4; ++c) lp[c] = probs[c] > 0.0 ? std::log(probs[c]) : kNegInf;
  s.gammas = SelectionIndicators::from_category(static_cast<int>(rng.categorical_log(lp)));
}

void update_gammas(ModelState& s, const PriorConfig& prior, Rng& rng) {
  update_gammas(s, prior, SlopePrior(prior.xtx_inv), rng, BlockMask::all(s.dims.N));
}

double weights_complete_log_likelihood(const ModelState& s, const ModelContext& ctx) {
  double out = 0.0;
  const int N = s.dims.N;
  for (std::size_t i = 0; i < s.allocations.size(); ++i) {
    const int a = s.allocations[i];
    const auto x = ctx.data().covariate(i);
    for (int j = 0; j <= a && j < N - 1; ++j) {
      const double eta = weight_predictor(s, j, x);
      out += j == a ? log_link_weight(eta) : log_link_weight(-eta);
    }
  }
  return out;
}

double atoms_complete_log_likelihood(const ModelState& s, const ModelContext& ctx) {
  const int m = s.dims.m;
  std::vector<double> theta(m);
  std::vector<int> cell(m);
  double out = 0.0;
  for (std::size_t i = 0; i < s.allocations.size(); ++i) {
    atom_location(s, s.allocations[i], ctx.data().covariate(i), theta);
    lattice_cell(s.k, theta, cell);
    out += lattice_log_density(ctx.log_y(i), s.k, cell);
  }
  return out;
}

void rescale_selection_move(ModelState& s, const ModelContext& ctx, const BlockMask& mask, Rng& rng,
                            SamplerDiagnostics& diag) {
  if (s.dims.p == 0) return;
  const auto& prior = ctx.prior();
  const int current = s.gammas.category();
  int proposed = rng.uniform_int(0, 2);
  if (proposed >= current) ++proposed;
  const auto from = s.gammas;
  const auto to = SelectionIndicators::from_category(proposed);
  const auto pi = prior.category_probs();
  if (pi[proposed] <= 0.0) return;

  ModelState cand = s;
  cand.gammas = to;
  double log_ratio = std::log(pi[proposed]) - std::log(pi[current]);
  if (from.eta != to.eta) {
    const double f = std::sqrt(prior.slope_scale_eta(to.eta) / prior.slope_scale_eta(from.eta));
    for (int j = 0; j < s.dims.N; ++j)
      if (mask.weight[j])
        for (double& b : cand.weight_slope(j)) b *= f;
    log_ratio += weights_complete_log_likelihood(cand, ctx) - weights_complete_log_likelihood(s, ctx);
  }
  if (from.z != to.z) {
    const double f = std::sqrt(prior.slope_scale_z(to.z) / prior.slope_scale_z(from.z));
    for (int j = 0; j < s.dims.N; ++j)
      if (mask.atom[j])
        for (int l = 0; l < s.dims.m; ++l)
          for (double& b : cand.atom_slope(j, l)) b *= f;
    log_ratio += atoms_complete_log_likelihood(cand, ctx) - atoms_complete_log_likelihood(s, ctx);
  }
  ++diag.rescale_proposals;
  if (std::isnan(log_ratio)) return;
  if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio) {
    s = std::move(cand);
    ++diag.rescale_accepted;
  }
}

void refresh_uninformed(ModelState& s, const ModelContext& ctx, const BlockMask& mask, Rng& rng) {
  for (int j = 0; j < s.dims.N; ++j) {
    if (!mask.weight[j]) draw_weight_block(s, ctx, j, rng);
    if (!mask.atom[j]) draw_atom_block(s, ctx, j, rng);
  }
}

double observed_log_likelihood(const ModelState& s, const ModelContext& ctx, std::span<double> per_obs) {
  double total = 0.0;
  for (std::size_t i = 0; i < ctx.data().size(); ++i) {
    per_obs[i] = conditional_log_density_cached(ctx.log_y(i), ctx.data().covariate(i), s);
    total += per_obs[i];
  }
  return total;
}

namespace {

bool all_feasible(const ModelState& s, const ModelContext& ctx) {
  for (std::size_t i = 0; i < ctx.data().size(); ++i)
    if (conditional_log_density_cached(ctx.log_y(i), ctx.data().covariate(i), s) == kNegInf) return false;
  return true;
}

// A boundary observation is only reachable by lattice cells with unit
// exponents on its empty parts; search nearby degrees until every
// observation has a component with positive density.
void allocate_with_repair(ModelState& s, const ModelContext& ctx, const ChainConfig& cfg, Rng& rng,
                          SamplerDiagnostics& diag) {
  try {
    update_allocations(s, ctx, rng);
    return;
  } catch (const DegenerateAllocation&) {
    const int original = s.k;
    for (int attempt = 0; attempt < 50; ++attempt) {
      const auto support = degree_proposal_support(s.k, cfg.k_proposal_halfwidth, ctx.prior().k_max);
      s.k = support[rng.uniform_int(0, static_cast<int>(support.size()) - 1)];
      if (all_feasible(s, ctx)) {
        ++diag.degenerate_repairs;
        update_allocations(s, ctx, rng);
        return;
      }
    }
    s.k = original;
    throw;
  }
}

}  // namespace

PosteriorSamples run_chain(const Dataset& data, const PriorConfig& prior_in, const ChainConfig& cfg) {
  cfg.validate();
  const ModelContext ctx(data, prior_in);
  Rng rng(cfg.seed);
  ModelState s = initial_state(ctx, rng);

  PosteriorSamples out;
  out.dims = s.dims;
  const std::size_t n = data.size();
  std::vector<double> ll(n);

  for (int it = 0; it < cfg.n_iter; ++it) {
    allocate_with_repair(s, ctx, cfg, rng, out.diagnostics);
    update_coefficients_slice(s, ctx, cfg, rng, out.diagnostics);
    update_degree_mh(s, ctx, cfg, rng, out.diagnostics);
    const BlockMask mask = cfg.collapse_uninformed ? informed_blocks(s) : BlockMask::all(s.dims.N);
    update_gammas(s, ctx.prior(), ctx.slopes(), rng, mask);
    if (cfg.rescale_move) rescale_selection_move(s, ctx, mask, rng, out.diagnostics);
    if (cfg.collapse_uninformed) refresh_uninformed(s, ctx, mask, rng);

    if (it >= cfg.burn_in && (it - cfg.burn_in + 1) % cfg.thin == 0) {
      const double total = observed_log_likelihood(s, ctx, ll);
      out.iterations.push_back(it);
      out.states.push_back(s);
      out.loglik.push_back(ll);
      out.gamma_trace.push_back(s.gammas);
      out.k_trace.push_back(s.k);
      out.log_posterior.push_back(total + log_prior(s, ctx.prior(), ctx.slopes()));
    }
  }
  if (out.loglik.draws() == 0) out.loglik = LogLikMatrix(0, n);
  return out;
}

}  // namespace dmbpp
