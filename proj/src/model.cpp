#include "dmbpp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dmbpp/error.hpp"

namespace dmbpp {

int SelectionIndicators::category() const {
  if (eta == 1 && z == 1) return 0;
  if (eta == 0 && z == 1) return 1;
  if (eta == 1 && z == 0) return 2;
  return 3;
}

SelectionIndicators SelectionIndicators::from_category(int c) {
  switch (c) {
    case 0: return {1, 1};
    case 1: return {0, 1};
    case 2: return {1, 0};
    case 3: return {0, 0};
  }
  throw DomainError("selection category must be in 0..3");
}

ModelState ModelState::zeros(ModelDims dims, int k) {
  ModelState s;
  s.k = k;
  s.dims = dims;
  s.weights.intercept.assign(dims.N, 0.0);
  s.weights.slope.assign(static_cast<std::size_t>(dims.N) * dims.p, 0.0);
  s.atoms.intercept.assign(static_cast<std::size_t>(dims.N) * dims.m, 0.0);
  s.atoms.slope.assign(static_cast<std::size_t>(dims.N) * dims.m * dims.p, 0.0);
  return s;
}

std::span<const double> ModelState::weight_slope(int j) const {
  return {weights.slope.data() + static_cast<std::size_t>(j) * dims.p, static_cast<std::size_t>(dims.p)};
}
std::span<double> ModelState::weight_slope(int j) {
  return {weights.slope.data() + static_cast<std::size_t>(j) * dims.p, static_cast<std::size_t>(dims.p)};
}
std::span<const double> ModelState::atom_slope(int j, int l) const {
  return {atoms.slope.data() + static_cast<std::size_t>(j * dims.m + l) * dims.p,
          static_cast<std::size_t>(dims.p)};
}
std::span<double> ModelState::atom_slope(int j, int l) {
  return {atoms.slope.data() + static_cast<std::size_t>(j * dims.m + l) * dims.p,
          static_cast<std::size_t>(dims.p)};
}

void ModelState::validate() const {
  if (dims.N < 1 || dims.m < 1 || dims.p < 0) throw DomainError("invalid model dimensions");
  if (k < 1 || k > kMaxDegree) throw DomainError("degree outside [1, 200]");
  const auto N = static_cast<std::size_t>(dims.N);
  if (weights.intercept.size() != N || weights.slope.size() != N * dims.p ||
      atoms.intercept.size() != N * dims.m || atoms.slope.size() != N * dims.m * dims.p)
    throw DomainError("coefficient arrays do not match the model dimensions");
  if ((gammas.eta != 0 && gammas.eta != 1) || (gammas.z != 0 && gammas.z != 1))
    throw DomainError("selection indicators must be 0 or 1");
  for (int s : allocations)
    if (s < 0 || s >= dims.N) throw DomainError("allocation outside [0, N)");
}

std::array<double, 4> PriorConfig::category_probs() const {
  const double t2 = t * t;
  return {1.0 / t2, (t - 1.0) / (2.0 * t2), (t - 1.0) / (2.0 * t2), (t - 1.0) / t};
}

void PriorConfig::validate() const {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("prior.") + key + " must be > 0");
  };
  positive(lambda, "lambda");
  positive(sigma2_eta, "sigma2_eta");
  positive(sigma2_z, "sigma2_z");
  positive(tau1_eta, "tau1_eta");
  positive(tau2_eta, "tau2_eta");
  positive(tau1_z, "tau1_z");
  positive(tau2_z, "tau2_z");
  if (tau1_eta > tau2_eta) throw ConfigError("prior.tau1_eta must not exceed prior.tau2_eta");
  if (tau1_z > tau2_z) throw ConfigError("prior.tau1_z must not exceed prior.tau2_z");
  if (!(t > 1.0)) throw ConfigError("prior.t must be > 1");
  if (N < 1) throw ConfigError("prior.N must be >= 1");
  if (k_max < 1 || k_max > kMaxDegree) throw ConfigError("prior.k_max must lie in [1, 200]");
  if (xtx_inv.size() != 0 && xtx_inv.rows() != xtx_inv.cols())
    throw ConfigError("prior.xtx_inv must be square");
}

PriorConfig named_prior(const std::string& name) {
  PriorConfig p;
  if (name == "prior-I") {
    p.t = 2.0;
  } else if (name == "prior-II") {
    p.t = 10.0;
  } else {
    throw ConfigError("unknown prior preset '" + name + "' (expected prior-I or prior-II)");
  }
  return p;
}

SlopePrior::SlopePrior(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) throw RankError("slope covariance must be square");
  if (cov.rows() == 0) return;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw RankError("slope covariance is not positive definite");
  chol_ = llt.matrixL();
  precision_ = llt.solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
  log_det_cov_ = 2.0 * chol_.diagonal().array().log().sum();
}

double SlopePrior::log_density(std::span<const double> beta, double tau) const {
  const int p = dim();
  double quad = 0.0;
  for (int a = 0; a < p; ++a) {
    double row = 0.0;
    for (int b = 0; b < p; ++b) row += precision_(a, b) * beta[b];
    quad += beta[a] * row;
  }
  return -0.5 * p * std::log(2.0 * std::numbers::pi * tau) - 0.5 * log_det_cov_ - 0.5 * quad / tau;
}

void SlopePrior::draw(double tau, Rng& rng, std::span<double> out) const {
  const int p = dim();
  std::vector<double> z(p);
  for (double& v : z) v = rng.normal();
  const double sd = std::sqrt(tau);
  for (int a = 0; a < p; ++a) {
    double s = 0.0;
    for (int b = 0; b <= a; ++b) s += chol_(a, b) * z[b];
    out[a] = sd * s;
  }
}

double link_weight(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

double log_link_weight(double a) {
  if (a >= 0.0) return -std::log1p(std::exp(-a));
  return a - std::log1p(std::exp(a));
}

void link_atom(std::span<const double> b, std::span<double> theta) {
  double hi = 0.0;
  for (double v : b) hi = std::max(hi, v);
  double denom = std::exp(-hi);
  for (std::size_t l = 0; l < b.size(); ++l) {
    theta[l] = std::exp(b[l] - hi);
    denom += theta[l];
  }
  for (std::size_t l = 0; l < b.size(); ++l) theta[l] /= denom;
}

SimplexPoint link_atom(std::span<const double> b) {
  std::vector<double> theta(b.size());
  link_atom(b, theta);
  return SimplexPoint(std::move(theta));
}

std::vector<double> link_atom_inv(const SimplexPoint& theta) {
  const double last = 1.0 - [&] {
    double s = 0.0;
    for (double t : theta.coords()) s += t;
    return s;
  }();
  if (!(last > 0.0)) throw DomainError("link_atom_inv needs an interior point");
  std::vector<double> b(theta.dim());
  for (std::size_t l = 0; l < theta.dim(); ++l) {
    if (!(theta[l] > 0.0)) throw DomainError("link_atom_inv needs an interior point");
    b[l] = std::log(theta[l]) - std::log(last);
  }
  return b;
}

std::vector<double> stick_weights(std::span<const double> V) {
  std::vector<double> w(V.size());
  if (V.empty()) return w;
  double remaining = 1.0;
  double used = 0.0;
  for (std::size_t j = 0; j + 1 < V.size(); ++j) {
    w[j] = V[j] * remaining;
    remaining *= 1.0 - V[j];
    used += w[j];
  }
  w.back() = std::max(0.0, 1.0 - used);
  return w;
}

double weight_predictor(const ModelState& s, int j, std::span<const double> x) {
  double eta = s.weights.intercept[j];
  const auto slope = s.weight_slope(j);
  for (std::size_t r = 0; r < slope.size(); ++r) eta += slope[r] * x[r];
  return eta;
}

void atom_location(const ModelState& s, int j, std::span<const double> x, std::span<double> theta) {
  const int m = s.dims.m;
  double zbuf[16];
  std::vector<double> zheap;
  double* z = zbuf;
  if (m > 16) {
    zheap.resize(m);
    z = zheap.data();
  }
  for (int l = 0; l < m; ++l) {
    double v = s.atom_intercept(j, l);
    const auto slope = s.atom_slope(j, l);
    for (std::size_t r = 0; r < slope.size(); ++r) v += slope[r] * x[r];
    z[l] = v;
  }
  link_atom(std::span<const double>(z, m), theta);
}

void log_stick_weights(const ModelState& s, std::span<const double> x, std::span<double> out) {
  const int N = s.dims.N;
  double log_remaining = 0.0;
  for (int j = 0; j + 1 < N; ++j) {
    const double eta = weight_predictor(s, j, x);
    out[j] = log_remaining + log_link_weight(eta);
    log_remaining += log_link_weight(-eta);
  }
  out[N - 1] = log_remaining;
}

double conditional_log_density_cached(std::span<const double> log_y, std::span<const double> x,
                                      const ModelState& s) {
  const int N = s.dims.N;
  const int m = s.dims.m;
  std::vector<double> terms(N);
  log_stick_weights(s, x, terms);
  std::vector<double> theta(m);
  std::vector<int> cell(m);
  for (int j = 0; j < N; ++j) {
    if (terms[j] == kNegInf) continue;
    atom_location(s, j, x, theta);
    lattice_cell(s.k, theta, cell);
    terms[j] += lattice_log_density(log_y, s.k, cell);
  }
  return log_sum_exp(terms);
}

double conditional_log_density(const SimplexPoint& y, std::span<const double> x, const ModelState& s) {
  if (static_cast<int>(y.dim()) != s.dims.m) throw DomainError("response dimension mismatch");
  if (static_cast<int>(x.size()) != s.dims.p) throw DomainError("covariate dimension mismatch");
  const auto ly = log_parts(y);
  return conditional_log_density_cached(ly, x, s);
}

LatticeWeights aggregated_weights(std::span<const double> x, const ModelState& s) {
  const int N = s.dims.N;
  std::vector<double> V(N, 1.0);
  for (int j = 0; j + 1 < N; ++j) V[j] = link_weight(weight_predictor(s, j, x));
  const auto w = stick_weights(V);
  LatticeWeights out;
  std::vector<double> theta(s.dims.m);
  LatticeIndex cell(s.dims.m);
  for (int j = 0; j < N; ++j) {
    atom_location(s, j, x, theta);
    lattice_cell(s.k, theta, cell);
    out[cell] += w[j];
  }
  return out;
}

double log_truncated_poisson(int k, double lambda) {
  if (k < 1) return kNegInf;
  return k * std::log(lambda) - lambda - log_factorial(k) - std::log(-std::expm1(-lambda));
}

namespace {
double log_normal(double v, double var) {
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * v * v / var;
}
}  // namespace

double log_prior(const ModelState& s, const PriorConfig& prior, const SlopePrior& slopes) {
  const int N = s.dims.N;
  const int m = s.dims.m;
  double out = 0.0;
  for (int j = 0; j < N; ++j) {
    out += log_normal(s.weights.intercept[j], prior.sigma2_eta);
    if (s.dims.p > 0) out += slopes.log_density(s.weight_slope(j), prior.slope_scale_eta(s.gammas.eta));
    for (int l = 0; l < m; ++l) {
      out += log_normal(s.atom_intercept(j, l), prior.sigma2_z);
      if (s.dims.p > 0) out += slopes.log_density(s.atom_slope(j, l), prior.slope_scale_z(s.gammas.z));
    }
  }
  out += std::log(prior.category_probs()[s.gammas.category()]);
  out += log_truncated_poisson(s.k, prior.lambda);
  return out;
}

double log_prior(const ModelState& s, const PriorConfig& prior) {
  return log_prior(s, prior, SlopePrior(prior.xtx_inv));
}

}  // namespace dmbpp
