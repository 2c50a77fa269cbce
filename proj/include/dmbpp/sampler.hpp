#pragma once

// Blocked Gibbs sampler for the truncated DMBPP model. One sweep runs, in
// order: allocations, coefficients (slice sampling), degree k
// (Metropolis-Hastings), selection indicators (categorical Gibbs step plus a
// scale-matched Metropolis move).

#include <array>
#include <cstdint>
#include <vector>

#include "dmbpp/data.hpp"
#include "dmbpp/loglik.hpp"
#include "dmbpp/model.hpp"
#include "dmbpp/rng.hpp"

namespace dmbpp {

struct ChainConfig {
  int n_iter = 11000;
  int burn_in = 1000;
  int thin = 10;
  std::uint64_t seed = 1;
  double slice_width = 1.0;
  int slice_max_steps = 10;
  int k_proposal_halfwidth = 3;
  /// Condition the indicator update only on slope blocks the allocations
  /// inform, redrawing the others from their prior.
  bool collapse_uninformed = true;
  /// Add the scale-matched indicator move after the Gibbs step.
  bool rescale_move = true;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// floor((n_iter - burn_in) / thin).
  std::size_t retained() const;
};

struct SamplerDiagnostics {
  long slice_updates = 0;
  long slice_failures = 0;
  long k_proposals = 0;
  long k_accepted = 0;
  long rescale_proposals = 0;
  long rescale_accepted = 0;
  long degenerate_repairs = 0;

  double k_acceptance_rate() const { return k_proposals ? double(k_accepted) / k_proposals : 0.0; }
};

struct PosteriorSamples {
  ModelDims dims;
  std::vector<int> iterations;
  std::vector<ModelState> states;
  LogLikMatrix loglik;
  std::vector<SelectionIndicators> gamma_trace;
  std::vector<int> k_trace;
  std::vector<double> log_posterior;
  SamplerDiagnostics diagnostics;
};

/// Retained-draw frequencies of the four indicator categories.
std::array<double, 4> gamma_frequencies(const PosteriorSamples& samples);
/// Most frequent category; ties go to the lower category index.
SelectionIndicators posterior_mode_gammas(const PosteriorSamples& samples);

/// Data, prior and everything precomputed from them.
class ModelContext {
 public:
  /// Fills prior.xtx_inv from the data when it is empty (RankError if XᵀX is
  /// singular). An empty dataset needs an explicit xtx_inv.
  ModelContext(const Dataset& data, PriorConfig prior);

  const Dataset& data() const { return *data_; }
  const PriorConfig& prior() const { return prior_; }
  const SlopePrior& slopes() const { return slopes_; }
  ModelDims dims() const { return {prior_.N, data_->m, data_->p}; }
  std::span<const double> log_y(std::size_t i) const {
    const std::size_t w = data_->m + 1;
    return {log_y_.data() + i * w, w};
  }

 private:
  const Dataset* data_;
  PriorConfig prior_;
  SlopePrior slopes_;
  std::vector<double> log_y_;
};

/// Slope blocks whose full conditional involves data: weight block j when
/// j < N-1 and some s_i >= j; atom block j when some s_i == j.
struct BlockMask {
  std::vector<char> weight;
  std::vector<char> atom;
  static BlockMask all(int N);
};
BlockMask informed_blocks(const ModelState& s);

ModelState initial_state(const ModelContext& ctx, Rng& rng);

/// Normalized log Pr(s_i = j) ∝ log w_j(x_i) + log dir(y_i | α(k, ⌈kθ_j(x_i)⌉)).
/// Throws DegenerateAllocation when every component has zero density.
std::vector<double> allocation_log_probs(const ModelState& s, const ModelContext& ctx, std::size_t i);

void update_allocations(ModelState& s, const ModelContext& ctx, Rng& rng);

/// Slice-samples every informed coefficient one at a time against its full
/// conditional given the allocations; uninformed blocks are exact prior draws.
void update_coefficients_slice(ModelState& s, const ModelContext& ctx, const ChainConfig& cfg,
                               Rng& rng, SamplerDiagnostics& diag);

/// Proposal uniform on {k-h..k+h} \ {k} ∩ [1, k_max].
std::vector<int> degree_proposal_support(int k, int halfwidth, int k_max);
void update_degree_mh(ModelState& s, const ModelContext& ctx, const ChainConfig& cfg, Rng& rng,
                      SamplerDiagnostics& diag);

/// Pr(c) ∝ π_c Π_{masked j} N_p(βη_j | 0, τη_c S) Π_{masked j,l} N_p(βz_jl | 0, τz_c S).
std::array<double, 4> gamma_posterior(const ModelState& s, const PriorConfig& prior,
                                      const SlopePrior& slopes, const BlockMask& mask);
void update_gammas(ModelState& s, const PriorConfig& prior, const SlopePrior& slopes, Rng& rng,
                   const BlockMask& mask);
/// All blocks enter the conditional.
void update_gammas(ModelState& s, const PriorConfig& prior, Rng& rng);

/// Metropolis move to a uniformly chosen other category; informed slope
/// blocks whose indicator changes are multiplied by sqrt(τ_new / τ_old).
void rescale_selection_move(ModelState& s, const ModelContext& ctx, const BlockMask& mask, Rng& rng,
                            SamplerDiagnostics& diag);

/// Redraws every block outside the mask (intercepts and slopes) from its prior.
void refresh_uninformed(ModelState& s, const ModelContext& ctx, const BlockMask& mask, Rng& rng);

/// Complete-data log-likelihood given allocations, split into the
/// stick-breaking part and the Dirichlet kernel part.
double weights_complete_log_likelihood(const ModelState& s, const ModelContext& ctx);
double atoms_complete_log_likelihood(const ModelState& s, const ModelContext& ctx);

/// log f_{x_i}(y_i) for every observation; returns the sum.
double observed_log_likelihood(const ModelState& s, const ModelContext& ctx, std::span<double> per_obs);

/// Runs one chain; deterministic in (data, prior, config).
PosteriorSamples run_chain(const Dataset& data, const PriorConfig& prior, const ChainConfig& cfg);

}  // namespace dmbpp
