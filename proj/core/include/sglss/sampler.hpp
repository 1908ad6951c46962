// Copyright 2026 The SGLSS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Three-block Gibbs sampler for the spatial global-local spike-and-slab model
//
//   Y_i(s) = Z_i(s) + eps_i(s),            eps ~ N(0, sigma2_eps)
//   Z_i    ~ MVN(beta_0 + sum_j x_ij beta_j, Sigma)
//   beta_j(s) = beta~_j(s) * tau_j(s) * I(pi_j >= d)
//   Sigma  ~ IW(delta, Psi)  (Dawid parameterization)
//
// One sweep redraws {Z, sigma2_eps}, then (tau_j, pi_j, beta_j) for
// j = 0..q in order, then Sigma.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sglss/kernels.hpp"
#include "sglss/model.hpp"

namespace sglss {

enum class InitPolicy {
  kMua,   // beta at the per-site OLS estimate, tau = 1, Sigma = Psi
  kZero,  // beta = 0, tau = 0, Sigma = Psi
};

struct ChainConfig {
  int n_iter = 2000;
  int burn_in = 500;
  std::uint64_t seed = 0;
  int thin = 1;
  InitPolicy init = InitPolicy::kMua;
  int threads = 1;
  // Hold blocks at their initial values. Only used to check sub-blocks of the
  // sampler against exact marginal posteriors.
  bool fix_sigma = false;
  bool fix_noise = false;
  std::optional<double> initial_sigma2_eps;
  std::optional<Matrix> initial_sigma;
  // Run check_state after every sweep.
  bool check_invariants = false;

  void validate() const;
};

/// Conditional slab moments at one site: nu = posterior variance of beta~,
/// m = nu^{-1} * posterior mean.
struct SiteMoments {
  double nu = 0.0;
  double m = 0.0;
};

/// nu = [sum_x2 / sigma_ss + 1 / sigma2_0]^{-1},
/// m  = sum_xz / sigma_ss + mu0 / sigma2_0.
SiteMoments slab_moments(double sum_x2, double sum_xz, double sigma_ss, double mu0, double sigma2_0);

/// log of the location-wise Bayes factor theta = P(tau = 0 | ...) / P(tau = 1 | ...).
/// pi is clamped to [1e-15, 1 - 1e-15] so the result is always finite.
double log_bayes_factor(double pi, double mu0, double sigma2_0, const SiteMoments& moments);

/// P(tau = 1) = 1 / (1 + theta), evaluated stably from log theta.
double inclusion_probability(double log_theta);

/// log theta_j(s) for covariate j in 1..q computed from scratch against
/// `state` (blocked residual z~_ij(s) = Z_i(s) - sum_{j' != j} x_ij' beta_j'(s)).
double bayes_factor_theta(std::size_t j, std::size_t s, const ChainState& state, const Dataset& data,
                          const Hyperparams& hyper);

/// E[I(pi >= d) tau] under pi ~ Beta(a, b), tau | pi ~ Bernoulli(pi):
/// (a / (a + b)) * (1 - F_{Beta(a+1, b)}(d)).
double sparsity_discount(double a_pi, double b_pi, double d);

/// Sigma | Z, beta ~ IW_Dawid(n + delta, R^T R + Psi) for residual rows
/// R = Z - [1, X] beta. An empty R gives a prior draw.
CovarianceDraw draw_covariance_posterior(const Matrix& resid, const ScaleMatrix& psi, int delta,
                                         std::uint64_t seed, std::uint64_t iteration, int threads = 1);

/// Starting state per the init policy.
ChainState initial_state(const Dataset& data, const Hyperparams& hyper, const ScaleMatrix& psi,
                         InitPolicy policy);

/// Holds one chain's state plus the cached quantities its updates share: the
/// residual Z - [1, X] beta and the Cholesky factor of Sigma.
class GibbsSampler {
 public:
  GibbsSampler(const Dataset& data, const Hyperparams& hyper, ScaleMatrix psi, ChainState init,
               std::uint64_t seed, int threads = 1);

  /// Substreams of subsequent updates are keyed on this sweep index.
  void set_iteration(std::uint64_t iteration) noexcept { iteration_ = iteration; }
  std::uint64_t iteration() const noexcept { return iteration_; }

  void update_Z();
  void update_sigma2_eps();
  /// Redraws tau_j(.) and pi_j, j in 1..q.
  void update_tau_pi(std::size_t j);
  /// Redraws beta_j(.), j in 0..q; exact zero wherever deselected.
  void update_beta(std::size_t j);
  void update_Sigma();
  /// One full sweep in the documented block order.
  void sweep(bool fix_sigma = false, bool fix_noise = false);

  /// Moments at site s for covariate row j in 0..q from the cached residual.
  SiteMoments site_moments(std::size_t j, std::size_t s) const;
  double log_theta(std::size_t j, std::size_t s) const;

  const ChainState& state() const noexcept { return state_; }
  /// Replaces the state and rebuilds the caches.
  void set_state(ChainState state);
  const Matrix& residual() const noexcept { return resid_; }

 private:
  RowVector projected_residual(std::size_t j) const;

  const Dataset& data_;
  const Hyperparams& hyper_;
  ScaleMatrix psi_;
  ChainState state_;
  Matrix design_;
  Vector design_sq_;
  Matrix resid_;
  Matrix sigma_chol_;
  std::uint64_t seed_;
  std::uint64_t iteration_ = 0;
  int threads_;
};

/// Per-iteration scalars for the stored draws.
struct ChainTrace {
  std::vector<std::uint64_t> iter;
  std::vector<double> sigma2_eps;
  std::vector<std::vector<double>> pi;      // [draw][j]
  std::vector<std::vector<double>> tausum;  // [draw][j]

  std::size_t size() const noexcept { return iter.size(); }
  std::vector<double> pi_series(std::size_t j) const;
  std::vector<double> tausum_series(std::size_t j) const;
};

struct ChainResult {
  PosteriorSummary summary;
  ChainTrace trace;
  ChainState final_state;
  std::uint64_t seed = 0;
};

/// Thrown when an update fails mid-chain; carries the trace so far.
class ChainFailure : public NumericError {
 public:
  ChainFailure(const std::string& what, ChainTrace partial)
      : NumericError(what), partial_(std::move(partial)) {}
  const ChainTrace& partial_trace() const noexcept { return partial_; }

 private:
  ChainTrace partial_;
};

/// Runs one chain with Psi = build_psi(grid, hyper.kernel).
ChainResult run_chain(const Dataset& data, const Hyperparams& hyper, const ChainConfig& config);
/// Same, with a caller-built scale matrix.
ChainResult run_chain(const Dataset& data, const Hyperparams& hyper, const ScaleMatrix& psi,
                      const ChainConfig& config);

/// Seed of chain `index` derived from the run seed.
std::uint64_t chain_seed(std::uint64_t seed, std::size_t index) noexcept;

/// `chains` independent chains, scheduled over config.threads workers.
std::vector<ChainResult> run_chains(const Dataset& data, const Hyperparams& hyper, const ChainConfig& config,
                                    std::size_t chains);

/// Draw-weighted average of chain summaries with selections recomputed.
PosteriorSummary pool_summaries(const std::vector<ChainResult>& chains);

/// Median-probability selections from MPPIs (strictly greater than 0.5).
void apply_median_rule(PosteriorSummary& summary);

}  // namespace sglss
