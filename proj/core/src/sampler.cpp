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

#include "sglss/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

#include <boost/math/special_functions/beta.hpp>

#include "sglss/mua.hpp"
#include "sglss/parallel.hpp"
#include "sglss/rng.hpp"

namespace sglss {
namespace {

constexpr double kPiClamp = 1e-12;

std::uint32_t covariate_block(StreamBlock b, std::size_t j) { return block_id(b, static_cast<std::uint32_t>(j)); }

}  // namespace

void ChainConfig::validate() const {
  if (n_iter < 1) throw ValidationError("iters", "must be positive");
  if (burn_in < 0 || burn_in >= n_iter) throw ValidationError("burnin", "must satisfy 0 <= burnin < iters");
  if (thin < 1) throw ValidationError("thin", "must be positive");
  if (threads < 1) throw ValidationError("threads", "must be positive");
}

SiteMoments slab_moments(double sum_x2, double sum_xz, double sigma_ss, double mu0, double sigma2_0) {
  SiteMoments out;
  out.nu = 1.0 / (sum_x2 / sigma_ss + 1.0 / sigma2_0);
  out.m = sum_xz / sigma_ss + mu0 / sigma2_0;
  return out;
}

double log_bayes_factor(double pi, double mu0, double sigma2_0, const SiteMoments& mom) {
  const double p = std::clamp(pi, kPiClamp, 1.0 - kPiClamp);
  return std::log1p(-p) - std::log(p) + 0.5 * std::log(sigma2_0) + 0.5 * mu0 * mu0 / sigma2_0 -
         0.5 * std::log(mom.nu) - 0.5 * mom.m * mom.m * mom.nu;
}

double inclusion_probability(double log_theta) {
  // 1 / (1 + e^x) without overflow.
  if (log_theta > 0.0) {
    const double e = std::exp(-log_theta);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(log_theta));
}

double bayes_factor_theta(std::size_t j, std::size_t s, const ChainState& state, const Dataset& data,
                          const Hyperparams& hyper) {
  if (j < 1 || j > data.q()) throw ValidationError("j", "covariate index must lie in 1..q");
  if (s >= data.p()) throw ValidationError("s", "site index out of range");
  const Matrix D = data.design();
  const auto js = static_cast<Eigen::Index>(j);
  const auto ss = static_cast<Eigen::Index>(s);
  double sum_x2 = 0.0;
  double sum_xz = 0.0;
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    double z_tilde = state.Z(i, ss);
    for (Eigen::Index k = 0; k < D.cols(); ++k) {
      if (k != js) z_tilde -= D(i, k) * state.beta(k, ss);
    }
    sum_x2 += D(i, js) * D(i, js);
    sum_xz += D(i, js) * z_tilde;
  }
  const auto mom = slab_moments(sum_x2, sum_xz, state.Sigma(ss, ss), hyper.mu0(js, ss), hyper.sigma2_0(js, ss));
  return log_bayes_factor(state.pi[js - 1], hyper.mu0(js, ss), hyper.sigma2_0(js, ss), mom);
}

double sparsity_discount(double a_pi, double b_pi, double d) {
  if (!(a_pi > 0.0) || !(b_pi > 0.0)) throw ValidationError("a_pi/b_pi", "must be positive");
  if (!(d >= 0.0 && d <= 1.0)) throw ValidationError("d", "must lie in [0, 1]");
  const double mean = a_pi / (a_pi + b_pi);
  if (d == 0.0) return mean;
  if (d == 1.0) return 0.0;
  return mean * boost::math::ibetac(a_pi + 1.0, b_pi, d);
}

CovarianceDraw draw_covariance_posterior(const Matrix& resid, const ScaleMatrix& psi, int delta,
                                         std::uint64_t seed, std::uint64_t iteration, int threads) {
  const auto block = block_id(StreamBlock::kCovariance);
  if (resid.rows() == 0) return sample_iw_dawid(delta, psi, seed, iteration, block, threads);
  Matrix scale = psi.psi();
  scale.selfadjointView<Eigen::Lower>().rankUpdate(resid.transpose());
  scale.triangularView<Eigen::StrictlyUpper>() = scale.transpose();
  return sample_iw_dawid(static_cast<int>(resid.rows()) + delta, ScaleMatrix(std::move(scale)), seed, iteration,
                         block, threads);
}

ChainState initial_state(const Dataset& data, const Hyperparams& hyper, const ScaleMatrix& psi,
                         InitPolicy policy) {
  const auto p = static_cast<Eigen::Index>(data.p());
  const auto q = static_cast<Eigen::Index>(data.q());
  ChainState s;
  s.Sigma = psi.psi();
  s.pi = Vector::Constant(q, 0.5);
  if (policy == InitPolicy::kMua && data.n() > data.q() + 1) {
    s.beta = mua::ols_coefficients(data);
    s.tau = MaskMatrix::Ones(q, p);
    s.Z = data.design() * s.beta;
    const double msr = (data.Y - s.Z).squaredNorm() / static_cast<double>(data.Y.size());
    s.sigma2_eps = msr > 0.0 ? msr : 1.0;
    // With d > 0.5 no covariate starts globally included, so the OLS rows
    // would break the beta/pi invariant.
    if (hyper.d > 0.5) s.beta.bottomRows(q).setZero();
  } else {
    s.beta = Matrix::Zero(q + 1, p);
    s.tau = MaskMatrix::Zero(q, p);
    s.Z = data.Y;
    s.sigma2_eps = 1.0;
  }
  return s;
}

// ---------------------------------------------------------------------------
// GibbsSampler

GibbsSampler::GibbsSampler(const Dataset& data, const Hyperparams& hyper, ScaleMatrix psi, ChainState init,
                           std::uint64_t seed, int threads)
    : data_(data), hyper_(hyper), psi_(std::move(psi)), design_(data.design()), seed_(seed),
      threads_(std::max(threads, 1)) {
  design_sq_ = design_.colwise().squaredNorm().transpose();
  set_state(std::move(init));
}

void GibbsSampler::set_state(ChainState state) {
  const auto n = static_cast<Eigen::Index>(data_.n());
  const auto p = static_cast<Eigen::Index>(data_.p());
  const auto q = static_cast<Eigen::Index>(data_.q());
  if (state.Z.rows() != n || state.Z.cols() != p) throw ValidationError("state.Z", "must be n x p");
  if (state.beta.rows() != q + 1 || state.beta.cols() != p) throw ValidationError("state.beta", "must be (q+1) x p");
  if (state.tau.rows() != q || state.tau.cols() != p) throw ValidationError("state.tau", "must be q x p");
  if (state.pi.size() != q) throw ValidationError("state.pi", "must have length q");
  if (state.Sigma.rows() != p || state.Sigma.cols() != p) throw ValidationError("state.Sigma", "must be p x p");
  Eigen::LLT<Matrix> llt(state.Sigma);
  if (llt.info() != Eigen::Success) throw NumericError("state.Sigma is not positive definite");
  sigma_chol_ = llt.matrixL();
  state_ = std::move(state);
  resid_ = state_.Z - design_ * state_.beta;
}

void GibbsSampler::update_Z() {
  // Exact draw from MVN(V (Y / s2 + Sigma^{-1} mu), V), V = (I / s2 + Sigma^{-1})^{-1},
  // by conditioning a prior draw: with Z0 ~ N(mu, Sigma), e ~ N(0, s2 I),
  //   Z = Z0 + Sigma (Sigma + s2 I)^{-1} (Y - Z0 - e).
  // One factorization of Sigma + s2 I serves every subject.
  const auto n = static_cast<Eigen::Index>(data_.n());
  const auto p = static_cast<Eigen::Index>(data_.p());
  const double s2 = state_.sigma2_eps;
  Matrix A = state_.Sigma;
  A.diagonal().array() += s2;
  const double scale = A.diagonal().mean();
  const Matrix LA = factorize_with_jitter(A, scale, 0.0);

  Matrix E1(p, n);
  Matrix E2(p, n);
  const auto block = block_id(StreamBlock::kLatentZ);
  parallel_for(0, static_cast<std::size_t>(n), threads_, [&](std::size_t subject) {
    const auto i = static_cast<Eigen::Index>(subject);
    RandomStream rng(seed_, iteration_, block, subject);
    for (Eigen::Index k = 0; k < p; ++k) E1(k, i) = rng.normal();
    for (Eigen::Index k = 0; k < p; ++k) E2(k, i) = rng.normal();
  });

  const Matrix mean_t = (design_ * state_.beta).transpose();  // p x n
  Matrix Z0 = mean_t;
  Z0.noalias() += sigma_chol_.triangularView<Eigen::Lower>() * E1;
  Matrix R = data_.Y.transpose() - Z0 - std::sqrt(s2) * E2;
  LA.triangularView<Eigen::Lower>().solveInPlace(R);
  LA.transpose().triangularView<Eigen::Upper>().solveInPlace(R);
  Z0.noalias() += state_.Sigma * R;
  state_.Z = Z0.transpose();
  resid_ = state_.Z - mean_t.transpose();
}

void GibbsSampler::update_sigma2_eps() {
  const double ss = (data_.Y - state_.Z).squaredNorm();
  const double shape = hyper_.a_eps + 0.5 * static_cast<double>(data_.n() * data_.p());
  const double rate = hyper_.b_eps + 0.5 * ss;
  RandomStream rng(seed_, iteration_, block_id(StreamBlock::kNoiseVariance), 0);
  state_.sigma2_eps = rate / rng.gamma(shape);
}

RowVector GibbsSampler::projected_residual(std::size_t j) const {
  return design_.col(static_cast<Eigen::Index>(j)).transpose() * resid_;
}

SiteMoments GibbsSampler::site_moments(std::size_t j, std::size_t s) const {
  const auto js = static_cast<Eigen::Index>(j);
  const auto ss = static_cast<Eigen::Index>(s);
  const double xr = design_.col(js).dot(resid_.col(ss));
  return slab_moments(design_sq_[js], xr + state_.beta(js, ss) * design_sq_[js], state_.Sigma(ss, ss),
                      hyper_.mu0(js, ss), hyper_.sigma2_0(js, ss));
}

double GibbsSampler::log_theta(std::size_t j, std::size_t s) const {
  const auto js = static_cast<Eigen::Index>(j);
  const auto ss = static_cast<Eigen::Index>(s);
  return log_bayes_factor(state_.pi[js - 1], hyper_.mu0(js, ss), hyper_.sigma2_0(js, ss), site_moments(j, s));
}

void GibbsSampler::update_tau_pi(std::size_t j) {
  if (j < 1 || j > data_.q()) throw ValidationError("j", "covariate index must lie in 1..q");
  const auto js = static_cast<Eigen::Index>(j);
  const auto p = data_.p();
  const RowVector xr = projected_residual(j);
  const double x2 = design_sq_[js];
  const double pi = state_.pi[js - 1];
  const auto block = covariate_block(StreamBlock::kIndicator, j);
  parallel_for(0, p, threads_, [&](std::size_t site) {
    const auto s = static_cast<Eigen::Index>(site);
    const double mu0 = hyper_.mu0(js, s);
    const double v0 = hyper_.sigma2_0(js, s);
    const auto mom = slab_moments(x2, xr[s] + state_.beta(js, s) * x2, state_.Sigma(s, s), mu0, v0);
    RandomStream rng(seed_, iteration_, block, site);
    state_.tau(js - 1, s) = rng.bernoulli(inclusion_probability(log_bayes_factor(pi, mu0, v0, mom))) ? 1 : 0;
  });
  const double count = static_cast<double>(state_.tau.row(js - 1).cast<int>().sum());
  RandomStream rng(seed_, iteration_, covariate_block(StreamBlock::kParticipation, j), 0);
  state_.pi[js - 1] = rng.beta(hyper_.a_pi + count, hyper_.b_pi + static_cast<double>(p) - count);
}

void GibbsSampler::update_beta(std::size_t j) {
  if (j > data_.q()) throw ValidationError("j", "coefficient row must lie in 0..q");
  const auto js = static_cast<Eigen::Index>(j);
  const RowVector xr = projected_residual(j);
  const double x2 = design_sq_[js];
  const bool global = j == 0 || state_.pi[js - 1] >= hyper_.d;
  const auto block = covariate_block(StreamBlock::kCoefficient, j);
  parallel_for(0, data_.p(), threads_, [&](std::size_t site) {
    const auto s = static_cast<Eigen::Index>(site);
    const double old = state_.beta(js, s);
    double next = 0.0;
    if (global && (j == 0 || state_.tau(js - 1, s) == 1)) {
      const auto mom = slab_moments(x2, xr[s] + old * x2, state_.Sigma(s, s), hyper_.mu0(js, s),
                                    hyper_.sigma2_0(js, s));
      RandomStream rng(seed_, iteration_, block, site);
      next = mom.nu * mom.m + std::sqrt(mom.nu) * rng.normal();
    }
    state_.beta(js, s) = next;
    if (next != old) resid_.col(s) -= design_.col(js) * (next - old);
  });
}

void GibbsSampler::update_Sigma() {
  auto draw = draw_covariance_posterior(resid_, psi_, hyper_.delta, seed_, iteration_, threads_);
  state_.Sigma = std::move(draw.sigma);
  sigma_chol_ = std::move(draw.chol);
}

void GibbsSampler::sweep(bool fix_sigma, bool fix_noise) {
  update_Z();
  if (!fix_noise) update_sigma2_eps();
  for (std::size_t j = 0; j <= data_.q(); ++j) {
    if (j >= 1) update_tau_pi(j);
    update_beta(j);
  }
  if (!fix_sigma) update_Sigma();
}

// ---------------------------------------------------------------------------
// Chains

std::vector<double> ChainTrace::pi_series(std::size_t j) const {
  std::vector<double> out;
  out.reserve(pi.size());
  for (const auto& row : pi) out.push_back(row.at(j));
  return out;
}

std::vector<double> ChainTrace::tausum_series(std::size_t j) const {
  std::vector<double> out;
  out.reserve(tausum.size());
  for (const auto& row : tausum) out.push_back(row.at(j));
  return out;
}

void apply_median_rule(PosteriorSummary& summary) {
  summary.selected_global.assign(static_cast<std::size_t>(summary.mppi_global.size()), false);
  for (Eigen::Index j = 0; j < summary.mppi_global.size(); ++j) {
    summary.selected_global[static_cast<std::size_t>(j)] = summary.mppi_global[j] > 0.5;
  }
  summary.selected_local = (summary.mppi_local.array() > 0.5).cast<std::uint8_t>();
}

ChainResult run_chain(const Dataset& data, const Hyperparams& hyper, const ChainConfig& config) {
  validate(data, hyper);
  return run_chain(data, hyper, build_psi(data.grid, hyper.kernel), config);
}

ChainResult run_chain(const Dataset& data, const Hyperparams& hyper, const ScaleMatrix& psi,
                      const ChainConfig& config) {
  validate(data, hyper);
  config.validate();
  if (psi.size() != data.p()) throw ValidationError("Psi", "must be p x p");
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto p = static_cast<Eigen::Index>(data.p());
  const auto q = static_cast<Eigen::Index>(data.q());

  ChainState init = initial_state(data, hyper, psi, config.init);
  if (config.initial_sigma2_eps) init.sigma2_eps = *config.initial_sigma2_eps;
  if (config.initial_sigma) init.Sigma = *config.initial_sigma;
  GibbsSampler sampler(data, hyper, psi, std::move(init), config.seed, config.threads);

  ChainResult result;
  result.seed = config.seed;
  PosteriorSummary& sum = result.summary;
  sum.mppi_global = Vector::Zero(q);
  sum.mppi_local = Matrix::Zero(q, p);
  sum.beta_mean = Matrix::Zero(q + 1, p);
  sum.Z_mean = Matrix::Zero(n, p);
  sum.Sigma_mean = Matrix::Zero(p, p);

  for (int it = 1; it <= config.n_iter; ++it) {
    sampler.set_iteration(static_cast<std::uint64_t>(it));
    try {
      sampler.sweep(config.fix_sigma, config.fix_noise);
      if (config.check_invariants) check_state(sampler.state(), hyper.d);
    } catch (const Error& e) {
      throw ChainFailure("iteration " + std::to_string(it) + ": " + e.what(), std::move(result.trace));
    }
    if (it <= config.burn_in || (it - config.burn_in) % config.thin != 0) continue;

    const ChainState& s = sampler.state();
    std::vector<double> pis(static_cast<std::size_t>(q));
    std::vector<double> counts(static_cast<std::size_t>(q));
    for (Eigen::Index j = 0; j < q; ++j) {
      const bool global = s.pi[j] >= hyper.d;
      pis[static_cast<std::size_t>(j)] = s.pi[j];
      counts[static_cast<std::size_t>(j)] = static_cast<double>(s.tau.row(j).cast<int>().sum());
      if (global) {
        sum.mppi_global[j] += 1.0;
        sum.mppi_local.row(j) += s.tau.row(j).cast<double>();
      }
    }
    sum.beta_mean += s.beta;
    sum.Z_mean += s.Z;
    sum.Sigma_mean += s.Sigma;
    sum.sigma2_eps_mean += s.sigma2_eps;
    ++sum.draws;

    result.trace.iter.push_back(static_cast<std::uint64_t>(it));
    result.trace.sigma2_eps.push_back(s.sigma2_eps);
    result.trace.pi.push_back(std::move(pis));
    result.trace.tausum.push_back(std::move(counts));
  }

  const double draws = static_cast<double>(sum.draws);
  sum.mppi_global /= draws;
  sum.mppi_local /= draws;
  sum.beta_mean /= draws;
  sum.Z_mean /= draws;
  sum.Sigma_mean /= draws;
  sum.sigma2_eps_mean /= draws;
  apply_median_rule(sum);
  result.final_state = sampler.state();
  return result;
}

std::uint64_t chain_seed(std::uint64_t seed, std::size_t index) noexcept {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index)));
}

std::vector<ChainResult> run_chains(const Dataset& data, const Hyperparams& hyper, const ChainConfig& config,
                                    std::size_t chains) {
  if (chains < 1) throw ValidationError("chains", "must be positive");
  validate(data, hyper);
  config.validate();
  const ScaleMatrix psi = build_psi(data.grid, hyper.kernel);
  std::vector<ChainResult> out(chains);
  // Spread the thread budget: parallel chains first, leftover threads inside.
  const int outer = static_cast<int>(std::min<std::size_t>(chains, static_cast<std::size_t>(config.threads)));
  const int inner = std::max(1, config.threads / std::max(outer, 1));
  parallel_for(0, chains, outer, [&](std::size_t c) {
    ChainConfig cc = config;
    cc.seed = chain_seed(config.seed, c);
    cc.threads = inner;
    out[c] = run_chain(data, hyper, psi, cc);
  });
  return out;
}

PosteriorSummary pool_summaries(const std::vector<ChainResult>& chains) {
  if (chains.empty()) throw ValidationError("chains", "nothing to pool");
  PosteriorSummary pooled = chains.front().summary;
  if (chains.size() == 1) return pooled;
  double total = 0.0;
  for (const auto& c : chains) total += static_cast<double>(c.summary.draws);
  auto weighted = [&](auto member) {
    std::decay_t<decltype(chains.front().summary.*member)> acc = (chains.front().summary.*member) * 0.0;
    for (const auto& c : chains) acc += (c.summary.*member) * (static_cast<double>(c.summary.draws) / total);
    return acc;
  };
  pooled.mppi_global = weighted(&PosteriorSummary::mppi_global);
  pooled.mppi_local = weighted(&PosteriorSummary::mppi_local);
  pooled.beta_mean = weighted(&PosteriorSummary::beta_mean);
  pooled.Z_mean = weighted(&PosteriorSummary::Z_mean);
  pooled.Sigma_mean = weighted(&PosteriorSummary::Sigma_mean);
  pooled.sigma2_eps_mean = 0.0;
  for (const auto& c : chains) {
    pooled.sigma2_eps_mean += c.summary.sigma2_eps_mean * static_cast<double>(c.summary.draws) / total;
  }
  pooled.draws = static_cast<std::size_t>(total);
  apply_median_rule(pooled);
  return pooled;
}

}  // namespace sglss
