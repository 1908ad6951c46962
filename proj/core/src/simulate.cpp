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

#include "sglss/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sglss/kernels.hpp"

namespace sglss::sim {
namespace {

std::uint32_t sim_block(StreamBlock b, std::size_t j = 0) { return block_id(b, static_cast<std::uint32_t>(j)); }

Vector standard_normals(Eigen::Index size, RandomStream& rng) {
  Vector eps(size);
  for (Eigen::Index k = 0; k < size; ++k) eps[k] = rng.normal();
  return eps;
}

// Shared part of both scenarios: intercept and images 1..8 from the GP,
// rescaled; images 9..15 zero. `sparsify(j, row)` injects the scenario's
// sparsity into image j.
template <class Sparsify>
std::pair<Dataset, GroundTruth> generate(std::uint64_t seed, const SimulationOptions& o, Scenario scenario,
                                         Sparsify&& sparsify) {
  const LocationGrid grid = LocationGrid::lattice(o.rows, o.cols, effective_spacing(o));
  const auto p = static_cast<Eigen::Index>(grid.size());
  const auto n = static_cast<Eigen::Index>(o.n);
  const auto q = static_cast<Eigen::Index>(kCovariates);
  if (n < 1) throw ValidationError("n", "must be positive");

  Matrix gram = matern52_gram(grid.distances(), o.kernel);
  const Matrix chol = factorize_with_jitter(gram, o.kernel.sigma2_s, 1e-8);

  GroundTruth truth;
  truth.generator_seed = seed;
  truth.scenario = scenario;
  truth.kernel = o.kernel;
  truth.sigma2_eps_true = o.noise_variance;
  truth.rows = o.rows;
  truth.cols = o.cols;
  truth.beta_true = Matrix::Zero(q + 1, p);
  for (std::size_t j = 0; j <= kInfluential; ++j) {
    RandomStream rng(seed, 0, sim_block(StreamBlock::kSimCoefficient, j), 0);
    const Vector tilde = sample_gp_chol(Vector::Zero(p), chol, rng);
    Vector row = rescale_beta(tilde);
    if (j >= 1) sparsify(j, row);
    truth.beta_true.row(static_cast<Eigen::Index>(j)) = row.transpose();
  }
  truth.support_true = (truth.beta_true.bottomRows(q).array() != 0.0).cast<std::uint8_t>();
  truth.influential_global.resize(kCovariates);
  for (Eigen::Index j = 0; j < q; ++j) {
    truth.influential_global[static_cast<std::size_t>(j)] = truth.support_true.row(j).cast<int>().sum() > 0;
  }

  Dataset data;
  data.grid = grid;
  data.X.resize(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    RandomStream rng(seed, 0, sim_block(StreamBlock::kSimCovariates), static_cast<std::uint64_t>(i));
    for (Eigen::Index j = 0; j < q; ++j) {
      data.X(i, j) = is_discrete_covariate(static_cast<std::size_t>(j + 1)) ? (rng.bernoulli(0.5) ? 1.0 : 0.0)
                                                                             : rng.normal();
    }
  }
  const Matrix mean = data.design() * truth.beta_true;  // n x p
  truth.Z_true.resize(n, p);
  data.Y.resize(n, p);
  const double noise_sd = std::sqrt(o.noise_variance);
  for (Eigen::Index i = 0; i < n; ++i) {
    RandomStream latent(seed, 0, sim_block(StreamBlock::kSimLatent), static_cast<std::uint64_t>(i));
    truth.Z_true.row(i) = sample_gp_chol(mean.row(i).transpose(), chol, latent).transpose();
    RandomStream noise(seed, 0, sim_block(StreamBlock::kSimNoise), static_cast<std::uint64_t>(i));
    data.Y.row(i) = truth.Z_true.row(i) + noise_sd * standard_normals(p, noise).transpose();
  }
  return {std::move(data), std::move(truth)};
}

}  // namespace

double effective_spacing(const SimulationOptions& o) {
  if (o.spacing > 0.0) return o.spacing;
  if (o.spacing < 0.0 || !std::isfinite(o.spacing)) throw ValidationError("spacing", "must be >= 0");
  const std::size_t side = std::max(o.rows, o.cols);
  return side > 1 ? 1.0 / static_cast<double>(side - 1) : 1.0;
}

Vector sample_gp_chol(const Vector& mean, const Matrix& chol, RandomStream& rng) {
  if (chol.rows() != mean.size() || chol.cols() != mean.size()) {
    throw ValidationError("Sigma", "dimension does not match the mean");
  }
  const Vector eps = standard_normals(mean.size(), rng);
  return mean + chol.triangularView<Eigen::Lower>() * eps;
}

Vector sample_gp(const Vector& mean, const Matrix& Sigma, RandomStream& rng) {
  Eigen::LLT<Matrix> llt(Sigma);
  if (llt.info() != Eigen::Success) throw NumericError("GP covariance is not positive definite");
  return sample_gp_chol(mean, llt.matrixL(), rng);
}

Vector rescale_beta(const Vector& beta_tilde) {
  if (beta_tilde.size() == 0) throw ValidationError("beta_tilde", "is empty");
  Eigen::Index arg = 0;
  const double peak = beta_tilde.cwiseAbs().maxCoeff(&arg);
  if (!(peak > 0.0)) throw ValidationError("beta_tilde", "cannot rescale an all-zero image");
  const double shift = beta_tilde[arg] > 0.0 ? peak : -peak;
  return (beta_tilde.array() + shift) / (2.0 * peak);
}

double scenario1_zero_fraction(std::size_t j) {
  switch (j) {
    case 2:
    case 7: return 0.1;
    case 3:
    case 8: return 0.2;
    case 4: return 0.3;
    case 5: return 0.4;
    default: return 0.0;
  }
}

std::vector<std::size_t> choose_sites(std::size_t p, std::size_t count, RandomStream& rng) {
  if (count > p) throw ValidationError("count", "cannot choose more sites than exist");
  std::vector<std::size_t> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.below(p - k));
    std::swap(idx[k], idx[pick]);
  }
  idx.resize(count);
  return idx;
}

std::size_t square_side(double pi_target, std::size_t rows, std::size_t cols) {
  if (!(pi_target > 0.0 && pi_target <= 1.0)) throw ValidationError("pi", "must lie in (0, 1]");
  const auto count = static_cast<std::size_t>(std::llround(pi_target * static_cast<double>(rows * cols)));
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(count))));
  if (side == 0 || side * side != count) {
    throw ValidationError("pi", "pi * p = " + std::to_string(count) + " sites is not a perfect square");
  }
  if (side > rows || side > cols) throw ValidationError("pi", "square of side " + std::to_string(side) +
                                                                  " does not fit in the grid");
  return side;
}

std::pair<std::size_t, std::size_t> place_square(std::size_t rows, std::size_t cols, std::size_t side,
                                                 RandomStream& rng) {
  if (side == 0 || side > rows || side > cols) throw ValidationError("side", "square does not fit in the grid");
  const std::size_t r = static_cast<std::size_t>(rng.below(rows - side + 1));
  const std::size_t c = static_cast<std::size_t>(rng.below(cols - side + 1));
  return {r, c};
}

std::pair<Dataset, GroundTruth> gen_scenario1(std::uint64_t seed, const SimulationOptions& options) {
  const double p = static_cast<double>(options.rows * options.cols);
  return generate(seed, options, Scenario::kS1, [&](std::size_t j, Vector& row) {
    const double frac = scenario1_zero_fraction(j);
    if (frac == 0.0) return;
    RandomStream rng(seed, 0, sim_block(StreamBlock::kSimZeroing, j), 0);
    const auto count = static_cast<std::size_t>(std::llround(frac * p));
    for (std::size_t s : choose_sites(static_cast<std::size_t>(row.size()), count, rng)) {
      row[static_cast<Eigen::Index>(s)] = 0.0;
    }
  });
}

std::pair<Dataset, GroundTruth> gen_scenario2(double pi_target, std::uint64_t seed,
                                              const SimulationOptions& options) {
  const std::size_t side = square_side(pi_target, options.rows, options.cols);
  auto result = generate(seed, options, Scenario::kS2, [&](std::size_t j, Vector& row) {
    RandomStream rng(seed, 0, sim_block(StreamBlock::kSimSquare, j), 0);
    const auto [r0, c0] = place_square(options.rows, options.cols, side, rng);
    for (std::size_t r = 0; r < options.rows; ++r) {
      for (std::size_t c = 0; c < options.cols; ++c) {
        const bool inside = r >= r0 && r < r0 + side && c >= c0 && c < c0 + side;
        if (!inside) row[static_cast<Eigen::Index>(r * options.cols + c)] = 0.0;
      }
    }
  });
  result.second.pi_target = pi_target;
  result.second.square_side = side;
  return result;
}

}  // namespace sglss::sim
