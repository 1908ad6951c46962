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

// Synthetic image-on-scalar data with known coefficient images.
//
// Fifteen covariates: 1-5 continuous N(0,1), 6-8 Bernoulli(0.5), 9-15 N(0,1)
// noise with identically zero coefficient images. The intercept and images
// 1-8 are rescaled Gaussian-process draws; sparsity is injected either by
// zeroing a fixed fraction of sites (scenario 1) or by keeping one square
// patch (scenario 2).

#include <cstdint>
#include <utility>

#include "sglss/model.hpp"
#include "sglss/rng.hpp"

namespace sglss::sim {

enum class Scenario { kS1, kS2 };

inline constexpr std::size_t kCovariates = 15;
inline constexpr std::size_t kInfluential = 8;

/// Covariates 1..5 are continuous and 6..8 binary (1-based).
constexpr bool is_discrete_covariate(std::size_t j) { return j >= 6 && j <= 8; }

struct SimulationOptions {
  std::size_t n = 100;
  std::size_t rows = 30;
  std::size_t cols = 30;
  double spacing = 0.0;  // 0: 1 / (max(rows, cols) - 1), i.e. the unit square
  MaternKernel kernel{1.0, 0.25};  // both Sigma and the coefficient GP
  double noise_variance = 1.0;
};

/// Lattice spacing actually used for `o`.
double effective_spacing(const SimulationOptions& o);

struct GroundTruth {
  Matrix beta_true;        // (q+1) x p
  MaskMatrix support_true; // q x p
  std::vector<bool> influential_global;
  std::uint64_t generator_seed = 0;
  Scenario scenario = Scenario::kS1;
  double pi_target = 0.0;  // scenario 2 only
  std::size_t square_side = 0;
  Matrix Z_true;           // n x p
  double sigma2_eps_true = 1.0;
  MaternKernel kernel;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// mean + L eps with L the lower Cholesky factor of Sigma.
Vector sample_gp(const Vector& mean, const Matrix& Sigma, RandomStream& rng);
Vector sample_gp_chol(const Vector& mean, const Matrix& chol, RandomStream& rng);

/// (b + sign(b(s')) |b(s')|) / (2 |b(s')|) with s' = argmax |b|. Throws on an
/// all-zero input.
Vector rescale_beta(const Vector& beta_tilde);

/// Fraction of sites zeroed in each coefficient image under scenario 1
/// (index 1..15; 0 for untouched images).
double scenario1_zero_fraction(std::size_t j);

/// `count` distinct site indices out of p by a seeded partial Fisher-Yates shuffle.
std::vector<std::size_t> choose_sites(std::size_t p, std::size_t count, RandomStream& rng);

/// Side of the scenario-2 square; throws when round(pi * rows * cols) is not
/// a perfect square or the square does not fit.
std::size_t square_side(double pi_target, std::size_t rows, std::size_t cols);

/// Uniform top-left corner (row, col) of a side x side square in the grid.
std::pair<std::size_t, std::size_t> place_square(std::size_t rows, std::size_t cols, std::size_t side,
                                                 RandomStream& rng);

std::pair<Dataset, GroundTruth> gen_scenario1(std::uint64_t seed, const SimulationOptions& options = {});
std::pair<Dataset, GroundTruth> gen_scenario2(double pi_target, std::uint64_t seed,
                                              const SimulationOptions& options = {});

}  // namespace sglss::sim
