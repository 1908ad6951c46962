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

// Domain types shared by every part of the image-on-scalar regression model:
// the observation grid, the data, the prior constants and one Gibbs state.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sglss/errors.hpp"

namespace sglss {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// The p observation sites in a K-dimensional domain (one row per site).
class LocationGrid {
 public:
  LocationGrid() = default;
  /// Throws ValidationError when empty, non-finite, or two rows coincide.
  explicit LocationGrid(Matrix coords);

  /// Unit-spaced rows x cols lattice; site index = r * cols + c,
  /// coordinates (r, c) scaled by `spacing`.
  static LocationGrid lattice(std::size_t rows, std::size_t cols, double spacing = 1.0);

  std::size_t size() const noexcept { return static_cast<std::size_t>(coords_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(coords_.cols()); }
  const Matrix& coords() const noexcept { return coords_; }

  double distance(std::size_t a, std::size_t b) const;
  /// Symmetric p x p Euclidean distance matrix with a zero diagonal.
  Matrix distances() const;
  /// Largest pairwise distance (0 for a single site).
  double diameter() const;

  bool operator==(const LocationGrid&) const = default;

 private:
  Matrix coords_;
};

/// Observed images Y (n x p) and scalar covariates X (n x q).
struct Dataset {
  Matrix Y;
  Matrix X;
  LocationGrid grid;

  std::size_t n() const noexcept { return static_cast<std::size_t>(Y.rows()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(Y.cols()); }
  std::size_t q() const noexcept { return static_cast<std::size_t>(X.cols()); }

  /// [1, X]: the n x (q+1) design with the intercept column first.
  Matrix design() const;
};

/// Matern kernel with smoothness fixed at 5/2.
struct MaternKernel {
  double sigma2_s = 1.0;
  double rho = 1.0;
  double nu = 2.5;
};

/// Fixed prior constants.
struct Hyperparams {
  double a_eps = 1.0;
  double b_eps = 1.0;
  double a_pi = 1.0;
  double b_pi = 1.0;
  double d = 0.05;
  Matrix mu0;       // (q+1) x p slab means
  Matrix sigma2_0;  // (q+1) x p slab variances
  int delta = 5;
  MaternKernel kernel;

  /// Defaults used throughout the simulation study: a = b = 1, d = 0.05,
  /// mu0 = 0, sigma2_0 = 1, delta = 5.
  static Hyperparams defaults(std::size_t q, std::size_t p);
};

/// One state of the Gibbs chain. Row 0 of `beta` is the intercept; `tau` and
/// `pi` only cover the q covariates. A deselected coefficient is stored as an
/// exact 0.0.
struct ChainState {
  Matrix Z;        // n x p
  Matrix beta;     // (q+1) x p
  MaskMatrix tau;  // q x p, entries 0/1
  Vector pi;       // q
  double sigma2_eps = 1.0;
  Matrix Sigma;    // p x p

  bool operator==(const ChainState& other) const;
};

/// Posterior summaries accumulated over the stored draws.
struct PosteriorSummary {
  Vector mppi_global;            // q
  Matrix mppi_local;             // q x p
  std::vector<bool> selected_global;
  MaskMatrix selected_local;     // q x p
  Matrix beta_mean;              // (q+1) x p
  Matrix Z_mean;                 // n x p
  Matrix Sigma_mean;             // p x p
  double sigma2_eps_mean = 0.0;
  std::size_t draws = 0;
};

/// Dimensions bound by a successful validation.
struct ModelContext {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t q = 0;
  std::size_t K = 0;
};

/// Checks every data and hyperparameter invariant. Throws ValidationError
/// naming the offending field.
ModelContext validate(const Dataset& data, const Hyperparams& hyper);

/// Hyperparameter checks only, for a model with q covariates over p sites.
void validate_hyperparams(const Hyperparams& hyper, std::size_t q, std::size_t p);

void validate_kernel(const MaternKernel& kernel);

/// Throws NumericError when a (j, s) coefficient is nonzero without local and
/// global inclusion, or when pi / sigma2_eps / Sigma break their invariants.
void check_state(const ChainState& state, double d);

}  // namespace sglss
