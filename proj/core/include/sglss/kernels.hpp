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

#include <cstdint>
#include <functional>

#include "sglss/model.hpp"

namespace sglss {

/// Matern-5/2 covariance at distance r:
///   sigma2 * (1 + sqrt(5) r / rho + 5 r^2 / (3 rho^2)) * exp(-sqrt(5) r / rho).
double matern52(double r, double sigma2, double rho);

/// Gram matrix of `kernel` over a precomputed distance matrix (no jitter).
Matrix matern52_gram(const Matrix& distances, const MaternKernel& kernel);

/// Adds eps * scale to the diagonal of `A` for eps = first_eps, 10 * first_eps,
/// ... up to 1e-4 until the Cholesky factorization succeeds (first_eps = 0
/// tries the plain matrix before 1e-8). Returns the lower factor; `A` keeps the
/// jitter that was applied. Throws NumericError when every attempt fails.
Matrix factorize_with_jitter(Matrix& A, double scale, double first_eps, double* applied = nullptr);

/// Symmetric positive definite scale matrix with a cached lower Cholesky
/// factor.
class ScaleMatrix {
 public:
  ScaleMatrix() = default;
  /// Factorizes `psi`, adding diagonal jitter (relative to the mean diagonal)
  /// only if the plain factorization fails.
  explicit ScaleMatrix(Matrix psi);
  /// Adopts an already factorized matrix.
  ScaleMatrix(Matrix psi, Matrix chol, double jitter) : psi_(std::move(psi)), chol_(std::move(chol)), jitter_(jitter) {}

  const Matrix& psi() const noexcept { return psi_; }
  const Matrix& chol() const noexcept { return chol_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(psi_.rows()); }
  double jitter() const noexcept { return jitter_; }

 private:
  Matrix psi_;
  Matrix chol_;
  double jitter_ = 0.0;
};

/// Matern-5/2 Gram matrix over the grid with 1e-8 * sigma2_s on the
/// diagonal, escalated x10 up to 1e-4 * sigma2_s if factorization fails.
ScaleMatrix build_psi(const LocationGrid& grid, const MaternKernel& kernel);

/// Inverse-Wishart draw in Dawid's parameterization: standard degrees of
/// freedom delta + p - 1 and scale `psi`. Also returns the lower Cholesky
/// factor of the draw, which falls out of the Bartlett construction.
struct CovarianceDraw {
  Matrix sigma;
  Matrix chol;
};

/// Row i of the Bartlett factor is drawn from substream (seed, iteration,
/// block, i), so the result does not depend on `threads`.
CovarianceDraw sample_iw_dawid(int delta, const ScaleMatrix& psi, std::uint64_t seed, std::uint64_t iteration,
                               std::uint32_t block, int threads = 1);

/// Options for the empirical Matern fit.
struct KernelFitOptions {
  int grid_points = 60;
  double lower_fraction = 1e-2;  // rho search starts at lower_fraction * diameter
  double tolerance = 1e-6;       // golden-section stop, relative to rho
};

/// Profiled Frobenius objective ||S - sigma2 * K1(rho)||_F^2 / p^2 and the
/// optimal sigma2 for that rho.
struct KernelObjective {
  double mse = 0.0;
  double sigma2 = 0.0;
};
KernelObjective profiled_kernel_objective(const Matrix& sample_cov, const Matrix& distances, double rho);

/// Least-squares Matern fit to a sample covariance matrix.
MaternKernel fit_matern_to_covariance(const Matrix& sample_cov, const LocationGrid& grid,
                                      const KernelFitOptions& options = {});

/// Residual sample covariance (1/(n-1)) sum_i r_i r_i^T with
/// r_i = Y_i - [1, x_i] * beta.
Matrix residual_covariance(const Dataset& data, const Matrix& beta);

/// Matern (sigma2_s, rho) minimizing the mean squared Frobenius distance to
/// the residual covariance of `data` under the coefficient estimate `beta`.
MaternKernel fit_kernel_empirical(const Dataset& data, const Matrix& beta, const KernelFitOptions& options = {});

}  // namespace sglss
