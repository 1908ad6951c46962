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

#include "sglss/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sglss/parallel.hpp"
#include "sglss/rng.hpp"

namespace sglss {
namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873127623544;
constexpr double kMaxJitter = 1e-4;

}  // namespace

double matern52(double r, double sigma2, double rho) {
  if (!(r >= 0.0)) throw ValidationError("r", "distance must be nonnegative");
  if (!(sigma2 > 0.0)) throw ValidationError("sigma2", "must be positive");
  if (!(rho > 0.0)) throw ValidationError("rho", "must be positive");
  const double x = kSqrt5 * r / rho;
  return sigma2 * (1.0 + x + x * x / 3.0) * std::exp(-x);
}

Matrix matern52_gram(const Matrix& distances, const MaternKernel& kernel) {
  validate_kernel(kernel);
  const double a = kSqrt5 / kernel.rho;
  return distances.unaryExpr([a, s2 = kernel.sigma2_s](double r) {
    const double x = a * r;
    return s2 * (1.0 + x + x * x / 3.0) * std::exp(-x);
  });
}

Matrix factorize_with_jitter(Matrix& A, double scale, double first_eps, double* applied) {
  double added = 0.0;
  double eps = first_eps;
  while (true) {
    const double target = eps * scale;
    A.diagonal().array() += target - added;
    added = target;
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() == Eigen::Success) {
      if (applied) *applied = added;
      return llt.matrixL();
    }
    if (eps >= kMaxJitter * (1.0 - 1e-12)) break;
    eps = eps == 0.0 ? 1e-8 : eps * 10.0;
  }
  A.diagonal().array() -= added;
  throw NumericError("Cholesky factorization failed after jitter " + std::to_string(kMaxJitter) + " x " +
                     std::to_string(scale) + " (degenerate grid or covariance)");
}

ScaleMatrix::ScaleMatrix(Matrix psi) : psi_(std::move(psi)) {
  if (psi_.rows() != psi_.cols() || psi_.rows() == 0) throw ValidationError("Psi", "must be a nonempty square matrix");
  const double scale = std::max(psi_.diagonal().mean(), std::numeric_limits<double>::min());
  chol_ = factorize_with_jitter(psi_, scale, 0.0, &jitter_);
}

ScaleMatrix build_psi(const LocationGrid& grid, const MaternKernel& kernel) {
  Matrix psi = matern52_gram(grid.distances(), kernel);
  double jitter = 0.0;
  Matrix chol = factorize_with_jitter(psi, kernel.sigma2_s, 1e-8, &jitter);
  return ScaleMatrix(std::move(psi), std::move(chol), jitter);
}

CovarianceDraw sample_iw_dawid(int delta, const ScaleMatrix& psi, std::uint64_t seed, std::uint64_t iteration,
                               std::uint32_t block, int threads) {
  if (delta < 1) throw ValidationError("delta", "must be a positive integer");
  const auto p = static_cast<Eigen::Index>(psi.size());
  if (p == 0) throw ValidationError("Psi", "is empty");

  // Upper-triangular Bartlett factor T with T T^T ~ Wishart(delta + p - 1, I):
  // T(i,i)^2 ~ chi^2(delta + i) for 0-based i, normals above the diagonal.
  // Stored transposed (lower) so each row i of T is a column of Tt.
  Matrix Tt = Matrix::Zero(p, p);
  parallel_for(0, static_cast<std::size_t>(p), threads, [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    RandomStream rng(seed, iteration, block, row);
    Tt(i, i) = std::sqrt(rng.chi_squared(static_cast<double>(delta) + static_cast<double>(i)));
    for (Eigen::Index j = i + 1; j < p; ++j) Tt(j, i) = rng.normal();
  });

  // With Psi = L L^T, the draw is L (T T^T)^{-1} L^T = C C^T where
  // C = L T^{-T} is lower triangular: its Cholesky factor.
  CovarianceDraw out;
  out.chol = psi.chol();
  Tt.triangularView<Eigen::Lower>().solveInPlace<Eigen::OnTheRight>(out.chol);
  out.chol.triangularView<Eigen::StrictlyUpper>().setZero();
  out.sigma = Matrix::Zero(p, p);
  out.sigma.selfadjointView<Eigen::Lower>().rankUpdate(out.chol);
  out.sigma.triangularView<Eigen::StrictlyUpper>() = out.sigma.transpose();
  return out;
}

KernelObjective profiled_kernel_objective(const Matrix& sample_cov, const Matrix& distances, double rho) {
  const Matrix K1 = matern52_gram(distances, MaternKernel{1.0, rho});
  const double kk = K1.squaredNorm();
  const double ks = (K1.array() * sample_cov.array()).sum();
  const double ss = sample_cov.squaredNorm();
  const double p2 = static_cast<double>(sample_cov.size());
  KernelObjective out;
  out.sigma2 = std::max(ks / kk, std::numeric_limits<double>::min());
  out.mse = (ss - 2.0 * out.sigma2 * ks + out.sigma2 * out.sigma2 * kk) / p2;
  return out;
}

MaternKernel fit_matern_to_covariance(const Matrix& sample_cov, const LocationGrid& grid,
                                      const KernelFitOptions& options) {
  const auto p = static_cast<Eigen::Index>(grid.size());
  if (sample_cov.rows() != p || sample_cov.cols() != p) {
    throw ValidationError("sample_cov", "must be p x p for the grid");
  }
  if (!sample_cov.allFinite()) throw NumericError("sample covariance has non-finite entries");
  if (sample_cov.cwiseAbs().maxCoeff() == 0.0) throw NumericError("sample covariance is identically zero");
  const Matrix D = grid.distances();
  // A single site pins nothing about rho; report unit length scale.
  const double diameter = p > 1 ? D.maxCoeff() : 1.0;
  const double lo = options.lower_fraction * diameter;
  const double hi = diameter;
  const int points = std::max(options.grid_points, 3);

  auto eval = [&](double log_rho) { return profiled_kernel_objective(sample_cov, D, std::exp(log_rho)); };

  std::vector<double> log_rhos(static_cast<std::size_t>(points));
  std::vector<double> values(static_cast<std::size_t>(points));
  std::size_t best = 0;
  for (int k = 0; k < points; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    log_rhos[ku] = std::log(lo) + (std::log(hi) - std::log(lo)) * k / (points - 1);
    values[ku] = eval(log_rhos[ku]).mse;
    if (values[ku] < values[best]) best = ku;
  }

  // Golden-section refinement on log(rho) within the neighbouring grid cells.
  double a = log_rhos[best == 0 ? 0 : best - 1];
  double b = log_rhos[std::min(best + 1, log_rhos.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c).mse;
  double fd = eval(d).mse;
  while (b - a > options.tolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c).mse;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d).mse;
    }
  }
  double log_rho = 0.5 * (a + b);
  KernelObjective refined = eval(log_rho);
  if (values[best] < refined.mse) {
    log_rho = log_rhos[best];
    refined = eval(log_rho);
  }
  return MaternKernel{refined.sigma2, std::exp(log_rho)};
}

Matrix residual_covariance(const Dataset& data, const Matrix& beta) {
  if (data.n() < 2) throw ValidationError("Y", "kernel fitting needs at least two images");
  if (beta.rows() != static_cast<Eigen::Index>(data.q() + 1) || beta.cols() != static_cast<Eigen::Index>(data.p())) {
    throw ValidationError("beta", "must be (q+1) x p");
  }
  const Matrix R = data.Y - data.design() * beta;
  Matrix S = Matrix::Zero(R.cols(), R.cols());
  S.selfadjointView<Eigen::Lower>().rankUpdate(R.transpose(), 1.0 / static_cast<double>(data.n() - 1));
  S.triangularView<Eigen::StrictlyUpper>() = S.transpose();
  return S;
}

MaternKernel fit_kernel_empirical(const Dataset& data, const Matrix& beta, const KernelFitOptions& options) {
  return fit_matern_to_covariance(residual_covariance(data, beta), data.grid, options);
}

}  // namespace sglss
