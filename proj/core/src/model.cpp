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

#include "sglss/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sglss {
namespace {

std::string dims(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void require_finite(const Matrix& m, const char* field) {
  if (!m.allFinite()) throw ValidationError(field, "contains non-finite entries");
}

void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(field, "must be a positive finite number");
}

}  // namespace

LocationGrid::LocationGrid(Matrix coords) : coords_(std::move(coords)) {
  if (coords_.rows() < 1 || coords_.cols() < 1) {
    throw ValidationError("grid", "needs at least one site and one dimension");
  }
  require_finite(coords_, "grid");
  // Sort row indices lexicographically so duplicate detection is O(p log p).
  std::vector<Eigen::Index> order(static_cast<std::size_t>(coords_.rows()));
  std::iota(order.begin(), order.end(), 0);
  auto row_less = [this](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index k = 0; k < coords_.cols(); ++k) {
      if (coords_(a, k) != coords_(b, k)) return coords_(a, k) < coords_(b, k);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), row_less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!row_less(order[i - 1], order[i])) {
      throw ValidationError("grid", "sites " + std::to_string(order[i - 1]) + " and " +
                                        std::to_string(order[i]) + " coincide");
    }
  }
}

LocationGrid LocationGrid::lattice(std::size_t rows, std::size_t cols, double spacing) {
  if (rows == 0 || cols == 0) throw ValidationError("grid", "lattice needs rows, cols >= 1");
  require_positive(spacing, "grid.spacing");
  Matrix c(static_cast<Eigen::Index>(rows * cols), 2);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < cols; ++k) {
      const auto s = static_cast<Eigen::Index>(r * cols + k);
      c(s, 0) = static_cast<double>(r) * spacing;
      c(s, 1) = static_cast<double>(k) * spacing;
    }
  }
  return LocationGrid(std::move(c));
}

double LocationGrid::distance(std::size_t a, std::size_t b) const {
  return (coords_.row(static_cast<Eigen::Index>(a)) - coords_.row(static_cast<Eigen::Index>(b))).norm();
}

Matrix LocationGrid::distances() const {
  const auto p = coords_.rows();
  Matrix D(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    D(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < p; ++i) {
      const double r = (coords_.row(i) - coords_.row(j)).norm();
      D(i, j) = r;
      D(j, i) = r;
    }
  }
  return D;
}

double LocationGrid::diameter() const {
  double best = 0.0;
  const auto p = coords_.rows();
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = j + 1; i < p; ++i) {
      best = std::max(best, (coords_.row(i) - coords_.row(j)).squaredNorm());
    }
  }
  return std::sqrt(best);
}

Matrix Dataset::design() const {
  Matrix D(X.rows(), X.cols() + 1);
  D.col(0).setOnes();
  D.rightCols(X.cols()) = X;
  return D;
}

Hyperparams Hyperparams::defaults(std::size_t q, std::size_t p) {
  Hyperparams h;
  const auto rows = static_cast<Eigen::Index>(q + 1);
  const auto cols = static_cast<Eigen::Index>(p);
  h.mu0 = Matrix::Zero(rows, cols);
  h.sigma2_0 = Matrix::Ones(rows, cols);
  return h;
}

bool ChainState::operator==(const ChainState& o) const {
  auto same = [](const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
  };
  return same(Z, o.Z) && same(beta, o.beta) && same(tau, o.tau) && same(pi, o.pi) &&
         sigma2_eps == o.sigma2_eps && same(Sigma, o.Sigma);
}

void validate_kernel(const MaternKernel& kernel) {
  require_positive(kernel.sigma2_s, "kernel.sigma2_s");
  require_positive(kernel.rho, "kernel.rho");
  if (kernel.nu != 2.5) throw ValidationError("kernel.nu", "only nu = 5/2 is supported");
}

void validate_hyperparams(const Hyperparams& h, std::size_t q, std::size_t p) {
  require_positive(h.a_eps, "a_eps");
  require_positive(h.b_eps, "b_eps");
  require_positive(h.a_pi, "a_pi");
  require_positive(h.b_pi, "b_pi");
  if (!(h.d >= 0.0 && h.d <= 1.0)) throw ValidationError("d", "must lie in [0, 1]");
  if (h.delta < 5) throw ValidationError("delta", "must be an integer >= 5");
  const auto rows = static_cast<Eigen::Index>(q + 1);
  const auto cols = static_cast<Eigen::Index>(p);
  if (h.mu0.rows() != rows || h.mu0.cols() != cols) {
    throw ValidationError("mu0", "expected " + dims(rows, cols) + ", got " + dims(h.mu0.rows(), h.mu0.cols()));
  }
  if (h.sigma2_0.rows() != rows || h.sigma2_0.cols() != cols) {
    throw ValidationError("sigma2_0",
                          "expected " + dims(rows, cols) + ", got " + dims(h.sigma2_0.rows(), h.sigma2_0.cols()));
  }
  require_finite(h.mu0, "mu0");
  require_finite(h.sigma2_0, "sigma2_0");
  if (!(h.sigma2_0.array() > 0.0).all()) throw ValidationError("sigma2_0", "entries must be positive");
  validate_kernel(h.kernel);
}

ModelContext validate(const Dataset& data, const Hyperparams& hyper) {
  if (data.grid.size() == 0) throw ValidationError("grid", "is empty");
  if (data.Y.rows() < 1) throw ValidationError("Y", "needs at least one row");
  if (data.X.cols() < 1) throw ValidationError("X", "needs at least one covariate");
  if (static_cast<std::size_t>(data.Y.cols()) != data.grid.size()) {
    throw ValidationError("Y", "column count " + std::to_string(data.Y.cols()) + " does not match grid size " +
                                   std::to_string(data.grid.size()));
  }
  if (data.X.rows() != data.Y.rows()) {
    throw ValidationError("X", "row count " + std::to_string(data.X.rows()) + " does not match Y row count " +
                                   std::to_string(data.Y.rows()));
  }
  require_finite(data.Y, "Y");
  require_finite(data.X, "X");
  validate_hyperparams(hyper, data.q(), data.p());
  return ModelContext{data.n(), data.p(), data.q(), data.grid.dim()};
}

void check_state(const ChainState& s, double d) {
  if (!(s.sigma2_eps > 0.0)) throw NumericError("sigma2_eps must be positive");
  if (!((s.pi.array() >= 0.0).all() && (s.pi.array() <= 1.0).all())) {
    throw NumericError("pi entries must lie in [0, 1]");
  }
  const double scale = std::max(1.0, s.Sigma.cwiseAbs().maxCoeff());
  if ((s.Sigma - s.Sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw NumericError("Sigma is not symmetric");
  }
  if (Eigen::LLT<Matrix>(s.Sigma).info() != Eigen::Success) {
    throw NumericError("Sigma is not positive definite");
  }
  for (Eigen::Index j = 0; j < s.tau.rows(); ++j) {
    const bool global = s.pi[j] >= d;
    for (Eigen::Index site = 0; site < s.tau.cols(); ++site) {
      if (s.beta(j + 1, site) != 0.0 && !(s.tau(j, site) == 1 && global)) {
        throw NumericError("beta(" + std::to_string(j + 1) + ", " + std::to_string(site) +
                           ") is nonzero without inclusion");
      }
    }
  }
}

}  // namespace sglss
