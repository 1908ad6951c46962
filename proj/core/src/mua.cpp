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

#include "sglss/mua.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "sglss/parallel.hpp"

namespace sglss::mua {
namespace {

void check_pvals(std::span<const double> pvals) {
  for (double p : pvals) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("pvals", "p-values must lie in [0, 1]");
  }
}

std::vector<std::size_t> ascending_order(std::span<const double> pvals) {
  std::vector<std::size_t> order(pvals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
  return order;
}

// Step-up: reject ranks 1..k* with k* = max{i : p_(i) <= i * level / m}.
std::vector<bool> step_up(std::span<const double> pvals, double level) {
  check_pvals(pvals);
  const std::size_t m = pvals.size();
  std::vector<bool> reject(m, false);
  if (m == 0) return reject;
  const auto order = ascending_order(pvals);
  std::size_t k_star = 0;
  for (std::size_t i = m; i >= 1; --i) {
    const double threshold = static_cast<double>(i) * level / static_cast<double>(m);
    if (pvals[order[i - 1]] <= threshold) {
      k_star = i;
      break;
    }
  }
  for (std::size_t i = 0; i < k_star; ++i) reject[order[i]] = true;
  return reject;
}

void check_design(const Dataset& data) {
  if (data.X.rows() != data.Y.rows()) throw ValidationError("X", "row count does not match Y");
  if (data.n() <= data.q() + 1) {
    throw ValidationError("X", "per-site OLS needs n > q + 1 (n = " + std::to_string(data.n()) +
                                   ", q = " + std::to_string(data.q()) + ")");
  }
}

}  // namespace

std::string to_string(Procedure p) {
  switch (p) {
    case Procedure::kBH: return "BH";
    case Procedure::kBY: return "BY";
    case Procedure::kSBH: return "SBH";
  }
  return "?";
}

Matrix ols_coefficients(const Dataset& data) {
  check_design(data);
  const Matrix D = data.design();
  Eigen::ColPivHouseholderQR<Matrix> qr(D);
  if (qr.rank() < D.cols()) {
    throw ValidationError("X", "design [1, X] is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                                   std::to_string(D.cols()) + ")");
  }
  return qr.solve(data.Y);
}

double t_two_sided_pvalue(double t, double dof) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return std::clamp(boost::math::ibeta(0.5 * dof, 0.5, x), 0.0, 1.0);
}

OlsFit ols_per_location(const Dataset& data, int threads) {
  OlsFit fit;
  fit.beta_hat = ols_coefficients(data);
  const Matrix D = data.design();
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto k = D.cols();
  fit.dof = static_cast<int>(n - k);
  const Matrix gram_inv = (D.transpose() * D).ldlt().solve(Matrix::Identity(k, k));
  const Matrix resid = data.Y - D * fit.beta_hat;
  const Eigen::RowVectorXd rss = resid.colwise().squaredNorm();
  const auto p = static_cast<Eigen::Index>(data.p());
  fit.std_err.resize(k, p);
  fit.pvals.resize(k - 1, p);
  parallel_for(0, static_cast<std::size_t>(p), threads, [&](std::size_t site) {
    const auto s = static_cast<Eigen::Index>(site);
    const double s2 = rss[s] / fit.dof;
    for (Eigen::Index j = 0; j < k; ++j) {
      fit.std_err(j, s) = std::sqrt(s2 * gram_inv(j, j));
      if (j == 0) continue;
      const double est = fit.beta_hat(j, s);
      const double se = fit.std_err(j, s);
      // 0/0 (exact zero estimate on an exact fit) is no evidence: t = 0.
      const double t = (est == 0.0) ? 0.0 : est / se;
      fit.pvals(j - 1, s) = t_two_sided_pvalue(t, fit.dof);
    }
  });
  return fit;
}

double simes_combine(std::span<const double> pvals) {
  if (pvals.empty()) throw ValidationError("pvals", "Simes combination needs at least one p-value");
  check_pvals(pvals);
  std::vector<double> sorted(pvals.begin(), pvals.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  double best = 1.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    best = std::min(best, m * sorted[i] / static_cast<double>(i + 1));
  }
  return best;
}

std::vector<bool> fdr_bh(std::span<const double> pvals, double q_level) { return step_up(pvals, q_level); }

std::vector<bool> fdr_by(std::span<const double> pvals, double q_level) {
  double harmonic = 0.0;
  for (std::size_t i = 1; i <= pvals.size(); ++i) harmonic += 1.0 / static_cast<double>(i);
  return step_up(pvals, pvals.empty() ? q_level : q_level / harmonic);
}

double storey_pi0(std::span<const double> pvals, double lambda) {
  check_pvals(pvals);
  if (pvals.empty()) return 1.0;
  const auto above = std::count_if(pvals.begin(), pvals.end(), [lambda](double p) { return p > lambda; });
  return std::min(1.0, static_cast<double>(above) / ((1.0 - lambda) * static_cast<double>(pvals.size())));
}

std::vector<bool> fdr_sbh(std::span<const double> pvals, double q_level) {
  if (pvals.size() < kSbhMinimumSize) {
    throw ValidationError("pvals", "SBH needs at least " + std::to_string(kSbhMinimumSize) + " p-values, got " +
                                       std::to_string(pvals.size()));
  }
  const double pi0 = storey_pi0(pvals);
  const double level = pi0 > 0.0 ? q_level / pi0 : std::numeric_limits<double>::infinity();
  return step_up(pvals, level);
}

std::vector<bool> apply_procedure(Procedure proc, std::span<const double> pvals, double q_level) {
  switch (proc) {
    case Procedure::kBH: return fdr_bh(pvals, q_level);
    case Procedure::kBY: return fdr_by(pvals, q_level);
    case Procedure::kSBH:
      if (pvals.size() < kSbhMinimumSize) return fdr_bh(pvals, q_level);
      return fdr_sbh(pvals, q_level);
  }
  return {};
}

const ProcedureSelection& MuaResult::selection(Procedure proc) const {
  for (const auto& s : selections) {
    if (s.procedure == proc) return s;
  }
  throw ValidationError("procedure", "no selection for " + to_string(proc));
}

MuaResult mua_pipeline(const Dataset& data, double alpha, int threads) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha", "must lie in (0, 1]");
  MuaResult out;
  out.alpha = alpha;
  out.fit = ols_per_location(data, threads);
  const auto q = static_cast<Eigen::Index>(data.q());
  const auto p = static_cast<Eigen::Index>(data.p());

  // Row-major copy so each covariate's site p-values are contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pv = out.fit.pvals;
  auto row = [&](Eigen::Index j) { return std::span<const double>(pv.data() + j * p, static_cast<std::size_t>(p)); };

  out.global_pvals.resize(static_cast<std::size_t>(q));
  for (Eigen::Index j = 0; j < q; ++j) out.global_pvals[static_cast<std::size_t>(j)] = simes_combine(row(j));

  for (Procedure proc : kAllProcedures) {
    ProcedureSelection sel;
    sel.procedure = proc;
    sel.global = apply_procedure(proc, out.global_pvals, alpha);
    if (proc == Procedure::kSBH) {
      sel.global_pi0_fallback = out.global_pvals.size() < kSbhMinimumSize;
      sel.global_pi0 = sel.global_pi0_fallback ? 1.0 : storey_pi0(out.global_pvals);
    }
    sel.local = MaskMatrix::Zero(q, p);
    for (Eigen::Index j = 0; j < q; ++j) {
      const auto rej = apply_procedure(proc, row(j), alpha);
      for (Eigen::Index s = 0; s < p; ++s) sel.local(j, s) = rej[static_cast<std::size_t>(s)] ? 1 : 0;
    }
    out.selections.push_back(std::move(sel));
  }

  const Matrix resid = data.Y - data.design() * out.fit.beta_hat;
  out.residual_cov = Matrix::Zero(p, p);
  out.residual_cov.selfadjointView<Eigen::Lower>().rankUpdate(resid.transpose(),
                                                              1.0 / static_cast<double>(data.n() - 1));
  out.residual_cov.triangularView<Eigen::StrictlyUpper>() = out.residual_cov.transpose();
  return out;
}

}  // namespace sglss::mua
