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

// Mass univariate analysis: an independent OLS fit at every site, two-sided
// t-tests, Simes combination per coefficient image and step-up FDR control.

#include <span>
#include <string>
#include <vector>

#include "sglss/model.hpp"

namespace sglss::mua {

enum class Procedure { kBH, kBY, kSBH };
inline constexpr Procedure kAllProcedures[] = {Procedure::kBH, Procedure::kBY, Procedure::kSBH};
std::string to_string(Procedure p);

/// Storey tuning parameter used by SBH.
inline constexpr double kStoreyLambda = 0.5;
/// Smallest family SBH accepts.
inline constexpr std::size_t kSbhMinimumSize = 20;

struct OlsFit {
  Matrix beta_hat;  // (q+1) x p
  Matrix std_err;   // (q+1) x p
  Matrix pvals;     // q x p, covariates only
  int dof = 0;
};

/// OLS coefficients at every site. Throws ValidationError when n <= q + 1 or
/// the design [1, X] is rank deficient.
Matrix ols_coefficients(const Dataset& data);

/// Coefficients, standard errors and two-sided t p-values (n - q - 1 dof).
OlsFit ols_per_location(const Dataset& data, int threads = 1);

/// Two-sided p-value 2 * P(T_dof > |t|) via the regularized incomplete beta.
double t_two_sided_pvalue(double t, double dof);

/// min_i m p_(i) / i over sorted p-values, capped at 1.
double simes_combine(std::span<const double> pvals);

/// Benjamini-Hochberg step-up at level q.
std::vector<bool> fdr_bh(std::span<const double> pvals, double q_level = 0.05);
/// Benjamini-Yekutieli: BH at q / sum_{i<=m} 1/i.
std::vector<bool> fdr_by(std::span<const double> pvals, double q_level = 0.05);
/// Storey null proportion min(1, #{p > lambda} / ((1 - lambda) m)).
double storey_pi0(std::span<const double> pvals, double lambda = kStoreyLambda);
/// BH at q / pi0_hat. Throws ValidationError when m < 20.
std::vector<bool> fdr_sbh(std::span<const double> pvals, double q_level = 0.05);

/// Dispatch; for SBH on families smaller than kSbhMinimumSize the null
/// proportion is taken as 1 (plain BH) instead of throwing.
std::vector<bool> apply_procedure(Procedure proc, std::span<const double> pvals, double q_level);

struct ProcedureSelection {
  Procedure procedure = Procedure::kBH;
  std::vector<bool> global;  // q
  MaskMatrix local;          // q x p
  double global_pi0 = 1.0;   // SBH only
  bool global_pi0_fallback = false;
};

struct MuaResult {
  OlsFit fit;
  std::vector<double> global_pvals;  // q, Simes over sites
  std::vector<ProcedureSelection> selections;
  Matrix residual_cov;  // p x p, (1/(n-1)) R^T R
  double alpha = 0.05;

  const ProcedureSelection& selection(Procedure proc) const;
};

/// Global selection: each procedure over the q Simes p-values. Local
/// selection: each procedure over the p site p-values of every covariate.
MuaResult mua_pipeline(const Dataset& data, double alpha = 0.05, int threads = 1);

}  // namespace sglss::mua
