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

#include "sglss/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sglss {
namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

std::optional<double> mean_abs(const std::vector<double>& zs) {
  if (zs.empty()) return std::nullopt;
  double acc = 0.0;
  for (double z : zs) acc += std::abs(z);
  return acc / static_cast<double>(zs.size());
}

}  // namespace

double spectral_variance_zero(std::span<const double> x, double lag_fraction) {
  const std::size_t n = x.size();
  if (n < 2) throw ValidationError("trace", "needs at least two values");
  const double m = mean_of(x);
  const auto max_lag = std::max<std::size_t>(1, static_cast<std::size_t>(lag_fraction * static_cast<double>(n)));
  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t t = lag; t < n; ++t) acc += (x[t] - m) * (x[t - lag] - m);
    return acc / static_cast<double>(n);
  };
  double s = autocov(0);
  for (std::size_t k = 1; k <= max_lag && k < n; ++k) {
    const double w = 1.0 - static_cast<double>(k) / static_cast<double>(max_lag + 1);
    s += 2.0 * w * autocov(k);
  }
  return s;
}

double geweke_z(std::span<const double> trace, double frac_first, double frac_last) {
  if (trace.size() < 50) throw ValidationError("trace", "Geweke diagnostic needs at least 50 draws");
  if (!(frac_first > 0.0 && frac_last > 0.0 && frac_first + frac_last <= 1.0)) {
    throw ValidationError("fractions", "need 0 < first, 0 < last, first + last <= 1");
  }
  const auto n = trace.size();
  const auto na = std::max<std::size_t>(2, static_cast<std::size_t>(frac_first * static_cast<double>(n)));
  const auto nb = std::max<std::size_t>(2, static_cast<std::size_t>(frac_last * static_cast<double>(n)));
  const auto a = trace.first(na);
  const auto b = trace.last(nb);
  const double var_a = std::max(spectral_variance_zero(a), 0.0);
  const double var_b = std::max(spectral_variance_zero(b), 0.0);
  const double denom = var_a / static_cast<double>(na) + var_b / static_cast<double>(nb);
  if (!(denom > 0.0)) throw NumericError("Geweke diagnostic undefined for a zero-variance trace");
  return (mean_of(a) - mean_of(b)) / std::sqrt(denom);
}

GewekeReport geweke_report(const ChainTrace& trace) {
  GewekeReport report;
  if (trace.size() < 50) return report;
  const std::size_t q = trace.pi.empty() ? 0 : trace.pi.front().size();
  std::vector<double> z_pi;
  std::vector<double> z_tau;
  auto score = [&](const std::string& name, const std::vector<double>& series, std::vector<double>* family) {
    GewekeEntry e{name, std::nullopt};
    try {
      e.z = geweke_z(series);
      if (family) family->push_back(*e.z);
    } catch (const NumericError&) {
      ++report.skipped;
    }
    report.entries.push_back(std::move(e));
  };
  for (std::size_t j = 0; j < q; ++j) score("pi_" + std::to_string(j + 1), trace.pi_series(j), &z_pi);
  for (std::size_t j = 0; j < q; ++j) score("tausum_" + std::to_string(j + 1), trace.tausum_series(j), &z_tau);
  score("sigma2_eps", trace.sigma2_eps, nullptr);
  report.mean_abs_pi = mean_abs(z_pi);
  report.mean_abs_tausum = mean_abs(z_tau);
  std::vector<double> all = z_pi;
  all.insert(all.end(), z_tau.begin(), z_tau.end());
  report.mean_abs_all = mean_abs(all);
  return report;
}

}  // namespace sglss
