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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sglss/sampler.hpp"

namespace sglss {

/// Spectral density at frequency zero: Bartlett-windowed sum of
/// autocovariances up to lag max(1, floor(lag_fraction * n)).
double spectral_variance_zero(std::span<const double> series, double lag_fraction = 0.04);

/// Geweke convergence z-score comparing the first `frac_first` and the last
/// `frac_last` of a trace. Throws NumericError for zero-variance segments and
/// ValidationError for traces shorter than 50.
double geweke_z(std::span<const double> trace, double frac_first = 0.1, double frac_last = 0.5);

struct GewekeEntry {
  std::string name;               // "pi_3", "tausum_3", "sigma2_eps"
  std::optional<double> z;        // empty when the trace is constant
};

/// Per-trace Geweke scores for a chain plus the mean |z| of each family over
/// the traces where z is defined.
struct GewekeReport {
  std::vector<GewekeEntry> entries;
  std::optional<double> mean_abs_pi;
  std::optional<double> mean_abs_tausum;
  std::optional<double> mean_abs_all;
  std::size_t skipped = 0;
  static constexpr const char* kAggregation = "mean |z| over non-constant traces";
};

GewekeReport geweke_report(const ChainTrace& trace);

}  // namespace sglss
