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

#include <cstddef>
#include <optional>
#include <vector>

#include "sglss/model.hpp"

namespace sglss::metrics {

/// Confusion counts plus ratios; a ratio with a zero denominator is empty.
struct SelectionMetrics {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

SelectionMetrics precision_recall_f1(const std::vector<bool>& selected, const std::vector<bool>& truth);
SelectionMetrics precision_recall_f1(const MaskMatrix& selected, const MaskMatrix& truth);

/// Mean squared difference over all entries jointly.
double mse(const Matrix& truth, const Matrix& estimate);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample sd / sqrt(count); 0 for a single value
  std::size_t count = 0;
};

/// Mean and standard error of the defined values; empty if none are defined.
std::optional<MeanSe> mean_se(const std::vector<std::optional<double>>& values);

}  // namespace sglss::metrics
