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

#include "sglss/metrics.hpp"

#include <cmath>

#include "sglss/errors.hpp"

namespace sglss::metrics {
namespace {

SelectionMetrics finish(SelectionMetrics m) {
  if (m.tp + m.fp > 0) m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  if (m.tp + m.fn > 0) m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  if (m.precision && m.recall) {
    const double s = *m.precision + *m.recall;
    m.f1 = s > 0.0 ? 2.0 * *m.precision * *m.recall / s : 0.0;
  }
  return m;
}

void tally(SelectionMetrics& m, bool sel, bool tru) {
  if (sel && tru) ++m.tp;
  else if (sel) ++m.fp;
  else if (tru) ++m.fn;
  else ++m.tn;
}

}  // namespace

SelectionMetrics precision_recall_f1(const std::vector<bool>& selected, const std::vector<bool>& truth) {
  if (selected.size() != truth.size()) throw ValidationError("selected", "size differs from truth");
  SelectionMetrics m;
  for (std::size_t k = 0; k < selected.size(); ++k) tally(m, selected[k], truth[k]);
  return finish(m);
}

SelectionMetrics precision_recall_f1(const MaskMatrix& selected, const MaskMatrix& truth) {
  if (selected.rows() != truth.rows() || selected.cols() != truth.cols()) {
    throw ValidationError("selected", "shape differs from truth");
  }
  SelectionMetrics m;
  for (Eigen::Index k = 0; k < selected.size(); ++k) tally(m, selected(k) != 0, truth(k) != 0);
  return finish(m);
}

double mse(const Matrix& truth, const Matrix& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw ValidationError("estimate", "shape differs from truth");
  }
  if (truth.size() == 0) throw ValidationError("truth", "is empty");
  return (truth - estimate).squaredNorm() / static_cast<double>(truth.size());
}

std::optional<MeanSe> mean_se(const std::vector<std::optional<double>>& values) {
  MeanSe out;
  double sum = 0.0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++out.count;
    }
  }
  if (out.count == 0) return std::nullopt;
  out.mean = sum / static_cast<double>(out.count);
  if (out.count > 1) {
    double ss = 0.0;
    for (const auto& v : values) {
      if (v) ss += (*v - out.mean) * (*v - out.mean);
    }
    out.se = std::sqrt(ss / static_cast<double>(out.count - 1)) / std::sqrt(static_cast<double>(out.count));
  }
  return out;
}

}  // namespace sglss::metrics
