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

// On-disk layout of run directories: truth, fit summaries, MUA results,
// manifests.

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sglss/metrics.hpp"
#include "sglss/model.hpp"
#include "sglss/mua.hpp"
#include "sglss/simulate.hpp"

namespace sglss::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

/// Runs of ones as (start, length) pairs in index order.
using Runs = std::vector<std::pair<std::size_t, std::size_t>>;
Runs encode_runs(const MaskMatrix& mask, Eigen::Index row);
Json runs_json(const MaskMatrix& mask);
MaskMatrix decode_runs(const nlohmann::json& rows, std::size_t p);

Json selection_json(const metrics::SelectionMetrics& m);
Json optional_json(const std::optional<double>& v);

void write_json(const fs::path& path, const Json& j);
nlohmann::json read_json(const fs::path& path);

/// Sets manifest[command] in dir/manifest.json, keeping other commands' entries.
void update_manifest(const fs::path& dir, const std::string& command, Json entry);

struct Truth {
  Matrix beta_true;
  Matrix Z_true;
  MaskMatrix support;
  std::vector<bool> influential_global;
  MaternKernel kernel;
  double sigma2_eps = 1.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double spacing = 1.0;

  LocationGrid grid() const { return LocationGrid::lattice(rows, cols, spacing); }
};

/// truth.json plus beta_true.bin and Z_true.bin beside it.
void write_truth(const fs::path& dir, const sim::GroundTruth& truth, double spacing);
Truth read_truth(const fs::path& truth_json);

struct FitOutputs {
  std::vector<bool> selected_global;
  MaskMatrix selected_local;
  Matrix beta_mean;
  Matrix Z_mean;
  Matrix Sigma_mean;
  double sigma2_eps_mean = 0.0;
};

/// summary.json, beta_mean.csv, Z_mean.csv, mppi_local.csv, Sigma_mean.bin.
void write_fit_outputs(const fs::path& dir, const PosteriorSummary& summary, double d, std::size_t chains);
FitOutputs read_fit_outputs(const fs::path& dir);

/// mua_summary.json, mua_pvals.csv, mua_beta.csv.
void write_mua_outputs(const fs::path& dir, const mua::MuaResult& result);

}  // namespace sglss::cli
