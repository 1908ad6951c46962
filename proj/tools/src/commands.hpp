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

#include <filesystem>
#include <vector>

#include "config.hpp"
#include "outputs.hpp"

namespace sglss::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2, kNumeric = 3 };

/// Parses argv and dispatches; returns the process exit code.
int run(int argc, char** argv);

void cmd_simulate(const RunConfig& cfg);
void cmd_fit(const RunConfig& cfg);
void cmd_mua(const RunConfig& cfg);
Json cmd_eval(const RunConfig& cfg);
/// Returns kNumeric if any replicate failed, kOk otherwise.
int cmd_replicate(const RunConfig& cfg);

/// Mean / SE of every numeric leaf across the metrics.json files in `dirs`;
/// nulls (undefined ratios) are skipped per leaf.
Json aggregate_metrics(const std::vector<fs::path>& dirs);

/// Z-scores X columns with more than two distinct values; returns their
/// 1-based indices.
std::vector<int> standardize_continuous(Dataset& data);

}  // namespace sglss::cli
