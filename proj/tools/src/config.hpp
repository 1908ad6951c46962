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

// Run configuration shared by every subcommand. Values come from built-in
// defaults, then a JSON file (--config), then command-line flags.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "sglss/model.hpp"
#include "sglss/sampler.hpp"
#include "sglss/simulate.hpp"

namespace sglss::cli {

struct RunConfig {
  std::optional<std::string> dataset;
  std::optional<std::string> truth;
  std::optional<std::string> fit_dir;
  std::optional<std::string> out;

  std::uint64_t seed = 0;
  int iters = 2000;
  int burnin = 500;
  int thin = 1;
  int chains = 1;
  std::optional<int> threads;
  std::string init = "mua";

  double a_eps = 1.0;
  double b_eps = 1.0;
  double a_pi = 1.0;
  double b_pi = 1.0;
  double d = 0.05;
  int delta = 5;
  double mu0 = 0.0;
  double sigma2_0 = 1.0;
  std::optional<MaternKernel> kernel;  // empty: fit from OLS residuals

  double alpha = 0.05;
  bool standardize_continuous = false;

  std::string scenario = "s1";
  double pi = 0.09;
  std::size_t n = 100;
  std::size_t rows = 30;
  std::size_t cols = 30;
  double spacing = 0.0;
  std::string format = "binary";

  int replicates = 10;
  int workers = 1;

  Hyperparams hyperparams(std::size_t q, std::size_t p) const;
  ChainConfig chain_config(int threads) const;
  sim::SimulationOptions simulation_options() const;
};

/// Overlays the keys of `j` onto `cfg`; unknown keys and ill-typed values
/// throw ValidationError.
void apply_json(RunConfig& cfg, const nlohmann::json& j);
RunConfig load_config(const std::string& path);

nlohmann::ordered_json to_json(const RunConfig& cfg);

/// --threads, else the config, else SGLSS_THREADS, else 1.
int resolve_threads(const RunConfig& cfg);

}  // namespace sglss::cli
