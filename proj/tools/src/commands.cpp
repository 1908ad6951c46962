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

#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "sglss/diagnostics.hpp"
#include "sglss/io.hpp"
#include "sglss/kernels.hpp"
#include "sglss/metrics.hpp"
#include "sglss/mua.hpp"
#include "sglss/parallel.hpp"
#include "sglss/sampler.hpp"
#include "sglss/simulate.hpp"
#include "sglss/version.hpp"

namespace sglss::cli {
namespace {

const std::string& require(const std::optional<std::string>& v, const char* name) {
  if (!v || v->empty()) throw ValidationError(name, "is required");
  return *v;
}

Json base_manifest(const RunConfig& cfg) {
  Json m;
  m["version"] = kVersion;
  m["config"] = to_json(cfg);
  return m;
}

Json kernel_json(const MaternKernel& k) { return {{"sigma2_s", k.sigma2_s}, {"rho", k.rho}, {"nu", k.nu}}; }

Dataset load_dataset(const RunConfig& cfg, std::vector<int>* standardized) {
  Dataset data = io::read_dataset(require(cfg.dataset, "dataset"));
  if (cfg.standardize_continuous) {
    const auto cols = standardize_continuous(data);
    if (standardized) *standardized = cols;
  }
  return data;
}

void write_trace(const fs::path& path, const ChainTrace& t, std::size_t q) {
  const auto rows = static_cast<Eigen::Index>(t.size());
  Matrix m(rows, static_cast<Eigen::Index>(2 + 2 * q));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto k = static_cast<std::size_t>(r);
    m(r, 0) = static_cast<double>(t.iter[k]);
    m(r, 1) = t.sigma2_eps[k];
    for (std::size_t j = 0; j < q; ++j) {
      m(r, static_cast<Eigen::Index>(2 + j)) = t.pi[k][j];
      m(r, static_cast<Eigen::Index>(2 + q + j)) = t.tausum[k][j];
    }
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "iter,sigma2_eps";
  for (std::size_t j = 1; j <= q; ++j) out << ",pi_" << j;
  for (std::size_t j = 1; j <= q; ++j) out << ",tausum_" << j;
  out << '\n';
  io::write_csv(out, m);
  if (!out) throw IoError("write failed: " + path.string());
}

Json geweke_json(const ChainTrace& trace, std::uint64_t seed) {
  const GewekeReport rep = geweke_report(trace);
  Json j;
  j["seed"] = seed;
  j["mean_abs_z_pi"] = optional_json(rep.mean_abs_pi);
  j["mean_abs_z_tausum"] = optional_json(rep.mean_abs_tausum);
  j["mean_abs_z_all"] = optional_json(rep.mean_abs_all);
  j["constant_traces_skipped"] = rep.skipped;
  Json z;
  for (const auto& e : rep.entries) z[e.name] = optional_json(e.z);
  j["z"] = std::move(z);
  return j;
}

// Truly influential covariates only.
Json local_json(const MaskMatrix& selected, const Truth& t) {
  const MaskMatrix& truth = t.support;
  Json out = Json::object();
  for (Eigen::Index j = 0; j < truth.rows(); ++j) {
    if (!t.influential_global[static_cast<std::size_t>(j)]) continue;
    const MaskMatrix sel = selected.row(j);
    const MaskMatrix tru = truth.row(j);
    out["x" + std::to_string(j + 1)] = selection_json(metrics::precision_recall_f1(sel, tru));
  }
  return out;
}

void flatten(const nlohmann::json& j, const std::string& prefix, std::map<std::string, std::vector<std::optional<double>>>& acc,
             std::size_t run, std::size_t runs) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix + "/" + k, acc, run, runs);
  } else if (j.is_number() || j.is_null()) {
    auto& slot = acc[prefix];
    slot.resize(runs);
    if (j.is_number()) slot[run] = j.get<double>();
  }
}

}  // namespace

std::vector<int> standardize_continuous(Dataset& data) {
  std::vector<int> cols;
  const auto n = data.X.rows();
  if (n < 2) return cols;
  for (Eigen::Index j = 0; j < data.X.cols(); ++j) {
    std::set<double> distinct;
    for (Eigen::Index i = 0; i < n && distinct.size() <= 2; ++i) distinct.insert(data.X(i, j));
    if (distinct.size() <= 2) continue;
    const double mean = data.X.col(j).mean();
    const double sd = std::sqrt((data.X.col(j).array() - mean).square().sum() / static_cast<double>(n - 1));
    data.X.col(j) = (data.X.col(j).array() - mean) / sd;
    cols.push_back(static_cast<int>(j + 1));
  }
  return cols;
}

void cmd_simulate(const RunConfig& cfg) {
  const fs::path out = require(cfg.out, "out");
  const auto opts = cfg.simulation_options();
  std::pair<Dataset, sim::GroundTruth> sim_out;
  if (cfg.scenario == "s1") sim_out = sim::gen_scenario1(cfg.seed, opts);
  else if (cfg.scenario == "s2") sim_out = sim::gen_scenario2(cfg.pi, cfg.seed, opts);
  else throw ValidationError("scenario", "expected s1 or s2, got " + cfg.scenario);
  const auto& [data, truth] = sim_out;

  fs::create_directories(out);
  std::string dataset_name;
  if (cfg.format == "binary") {
    dataset_name = "dataset.bin";
    io::write_dataset_binary(out / dataset_name, data);
  } else if (cfg.format == "csv") {
    dataset_name = "dataset";
    io::write_dataset_csv(out / dataset_name, data);
  } else {
    throw ValidationError("format", "expected binary or csv");
  }
  write_truth(out, truth, sim::effective_spacing(opts));

  Json m = base_manifest(cfg);
  m["seed"] = cfg.seed;
  m["dataset"] = dataset_name;
  m["truth"] = "truth.json";
  update_manifest(out, "simulate", std::move(m));
}

void cmd_fit(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path out = require(cfg.out, "out");
  if (cfg.chains < 1) throw ValidationError("chains", "must be >= 1");
  const int threads = resolve_threads(cfg);
  std::vector<int> standardized;
  const Dataset data = load_dataset(cfg, &standardized);
  Hyperparams hyper = cfg.hyperparams(data.q(), data.p());
  const ChainConfig chain = cfg.chain_config(threads);

  Json kernel_entry;
  if (cfg.kernel) {
    kernel_entry = kernel_json(*cfg.kernel);
    kernel_entry["source"] = "explicit";
  } else {
    validate(data, hyper);
    hyper.kernel = fit_kernel_empirical(data, mua::ols_coefficients(data));
    kernel_entry = kernel_json(hyper.kernel);
    kernel_entry["source"] = "empirical";
  }

  fs::create_directories(out);
  std::vector<ChainResult> results;
  try {
    results = run_chains(data, hyper, chain, static_cast<std::size_t>(cfg.chains));
  } catch (const ChainFailure& e) {
    write_trace(out / "trace_partial.csv", e.partial_trace(), data.q());
    throw;
  }
  const PosteriorSummary pooled = pool_summaries(results);

  Json geweke;
  geweke["aggregation"] = GewekeReport::kAggregation;
  geweke["chains"] = Json::array();
  Json seeds = Json::array();
  for (std::size_t c = 0; c < results.size(); ++c) {
    write_trace(out / ("trace_chain" + std::to_string(c) + ".csv"), results[c].trace, data.q());
    geweke["chains"].push_back(geweke_json(results[c].trace, results[c].seed));
    seeds.push_back(results[c].seed);
  }
  write_fit_outputs(out, pooled, hyper.d, results.size());

  Json m = base_manifest(cfg);
  m["dataset"] = *cfg.dataset;
  m["kernel"] = kernel_entry;
  m["chain_seeds"] = seeds;
  m["standardized_columns"] = standardized;
  m["threads"] = threads;
  m["geweke"] = std::move(geweke);
  m["elapsed_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  update_manifest(out, "fit", std::move(m));
}

void cmd_mua(const RunConfig& cfg) {
  const fs::path out = require(cfg.out, "out");
  const int threads = resolve_threads(cfg);
  std::vector<int> standardized;
  const Dataset data = load_dataset(cfg, &standardized);
  validate(data, cfg.hyperparams(data.q(), data.p()));
  const mua::MuaResult result = mua::mua_pipeline(data, cfg.alpha, threads);
  write_mua_outputs(out, result);
  Json m = base_manifest(cfg);
  m["dataset"] = *cfg.dataset;
  m["standardized_columns"] = standardized;
  update_manifest(out, "mua", std::move(m));
}

Json cmd_eval(const RunConfig& cfg) {
  const fs::path dir = require(cfg.fit_dir, "fit_dir");
  const fs::path truth_path = require(cfg.truth, "truth");
  const Truth truth = read_truth(truth_path);
  const bool has_fit = fs::exists(dir / "summary.json");
  const bool has_mua = fs::exists(dir / "mua_summary.json");
  if (!has_fit && !has_mua) throw IoError("no summary.json or mua_summary.json in " + dir.string());

  Json out;
  if (has_fit) {
    const FitOutputs fit = read_fit_outputs(dir);
    const Matrix sigma_true = matern52_gram(truth.grid().distances(), truth.kernel);
    Json b;
    b["global"] = selection_json(metrics::precision_recall_f1(fit.selected_global, truth.influential_global));
    b["local"] = local_json(fit.selected_local, truth);
    Json mse;
    mse["Z"] = metrics::mse(truth.Z_true, fit.Z_mean);
    mse["Sigma"] = metrics::mse(sigma_true, fit.Sigma_mean);
    mse["beta"] = metrics::mse(truth.beta_true, fit.beta_mean);
    const double e = fit.sigma2_eps_mean - truth.sigma2_eps;
    mse["sigma2_eps"] = e * e;
    b["mse"] = std::move(mse);
    out["bhm"] = std::move(b);
  }
  if (has_mua) {
    const auto j = read_json(dir / "mua_summary.json");
    const Matrix beta_hat = io::read_csv(dir / "mua_beta.csv");
    Json mj;
    try {
      for (const auto& [name, proc] : j.at("procedures").items()) {
        Json pj;
        const auto global = proc.at("selected_global_mask").get<std::vector<bool>>();
        pj["global"] = selection_json(metrics::precision_recall_f1(global, truth.influential_global));
        const MaskMatrix local = decode_runs(proc.at("selected_local_runs"), static_cast<std::size_t>(beta_hat.cols()));
        pj["local"] = local_json(local, truth);
        mj[name] = std::move(pj);
      }
    } catch (const nlohmann::json::exception& e) {
      throw IoError((dir / "mua_summary.json").string() + ": " + e.what());
    }
    mj["mse"] = {{"beta", metrics::mse(truth.beta_true, beta_hat)}};
    out["mua"] = std::move(mj);
  }
  const fs::path dest = cfg.out.value_or(dir.string());
  write_json(dest / "metrics.json", out);
  update_manifest(dest, "eval", {{"fit_dir", dir.string()}, {"truth", truth_path.string()}});
  return out;
}

Json aggregate_metrics(const std::vector<fs::path>& dirs) {
  std::map<std::string, std::vector<std::optional<double>>> acc;
  for (std::size_t r = 0; r < dirs.size(); ++r) {
    const fs::path file = fs::is_directory(dirs[r]) ? dirs[r] / "metrics.json" : dirs[r];
    const auto j = read_json(file);
    flatten(j, "", acc, r, dirs.size());
  }
  Json table;
  for (auto& [key, values] : acc) {
    values.resize(dirs.size());
    const auto ms = metrics::mean_se(values);
    if (ms) table[key] = {{"mean", ms->mean}, {"se", ms->se}, {"count", ms->count}};
    else table[key] = nullptr;
  }
  Json out;
  out["runs"] = dirs.size();
  out["metrics"] = std::move(table);
  return out;
}

int cmd_replicate(const RunConfig& cfg) {
  const fs::path out = require(cfg.out, "out");
  if (cfg.replicates < 1) throw ValidationError("replicates", "must be >= 1");
  if (cfg.workers < 1) throw ValidationError("workers", "must be >= 1");
  const int threads = resolve_threads(cfg);
  const auto count = static_cast<std::size_t>(cfg.replicates);
  std::vector<fs::path> dirs(count);
  std::vector<std::string> failures(count);
  std::vector<bool> numeric(count, false);
  parallel_for(0, count, cfg.workers, [&](std::size_t r) {
    RunConfig rc = cfg;
    rc.seed = cfg.seed + r;
    rc.threads = threads;
    const fs::path dir = out / ("seed_" + std::to_string(rc.seed));
    dirs[r] = dir;
    rc.out = dir.string();
    try {
      cmd_simulate(rc);
      rc.dataset = (dir / (cfg.format == "csv" ? "dataset" : "dataset.bin")).string();
      cmd_fit(rc);
      cmd_mua(rc);
      rc.fit_dir = dir.string();
      rc.truth = (dir / "truth.json").string();
      cmd_eval(rc);
    } catch (const NumericError& e) {
      failures[r] = e.what();
      numeric[r] = true;
    } catch (const Error& e) {
      failures[r] = e.what();
    }
  });
  std::vector<fs::path> done;
  Json failed = Json::array();
  for (std::size_t r = 0; r < count; ++r) {
    if (failures[r].empty()) done.push_back(dirs[r]);
    else failed.push_back({{"seed", cfg.seed + r}, {"error", failures[r]}});
  }
  Json agg = done.empty() ? Json{{"runs", 0}, {"metrics", Json::object()}} : aggregate_metrics(done);
  agg["seeds"] = {cfg.seed, cfg.seed + count - 1};
  agg["failed"] = failed;
  write_json(out / "aggregate.json", agg);
  update_manifest(out, "replicate", base_manifest(cfg));
  for (std::size_t r = 0; r < count; ++r) {
    if (!failures[r].empty() && !numeric[r]) throw ValidationError("replicate", failures[r]);
  }
  return failed.empty() ? kOk : kNumeric;
}

}  // namespace sglss::cli
