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

#include "outputs.hpp"

#include <fstream>

#include "sglss/io.hpp"

namespace sglss::cli {

Runs encode_runs(const MaskMatrix& mask, Eigen::Index row) {
  Runs runs;
  const Eigen::Index p = mask.cols();
  Eigen::Index s = 0;
  while (s < p) {
    if (mask(row, s) == 0) {
      ++s;
      continue;
    }
    const Eigen::Index start = s;
    while (s < p && mask(row, s) != 0) ++s;
    runs.emplace_back(static_cast<std::size_t>(start), static_cast<std::size_t>(s - start));
  }
  return runs;
}

Json runs_json(const MaskMatrix& mask) {
  Json out = Json::array();
  for (Eigen::Index j = 0; j < mask.rows(); ++j) {
    Json row = Json::array();
    for (const auto& [start, len] : encode_runs(mask, j)) row.push_back({start, len});
    out.push_back(std::move(row));
  }
  return out;
}

MaskMatrix decode_runs(const nlohmann::json& rows, std::size_t p) {
  if (!rows.is_array()) throw ValidationError("runs", "expected an array per covariate");
  MaskMatrix m = MaskMatrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (const auto& run : rows[j]) {
      const auto start = run.at(0).get<std::size_t>();
      const auto len = run.at(1).get<std::size_t>();
      if (start + len > p) throw ValidationError("runs", "run exceeds the number of sites");
      m.row(static_cast<Eigen::Index>(j)).segment(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len))
          .setOnes();
    }
  }
  return m;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json selection_json(const metrics::SelectionMetrics& m) {
  Json j;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["tn"] = m.tn;
  j["precision"] = optional_json(m.precision);
  j["recall"] = optional_json(m.recall);
  j["f1"] = optional_json(m.f1);
  return j;
}

void write_json(const fs::path& path, const Json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void update_manifest(const fs::path& dir, const std::string& command, Json entry) {
  const fs::path path = dir / "manifest.json";
  Json manifest = Json::object();
  if (fs::exists(path)) {
    std::ifstream in(path);
    try {
      manifest = Json::parse(in);
    } catch (const nlohmann::json::exception&) {
      manifest = Json::object();
    }
  }
  manifest[command] = std::move(entry);
  write_json(path, manifest);
}

void write_truth(const fs::path& dir, const sim::GroundTruth& truth, double spacing) {
  fs::create_directories(dir);
  io::write_matrix_binary(dir / "beta_true.bin", truth.beta_true);
  io::write_matrix_binary(dir / "Z_true.bin", truth.Z_true);
  Json j;
  j["scenario"] = truth.scenario == sim::Scenario::kS1 ? "s1" : "s2";
  j["seed"] = truth.generator_seed;
  if (truth.scenario == sim::Scenario::kS2) {
    j["pi_target"] = truth.pi_target;
    j["square_side"] = truth.square_side;
  }
  j["rows"] = truth.rows;
  j["cols"] = truth.cols;
  j["spacing"] = spacing;
  j["n"] = truth.Z_true.rows();
  j["q"] = truth.support_true.rows();
  j["p"] = truth.support_true.cols();
  j["kernel"] = {{"sigma2_s", truth.kernel.sigma2_s}, {"rho", truth.kernel.rho}};
  j["sigma2_eps"] = truth.sigma2_eps_true;
  j["influential_global"] = truth.influential_global;
  Json counts = Json::array();
  for (Eigen::Index r = 0; r < truth.support_true.rows(); ++r) {
    counts.push_back(truth.support_true.row(r).cast<int>().sum());
  }
  j["nonzero_sites"] = counts;
  j["support_runs"] = runs_json(truth.support_true);
  j["beta_true"] = "beta_true.bin";
  j["Z_true"] = "Z_true.bin";
  write_json(dir / "truth.json", j);
}

Truth read_truth(const fs::path& truth_json) {
  const auto j = read_json(truth_json);
  const fs::path dir = truth_json.parent_path();
  Truth t;
  try {
    t.rows = j.at("rows").get<std::size_t>();
    t.cols = j.at("cols").get<std::size_t>();
    t.spacing = j.at("spacing").get<double>();
    t.kernel.sigma2_s = j.at("kernel").at("sigma2_s").get<double>();
    t.kernel.rho = j.at("kernel").at("rho").get<double>();
    t.sigma2_eps = j.at("sigma2_eps").get<double>();
    t.influential_global = j.at("influential_global").get<std::vector<bool>>();
    t.support = decode_runs(j.at("support_runs"), j.at("p").get<std::size_t>());
    t.beta_true = io::read_matrix_binary(dir / j.at("beta_true").get<std::string>());
    t.Z_true = io::read_matrix_binary(dir / j.at("Z_true").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(truth_json.string() + ": " + e.what());
  }
  return t;
}

void write_fit_outputs(const fs::path& dir, const PosteriorSummary& s, double d, std::size_t chains) {
  fs::create_directories(dir);
  io::write_csv(dir / "beta_mean.csv", s.beta_mean);
  io::write_csv(dir / "Z_mean.csv", s.Z_mean);
  io::write_csv(dir / "mppi_local.csv", s.mppi_local);
  io::write_matrix_binary(dir / "Sigma_mean.bin", s.Sigma_mean);
  Json j;
  j["draws"] = s.draws;
  j["chains"] = chains;
  j["d"] = d;
  j["sigma2_eps_mean"] = s.sigma2_eps_mean;
  j["mppi_global"] = std::vector<double>(s.mppi_global.data(), s.mppi_global.data() + s.mppi_global.size());
  Json selected = Json::array();
  for (std::size_t k = 0; k < s.selected_global.size(); ++k) {
    if (s.selected_global[k]) selected.push_back(k + 1);
  }
  j["selected_global"] = selected;
  j["selected_global_mask"] = s.selected_global;
  Json counts = Json::array();
  for (Eigen::Index r = 0; r < s.selected_local.rows(); ++r) counts.push_back(s.selected_local.row(r).cast<int>().sum());
  j["selected_local_count"] = counts;
  j["selected_local_runs"] = runs_json(s.selected_local);
  write_json(dir / "summary.json", j);
}

FitOutputs read_fit_outputs(const fs::path& dir) {
  const auto j = read_json(dir / "summary.json");
  FitOutputs f;
  f.beta_mean = io::read_csv(dir / "beta_mean.csv");
  f.Z_mean = io::read_csv(dir / "Z_mean.csv");
  f.Sigma_mean = io::read_matrix_binary(dir / "Sigma_mean.bin");
  try {
    f.sigma2_eps_mean = j.at("sigma2_eps_mean").get<double>();
    f.selected_global = j.at("selected_global_mask").get<std::vector<bool>>();
    f.selected_local = decode_runs(j.at("selected_local_runs"), static_cast<std::size_t>(f.beta_mean.cols()));
  } catch (const nlohmann::json::exception& e) {
    throw IoError((dir / "summary.json").string() + ": " + e.what());
  }
  return f;
}

void write_mua_outputs(const fs::path& dir, const mua::MuaResult& r) {
  fs::create_directories(dir);
  io::write_csv(dir / "mua_pvals.csv", r.fit.pvals);
  io::write_csv(dir / "mua_beta.csv", r.fit.beta_hat);
  Json j;
  j["alpha"] = r.alpha;
  j["dof"] = r.fit.dof;
  j["global_pvals"] = r.global_pvals;
  Json procs;
  for (const auto& sel : r.selections) {
    Json pj;
    Json selected = Json::array();
    for (std::size_t k = 0; k < sel.global.size(); ++k) {
      if (sel.global[k]) selected.push_back(k + 1);
    }
    pj["selected_global"] = selected;
    pj["selected_global_mask"] = sel.global;
    Json counts = Json::array();
    for (Eigen::Index row = 0; row < sel.local.rows(); ++row) counts.push_back(sel.local.row(row).cast<int>().sum());
    pj["selected_local_count"] = counts;
    pj["selected_local_runs"] = runs_json(sel.local);
    if (sel.procedure == mua::Procedure::kSBH) {
      pj["global_pi0"] = sel.global_pi0;
      pj["global_pi0_fallback_to_bh"] = sel.global_pi0_fallback;
      pj["storey_lambda"] = mua::kStoreyLambda;
    }
    procs[mua::to_string(sel.procedure)] = std::move(pj);
  }
  j["procedures"] = std::move(procs);
  write_json(dir / "mua_summary.json", j);
}

}  // namespace sglss::cli
