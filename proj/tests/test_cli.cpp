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

#include <doctest.h>

#include <fstream>
#include <iterator>
#include <string>
#include <unistd.h>
#include <vector>

#include "commands.hpp"
#include "sglss/io.hpp"
#include "sglss/kernels.hpp"

using namespace sglss;
namespace fs = std::filesystem;

namespace {

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sglss");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sglss_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& s) const { return (path / s).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json json_file(const fs::path& p) { return cli::read_json(p); }

// Small scenario-1 dataset shared by the fit tests.
const std::vector<std::string> kSmall = {"--n", "20", "--rows", "6", "--cols", "6"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("simulate is byte-identical on re-run") {
  TempDir t;
  REQUIRE(run_cli({"simulate", "--scenario", "s1", "--seed", "7", "--out", t / "a"}) == 0);
  REQUIRE(run_cli({"simulate", "--scenario", "s1", "--seed", "7", "--out", t / "b"}) == 0);
  for (const char* f : {"dataset.bin", "truth.json", "beta_true.bin", "Z_true.bin"}) {
    CHECK(slurp(t.path / "a" / f) == slurp(t.path / "b" / f));
  }
  REQUIRE(run_cli({"simulate", "--scenario", "s1", "--seed", "8", "--out", t / "c"}) == 0);
  CHECK(slurp(t.path / "a" / "dataset.bin") != slurp(t.path / "c" / "dataset.bin"));
}

TEST_CASE("scenario 2 truth at pi = 0.09") {
  TempDir t;
  REQUIRE(run_cli({"simulate", "--scenario", "s2", "--pi", "0.09", "--n", "5", "--out", t / "s2"}) == 0);
  const auto truth = json_file(t.path / "s2" / "truth.json");
  const auto counts = truth.at("nonzero_sites").get<std::vector<int>>();
  REQUIRE(counts.size() == 15);
  for (std::size_t j = 0; j < 8; ++j) CHECK(counts[j] == 81);
  for (std::size_t j = 8; j < 15; ++j) CHECK(counts[j] == 0);
  CHECK(truth.at("square_side").get<int>() == 9);
}

TEST_CASE("csv datasets round trip through the CLI") {
  TempDir t;
  REQUIRE(run_cli(concat({"simulate", "--format", "csv", "--seed", "2", "--out", t / "s"}, kSmall)) == 0);
  CHECK(fs::is_directory(t.path / "s" / "dataset"));
  REQUIRE(run_cli({"mua", "--dataset", t / "s/dataset", "--out", t / "s"}) == 0);
  CHECK(fs::exists(t.path / "s" / "mua_summary.json"));
}

TEST_CASE("usage and config errors exit with 2") {
  TempDir t;
  CHECK(run_cli({"simulate", "--scenario", "s3", "--out", t / "x"}) == 2);
  CHECK(run_cli({"mua", "--dataset", t / "missing.bin", "--out", t / "x"}) == 2);
  CHECK(run_cli({"fit", "--out", t / "x"}) == 2);
  CHECK(run_cli({"frobnicate"}) == 2);
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"simulate", "--scenario", "s2", "--pi", "0.1", "--out", t / "x"}) == 2);
  CHECK(run_cli({"simulate", "--out", t / "x", "--sigma2-s", "1"}) == 2);

  std::ofstream(t.path / "bad.json") << R"({"seed": 1, "iterations": 10})";
  CHECK(run_cli({"simulate", "--config", t / "bad.json", "--out", t / "x"}) == 2);
  std::ofstream(t.path / "typed.json") << R"({"seed": "one"})";
  CHECK(run_cli({"simulate", "--config", t / "typed.json", "--out", t / "x"}) == 2);
  std::ofstream(t.path / "broken.json") << "{";
  CHECK(run_cli({"simulate", "--config", t / "broken.json", "--out", t / "x"}) == 2);
  CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("config file values and flag precedence") {
  TempDir t;
  std::ofstream(t.path / "cfg.json") << R"({"seed": 5, "n": 7, "rows": 4, "cols": 5, "kernel": {"sigma2_s": 2, "rho": 0.5}})";
  REQUIRE(run_cli({"simulate", "--config", t / "cfg.json", "--rows", "3", "--out", t / "s"}) == 0);
  const auto truth = json_file(t.path / "s" / "truth.json");
  CHECK(truth.at("seed").get<int>() == 5);
  CHECK(truth.at("n").get<int>() == 7);
  CHECK(truth.at("rows").get<int>() == 3);
  CHECK(truth.at("cols").get<int>() == 5);

  cli::RunConfig c = cli::load_config(t / "cfg.json");
  REQUIRE(c.kernel);
  CHECK(c.kernel->rho == 0.5);
  cli::RunConfig back;
  cli::apply_json(back, cli::to_json(c));
  CHECK(cli::to_json(back) == cli::to_json(c));
  CHECK_THROWS_AS(cli::apply_json(back, nlohmann::json{{"kernel", {{"rho", 1.0}}}}), ValidationError);
  CHECK_THROWS_AS(cli::apply_json(back, nlohmann::json{{"kernel", "fitted"}}), ValidationError);
  CHECK_THROWS_AS(cli::apply_json(back, nlohmann::json::array()), ValidationError);
}

TEST_CASE("thread count resolution") {
  cli::RunConfig c;
  ::unsetenv("SGLSS_THREADS");
  CHECK(cli::resolve_threads(c) == 1);
  ::setenv("SGLSS_THREADS", "3", 1);
  CHECK(cli::resolve_threads(c) == 3);
  c.threads = 2;
  CHECK(cli::resolve_threads(c) == 2);
  c.threads.reset();
  ::setenv("SGLSS_THREADS", "3x", 1);
  CHECK_THROWS_AS(cli::resolve_threads(c), ValidationError);
  ::unsetenv("SGLSS_THREADS");
  c.threads = 0;
  CHECK_THROWS_AS(cli::resolve_threads(c), ValidationError);
}

TEST_CASE("fit outputs are deterministic and thread independent") {
  TempDir t;
  REQUIRE(run_cli(concat({"simulate", "--seed", "4", "--out", t / "s"}, kSmall)) == 0);
  const std::vector<std::string> fit = {"fit", "--dataset", t / "s/dataset.bin", "--iters", "60", "--burnin", "20",
                                        "--chains", "2", "--seed", "11"};
  REQUIRE(run_cli(concat(fit, {"--out", t / "a", "--threads", "1"})) == 0);
  REQUIRE(run_cli(concat(fit, {"--out", t / "b", "--threads", "1"})) == 0);
  REQUIRE(run_cli(concat(fit, {"--out", t / "c", "--threads", "3"})) == 0);
  for (const char* f : {"summary.json", "beta_mean.csv", "Z_mean.csv", "mppi_local.csv", "Sigma_mean.bin",
                        "trace_chain0.csv", "trace_chain1.csv"}) {
    CAPTURE(f);
    CHECK(slurp(t.path / "a" / f) == slurp(t.path / "b" / f));
    CHECK(slurp(t.path / "a" / f) == slurp(t.path / "c" / f));
  }
  const auto manifest = json_file(t.path / "a" / "manifest.json").at("fit");
  CHECK(manifest.at("kernel").at("source") == "empirical");
  CHECK(manifest.at("geweke").at("chains").size() == 2);
  CHECK(manifest.contains("elapsed_seconds"));
  CHECK(json_file(t.path / "a" / "summary.json").at("draws").get<int>() == 80);

  // Header: iter, sigma2_eps, pi_1..15, tausum_1..15.
  std::ifstream trace(t.path / "a" / "trace_chain0.csv");
  std::string header;
  std::getline(trace, header);
  CHECK(std::count(header.begin(), header.end(), ',') == 31);
  CHECK(header.rfind("iter,sigma2_eps,pi_1,", 0) == 0);
  CHECK(header.find(",tausum_15") != std::string::npos);
}

TEST_CASE("threshold extremes") {
  TempDir t;
  REQUIRE(run_cli(concat({"simulate", "--seed", "4", "--out", t / "s"}, kSmall)) == 0);
  const std::vector<std::string> fit = {"fit", "--dataset", t / "s/dataset.bin", "--iters", "40", "--burnin", "10"};
  REQUIRE(run_cli(concat(fit, {"--d", "1.0", "--out", t / "d1"})) == 0);
  const auto s1 = json_file(t.path / "d1" / "summary.json");
  CHECK(s1.at("selected_global").empty());
  for (int c : s1.at("selected_local_count").get<std::vector<int>>()) CHECK(c == 0);

  REQUIRE(run_cli(concat(fit, {"--d", "0.0", "--out", t / "d0"})) == 0);
  std::ifstream trace(t.path / "d0" / "trace_chain0.csv");
  std::string header, row;
  std::getline(trace, header);
  std::getline(trace, row);
  CHECK(std::count(row.begin(), row.end(), ',') == 31);
  CHECK(run_cli(concat(fit, {"--d", "1.5", "--out", t / "bad"})) == 2);
}

TEST_CASE("explicit kernel skips fitting") {
  TempDir t;
  REQUIRE(run_cli(concat({"simulate", "--seed", "4", "--out", t / "s"}, kSmall)) == 0);
  REQUIRE(run_cli({"fit", "--dataset", t / "s/dataset.bin", "--iters", "10", "--burnin", "0", "--sigma2-s", "0.7",
               "--rho", "0.3", "--out", t / "f"}) == 0);
  const auto k = json_file(t.path / "f" / "manifest.json").at("fit").at("kernel");
  CHECK(k.at("source") == "explicit");
  CHECK(k.at("rho").get<double>() == 0.3);
}

TEST_CASE("numeric failure exits with 3") {
  TempDir t;
  // Constant-zero images: zero OLS residuals, so no kernel can be fitted.
  Dataset d;
  d.grid = LocationGrid::lattice(2, 2);
  d.X = Matrix::Random(6, 2);
  d.Y = Matrix::Zero(6, 4);
  io::write_dataset_binary(t.path / "exact.bin", d);
  CHECK(run_cli({"fit", "--dataset", t / "exact.bin", "--iters", "5", "--burnin", "0", "--out", t / "f"}) == 3);
}

TEST_CASE("standardize continuous columns") {
  Dataset d;
  d.grid = LocationGrid::lattice(1, 1);
  d.X.resize(4, 3);
  d.X << 1, 0, 2, 2, 1, 2, 3, 1, 2, 6, 0, 2;
  d.Y = Matrix::Zero(4, 1);
  const auto cols = cli::standardize_continuous(d);
  REQUIRE(cols == std::vector<int>{1});
  CHECK(d.X.col(0).mean() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK((d.X.col(0).array() - 0.0).square().sum() / 3.0 == doctest::Approx(1.0));
  CHECK(d.X(1, 1) == 1.0);
}

TEST_CASE("mua at alpha = 1 and scenario-1 global selections") {
  TempDir t;
  REQUIRE(run_cli({"simulate", "--seed", "1", "--out", t / "s"}) == 0);
  REQUIRE(run_cli({"mua", "--dataset", t / "s/dataset.bin", "--out", t / "m"}) == 0);
  const auto m = json_file(t.path / "m" / "mua_summary.json");
  for (const char* proc : {"BH", "BY", "SBH"}) {
    auto sel = m.at("procedures").at(proc).at("selected_global").get<std::vector<int>>();
    for (int j = 1; j <= 8; ++j) CHECK(std::find(sel.begin(), sel.end(), j) != sel.end());
  }
  CHECK(m.at("procedures").at("SBH").at("global_pi0_fallback_to_bh").get<bool>());

  REQUIRE(run_cli({"mua", "--dataset", t / "s/dataset.bin", "--alpha", "1.0", "--out", t / "all"}) == 0);
  const auto a = json_file(t.path / "all" / "mua_summary.json");
  for (const char* proc : {"BH", "SBH"}) {
    CHECK(a.at("procedures").at(proc).at("selected_global").size() == 15);
    for (int c : a.at("procedures").at(proc).at("selected_local_count").get<std::vector<int>>()) CHECK(c == 900);
  }
  CHECK(run_cli({"mua", "--dataset", t / "s/dataset.bin", "--alpha", "0", "--out", t / "z"}) == 2);
}

TEST_CASE("eval reports undefined ratios as null") {
  TempDir t;
  REQUIRE(run_cli(concat({"simulate", "--seed", "9", "--out", t / "s"}, kSmall)) == 0);
  const cli::Truth truth = cli::read_truth(t.path / "s" / "truth.json");
  PosteriorSummary s;
  s.selected_global.assign(15, false);
  s.selected_local = MaskMatrix::Zero(15, 36);
  s.mppi_global = Vector::Zero(15);
  s.mppi_local = Matrix::Zero(15, 36);
  s.beta_mean = Matrix::Zero(16, 36);
  s.Z_mean = Matrix::Zero(20, 36);
  s.Sigma_mean = Matrix::Identity(36, 36);
  s.sigma2_eps_mean = 3.0;
  cli::write_fit_outputs(t.path / "none", s, 0.05, 1);
  REQUIRE(run_cli({"eval", "--fit-dir", t / "none", "--truth", t / "s/truth.json"}) == 0);
  const auto m = json_file(t.path / "none" / "metrics.json").at("bhm");
  CHECK(m.at("global").at("precision").is_null());
  CHECK(m.at("global").at("recall").get<double>() == 0.0);
  CHECK(m.at("global").at("f1").is_null());
  CHECK(m.at("local").at("x1").at("precision").is_null());
  CHECK(m.at("mse").at("sigma2_eps").get<double>() == 4.0);
  CHECK(m.at("mse").at("beta").get<double>() == doctest::Approx(truth.beta_true.squaredNorm() / (16.0 * 36.0)));
}

TEST_CASE("eval self-comparison") {
  TempDir t;
  REQUIRE(run_cli(concat({"simulate", "--seed", "9", "--out", t / "s"}, kSmall)) == 0);
  const cli::Truth truth = cli::read_truth(t.path / "s" / "truth.json");

  PosteriorSummary s;
  s.selected_global = truth.influential_global;
  s.selected_local = truth.support;
  s.mppi_global = Vector::Zero(15);
  s.mppi_local = truth.support.cast<double>();
  s.beta_mean = truth.beta_true;
  s.Z_mean = truth.Z_true;
  s.Sigma_mean = matern52_gram(truth.grid().distances(), truth.kernel);
  s.sigma2_eps_mean = truth.sigma2_eps;
  cli::write_fit_outputs(t.path / "self", s, 0.05, 1);

  REQUIRE(run_cli({"eval", "--fit-dir", t / "self", "--truth", t / "s/truth.json"}) == 0);
  const auto m = json_file(t.path / "self" / "metrics.json").at("bhm");
  CHECK(m.at("global").at("f1").get<double>() == 1.0);
  for (int j = 1; j <= 8; ++j) CHECK(m.at("local").at("x" + std::to_string(j)).at("f1").get<double>() == 1.0);
  CHECK_FALSE(m.at("local").contains("x9"));
  for (const char* k : {"Z", "Sigma", "beta", "sigma2_eps"}) CHECK(m.at("mse").at(k).get<double>() == 0.0);

  CHECK(run_cli({"eval", "--fit-dir", t / "s", "--truth", t / "s/truth.json"}) == 2);
  CHECK(run_cli({"eval", "--fit-dir", t / "self", "--truth", t / "nope.json"}) == 2);
}

TEST_CASE("run-length masks") {
  MaskMatrix m(2, 7);
  m << 1, 1, 0, 1, 0, 0, 1,
       0, 0, 0, 0, 0, 0, 0;
  const auto runs = cli::encode_runs(m, 0);
  REQUIRE(runs.size() == 3);
  CHECK(runs[0] == std::pair<std::size_t, std::size_t>{0, 2});
  CHECK(runs[2] == std::pair<std::size_t, std::size_t>{6, 1});
  CHECK(cli::decode_runs(cli::runs_json(m), 7) == m);
  CHECK_THROWS_AS(cli::decode_runs(nlohmann::json::parse("[[[5, 3]]]"), 7), ValidationError);
}

TEST_CASE("replicate and aggregate") {
  TempDir t;
  REQUIRE(run_cli(concat({"replicate", "--seed", "3", "--replicates", "2", "--iters", "30", "--burnin", "10", "--workers",
                      "2", "--out", t / "r"},
                     kSmall)) == 0);
  const auto agg = json_file(t.path / "r" / "aggregate.json");
  CHECK(agg.at("runs").get<int>() == 2);
  CHECK(agg.at("failed").empty());
  const auto f1 = agg.at("metrics").at("/bhm/global/f1");
  CHECK(f1.at("count").get<int>() == 2);
  CHECK(agg.at("metrics").at("/mua/mse/beta").at("mean").get<double>() > 0.0);
  CHECK(fs::exists(t.path / "r" / "seed_4" / "metrics.json"));

  REQUIRE(run_cli({"eval", "--aggregate", t / "r/seed_3", t / "r/seed_4", "--out", t / "agg"}) == 0);
  const auto again = json_file(t.path / "agg" / "aggregate.json");
  CHECK(again.at("metrics") == agg.at("metrics"));

  // Identical inputs give zero standard error.
  const auto same = cli::aggregate_metrics({t.path / "r" / "seed_3", t.path / "r" / "seed_3"});
  CHECK(same.at("metrics").at("/bhm/mse/beta").at("se").get<double>() == 0.0);
}
