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

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "sglss/version.hpp"

namespace sglss::cli {
namespace {

// Flag values; anything left empty keeps the config-file or default value.
struct Flags {
  std::optional<std::string> config, dataset, truth, fit_dir, out, scenario, format, init;
  std::optional<std::uint64_t> seed;
  std::optional<int> iters, burnin, thin, chains, threads, replicates, workers, delta;
  std::optional<double> d, alpha, pi, sigma2_s, rho, spacing;
  std::optional<std::size_t> n, rows, cols;
  bool standardize = false;
  bool aggregate = false;
  std::vector<std::string> aggregate_dirs;
};

void overlay(RunConfig& c, const Flags& f) {
  auto set = [](auto& dst, const auto& src) {
    if (src) dst = *src;
  };
  if (f.dataset) c.dataset = f.dataset;
  if (f.truth) c.truth = f.truth;
  if (f.fit_dir) c.fit_dir = f.fit_dir;
  if (f.out) c.out = f.out;
  if (f.threads) c.threads = f.threads;
  set(c.scenario, f.scenario);
  set(c.format, f.format);
  set(c.init, f.init);
  set(c.seed, f.seed);
  set(c.iters, f.iters);
  set(c.burnin, f.burnin);
  set(c.thin, f.thin);
  set(c.chains, f.chains);
  set(c.replicates, f.replicates);
  set(c.workers, f.workers);
  set(c.delta, f.delta);
  set(c.d, f.d);
  set(c.alpha, f.alpha);
  set(c.pi, f.pi);
  set(c.spacing, f.spacing);
  set(c.n, f.n);
  set(c.rows, f.rows);
  set(c.cols, f.cols);
  if (f.sigma2_s || f.rho) {
    if (!(f.sigma2_s && f.rho)) throw ValidationError("kernel", "--sigma2-s and --rho go together");
    MaternKernel k;
    k.sigma2_s = *f.sigma2_s;
    k.rho = *f.rho;
    validate_kernel(k);
    c.kernel = k;
  }
  if (f.standardize) c.standardize_continuous = true;
}

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--seed", f.seed, "Base seed");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--threads", f.threads, "Worker threads (env SGLSS_THREADS)")->check(CLI::PositiveNumber);
}

void add_simulation(CLI::App* app, Flags& f) {
  app->add_option("--scenario", f.scenario, "s1 or s2")->check(CLI::IsMember({"s1", "s2"}));
  app->add_option("--pi", f.pi, "Scenario-2 participation rate");
  app->add_option("--n", f.n, "Subjects");
  app->add_option("--rows", f.rows, "Lattice rows");
  app->add_option("--cols", f.cols, "Lattice columns");
  app->add_option("--spacing", f.spacing, "Lattice spacing (0: unit square)");
  app->add_option("--format", f.format, "binary or csv")->check(CLI::IsMember({"binary", "csv"}));
}

void add_dataset(CLI::App* app, Flags& f) {
  app->add_option("--dataset", f.dataset, "BIOSR1 file or CSV directory");
  app->add_flag("--standardize-continuous", f.standardize, "z-score continuous covariate columns");
}

void add_chain(CLI::App* app, Flags& f) {
  app->add_option("--iters", f.iters, "Gibbs iterations per chain");
  app->add_option("--burnin", f.burnin, "Burn-in iterations");
  app->add_option("--thin", f.thin, "Keep every thin-th draw after burn-in");
  app->add_option("--chains", f.chains, "Independent chains");
  app->add_option("--d", f.d, "Global selection threshold on pi");
  app->add_option("--delta", f.delta, "Inverse-Wishart degrees of freedom");
  app->add_option("--sigma2-s", f.sigma2_s, "Explicit kernel variance (skips kernel fitting)");
  app->add_option("--rho", f.rho, "Explicit kernel range (skips kernel fitting)");
  app->add_option("--init", f.init, "mua or zero")->check(CLI::IsMember({"mua", "zero"}));
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Spatial global-local spike-and-slab selection for image-on-scalar regression"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Flags f;

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset with ground truth");
  add_common(simulate, f);
  add_simulation(simulate, f);

  auto* fit = app.add_subcommand("fit", "Run the Gibbs sampler");
  add_common(fit, f);
  add_dataset(fit, f);
  add_chain(fit, f);

  auto* mua_cmd = app.add_subcommand("mua", "Mass univariate analysis with BH, BY and SBH");
  add_common(mua_cmd, f);
  add_dataset(mua_cmd, f);
  mua_cmd->add_option("--alpha", f.alpha, "FDR level");

  auto* eval = app.add_subcommand("eval", "Score a fit or MUA directory against truth");
  add_common(eval, f);
  eval->add_option("--fit-dir", f.fit_dir, "Directory with summary.json and/or mua_summary.json");
  eval->add_option("--truth", f.truth, "truth.json written by simulate");
  eval->add_flag("--aggregate", f.aggregate, "Mean/SE over the metrics.json of the given directories");
  eval->add_option("dirs", f.aggregate_dirs, "Run directories for --aggregate");

  auto* replicate = app.add_subcommand("replicate", "simulate, fit, mua and eval for seeds k..k+R-1");
  add_common(replicate, f);
  add_simulation(replicate, f);
  add_chain(replicate, f);
  replicate->add_flag("--standardize-continuous", f.standardize, "z-score continuous covariate columns");
  replicate->add_option("--alpha", f.alpha, "FDR level");
  replicate->add_option("--replicates", f.replicates, "Number of seeds R");
  replicate->add_option("--workers", f.workers, "Replicates run concurrently");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    RunConfig cfg = f.config ? load_config(*f.config) : RunConfig{};
    overlay(cfg, f);
    if (simulate->parsed()) {
      cmd_simulate(cfg);
    } else if (fit->parsed()) {
      cmd_fit(cfg);
    } else if (mua_cmd->parsed()) {
      cmd_mua(cfg);
    } else if (eval->parsed()) {
      if (f.aggregate) {
        if (f.aggregate_dirs.empty()) throw ValidationError("dirs", "--aggregate needs at least one directory");
        std::vector<fs::path> dirs(f.aggregate_dirs.begin(), f.aggregate_dirs.end());
        const Json agg = aggregate_metrics(dirs);
        if (cfg.out) write_json(fs::path(*cfg.out) / "aggregate.json", agg);
        else std::cout << agg.dump(2) << '\n';
      } else {
        cmd_eval(cfg);
      }
    } else if (replicate->parsed()) {
      return cmd_replicate(cfg);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}

}  // namespace sglss::cli
