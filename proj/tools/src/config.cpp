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

#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>

namespace sglss::cli {
namespace {

using Setter = std::function<void(RunConfig&, const nlohmann::json&)>;

template <class T>
Setter field(T RunConfig::*member) {
  return [member](RunConfig& c, const nlohmann::json& v) { c.*member = v.get<T>(); };
}

template <class T>
Setter optional_field(std::optional<T> RunConfig::*member) {
  return [member](RunConfig& c, const nlohmann::json& v) {
    if (v.is_null()) c.*member = std::nullopt;
    else c.*member = v.get<T>();
  };
}

void set_kernel(RunConfig& c, const nlohmann::json& v) {
  if (v.is_string() && v.get<std::string>() == "empirical") {
    c.kernel.reset();
    return;
  }
  if (!v.is_object()) throw ValidationError("kernel", "expected \"empirical\" or {\"sigma2_s\", \"rho\"}");
  MaternKernel k;
  for (const auto& [key, val] : v.items()) {
    if (key == "sigma2_s") k.sigma2_s = val.get<double>();
    else if (key == "rho") k.rho = val.get<double>();
    else throw ValidationError("kernel." + key, "unknown key");
  }
  if (!v.contains("sigma2_s") || !v.contains("rho")) throw ValidationError("kernel", "needs sigma2_s and rho");
  validate_kernel(k);
  c.kernel = k;
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"dataset", optional_field(&RunConfig::dataset)},
      {"truth", optional_field(&RunConfig::truth)},
      {"fit_dir", optional_field(&RunConfig::fit_dir)},
      {"out", optional_field(&RunConfig::out)},
      {"seed", field(&RunConfig::seed)},
      {"iters", field(&RunConfig::iters)},
      {"burnin", field(&RunConfig::burnin)},
      {"thin", field(&RunConfig::thin)},
      {"chains", field(&RunConfig::chains)},
      {"threads", optional_field(&RunConfig::threads)},
      {"init", field(&RunConfig::init)},
      {"a_eps", field(&RunConfig::a_eps)},
      {"b_eps", field(&RunConfig::b_eps)},
      {"a_pi", field(&RunConfig::a_pi)},
      {"b_pi", field(&RunConfig::b_pi)},
      {"d", field(&RunConfig::d)},
      {"delta", field(&RunConfig::delta)},
      {"mu0", field(&RunConfig::mu0)},
      {"sigma2_0", field(&RunConfig::sigma2_0)},
      {"kernel", set_kernel},
      {"alpha", field(&RunConfig::alpha)},
      {"standardize_continuous", field(&RunConfig::standardize_continuous)},
      {"scenario", field(&RunConfig::scenario)},
      {"pi", field(&RunConfig::pi)},
      {"n", field(&RunConfig::n)},
      {"rows", field(&RunConfig::rows)},
      {"cols", field(&RunConfig::cols)},
      {"spacing", field(&RunConfig::spacing)},
      {"format", field(&RunConfig::format)},
      {"replicates", field(&RunConfig::replicates)},
      {"workers", field(&RunConfig::workers)},
  };
  return table;
}

}  // namespace

Hyperparams RunConfig::hyperparams(std::size_t q, std::size_t p) const {
  Hyperparams h = Hyperparams::defaults(q, p);
  h.a_eps = a_eps;
  h.b_eps = b_eps;
  h.a_pi = a_pi;
  h.b_pi = b_pi;
  h.d = d;
  h.delta = delta;
  h.mu0.setConstant(mu0);
  h.sigma2_0.setConstant(sigma2_0);
  if (kernel) h.kernel = *kernel;
  return h;
}

ChainConfig RunConfig::chain_config(int nthreads) const {
  ChainConfig c;
  c.n_iter = iters;
  c.burn_in = burnin;
  c.thin = thin;
  c.seed = seed;
  c.threads = nthreads;
  if (init == "mua") c.init = InitPolicy::kMua;
  else if (init == "zero") c.init = InitPolicy::kZero;
  else throw ValidationError("init", "expected \"mua\" or \"zero\"");
  c.validate();
  return c;
}

sim::SimulationOptions RunConfig::simulation_options() const {
  sim::SimulationOptions o;
  o.n = n;
  o.rows = rows;
  o.cols = cols;
  o.spacing = spacing;
  return o;
}

void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config", "top level must be a JSON object");
  for (const auto& [key, val] : j.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ValidationError(key, "unknown config key");
    try {
      it->second(cfg, val);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(key, std::string("bad value: ") + e.what());
    }
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config", std::string("not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<std::string>& s) { return s ? nlohmann::ordered_json(*s) : nullptr; };
  j["dataset"] = opt(c.dataset);
  j["truth"] = opt(c.truth);
  j["fit_dir"] = opt(c.fit_dir);
  j["out"] = opt(c.out);
  j["seed"] = c.seed;
  j["iters"] = c.iters;
  j["burnin"] = c.burnin;
  j["thin"] = c.thin;
  j["chains"] = c.chains;
  j["threads"] = c.threads ? nlohmann::ordered_json(*c.threads) : nullptr;
  j["init"] = c.init;
  j["a_eps"] = c.a_eps;
  j["b_eps"] = c.b_eps;
  j["a_pi"] = c.a_pi;
  j["b_pi"] = c.b_pi;
  j["d"] = c.d;
  j["delta"] = c.delta;
  j["mu0"] = c.mu0;
  j["sigma2_0"] = c.sigma2_0;
  if (c.kernel) j["kernel"] = {{"sigma2_s", c.kernel->sigma2_s}, {"rho", c.kernel->rho}};
  else j["kernel"] = "empirical";
  j["alpha"] = c.alpha;
  j["standardize_continuous"] = c.standardize_continuous;
  j["scenario"] = c.scenario;
  j["pi"] = c.pi;
  j["n"] = c.n;
  j["rows"] = c.rows;
  j["cols"] = c.cols;
  j["spacing"] = c.spacing;
  j["format"] = c.format;
  j["replicates"] = c.replicates;
  j["workers"] = c.workers;
  return j;
}

int resolve_threads(const RunConfig& cfg) {
  int t = 1;
  if (cfg.threads) {
    t = *cfg.threads;
  } else if (const char* env = std::getenv("SGLSS_THREADS"); env && *env) {
    try {
      std::size_t used = 0;
      t = std::stoi(env, &used);
      if (env[used] != '\0') throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ValidationError("SGLSS_THREADS", "not an integer");
    }
  }
  if (t < 1) throw ValidationError("threads", "must be >= 1");
  return t;
}

}  // namespace sglss::cli
