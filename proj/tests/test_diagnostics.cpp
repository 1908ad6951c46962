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


#include <cmath>
#include <vector>

#include "doctest.h"
#include "sglss/diagnostics.hpp"
#include "sglss/errors.hpp"
#include "sglss/rng.hpp"

using namespace sglss;

namespace {

std::vector<double> iid_normals(std::size_t n, std::uint64_t seed) {
  RandomStream rng(seed, 0, block_id(StreamBlock::kTest), 0);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("spectral variance reference value") {
  // Lag window 2 for n = 60; value from an independent numpy evaluation.
  std::vector<double> x(60);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::sin(static_cast<double>(k)) + static_cast<double>(k) / 50.0;
  CHECK(spectral_variance_zero(x) == doctest::Approx(1.06508215676309).epsilon(1e-12));
}

TEST_CASE("spectral variance of white noise and an AR(1) process") {
  // The 4% window estimator is noisy (relative sd ~0.2); average replicates.
  double white = 0.0, ar = 0.0;
  const int reps = 60;
  for (int r = 0; r < reps; ++r) {
    white += spectral_variance_zero(iid_normals(5000, 10 + r));
    // AR(1) with phi = 0.6 and unit innovations: S(0) = 1 / (1 - phi)^2.
    RandomStream rng(2, 0, block_id(StreamBlock::kTest), static_cast<std::uint64_t>(r));
    std::vector<double> y(5000);
    double prev = 0.0;
    for (auto& v : y) prev = v = 0.6 * prev + rng.normal();
    ar += spectral_variance_zero(y);
  }
  CHECK(white / reps == doctest::Approx(1.0).epsilon(0.1));
  CHECK(ar / reps == doctest::Approx(1.0 / 0.16).epsilon(0.1));
}

TEST_CASE("geweke rejects degenerate traces") {
  CHECK_THROWS_AS(geweke_z(std::vector<double>(100, 2.0)), NumericError);
  CHECK_THROWS_AS(geweke_z(std::vector<double>(49, 0.0)), ValidationError);
  const auto x = iid_normals(100, 3);
  CHECK_THROWS_AS(geweke_z(x, 0.6, 0.5), ValidationError);
}

TEST_CASE("geweke z is standard normal on iid traces") {
  int inside = 0;
  const int trials = 300;
  for (int t = 0; t < trials; ++t) {
    if (std::abs(geweke_z(iid_normals(10000, 100 + t))) < 3.0) ++inside;
  }
  CHECK(inside >= static_cast<int>(0.99 * trials));
}

TEST_CASE("geweke detects a drifting trace") {
  auto x = iid_normals(2000, 4);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] += 3.0 * static_cast<double>(k) / 2000.0;
  CHECK(std::abs(geweke_z(x)) > 5.0);
}

TEST_CASE("geweke report aggregates families and skips constant traces") {
  ChainTrace tr;
  const auto a = iid_normals(400, 5);
  const auto b = iid_normals(400, 6);
  for (std::size_t k = 0; k < 400; ++k) {
    tr.iter.push_back(k + 1);
    tr.sigma2_eps.push_back(1.0 + 0.01 * a[k]);
    tr.pi.push_back({0.5 + 0.01 * a[k], 1.0});
    tr.tausum.push_back({100.0 + b[k], 900.0});
  }
  const GewekeReport r = geweke_report(tr);
  CHECK(r.entries.size() == 5);
  CHECK(r.skipped == 2);
  REQUIRE(r.mean_abs_pi);
  REQUIRE(r.mean_abs_tausum);
  CHECK(*r.mean_abs_pi == doctest::Approx(std::abs(*r.entries[0].z)));
  CHECK_FALSE(r.entries[1].z.has_value());
  CHECK(*r.mean_abs_all == doctest::Approx(0.5 * (*r.mean_abs_pi + *r.mean_abs_tausum)));
  CHECK(r.entries.back().name == "sigma2_eps");

  ChainTrace short_trace;
  short_trace.iter = {1, 2};
  CHECK(geweke_report(short_trace).entries.empty());
}
