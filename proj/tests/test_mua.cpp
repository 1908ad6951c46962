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


#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sglss/errors.hpp"
#include "sglss/mua.hpp"
#include "sglss/simulate.hpp"
#include "test_util.hpp"

using namespace sglss;
using namespace sglss::mua;

namespace {

// 2 * integral_{|t|}^inf of the Student-t density.
double t_tail_quadrature(double t, double dof) {
  const double c = std::exp(std::lgamma((dof + 1) / 2) - std::lgamma(dof / 2)) / std::sqrt(dof * std::numbers::pi);
  auto dens = [&](double x) { return c * std::pow(1.0 + x * x / dof, -(dof + 1) / 2); };
  boost::math::quadrature::tanh_sinh<double> integrator;
  return 2.0 * integrator.integrate(dens, std::abs(t), std::numeric_limits<double>::infinity());
}

std::vector<double> uniforms(std::size_t m, std::uint64_t seed) {
  RandomStream rng(seed, 0, block_id(StreamBlock::kTest), 0);
  std::vector<double> p(m);
  for (auto& v : p) v = rng.uniform();
  return p;
}

bool subset(const std::vector<bool>& a, const std::vector<bool>& b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] && !b[k]) return false;
  }
  return true;
}

std::vector<bool> mask(std::initializer_list<int> bits) {
  std::vector<bool> out;
  for (int b : bits) out.push_back(b != 0);
  return out;
}

}  // namespace

TEST_CASE("t p-values match quadrature of the density") {
  for (double dof : {1.0, 3.0, 10.0, 84.0}) {
    for (double t : {0.0, 0.3, -1.2, 2.5, 6.0, -11.0}) {
      const double ref = t_tail_quadrature(t, dof);
      CHECK(t_two_sided_pvalue(t, dof) == doctest::Approx(ref).epsilon(1e-10));
    }
  }
  CHECK(t_two_sided_pvalue(0.0, 5.0) == 1.0);
  CHECK(t_two_sided_pvalue(INFINITY, 5.0) == 0.0);
}

TEST_CASE("simes") {
  CHECK(simes_combine(std::vector<double>{0.01, 0.04, 0.03}) == doctest::Approx(0.03));
  CHECK(simes_combine(std::vector<double>{0.2, 0.2, 0.2, 0.2}) == doctest::Approx(0.2));
  CHECK(simes_combine(std::vector<double>{0.37}) == 0.37);
  CHECK(simes_combine(std::vector<double>{0.9, 0.95}) == doctest::Approx(0.95));
  CHECK_THROWS_AS(simes_combine(std::vector<double>{}), ValidationError);
  for (int t = 0; t < 100; ++t) {
    const auto p = uniforms(1 + t % 13, 500 + t);
    const double s = simes_combine(p);
    CHECK(s >= *std::min_element(p.begin(), p.end()) - 1e-15);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("benjamini-hochberg fixture vectors") {
  const std::vector<double> p{0.01, 0.02, 0.04, 0.2};
  CHECK(fdr_bh(p, 0.05) == mask({1, 1, 0, 0}));
  CHECK(fdr_bh(std::vector<double>(5, 1.0), 0.05) == mask({0, 0, 0, 0, 0}));
  CHECK(fdr_bh(std::vector<double>(5, 0.0), 0.05) == mask({1, 1, 1, 1, 1}));
  // Step-up: 0.04 alone fails at rank 2 but passes with rank 3.
  CHECK(fdr_bh(std::vector<double>{0.04, 0.001, 0.05}, 0.05) == mask({1, 1, 1}));
  // Ties are rejected together, in any order.
  CHECK(fdr_bh(std::vector<double>{0.03, 0.2, 0.03}, 0.05) == mask({1, 0, 1}));
}

TEST_CASE("benjamini-yekutieli fixture vectors") {
  const std::vector<double> p{0.01, 0.02, 0.04, 0.2};
  // c(4) = 25/12, level 0.024: rank thresholds 0.006, 0.012, 0.018, 0.024.
  CHECK(fdr_by(p, 0.05) == mask({0, 0, 0, 0}));
  CHECK(fdr_by(std::vector<double>{0.005, 0.02, 0.04, 0.2}, 0.05) == mask({1, 0, 0, 0}));
  CHECK(fdr_by(std::vector<double>{0.005, 0.011, 0.04, 0.2}, 0.05) == mask({1, 1, 0, 0}));
  for (double v : {0.01, 0.05, 0.07}) {
    CHECK(fdr_by(std::vector<double>{v}, 0.05) == fdr_bh(std::vector<double>{v}, 0.05));
  }
}

TEST_CASE("storey-adjusted BH") {
  SUBCASE("uniform nulls") {
    for (int s = 0; s < 5; ++s) {
      const double pi0 = storey_pi0(uniforms(10000, 40 + s));
      CHECK(pi0 >= 0.95);
      CHECK(pi0 <= 1.05);
    }
  }
  SUBCASE("half signal") {
    auto p = uniforms(2000, 41);
    for (std::size_t k = 0; k < 1000; ++k) p[k] *= 1e-4;
    CHECK(storey_pi0(p) == doctest::Approx(0.5).epsilon(0.1));
    const auto bh = fdr_bh(p), sbh = fdr_sbh(p);
    CHECK(subset(bh, sbh));
    CHECK(std::count(sbh.begin(), sbh.end(), true) > std::count(bh.begin(), bh.end(), true));
  }
  SUBCASE("pi0 = 1 reduces to BH") {
    std::vector<double> p(40, 0.9);
    p[0] = 1e-5;
    p[1] = 0.002;
    p[2] = 0.01;
    CHECK(storey_pi0(p) == 1.0);
    CHECK(fdr_sbh(p) == fdr_bh(p));
  }
  SUBCASE("small families") {
    CHECK_THROWS_AS(fdr_sbh(std::vector<double>(19, 0.5)), ValidationError);
    const std::vector<double> p{0.01, 0.02, 0.04, 0.2};
    CHECK(apply_procedure(Procedure::kSBH, p, 0.05) == fdr_bh(p, 0.05));
  }
}

TEST_CASE("procedures nest and are monotone") {
  RandomStream rng(7, 0, block_id(StreamBlock::kTest), 0);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t m = 20 + rng.below(200);
    std::vector<double> p(m);
    const double frac = rng.uniform();
    for (auto& v : p) v = rng.uniform() < frac ? 0.01 * rng.uniform() : rng.uniform();
    const auto by = fdr_by(p), bh = fdr_bh(p), sbh = fdr_sbh(p);
    CHECK(subset(by, bh));
    CHECK(subset(bh, sbh));
    auto lower = p;
    lower[rng.below(m)] *= 0.5;
    CHECK(subset(bh, fdr_bh(lower)));
    CHECK(subset(by, fdr_by(lower)));
  }
}

TEST_CASE("ols on exact and orthogonal responses") {
  Dataset d;
  d.grid = LocationGrid::lattice(1, 2);
  d.X.resize(10, 1);
  d.Y.resize(10, 2);
  for (int i = 0; i < 10; ++i) {
    const double x = i - 4.5;
    d.X(i, 0) = x;
    d.Y(i, 0) = 2.0 * x;
    d.Y(i, 1) = (i % 2 == 0 ? 1.0 : -1.0) * (i < 5 ? 1.0 : -1.0) + 0.0;  // sum x y = 0, sum y = 0
  }
  // Make column 1 exactly orthogonal to [1, x].
  const Matrix D = d.design();
  d.Y.col(1) -= D * (D.transpose() * D).ldlt().solve(D.transpose() * d.Y.col(1));
  const OlsFit fit = ols_per_location(d);
  CHECK(fit.dof == 8);
  CHECK(fit.beta_hat(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.pvals(0, 0) < 1e-12);
  CHECK(std::abs(fit.beta_hat(1, 1)) < 1e-12);
  CHECK(fit.pvals(0, 1) > 0.999999);
}

TEST_CASE("ols estimates scatter within their standard errors") {
  // 1000 sites with the same true coefficient 0.7.
  Dataset d = testing::random_dataset(40, 3, 1, 1000, 11);
  d.Y += 0.7 * d.X.col(1) * RowVector::Ones(1000);
  const OlsFit fit = ols_per_location(d, 2);
  int within = 0;
  for (Eigen::Index s = 0; s < 1000; ++s) within += std::abs(fit.beta_hat(2, s) - 0.7) < 3.0 * fit.std_err(2, s);
  CHECK(within >= 990);
}

TEST_CASE("null p-values are uniform") {
  Dataset d = testing::random_dataset(25, 2, 1, 10000, 12);
  const OlsFit fit = ols_per_location(d);
  std::vector<double> p(fit.pvals.row(0).data(), fit.pvals.row(0).data() + 0);
  for (Eigen::Index s = 0; s < 10000; ++s) p.push_back(fit.pvals(0, s));
  std::sort(p.begin(), p.end());
  double ks = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    ks = std::max({ks, std::abs(p[k] - static_cast<double>(k) / 1e4), std::abs(p[k] - static_cast<double>(k + 1) / 1e4)});
  }
  CHECK(ks < 1.63 / 100.0);
}

TEST_CASE("ols input errors") {
  Dataset d = testing::random_dataset(3, 2, 1, 4, 13);
  CHECK_THROWS_AS(ols_per_location(d), ValidationError);
  d = testing::random_dataset(10, 2, 1, 4, 13);
  d.X.col(1) = 2.0 * d.X.col(0);
  CHECK_THROWS_AS(ols_per_location(d), ValidationError);
}

TEST_CASE("pipeline on scenario 1 selects the influential images") {
  const auto [data, truth] = sim::gen_scenario1(5);
  const MuaResult r = mua_pipeline(data, 0.05);
  for (Procedure proc : {Procedure::kBH, Procedure::kBY, Procedure::kSBH}) {
    const auto& sel = r.selection(proc);
    for (std::size_t j = 0; j < 8; ++j) CHECK(sel.global[j]);
    CHECK(sel.local.rows() == 15);
  }
  CHECK(r.selection(Procedure::kSBH).global_pi0_fallback);
  // BY is conservative locally on continuous covariates.
  const auto& by = r.selection(Procedure::kBY);
  for (Eigen::Index j = 0; j < 5; ++j) {
    int tp = 0, fp = 0;
    for (Eigen::Index s = 0; s < 900; ++s) {
      if (by.local(j, s)) (truth.support_true(j, s) ? tp : fp)++;
    }
    CHECK(tp > 0);
    CHECK(static_cast<double>(tp) / (tp + fp) >= 0.97);
  }
  CHECK(r.residual_cov.rows() == 900);
}

TEST_CASE("alpha = 1 rejects everything under BH and SBH") {
  const Dataset d = testing::random_dataset(30, 3, 5, 5, 14);
  const MuaResult r = mua_pipeline(d, 1.0);
  for (Procedure proc : {Procedure::kBH, Procedure::kSBH}) {
    const auto& sel = r.selection(proc);
    CHECK(std::all_of(sel.global.begin(), sel.global.end(), [](bool b) { return b; }));
    CHECK(sel.local.cast<int>().sum() == 75);
  }
}

TEST_CASE("noise-only data keeps the global false selection rate") {
  int any = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    const Dataset d = testing::random_dataset(30, 15, 5, 5, 1000 + s);
    const MuaResult r = mua_pipeline(d, 0.05);
    const auto& g = r.selection(Procedure::kBH).global;
    any += std::any_of(g.begin(), g.end(), [](bool b) { return b; }) ? 1 : 0;
  }
  const double rate = static_cast<double>(any) / seeds;
  CHECK(rate <= 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / seeds));
}
