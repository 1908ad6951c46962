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


#include <set>
#include <vector>

#include "doctest.h"
#include "sglss/rng.hpp"
#include "test_util.hpp"

using namespace sglss;

TEST_CASE("philox known answers") {
  // Reference vectors from the Random123 distribution (kat_vectors).
  using B = Philox4x32::Block;
  CHECK(Philox4x32::bijection(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::bijection(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::bijection(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("engine output is the bijection of successive counters") {
  Philox4x32 eng(0x0123456789abcdefULL, 7, 8, 9);
  const Philox4x32::Key key{0x89abcdef, 0x01234567};
  for (std::uint32_t c = 0; c < 3; ++c) {
    const auto blk = Philox4x32::bijection({c, 7, 8, 9}, key);
    CHECK(eng() == ((std::uint64_t{blk[1]} << 32) | blk[0]));
    CHECK(eng() == ((std::uint64_t{blk[3]} << 32) | blk[2]));
  }
}

TEST_CASE("splitmix64 reference values") {
  // First outputs of the reference generator seeded with 0.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(0x9E3779B97F4A7C15ULL) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("streams are reproducible and keyed on every coordinate") {
  auto first = [](std::uint64_t seed, std::uint64_t it, std::uint32_t blk, std::uint64_t idx) {
    RandomStream r(seed, it, blk, idx);
    return r.engine()();
  };
  const auto base = first(1, 2, 3, 4);
  CHECK(first(1, 2, 3, 4) == base);
  std::set<std::uint64_t> seen{base, first(2, 2, 3, 4), first(1, 3, 3, 4), first(1, 2, 4, 4), first(1, 2, 3, 5)};
  CHECK(seen.size() == 5);
}

TEST_CASE("distribution helpers have the right moments") {
  RandomStream r(11, 0, block_id(StreamBlock::kTest), 0);
  const int N = 200000;
  std::vector<double> nrm(N), uni(N), gam(N), bet(N);
  for (int k = 0; k < N; ++k) {
    nrm[k] = r.normal();
    uni[k] = r.uniform();
    gam[k] = r.gamma(2.5);
    bet[k] = r.beta(2.0, 3.0);
  }
  auto mn = testing::moments(nrm);
  CHECK(std::abs(mn.mean) < 4 * mn.se());
  CHECK(mn.var == doctest::Approx(1.0).epsilon(0.02));
  auto mu = testing::moments(uni);
  CHECK(std::abs(mu.mean - 0.5) < 4 * mu.se());
  CHECK(mu.var == doctest::Approx(1.0 / 12).epsilon(0.02));
  auto mg = testing::moments(gam);
  CHECK(std::abs(mg.mean - 2.5) < 4 * mg.se());
  CHECK(mg.var == doctest::Approx(2.5).epsilon(0.03));
  auto mb = testing::moments(bet);
  CHECK(std::abs(mb.mean - 0.4) < 4 * mb.se());
  CHECK(mb.var == doctest::Approx(0.04).epsilon(0.03));  // ab / ((a+b)^2 (a+b+1))
}

TEST_CASE("below is uniform over its range") {
  RandomStream r(5, 0, block_id(StreamBlock::kTest), 1);
  std::vector<int> counts(7, 0);
  const int N = 70000;
  for (int k = 0; k < N; ++k) ++counts[r.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 5 * std::sqrt(10000.0 * 6.0 / 7.0));
}
