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

// Counter-based random streams.
//
// Every random draw in a chain is addressed by (seed, iteration, block, index):
// the seed is the Philox key and the other three words fill the counter, so a
// worksite's stream does not depend on which thread runs it or in what order.

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace sglss {

/// SplitMix64 finalizer, used to derive chain and replicate seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Philox4x32-10 (Salmon et al., SC'11) as a 64-bit UniformRandomBitGenerator.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint32_t c1, std::uint32_t c2, std::uint32_t c3) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, ctr_{0, c1, c2, c3} {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (used_ >= 4) refill();
    const std::uint64_t lo = buf_[used_];
    const std::uint64_t hi = buf_[used_ + 1];
    used_ += 2;
    return (hi << 32) | lo;
  }

  /// The raw 10-round bijection.
  static Block bijection(Block ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += 0x9E3779B9;
      key[1] += 0xBB67AE85;
    }
    return ctr;
  }

 private:
  void refill() noexcept {
    buf_ = bijection(ctr_, key_);
    ++ctr_[0];
    used_ = 0;
  }

  Key key_;
  Block ctr_;
  Block buf_{};
  int used_ = 4;
};

/// Block identifiers for the counter's block word.
enum class StreamBlock : std::uint32_t {
  kLatentZ = 1,
  kNoiseVariance = 2,
  kIndicator = 3,      // + covariate index << 8
  kParticipation = 4,  // + covariate index << 8
  kCoefficient = 5,    // + covariate index << 8
  kCovariance = 6,
  kSimCoefficient = 16,
  kSimZeroing = 17,
  kSimCovariates = 18,
  kSimLatent = 19,
  kSimNoise = 20,
  kSimSquare = 21,
  kTest = 255,
};

constexpr std::uint32_t block_id(StreamBlock b, std::uint32_t sub = 0) noexcept {
  return static_cast<std::uint32_t>(b) | (sub << 8);
}

/// Distribution helpers over one Philox substream. Cheap to construct; build
/// one per worksite.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t iteration, std::uint32_t block, std::uint64_t index) noexcept
      : engine_(seed, static_cast<std::uint32_t>(index), block, static_cast<std::uint32_t>(iteration)) {}

  double normal() { return normal_(engine_); }
  /// Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  /// Gamma with the given shape and unit scale.
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
  double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }
  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }
  bool bernoulli(double prob) { return uniform() < prob; }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) { return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_); }

  Philox4x32& engine() noexcept { return engine_; }

 private:
  Philox4x32 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace sglss
