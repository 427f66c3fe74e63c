// Copyright 2026 The iadmm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IADMM_RNG_HPP_
#define IADMM_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace iadmm {

/**
 * Counter-based generator: the i-th draw (i = 1, 2, ...) of a stream with key
 * k is SplitMix64Mix(k + i * 0x9E3779B97F4A7C15) with the standard SplitMix64
 * finalizer constants. Any implementation that reproduces these three lines
 * reproduces every dataset bit for bit.
 *
 *   uniform  = (draw >> 11) * 2^-53                      in [0, 1)
 *   gaussian = sqrt(-2 ln u1) * cos(2 pi u2)             one per two draws,
 *              u1 = ((draw >> 11) + 1) * 2^-53 in (0, 1], u2 = uniform
 */
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t Mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Key of an independent sub-stream, e.g. one per instance.
  static std::uint64_t DeriveKey(std::uint64_t seed, std::uint64_t index) {
    return Mix(Mix(seed) ^ Mix(index + 0xD1B54A32D192ED03ULL));
  }

  std::uint64_t NextU64() { return Mix(key_ + (++counter_) * kGolden); }

  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  double Gaussian() {
    const double u1 = static_cast<double>((NextU64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double Gaussian(double mean, double stddev) {
    return mean + stddev * Gaussian();
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace iadmm

#endif  // IADMM_RNG_HPP_
