// Copyright 2026 The qinv Authors.
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

#ifndef QINV_RNG_HPP
#define QINV_RNG_HPP

#include <cstdint>
#include <limits>

/**
 * \file
 * \brief Counter-based random stream keyed by (seed, index).
 *
 * Every Monte Carlo sample draws from its own stream, so a sample is a pure function of
 * (seed, index) and ensembles are identical regardless of evaluation order or thread count.
 */

namespace qinv {

/// SplitMix64 finalizer (Stafford variant 13), a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31U);
}

/// Uniform random bit generator whose i-th output is mix(key + (i + 1) * golden_gamma).
/**
 * This is SplitMix64 viewed as a counter-based generator: the state is the pair (key, counter)
 * and any output can be computed without producing the preceding ones.
 */
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{splitmix64_mix(seed ^ splitmix64_mix(stream + 0x632be59bd9b4e019ULL))} {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return splitmix64_mix(key_ + (++counter_) * kGamma); }

  /// Skip ahead by `n` outputs.
  void discard(std::uint64_t n) noexcept { counter_ += n; }

  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace qinv

#endif
