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

#ifndef QINV_FFT_HPP
#define QINV_FFT_HPP

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <utility>

#include <fftw3.h>

/**
 * \file
 * \brief Thin thread-safe wrapper around FFTW complex transforms of arbitrary length.
 */

namespace qinv::detail {

/// Direction of a transform: `forward` computes sum_j v_j e^{-2 pi i jk/M}, `backward` uses e^{+2 pi i jk/M}.
enum class FftDirection { forward, backward };

/// Process-wide FFTW plan cache.
/**
 * Planning in FFTW is not thread-safe, so plans are created under a global lock. Plans are made
 * with FFTW_UNALIGNED and executed through the new-array interface, which FFTW documents as
 * thread-safe, so any `std::complex<double>` buffer can be transformed concurrently.
 */
class FftPlanCache {
 public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

  fftw_plan plan(std::size_t size, FftDirection direction) {
    const std::lock_guard lock{mutex_};
    const auto key = std::make_pair(size, direction);
    if (auto it = plans_.find(key); it != plans_.end()) {
      return it->second;
    }
    auto* in = fftw_alloc_complex(size);
    auto* out = fftw_alloc_complex(size);
    const int sign = direction == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD;
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(size), in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (p == nullptr) {
      throw std::runtime_error("fftw planner failed");
    }
    plans_.emplace(key, p);
    return p;
  }

 private:
  FftPlanCache() = default;
  ~FftPlanCache() {
    for (auto& [key, p] : plans_) {
      fftw_destroy_plan(p);
    }
  }

  std::mutex mutex_;
  std::map<std::pair<std::size_t, FftDirection>, fftw_plan> plans_;
};

/// Out-of-place unnormalized transform of `in` into `out` (both of equal length, non-overlapping).
inline void fft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, FftDirection direction) {
  if (in.size() != out.size()) {
    throw std::invalid_argument("fft: buffer size mismatch");
  }
  fftw_plan p = FftPlanCache::instance().plan(in.size(), direction);
  // FFTW takes a non-const input pointer even for out-of-place transforms; it does not write to it.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(p, src, dst);
}

/// Smallest integer >= `n` whose only prime factors are 2, 3 and 5.
inline std::size_t good_fft_size(std::size_t n) {
  if (n <= 1) {
    return 1;
  }
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t f : {2U, 3U, 5U}) {
      while (r % f == 0) {
        r /= f;
      }
    }
    if (r == 1) {
      return m;
    }
  }
}

}  // namespace qinv::detail

#endif
