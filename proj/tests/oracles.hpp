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

// Brute-force reference computations used only by the tests. None of them touches FFTW.

#ifndef QINV_TESTS_ORACLES_HPP
#define QINV_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "qinv/spectral.hpp"

namespace oracle {

using qinv::cplx;
using qinv::Reality;
using qinv::TorusField;

/// Field with independent N(0, 1) real and imaginary parts on every mode, Hermitian when real.
inline TorusField random_field(int n_max, Reality reality, std::uint64_t seed, double decay = 0.0) {
  std::mt19937_64 gen{seed};
  std::normal_distribution<double> normal;
  TorusField u{n_max, reality};
  const int first = reality == Reality::real ? 0 : -n_max;
  for (int n = first; n <= n_max; ++n) {
    const double scale = std::pow(1.0 + std::abs(n), -decay);
    const double re = normal(gen);
    const double im = reality == Reality::real && n == 0 ? 0.0 : normal(gen);
    u.set(n, cplx{re, im} * scale);
  }
  return u;
}

/// Coefficients of u v by the O(n^2) convolution sum over a + b = n.
inline TorusField direct_product(const TorusField& u, const TorusField& v, int out_band) {
  const Reality reality = u.is_real() && v.is_real() ? Reality::real : Reality::complex;
  std::vector<cplx> c(static_cast<std::size_t>(2 * out_band + 1));
  for (int a = -u.n_max(); a <= u.n_max(); ++a) {
    for (int b = -v.n_max(); b <= v.n_max(); ++b) {
      const int n = a + b;
      if (std::abs(n) <= out_band) {
        c[static_cast<std::size_t>(n + out_band)] += u[a] * v[b];
      }
    }
  }
  if (reality == Reality::real) {
    for (int n = 0; n <= out_band; ++n) {
      const cplx avg = 0.5 * (c[static_cast<std::size_t>(n + out_band)] + std::conj(c[static_cast<std::size_t>(out_band - n)]));
      c[static_cast<std::size_t>(n + out_band)] = avg;
      c[static_cast<std::size_t>(out_band - n)] = std::conj(avg);
    }
    c[static_cast<std::size_t>(out_band)] = cplx{c[static_cast<std::size_t>(out_band)].real(), 0.0};
  }
  return TorusField{out_band, reality, std::move(c)};
}

/// Coefficients of conj(u): (conj u)_n = conj(u_{-n}).
inline TorusField conjugate_field(const TorusField& u) {
  TorusField out{u.n_max(), Reality::complex};
  for (int n = -u.n_max(); n <= u.n_max(); ++n) {
    out.set(n, std::conj(u[-n]));
  }
  return out;
}

/// |u|^4 u = u u conj(u) u conj(u) by repeated direct convolution.
inline TorusField direct_quintic(const TorusField& u) {
  const TorusField uc = u.as_complex();
  const TorusField bar = conjugate_field(uc);
  const int m = u.n_max();
  TorusField acc = direct_product(uc, uc, 2 * m);
  acc = direct_product(acc, bar, 3 * m);
  acc = direct_product(acc, uc, 4 * m);
  acc = direct_product(acc, bar, 5 * m);
  return acc;
}

/// u(x) by direct summation of the Fourier series.
inline cplx evaluate(const TorusField& u, double x) {
  cplx acc{0.0, 0.0};
  for (int n = -u.n_max(); n <= u.n_max(); ++n) {
    acc += u[n] * std::polar(1.0, n * x);
  }
  return acc;
}

/// (1 / 2 pi) int |u|^p dx by the midpoint rule on `points` nodes with direct series evaluation.
inline double mean_power_quadrature(const TorusField& u, double p, int points) {
  double acc = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = 2.0 * std::numbers::pi * (i + 0.5) / points;
    acc += std::pow(std::abs(evaluate(u, x)), p);
  }
  return acc / points;
}

/// max |u| + max over node pairs of |u(x) - u(y)| / d(x, y)^alpha on a dense uniform grid.
inline double dense_holder(const TorusField& u, double alpha, int points) {
  std::vector<cplx> g(static_cast<std::size_t>(points));
  double sup = 0.0;
  for (int i = 0; i < points; ++i) {
    g[static_cast<std::size_t>(i)] = evaluate(u, 2.0 * std::numbers::pi * i / points);
    sup = std::max(sup, std::abs(g[static_cast<std::size_t>(i)]));
  }
  double quotient = 0.0;
  for (int i = 0; i < points; ++i) {
    for (int j = i + 1; j < points; ++j) {
      const int k = std::min(j - i, points - (j - i));
      const double d = 2.0 * std::numbers::pi * k / points;
      quotient = std::max(quotient, std::abs(g[static_cast<std::size_t>(i)] - g[static_cast<std::size_t>(j)]) / std::pow(d, alpha));
    }
  }
  return sup + quotient;
}

/// max over x in [0, x_max] on a uniform grid of x^a exp(-x^{2r} / p).
inline double grid_sup_moment(double a, double r, double p, double x_max, double step) {
  double best = 0.0;
  const auto n = static_cast<long long>(x_max / step);
  for (long long i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) * step;
    best = std::max(best, std::pow(x, a) * std::exp(-std::pow(x, 2.0 * r) / p));
  }
  return best;
}

inline double max_coeff_diff(const TorusField& a, const TorusField& b) {
  const int m = std::max(a.n_max(), b.n_max());
  double d = 0.0;
  for (int n = -m; n <= m; ++n) {
    d = std::max(d, std::abs(a[n] - b[n]));
  }
  return d;
}

}  // namespace oracle

#endif
