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

#ifndef QINV_SPECTRAL_HPP
#define QINV_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qinv/fft.hpp"

/**
 * \file
 * \brief Band-limited Fourier fields on the torus [0, 2 pi): norms, projections, multipliers and
 * alias-free nonlinear products.
 *
 * The synthesis convention is u(x) = sum_n c_n e^{inx} with c_n = (1/2 pi) int u e^{-inx} dx.
 */

namespace qinv {

using cplx = std::complex<double>;

enum class Reality { real, complex };

/// Fourier coefficients c_n, |n| <= n_max, of a function on the torus.
/**
 * Coefficients outside the band are implicitly zero. A real field keeps c_{-n} = conj(c_n) and a
 * real mean exactly; every mutating member restores that symmetry from the nonnegative modes.
 */
class TorusField {
 public:
  TorusField() : TorusField(0, Reality::real) {}

  TorusField(int n_max, Reality reality) : n_max_{n_max}, reality_{reality} {
    if (n_max < 0) {
      throw std::invalid_argument("TorusField: negative band limit");
    }
    coeffs_.assign(static_cast<std::size_t>(2 * n_max + 1), cplx{});
  }

  /// Build from coefficients ordered n = -n_max..n_max.
  /**
   * For a real field the input must already be Hermitian up to rounding (relative 1e-12); the
   * stored field is then made exactly Hermitian from the nonnegative modes.
   */
  TorusField(int n_max, Reality reality, std::vector<cplx> coeffs) : n_max_{n_max}, reality_{reality} {
    if (n_max < 0 || coeffs.size() != static_cast<std::size_t>(2 * n_max + 1)) {
      throw std::invalid_argument("TorusField: coefficient count does not match band limit");
    }
    coeffs_ = std::move(coeffs);
    if (is_real()) {
      double scale = 0.0;
      for (const auto& c : coeffs_) {
        scale = std::max(scale, std::abs(c));
      }
      const double tol = 1e-12 * std::max(scale, 1.0);
      for (int n = 0; n <= n_max_; ++n) {
        if (std::abs((*this)[n] - std::conj((*this)[-n])) > tol) {
          throw std::invalid_argument("TorusField: real field with non-Hermitian coefficients");
        }
      }
      enforce_reality();
    }
  }

  [[nodiscard]] int n_max() const noexcept { return n_max_; }
  [[nodiscard]] Reality reality() const noexcept { return reality_; }
  [[nodiscard]] bool is_real() const noexcept { return reality_ == Reality::real; }
  [[nodiscard]] std::size_t size() const noexcept { return coeffs_.size(); }

  /// Coefficient of mode n; zero outside the band.
  [[nodiscard]] cplx operator[](int n) const noexcept {
    return (n < -n_max_ || n > n_max_) ? cplx{} : coeffs_[static_cast<std::size_t>(n + n_max_)];
  }

  /// Sets mode n (and its mirror for real fields). Writes outside the band are an error.
  void set(int n, cplx value) {
    if (n < -n_max_ || n > n_max_) {
      throw std::out_of_range("TorusField::set: mode outside band");
    }
    if (is_real()) {
      if (n == 0) {
        value = {value.real(), 0.0};
      }
      slot(n) = value;
      slot(-n) = std::conj(value);
    } else {
      slot(n) = value;
    }
  }

  [[nodiscard]] std::span<const cplx> coeffs() const noexcept { return coeffs_; }

  /// Unchecked mutable access; call enforce_reality() afterwards on real fields.
  [[nodiscard]] std::span<cplx> raw() noexcept { return coeffs_; }

  /// Rewrites negative modes as conjugates of positive ones and zeroes Im c_0 (real fields only).
  void enforce_reality() noexcept {
    if (!is_real()) {
      return;
    }
    slot(0) = {slot(0).real(), 0.0};
    for (int n = 1; n <= n_max_; ++n) {
      slot(-n) = std::conj(slot(n));
    }
  }

  /// Same coefficients with a different band limit (zero padding or truncation).
  [[nodiscard]] TorusField with_band(int n_max) const {
    TorusField out{n_max, reality_};
    const int m = std::min(n_max, n_max_);
    for (int n = -m; n <= m; ++n) {
      out.slot(n) = (*this)[n];
    }
    return out;
  }

  [[nodiscard]] TorusField as_complex() const {
    TorusField out = *this;
    out.reality_ = Reality::complex;
    return out;
  }

  [[nodiscard]] bool all_finite() const noexcept {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const cplx& c) {
      return std::isfinite(c.real()) && std::isfinite(c.imag());
    });
  }

  [[nodiscard]] double max_abs() const noexcept {
    double m = 0.0;
    for (const auto& c : coeffs_) {
      m = std::max(m, std::abs(c));
    }
    return m;
  }

  TorusField& operator+=(const TorusField& other) {
    require_same_shape(other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      coeffs_[i] += other.coeffs_[i];
    }
    return *this;
  }

  TorusField& operator-=(const TorusField& other) {
    require_same_shape(other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      coeffs_[i] -= other.coeffs_[i];
    }
    return *this;
  }

  TorusField& operator*=(double factor) noexcept {
    for (auto& c : coeffs_) {
      c *= factor;
    }
    return *this;
  }

  /// Complex scaling; only allowed on complex fields.
  TorusField& operator*=(cplx factor) {
    if (is_real()) {
      throw std::invalid_argument("TorusField: complex scaling of a real field");
    }
    for (auto& c : coeffs_) {
      c *= factor;
    }
    return *this;
  }

  /// this += factor * other
  TorusField& axpy(double factor, const TorusField& other) {
    require_same_shape(other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      coeffs_[i] += factor * other.coeffs_[i];
    }
    return *this;
  }

  friend TorusField operator+(TorusField a, const TorusField& b) { return a += b; }
  friend TorusField operator-(TorusField a, const TorusField& b) { return a -= b; }
  friend TorusField operator*(double f, TorusField a) { return a *= f; }
  friend TorusField operator*(TorusField a, double f) { return a *= f; }

  friend bool operator==(const TorusField& a, const TorusField& b) {
    return a.n_max_ == b.n_max_ && a.reality_ == b.reality_ && a.coeffs_ == b.coeffs_;
  }

 private:
  cplx& slot(int n) noexcept { return coeffs_[static_cast<std::size_t>(n + n_max_)]; }

  void require_same_shape(const TorusField& other) const {
    if (other.n_max_ != n_max_ || other.reality_ != reality_) {
      throw std::invalid_argument("TorusField: band limit or reality mismatch");
    }
  }

  int n_max_;
  Reality reality_;
  std::vector<cplx> coeffs_;
};

/// Sobolev weight 1 + |n|^{2 sigma}; at n = 0 this is 1 for sigma > 0 and 2 for sigma = 0.
inline double sobolev_weight(int n, double sigma) {
  return 1.0 + std::pow(static_cast<double>(std::abs(n)), 2.0 * sigma);
}

/// ||u||_{H^sigma}^2 = sum_n (1 + |n|^{2 sigma}) |c_n|^2.
inline double sobolev_norm_sq(const TorusField& u, double sigma) {
  double acc = 0.0;
  for (int n = -u.n_max(); n <= u.n_max(); ++n) {
    acc += sobolev_weight(n, sigma) * std::norm(u[n]);
  }
  return acc;
}

inline double sobolev_norm(const TorusField& u, double sigma) { return std::sqrt(sobolev_norm_sq(u, sigma)); }

/// Real H^sigma inner product sum_n (1 + |n|^{2 sigma}) Re(u_n conj(v_n)).
inline double hsigma_inner(const TorusField& u, const TorusField& v, double sigma) {
  if (u.n_max() != v.n_max()) {
    throw std::invalid_argument("hsigma_inner: band limits differ");
  }
  double acc = 0.0;
  for (int n = -u.n_max(); n <= u.n_max(); ++n) {
    const cplx a = u[n];
    const cplx b = v[n];
    acc += sobolev_weight(n, sigma) * (a.real() * b.real() + a.imag() * b.imag());
  }
  return acc;
}

/// P_N: zero every mode with |n| > N. The band limit is unchanged.
inline TorusField project(const TorusField& u, int N) {
  if (N < 0) {
    throw std::invalid_argument("project: negative truncation");
  }
  TorusField out{u.n_max(), u.reality()};
  auto dst = out.raw();
  const int m = std::min(N, u.n_max());
  for (int n = -m; n <= m; ++n) {
    dst[static_cast<std::size_t>(n + u.n_max())] = u[n];
  }
  return out;
}

/// Littlewood-Paley block: Delta_0 = P_1, Delta_j = P_{2^j} - P_{2^{j-1}}.
inline TorusField lp_block(const TorusField& u, int j) {
  if (j < 0) {
    throw std::invalid_argument("lp_block: negative index");
  }
  const int hi = j == 0 ? 1 : (1 << j);
  const int lo = j == 0 ? -1 : (1 << (j - 1));
  TorusField out{u.n_max(), u.reality()};
  auto dst = out.raw();
  for (int n = -u.n_max(); n <= u.n_max(); ++n) {
    const int a = std::abs(n);
    if (a <= hi && a > lo) {
      dst[static_cast<std::size_t>(n + u.n_max())] = u[n];
    }
  }
  return out;
}

/// Number of Littlewood-Paley blocks needed to cover modes |n| <= n_max.
inline int lp_block_count(int n_max) {
  int j = 0;
  while ((j == 0 ? 1 : (1 << j)) < n_max) {
    ++j;
  }
  return j + 1;
}

// ---------------------------------------------------------------------------------------------
// Fourier multipliers

enum class SymbolParity {
  real_even,  ///< real symbol with m(-n) = m(n); maps real fields to real fields
  imag_odd,   ///< imaginary symbol with m(-n) = -m(n); maps real fields to real fields
  general,
};

struct Multiplier {
  std::function<cplx(int)> symbol;
  SymbolParity parity = SymbolParity::general;
};

namespace multipliers {

/// |D_x|^beta, zero on the mean.
inline Multiplier abs_derivative(double beta) {
  return {[beta](int n) { return n == 0 ? cplx{} : cplx{std::pow(std::abs(n), beta), 0.0}; }, SymbolParity::real_even};
}

/// d/dx.
inline Multiplier derivative() {
  return {[](int n) { return cplx{0.0, static_cast<double>(n)}; }, SymbolParity::imag_odd};
}

/// L_beta = d/dx (1 + |D_x|^beta)^{-1}.
inline Multiplier l_beta(double beta) {
  return {[beta](int n) { return cplx{0.0, n / (1.0 + std::pow(std::abs(n), beta))}; }, SymbolParity::imag_odd};
}

/// Lambda(beta) = sqrt(1 + |D_x|^{2 beta}).
inline Multiplier lambda(double beta) {
  return {[beta](int n) {
            return cplx{n == 0 ? 1.0 : std::sqrt(1.0 + std::pow(std::abs(n), 2.0 * beta)), 0.0};
          },
          SymbolParity::real_even};
}

inline Multiplier compose(Multiplier a, Multiplier b) {
  SymbolParity parity = SymbolParity::general;
  if (a.parity != SymbolParity::general && b.parity != SymbolParity::general) {
    parity = a.parity == b.parity ? SymbolParity::real_even : SymbolParity::imag_odd;
  }
  return {[a = std::move(a.symbol), b = std::move(b.symbol)](int n) { return a(n) * b(n); }, parity};
}

}  // namespace multipliers

/// c_out(n) = symbol(n) c_in(n). The result is real iff the input is real and the symbol has a
/// reality-preserving parity.
inline TorusField apply_multiplier(const Multiplier& m, const TorusField& u) {
  const bool keep_real = u.is_real() && m.parity != SymbolParity::general;
  TorusField out{u.n_max(), keep_real ? Reality::real : Reality::complex};
  auto dst = out.raw();
  for (int n = -u.n_max(); n <= u.n_max(); ++n) {
    const cplx s = m.symbol(n);
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
      throw std::domain_error("apply_multiplier: symbol undefined at mode " + std::to_string(n));
    }
    dst[static_cast<std::size_t>(n + u.n_max())] = s * u[n];
  }
  out.enforce_reality();
  return out;
}

// ---------------------------------------------------------------------------------------------
// Grid transforms

/// Values u(x_j), x_j = 2 pi j / M, j = 0..M-1. Requires M > 2 n_max for an invertible sampling.
inline std::vector<cplx> to_grid(const TorusField& u, std::size_t points) {
  std::vector<cplx> spectrum(points, cplx{});
  const auto m = static_cast<long>(points);
  for (int n = -u.n_max(); n <= u.n_max(); ++n) {
    const long idx = ((n % m) + m) % m;
    spectrum[static_cast<std::size_t>(idx)] += u[n];
  }
  std::vector<cplx> values(points);
  detail::fft(spectrum, values, detail::FftDirection::backward);
  return values;
}

/// Fourier coefficients |n| <= band of the trigonometric interpolant of grid values.
inline TorusField from_grid(std::span<const cplx> values, int band, Reality reality) {
  const std::size_t points = values.size();
  std::vector<cplx> spectrum(points);
  detail::fft(values, spectrum, detail::FftDirection::forward);
  TorusField out{band, reality};
  auto dst = out.raw();
  const auto m = static_cast<long>(points);
  const double inv = 1.0 / static_cast<double>(points);
  for (int n = -band; n <= band; ++n) {
    const long idx = ((n % m) + m) % m;
    dst[static_cast<std::size_t>(n + band)] = spectrum[static_cast<std::size_t>(idx)] * inv;
  }
  out.enforce_reality();
  return out;
}

/// Grid size that keeps modes |n| <= out_band alias-free for a product of total degree band_sum.
inline std::size_t dealiased_grid(int out_band, int band_sum) {
  return detail::good_fft_size(static_cast<std::size_t>(out_band + band_sum + 1));
}

/// Coefficients |n| <= out_band of the pointwise product u v, alias-free.
inline TorusField product(const TorusField& u, const TorusField& v, int out_band) {
  const std::size_t points = dealiased_grid(out_band, u.n_max() + v.n_max());
  auto gu = to_grid(u, points);
  const auto gv = to_grid(v, points);
  for (std::size_t j = 0; j < points; ++j) {
    gu[j] *= gv[j];
  }
  const bool real = u.is_real() && v.is_real();
  return from_grid(gu, out_band, real ? Reality::real : Reality::complex);
}

/// Exact coefficients of u v on every mode |n| <= n_max(u) + n_max(v).
inline TorusField quadratic_product(const TorusField& u, const TorusField& v) {
  if (u.reality() != v.reality()) {
    throw std::invalid_argument("quadratic_product: reality flags differ");
  }
  return product(u, v, u.n_max() + v.n_max());
}

/// Coefficients |n| <= out_band of |u|^4 u, alias-free.
inline TorusField quintic_nonlinearity(const TorusField& u, int out_band) {
  const std::size_t points = dealiased_grid(out_band, 5 * u.n_max());
  auto g = to_grid(u, points);
  for (auto& value : g) {
    const double m2 = std::norm(value);
    value *= m2 * m2;
  }
  return from_grid(g, out_band, u.reality());
}

/// Exact coefficients of |u|^4 u on its full band 5 n_max.
inline TorusField quintic_nonlinearity(const TorusField& u) { return quintic_nonlinearity(u, 5 * u.n_max()); }

// ---------------------------------------------------------------------------------------------
// Physical-space norms

/// Normalized Lebesgue norm ((1/2 pi) int |u|^p dx)^{1/p}.
/**
 * For integer p the quadrature grid has more than p n_max points, so |u|^p (a trigonometric
 * polynomial for even p) is integrated exactly. p = infinity returns the grid maximum.
 */
inline double lp_norm(const TorusField& u, double p) {
  if (std::isinf(p)) {
    const auto g = to_grid(u, detail::good_fft_size(static_cast<std::size_t>(std::max(16 * u.n_max() + 1, 64))));
    double m = 0.0;
    for (const auto& v : g) {
      m = std::max(m, std::abs(v));
    }
    return m;
  }
  if (!(p >= 1.0)) {
    throw std::invalid_argument("lp_norm: p must be >= 1");
  }
  const auto points =
      detail::good_fft_size(static_cast<std::size_t>(std::max(static_cast<int>(std::ceil(p)) * u.n_max() + 1, 32)));
  const auto g = to_grid(u, points);
  double acc = 0.0;
  for (const auto& v : g) {
    acc += std::pow(std::abs(v), p);
  }
  return std::pow(acc / static_cast<double>(points), 1.0 / p);
}

/// Grid maximum of |u| on `points` equispaced nodes.
inline double linf_norm(const TorusField& u, std::size_t points) {
  const auto g = to_grid(u, points);
  double m = 0.0;
  for (const auto& v : g) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

/// ||u||_{L^inf} + ||u_x||_{L^inf} on a grid fine enough to resolve the band (16 points per mode).
inline double w1inf_norm(const TorusField& u) {
  const auto points = detail::good_fft_size(static_cast<std::size_t>(std::max(16 * u.n_max() + 1, 64)));
  return linf_norm(u, points) + linf_norm(apply_multiplier(multipliers::derivative(), u), points);
}

/// sup_j 2^{j alpha} max_grid |Delta_j u|, the Besov B^alpha_{inf,inf} proxy for the C^alpha norm.
inline double besov_proxy_norm(const TorusField& u, double alpha, std::size_t grid_points) {
  double out = 0.0;
  for (int j = 0; j < lp_block_count(u.n_max()); ++j) {
    out = std::max(out, std::pow(2.0, j * alpha) * linf_norm(lp_block(u, j), grid_points));
  }
  return out;
}

/// Besov proxy on a default grid of 4 max(n_max, 16) points.
inline double besov_proxy_norm(const TorusField& u, double alpha) {
  return besov_proxy_norm(u, alpha, detail::good_fft_size(static_cast<std::size_t>(4 * std::max(u.n_max(), 16))));
}

struct HolderNorm {
  double grid = 0.0;   ///< grid sup |u| plus grid sup of the difference quotient
  double besov = 0.0;  ///< sup_j 2^{j alpha} max_grid |Delta_j u|
};

/// Grid approximations of the C^alpha norm, 0 < alpha < 1.
inline HolderNorm holder_norm(const TorusField& u, double alpha, std::size_t grid_points) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("holder_norm: alpha must lie in (0, 1)");
  }
  if (grid_points < static_cast<std::size_t>(std::max(4 * u.n_max(), 4))) {
    throw std::invalid_argument("holder_norm: need at least 4 n_max grid points");
  }
  HolderNorm out;
  const auto g = to_grid(u, grid_points);
  const double h = 2.0 * std::numbers::pi / static_cast<double>(grid_points);
  double sup = 0.0;
  double quotient = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    sup = std::max(sup, std::abs(g[i]));
    for (std::size_t j = i + 1; j < grid_points; ++j) {
      const std::size_t k = std::min(j - i, grid_points - (j - i));
      const double dist = h * static_cast<double>(k);
      quotient = std::max(quotient, std::abs(g[i] - g[j]) / std::pow(dist, alpha));
    }
  }
  out.grid = sup + quotient;
  out.besov = besov_proxy_norm(u, alpha, grid_points);
  return out;
}

// ---------------------------------------------------------------------------------------------
// JSON: {n_max, reality, coeffs: [[re, im], ...]} ordered n = -n_max..n_max.

inline void to_json(nlohmann::json& j, const TorusField& u) {
  auto coeffs = nlohmann::json::array();
  for (const auto& c : u.coeffs()) {
    coeffs.push_back({c.real(), c.imag()});
  }
  j = nlohmann::json{{"n_max", u.n_max()}, {"reality", u.is_real() ? "real" : "complex"}, {"coeffs", std::move(coeffs)}};
}

inline void from_json(const nlohmann::json& j, TorusField& u) {
  const int n_max = j.at("n_max").get<int>();
  const auto reality_name = j.at("reality").get<std::string>();
  if (reality_name != "real" && reality_name != "complex") {
    throw std::invalid_argument("TorusField json: unknown reality '" + reality_name + "'");
  }
  std::vector<cplx> coeffs;
  for (const auto& c : j.at("coeffs")) {
    coeffs.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
  }
  u = TorusField{n_max, reality_name == "real" ? Reality::real : Reality::complex, std::move(coeffs)};
}

}  // namespace qinv

#endif
