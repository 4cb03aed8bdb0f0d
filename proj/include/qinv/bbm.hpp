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

#ifndef QINV_BBM_HPP
#define QINV_BBM_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qinv/dynamics.hpp"
#include "qinv/spectral.hpp"

/**
 * \file
 * \brief Truncated fractional BBM flow
 *   u_t + |D|^beta u_t + u_x + d_x P_N((P_N u)^2) = 0,
 * written as u_t = -L_beta u - L_beta P_N((P_N u)^2) with L_beta = d_x (1 + |D|^beta)^{-1}.
 */

namespace qinv {

struct BbmParams {
  double beta = 1.5;
  int N = 16;
  double dt = 1e-3;
  Integrator integrator = Integrator::rk4;
  bool nonlinearity_enabled = true;

  void validate() const {
    if (!(beta > 1.0)) {
      throw std::invalid_argument("BbmParams: beta must be > 1");
    }
    if (N < 0) {
      throw std::invalid_argument("BbmParams: N must be >= 0");
    }
    if (!(dt > 0.0)) {
      throw std::invalid_argument("BbmParams: dt must be > 0");
    }
  }
};

/// Dispersion relation omega_n = n / (1 + |n|^beta); the linear flow is c_n -> exp(-i omega_n t) c_n.
inline double bbm_frequency(int n, double beta) { return n / (1.0 + std::pow(std::abs(n), beta)); }

/// The BBM vector field in the form consumed by evolve() and flow().
class BbmSystem {
 public:
  explicit BbmSystem(BbmParams params, std::vector<double> extra_sigmas = {})
      : params_{params}, extra_sigmas_{std::move(extra_sigmas)} {
    params_.validate();
  }

  [[nodiscard]] const BbmParams& params() const noexcept { return params_; }
  [[nodiscard]] int truncation() const noexcept { return params_.N; }
  [[nodiscard]] double frequency(int n) const { return bbm_frequency(n, params_.beta); }

  /// -L_beta P_N((P_N u)^2) for a field already restricted to the retained modes.
  [[nodiscard]] TorusField nonlinear_term(const TorusField& head) const {
    const int band = head.n_max();
    if (!params_.nonlinearity_enabled) {
      return TorusField{band, head.reality()};
    }
    TorusField sq = product(head, head, band);
    auto c = sq.raw();
    for (int n = -band; n <= band; ++n) {
      const cplx v = c[static_cast<std::size_t>(n + band)];
      const double w = frequency(n);
      c[static_cast<std::size_t>(n + band)] = cplx{w * v.imag(), -w * v.real()};
    }
    sq.enforce_reality();
    return sq;
  }

  [[nodiscard]] std::vector<double> conserved(const TorusField& head) const {
    return {sobolev_norm_sq(head, params_.beta / 2.0)};
  }
  [[nodiscard]] std::vector<std::string> conserved_names() const { return {"hbeta2_sq"}; }

  [[nodiscard]] std::vector<double> diagnostics(const TorusField& u) const {
    const TorusField pu = project(u, params_.N);
    std::vector<double> out{sobolev_norm(pu, params_.beta / 2.0)};
    for (double sigma : extra_sigmas_) {
      out.push_back(sobolev_norm(pu, sigma));
    }
    return out;
  }
  [[nodiscard]] std::vector<std::string> diagnostic_names() const {
    std::vector<std::string> names{"PN_hbeta2"};
    for (double sigma : extra_sigmas_) {
      names.push_back("PN_h" + std::to_string(sigma));
    }
    return names;
  }

 private:
  BbmParams params_;
  std::vector<double> extra_sigmas_;
};

/// -L_beta u - L_beta P_N((P_N u)^2) on the full band of u.
inline TorusField bbm_rhs(const TorusField& u, const BbmParams& p) {
  const BbmSystem sys{p};
  const int band = u.n_max();
  const int head_band = std::min(p.N, band);
  TorusField out{band, u.reality()};
  auto dst = out.raw();
  for (int n = -band; n <= band; ++n) {
    const cplx c = u[n];
    const double w = sys.frequency(n);
    dst[static_cast<std::size_t>(n + band)] = cplx{w * c.imag(), -w * c.real()};
  }
  const TorusField nl = sys.nonlinear_term(u.with_band(head_band));
  for (int n = -head_band; n <= head_band; ++n) {
    dst[static_cast<std::size_t>(n + band)] += nl[n];
  }
  out.enforce_reality();
  return out;
}

/// Flow of the truncated BBM equation from 0 to t_final, storing every `store_every`-th step.
/**
 * Diagnostics per stored state are ||P_N u||_{H^{beta/2}} followed by ||P_N u||_{H^sigma} for
 * every entry of `extra_sigmas`. `max_relative_drift[0]` is the drift of ||P_N u||^2_{H^{beta/2}},
 * which the exact flow conserves.
 */
inline Trajectory integrate_bbm(const TorusField& u0, const BbmParams& p, double t_final, int store_every = 1,
                                std::vector<double> extra_sigmas = {}) {
  if (!u0.is_real()) {
    throw std::invalid_argument("integrate_bbm: BBM fields are real");
  }
  return evolve(BbmSystem{p, std::move(extra_sigmas)}, u0, t_final, p.dt, p.integrator, store_every);
}

inline FlowResult flow_bbm(const TorusField& u0, const BbmParams& p, double t_final) {
  return flow(BbmSystem{p}, u0, t_final, p.dt, p.integrator);
}

// ---------------------------------------------------------------------------------------------
// Duhamel fixed point

struct DuhamelResult {
  TorusField state;                ///< u(T)
  double contraction_factor = 0.0; ///< max ratio of successive iterate distances
  int iterations = 0;
};

class DuhamelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default number of quadrature subintervals of [0, T] in duhamel_local_solve.
inline constexpr int kDuhamelSubintervals = 64;

/// Picard iteration for u(t) = e^{-tL} u0 - int_0^t e^{-(t-s)L} L P_N((P_N u)^2)(s) ds on [0, T].
/**
 * The semigroup is applied exactly mode by mode and the time integral uses the composite
 * trapezoid rule on `subintervals` subintervals. Distances between iterates are measured in
 * sup_t of the Besov C^alpha proxy; iteration stops once that distance is below `tol`.
 */
inline DuhamelResult duhamel_local_solve(const TorusField& u0, const BbmParams& p, double T, double tol, int max_iter,
                                         double alpha = 0.2, int subintervals = kDuhamelSubintervals) {
  p.validate();
  if (subintervals < 1) {
    throw std::invalid_argument("duhamel_local_solve: need at least one subinterval");
  }
  if (!u0.is_real()) {
    throw std::invalid_argument("duhamel_local_solve: BBM fields are real");
  }
  const int band = u0.n_max();
  const int head_band = std::min(p.N, band);
  const int m = subintervals;
  const double h = T / m;
  std::vector<double> omega(static_cast<std::size_t>(2 * band + 1));
  for (int n = -band; n <= band; ++n) {
    omega[static_cast<std::size_t>(n + band)] = bbm_frequency(n, p.beta);
  }
  auto phase = [&](int n, double t) {
    const double a = -omega[static_cast<std::size_t>(n + band)] * t;
    return cplx{std::cos(a), std::sin(a)};
  };

  std::vector<TorusField> iterate(static_cast<std::size_t>(m + 1), TorusField{band, Reality::real});
  std::vector<TorusField> free(iterate.size(), TorusField{band, Reality::real});
  for (int j = 0; j <= m; ++j) {
    auto dst = free[static_cast<std::size_t>(j)].raw();
    for (int n = -band; n <= band; ++n) {
      dst[static_cast<std::size_t>(n + band)] = phase(n, j * h) * u0[n];
    }
    free[static_cast<std::size_t>(j)].enforce_reality();
  }
  iterate = free;

  const BbmSystem sys{p};
  DuhamelResult result;
  double previous_distance = -1.0;
  for (int k = 1; k <= max_iter; ++k) {
    // integrand v_n(s) = e^{i omega_n s} (-L_beta P_N((P_N u)^2))_n(s), cumulated by trapezoid
    std::vector<TorusField> integrand;
    integrand.reserve(iterate.size());
    for (int j = 0; j <= m; ++j) {
      const TorusField nl = sys.nonlinear_term(iterate[static_cast<std::size_t>(j)].with_band(head_band));
      TorusField v{head_band, Reality::real};
      auto dst = v.raw();
      for (int n = -head_band; n <= head_band; ++n) {
        dst[static_cast<std::size_t>(n + head_band)] = std::conj(phase(n, j * h)) * nl[n];
      }
      v.enforce_reality();
      integrand.push_back(std::move(v));
    }
    std::vector<TorusField> next = free;
    TorusField cumulative{head_band, Reality::real};
    double distance = 0.0;
    for (int j = 1; j <= m; ++j) {
      cumulative.axpy(0.5 * h, integrand[static_cast<std::size_t>(j - 1)]).axpy(0.5 * h, integrand[static_cast<std::size_t>(j)]);
      auto dst = next[static_cast<std::size_t>(j)].raw();
      for (int n = -head_band; n <= head_band; ++n) {
        dst[static_cast<std::size_t>(n + band)] += phase(n, j * h) * cumulative[n];
      }
      next[static_cast<std::size_t>(j)].enforce_reality();
      if (!next[static_cast<std::size_t>(j)].all_finite() || next[static_cast<std::size_t>(j)].max_abs() > kBlowUpModulus) {
        throw DuhamelError("duhamel_local_solve: iterates diverged (T outside the contraction regime?)");
      }
      distance = std::max(distance, besov_proxy_norm(next[static_cast<std::size_t>(j)] - iterate[static_cast<std::size_t>(j)], alpha));
    }
    iterate = std::move(next);
    result.iterations = k;
    if (previous_distance > 0.0 && distance > 1e-13) {
      result.contraction_factor = std::max(result.contraction_factor, distance / previous_distance);
    }
    previous_distance = distance;
    if (distance <= tol) {
      result.state = iterate.back();
      return result;
    }
  }
  throw DuhamelError("duhamel_local_solve: no convergence within " + std::to_string(max_iter) +
                     " iterations (T outside the contraction regime?)");
}

/// Largest c (times `safety`) with contraction factor <= target at T = c / (1 + K) for every datum.
/**
 * K is the Besov C^alpha proxy of each datum. Bisection in log scale; divergence of the iteration
 * counts as a violation.
 */
inline double calibrate_duhamel_constant(const std::vector<TorusField>& data, const BbmParams& p, double alpha,
                                         double target = 0.5, double safety = 0.8,
                                         int subintervals = kDuhamelSubintervals) {
  auto worst = [&](double c) {
    double w = 0.0;
    for (const auto& u0 : data) {
      const double K = besov_proxy_norm(u0, alpha);
      try {
        w = std::max(w, duhamel_local_solve(u0, p, c / (1.0 + K), 1e-12, 200, alpha, subintervals).contraction_factor);
      } catch (const DuhamelError&) {
        return std::numeric_limits<double>::infinity();
      }
    }
    return w;
  };
  double lo = 1e-3;
  double hi = 1e-3;
  while (hi < 1e3 && worst(hi) <= target) {
    lo = hi;
    hi *= 2.0;
  }
  if (lo == hi) {
    throw DuhamelError("calibrate_duhamel_constant: contraction violated already at c = 1e-3");
  }
  for (int it = 0; it < 30; ++it) {
    const double mid = std::sqrt(lo * hi);
    (worst(mid) <= target ? lo : hi) = mid;
  }
  return safety * lo;
}

// ---------------------------------------------------------------------------------------------
// Flow comparison

struct NormSpec {
  enum class Kind { sobolev, holder };
  Kind kind = Kind::sobolev;
  double exponent = 0.0;

  [[nodiscard]] std::string label() const {
    return (kind == Kind::sobolev ? "H^" : "C^") + std::to_string(exponent);
  }
  [[nodiscard]] double evaluate(const TorusField& u) const {
    return kind == Kind::sobolev ? sobolev_norm(u, exponent) : besov_proxy_norm(u, exponent);
  }
};

struct NormError {
  std::string norm;
  double value = 0.0;
};

/// Distances ||Phi_t^{N_small} u0 - Phi_t^{N_large} u0|| in each requested norm.
inline std::vector<NormError> flow_compare(const TorusField& u0, int N_small, int N_large, BbmParams p, double t,
                                           const std::vector<NormSpec>& norms) {
  if (N_small > N_large || N_large > u0.n_max()) {
    throw std::invalid_argument("flow_compare: need N_small <= N_large <= n_max(u0)");
  }
  p.N = N_small;
  const TorusField a = flow_bbm(u0, p, t).state;
  p.N = N_large;
  const TorusField b = N_small == N_large ? a : flow_bbm(u0, p, t).state;
  const TorusField diff = a - b;
  std::vector<NormError> out;
  for (const auto& spec : norms) {
    out.push_back({spec.label(), spec.evaluate(diff)});
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Deterministic growth diagnostics

/// Analytic d/dt of Sobolev norms along a BBM trajectory against the deterministic bounds.
/**
 * Series:
 *  - "sub_quadratic": d/dt ||P_N u||^2_{H^sigma} vs R^{1+theta} ||P_N u||^{2-theta}_{H^sigma},
 *    theta = 2 alpha / (2 sigma - beta), R = ||P_N u(0)||_{H^{beta/2}};
 *  - "smoothing": d/dt ||P_N u||^2_{H^{s+beta/2}} vs ||P_N u||^3_{H^s} + ||P_N u||^2_{H^s} ||d_x P_N u||_inf;
 *  - "smoothing_w1inf": same derivative vs ||P_N u||_{W^{1,inf}} ||P_N u||^2_{H^s};
 *  - "weight_derivative" (only for s > 1/2 + beta/2): d/dt ||P_N u||^{2r}_{H^s} vs
 *    ||P_N u||^{2r-2}_{H^s} ||P_N u||_{W^{1,inf}} ||P_N u||^2_{H^{s-beta/2}}.
 */
inline GrowthDiagnostics bbm_growth_diagnostics(const Trajectory& traj, const BbmParams& p, double sigma, double alpha,
                                                double s, double r = 3.0) {
  if (!(1.0 + alpha < p.beta) || !(sigma - alpha > p.beta / 2.0) || !(alpha > 0.0)) {
    throw std::invalid_argument("bbm_growth_diagnostics: need alpha > 0, 1 + alpha < beta and sigma - alpha > beta/2");
  }
  if (!(s > 0.5)) {
    throw std::invalid_argument("bbm_growth_diagnostics: need s > 1/2");
  }
  if (traj.states.empty()) {
    throw std::invalid_argument("bbm_growth_diagnostics: empty trajectory");
  }
  const double theta = 2.0 * alpha / (2.0 * sigma - p.beta);
  const double R = sobolev_norm(project(traj.states.front(), p.N), p.beta / 2.0);
  const bool with_weight = s > 0.5 + p.beta / 2.0;

  GrowthDiagnostics out;
  out.times = traj.times;
  GrowthSeries sub{"sub_quadratic"};
  GrowthSeries smooth{"smoothing"};
  GrowthSeries smooth_w{"smoothing_w1inf"};
  GrowthSeries weight{"weight_derivative"};
  for (const auto& u : traj.states) {
    const TorusField pu = project(u, p.N).with_band(std::min(p.N, u.n_max()));
    const TorusField pdu = project(bbm_rhs(u, p), p.N).with_band(pu.n_max());
    const double hs_sigma = sobolev_norm(pu, sigma);
    detail::push_ratio(sub, 2.0 * hsigma_inner(pu, pdu, sigma), std::pow(R, 1.0 + theta) * std::pow(hs_sigma, 2.0 - theta));

    const double hs = sobolev_norm(pu, s);
    const double d_high = 2.0 * hsigma_inner(pu, pdu, s + p.beta / 2.0);
    const auto grid = detail::good_fft_size(static_cast<std::size_t>(std::max(16 * pu.n_max() + 1, 64)));
    const double dx_inf = linf_norm(apply_multiplier(multipliers::derivative(), pu), grid);
    const double w1 = linf_norm(pu, grid) + dx_inf;
    detail::push_ratio(smooth, d_high, hs * hs * hs + hs * hs * dx_inf);
    detail::push_ratio(smooth_w, d_high, w1 * hs * hs);
    if (with_weight) {
      const double d_weight = r * std::pow(hs, 2.0 * r - 2.0) * 2.0 * hsigma_inner(pu, pdu, s);
      const double low = sobolev_norm(pu, s - p.beta / 2.0);
      detail::push_ratio(weight, d_weight, std::pow(hs, 2.0 * r - 2.0) * w1 * low * low);
    }
  }
  out.series.push_back(std::move(sub));
  out.series.push_back(std::move(smooth));
  out.series.push_back(std::move(smooth_w));
  if (with_weight) {
    out.series.push_back(std::move(weight));
  }
  return out;
}

}  // namespace qinv

#endif
