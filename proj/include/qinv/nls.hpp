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

#ifndef QINV_NLS_HPP
#define QINV_NLS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qinv/dynamics.hpp"
#include "qinv/spectral.hpp"

/**
 * \file
 * \brief Truncated defocusing quintic NLS  i u_t + u_xx = P_N(|P_N u|^4 P_N u),
 * i.e. u_t = i u_xx - i P_N(|P_N u|^4 P_N u).
 */

namespace qinv {

struct NlsParams {
  int N = 8;
  double dt = 1e-3;
  Integrator integrator = Integrator::implicit_midpoint;
  int k = 2;
  bool nonlinearity_enabled = true;

  void validate() const {
    if (N < 0) {
      throw std::invalid_argument("NlsParams: N must be >= 0");
    }
    if (!(dt > 0.0)) {
      throw std::invalid_argument("NlsParams: dt must be > 0");
    }
    if (k < 2) {
      throw std::invalid_argument("NlsParams: k must be >= 2");
    }
  }
};

/// (1/2 pi) int |u|^p dx for integer p >= 1, exact for even p (grid of more than p n_max points).
inline double mean_power(const TorusField& u, int p) {
  const auto points = detail::good_fft_size(static_cast<std::size_t>(std::max(p * u.n_max() + 1, 16)));
  const auto g = to_grid(u, points);
  double acc = 0.0;
  for (const auto& v : g) {
    const double a = std::abs(v);
    double term = 1.0;
    for (int i = 0; i < p; ++i) {
      term *= a;
    }
    acc += term;
  }
  return acc / static_cast<double>(points);
}

/// ||u||_{L^2} with the normalized measure dx / 2 pi, i.e. (sum |c_n|^2)^{1/2}.
inline double mass(const TorusField& u) { return std::sqrt(mean_power(u, 2)); }

/// E_1(u) = 1/2 ||u||^2_{H^1} + 1/6 ||u||^6_{L^6}, with the L^6 norm taken against dx / 2 pi.
inline double energy_e1(const TorusField& u) { return 0.5 * sobolev_norm_sq(u, 1.0) + mean_power(u, 6) / 6.0; }

/// Correction functional R_{2k} of a modified energy E_{2k} = 1/2 ||u||^2_{H^{2k}} + R_{2k}(u).
/**
 * `derivative(u, v)` is the directional derivative of `eval` at u along v. The contract is
 * eval(0) = 0 and |eval(u) - eval(v)| <= C ||u - v||_{H^{2k-1}} (1 + ||u||^{m0} + ||v||^{m0}).
 */
struct ModifiedEnergy {
  std::function<double(const TorusField&)> eval;
  std::function<double(const TorusField&, const TorusField&)> derivative;
  int lipschitz_m0 = 0;
  double lipschitz_c = 0.0;
  std::string name = "zero";

  static ModifiedEnergy zero() {
    return {[](const TorusField&) { return 0.0; }, [](const TorusField&, const TorusField&) { return 0.0; }, 0, 0.0,
            "zero"};
  }
};

/// Amount by which the pair (u, v) violates the Lipschitz contract of `corr` (<= 0 when it holds).
inline double lipschitz_excess(const ModifiedEnergy& corr, int k, const TorusField& u, const TorusField& v) {
  const double sigma = 2.0 * k - 1.0;
  const double lhs = std::abs(corr.eval(u) - corr.eval(v));
  const double m0 = corr.lipschitz_m0;
  const double rhs = corr.lipschitz_c * sobolev_norm(u - v, sigma) *
                     (1.0 + std::pow(sobolev_norm(u, sigma), m0) + std::pow(sobolev_norm(v, sigma), m0));
  return lhs - rhs;
}

/// E_{2k}(u) = 1/2 ||u||^2_{H^{2k}} + R_{2k}(u).
inline double modified_energy(const TorusField& u, int k, const ModifiedEnergy& corr) {
  if (k < 2) {
    throw std::invalid_argument("modified_energy: k must be >= 2");
  }
  return 0.5 * sobolev_norm_sq(u, 2.0 * k) + corr.eval(u);
}

class NlsSystem {
 public:
  explicit NlsSystem(NlsParams params, std::vector<double> extra_sigmas = {})
      : params_{params}, extra_sigmas_{std::move(extra_sigmas)} {
    params_.validate();
  }

  [[nodiscard]] const NlsParams& params() const noexcept { return params_; }
  [[nodiscard]] int truncation() const noexcept { return params_.N; }
  [[nodiscard]] double frequency(int n) const noexcept { return static_cast<double>(n) * n; }

  /// -i P_N(|u|^4 u) for a field already restricted to the retained modes.
  [[nodiscard]] TorusField nonlinear_term(const TorusField& head) const {
    const int band = head.n_max();
    if (!params_.nonlinearity_enabled) {
      return TorusField{band, head.reality()};
    }
    TorusField q = quintic_nonlinearity(head, band);
    for (auto& c : q.raw()) {
      c = cplx{c.imag(), -c.real()};
    }
    return q;
  }

  [[nodiscard]] std::vector<double> conserved(const TorusField& head) const {
    return {mean_power(head, 2), energy_e1(head)};
  }
  [[nodiscard]] std::vector<std::string> conserved_names() const { return {"mass_sq", "energy_e1"}; }

  [[nodiscard]] std::vector<double> diagnostics(const TorusField& u) const {
    const TorusField pu = project(u, params_.N).with_band(std::min(params_.N, u.n_max()));
    std::vector<double> out{mass(pu), energy_e1(pu)};
    for (double sigma : extra_sigmas_) {
      out.push_back(sobolev_norm(pu, sigma));
    }
    return out;
  }
  [[nodiscard]] std::vector<std::string> diagnostic_names() const {
    std::vector<std::string> names{"PN_mass", "PN_energy_e1"};
    for (double sigma : extra_sigmas_) {
      names.push_back("PN_h" + std::to_string(sigma));
    }
    return names;
  }

 private:
  NlsParams params_;
  std::vector<double> extra_sigmas_;
};

/// i u_xx - i P_N(|P_N u|^4 P_N u) on the full band of u.
inline TorusField nls_rhs(const TorusField& u, const NlsParams& p) {
  if (u.is_real()) {
    throw std::invalid_argument("nls_rhs: NLS fields are complex");
  }
  const NlsSystem sys{p};
  const int band = u.n_max();
  const int head_band = std::min(p.N, band);
  TorusField out{band, Reality::complex};
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
  return out;
}

/// Flow of the truncated NLS from 0 to t_final; `max_relative_drift` holds mass^2 and E_1 of P_N u.
inline Trajectory integrate_nls(const TorusField& u0, const NlsParams& p, double t_final, int store_every = 1,
                                std::vector<double> extra_sigmas = {}) {
  if (u0.is_real()) {
    throw std::invalid_argument("integrate_nls: NLS fields are complex");
  }
  return evolve(NlsSystem{p, std::move(extra_sigmas)}, u0, t_final, p.dt, p.integrator, store_every);
}

inline FlowResult flow_nls(const TorusField& u0, const NlsParams& p, double t_final) {
  if (u0.is_real()) {
    throw std::invalid_argument("flow_nls: NLS fields are complex");
  }
  return flow(NlsSystem{p}, u0, t_final, p.dt, p.integrator);
}

/// Growth diagnostics along an NLS trajectory.
/**
 * Series:
 *  - "hk_growth": d/dt ||P_N u||^2_{H^k} vs 1 + ||P_N u||^2_{H^k};
 *  - "modified_energy": d/dt E_{2k}(P_N u) vs 1 + ||P_N u||^{m0}_{H^{2k-1}}.
 * `constraint` receives ||u0||_{L^2} + E_1(u0) evaluated on P_N u0.
 */
inline GrowthDiagnostics nls_growth_diagnostics(const Trajectory& traj, const NlsParams& p, int k,
                                                const ModifiedEnergy& corr, double* constraint = nullptr) {
  if (traj.states.empty()) {
    throw std::invalid_argument("nls_growth_diagnostics: empty trajectory");
  }
  if (constraint != nullptr) {
    const TorusField p0 = project(traj.states.front(), p.N);
    *constraint = mass(p0) + energy_e1(p0);
  }
  GrowthDiagnostics out;
  out.times = traj.times;
  GrowthSeries growth{"hk_growth"};
  GrowthSeries energy{"modified_energy"};
  for (const auto& u : traj.states) {
    const TorusField pu = project(u, p.N).with_band(std::min(p.N, u.n_max()));
    const TorusField pdu = project(nls_rhs(u, p), p.N).with_band(pu.n_max());
    const double hk = sobolev_norm_sq(pu, k);
    detail::push_ratio(growth, 2.0 * hsigma_inner(pu, pdu, k), 1.0 + hk);
    const double de = hsigma_inner(pu, pdu, 2.0 * k) + corr.derivative(pu, pdu);
    detail::push_ratio(energy, de, 1.0 + std::pow(sobolev_norm(pu, 2.0 * k - 1.0), corr.lipschitz_m0));
  }
  out.series.push_back(std::move(growth));
  out.series.push_back(std::move(energy));
  return out;
}

}  // namespace qinv

#endif
