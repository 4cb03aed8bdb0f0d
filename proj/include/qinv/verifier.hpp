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

#ifndef QINV_VERIFIER_HPP
#define QINV_VERIFIER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qinv/bbm.hpp"
#include "qinv/density.hpp"
#include "qinv/measures.hpp"
#include "qinv/nls.hpp"
#include "qinv/parallel.hpp"
#include "qinv/spectral.hpp"

/**
 * \file
 * \brief Monte Carlo checks of the finite-N measure identities, L^p density estimates, the Liouville
 * property and the recurrence experiment.
 */

namespace qinv {

/// Bounded test function psi with |eval| <= bound and an L^2 Lipschitz estimate on the retained modes.
struct TestFunction {
  std::string name;
  std::function<double(const TorusField&)> eval;
  double bound = 1.0;
  double lipschitz = 0.0;
};

namespace test_functions {

/// (sum_{|n| <= m} |c_n|^2)^{1/2}, the normalized L^2 norm of P_m u.
inline double low_mode_mass(const TorusField& u, int m) {
  double acc = 0.0;
  for (int n = -m; n <= m; ++n) {
    acc += std::norm(u[n]);
  }
  return std::sqrt(acc);
}

inline TestFunction one() {
  return {"one", [](const TorusField&) { return 1.0; }, 1.0, 0.0};
}

inline TestFunction exp_low_mass(int m) {
  return {"exp_mass_P" + std::to_string(m),
          [m](const TorusField& u) {
            const double a = low_mode_mass(u, m);
            return std::exp(-a * a);
          },
          1.0, std::sqrt(2.0 / std::exp(1.0))};
}

inline TestFunction cos_first_mode() {
  return {"cos_re_c1", [](const TorusField& u) { return std::cos(u[1].real()); }, 1.0, 1.0};
}

inline TestFunction clipped_mass_p2() {
  return {"min1_mass_P2", [](const TorusField& u) { return std::min(1.0, low_mode_mass(u, 2)); }, 1.0, 1.0};
}

/// The shipped library: 1, exp(-||P_1 u||^2), exp(-||P_2 u||^2), cos(Re c_1), min(1, ||P_2 u||).
inline std::vector<TestFunction> library() {
  return {one(), exp_low_mass(1), exp_low_mass(2), cos_first_mode(), clipped_mass_p2()};
}

inline TestFunction by_name(const std::string& name) {
  for (auto& f : library()) {
    if (f.name == name) {
      return f;
    }
  }
  throw std::invalid_argument("unknown test function '" + name + "'");
}

}  // namespace test_functions

struct VerdictReport {
  std::string test;
  std::string psi;
  double lhs_estimate = 0.0;
  double rhs_estimate = 0.0;
  double paired_diff_mean = 0.0;
  double paired_diff_se = 0.0;
  double unpaired_se = 0.0;
  double z_score = 0.0;
  double z_threshold = 3.0;
  double drift_budget = 0.0;
  double max_drift = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::size_t count = 0;
  nlohmann::json params;
};

inline void to_json(nlohmann::json& j, const VerdictReport& r) {
  j = {{"test", r.test},
       {"psi", r.psi},
       {"params", r.params},
       {"lhs", r.lhs_estimate},
       {"rhs", r.rhs_estimate},
       {"paired_diff_mean", r.paired_diff_mean},
       {"paired_diff_se", r.paired_diff_se},
       {"unpaired_se", r.unpaired_se},
       {"z", r.z_score},
       {"z_threshold", r.z_threshold},
       {"drift_budget", r.drift_budget},
       {"max_drift", r.max_drift},
       {"pass", r.pass},
       {"seed", r.seed},
       {"count", r.count}};
}

struct MonteCarloOptions {
  std::size_t count = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double z = 3.0;
};

namespace detail {

/// Per-sample contributions to both sides of an identity, one entry per test function.
struct PairedSample {
  std::vector<double> lhs;
  std::vector<double> rhs;
  double drift = 0.0;
  double drift_weight = 1.0;  ///< scale of the sample's contribution, max(w, w f)
  bool accepted = true;
};

inline double sample_sd(const std::vector<double>& x, double mean) {
  if (x.size() < 2) {
    return 0.0;
  }
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sq[i] = (x[i] - mean) * (x[i] - mean);
  }
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(x.size() - 1));
}

/// Paired z-tests of mean(lhs) = mean(rhs); the tolerance |mean| <= z se + budget becomes the z threshold.
/// The budget is bound(psi) (1 + Lip(psi)) times the sample mean of drift_weight * conservation drift.
inline std::vector<VerdictReport> paired_reports(const std::string& test, const std::vector<TestFunction>& psis,
                                                 const std::vector<PairedSample>& samples,
                                                 const MonteCarloOptions& opt, const nlohmann::json& params) {
  const double m = static_cast<double>(samples.size());
  double max_drift = 0.0;
  std::vector<double> weighted_drift(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    max_drift = std::max(max_drift, samples[i].drift);
    weighted_drift[i] = samples[i].drift_weight * samples[i].drift;
  }
  const double mean_drift = pairwise_sum(weighted_drift) / m;
  std::vector<VerdictReport> out;
  for (std::size_t j = 0; j < psis.size(); ++j) {
    std::vector<double> lhs(samples.size());
    std::vector<double> rhs(samples.size());
    std::vector<double> diff(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      lhs[i] = samples[i].lhs[j];
      rhs[i] = samples[i].rhs[j];
      diff[i] = lhs[i] - rhs[i];
    }
    VerdictReport r;
    r.test = test;
    r.psi = psis[j].name;
    r.seed = opt.seed;
    r.count = samples.size();
    r.params = params;
    r.lhs_estimate = pairwise_sum(lhs) / m;
    r.rhs_estimate = pairwise_sum(rhs) / m;
    r.paired_diff_mean = pairwise_sum(diff) / m;
    r.paired_diff_se = sample_sd(diff, r.paired_diff_mean) / std::sqrt(m);
    const double sl = sample_sd(lhs, r.lhs_estimate);
    const double sr = sample_sd(rhs, r.rhs_estimate);
    r.unpaired_se = std::sqrt((sl * sl + sr * sr) / m);
    r.max_drift = max_drift;
    r.drift_budget = psis[j].bound * (1.0 + psis[j].lipschitz) * mean_drift;
    const double dev = std::abs(r.paired_diff_mean);
    if (r.paired_diff_se > 0.0) {
      r.z_score = r.paired_diff_mean / r.paired_diff_se;
      r.z_threshold = opt.z + r.drift_budget / r.paired_diff_se;
    } else {
      r.z_score = dev == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.paired_diff_mean);
      r.z_threshold = opt.z;
    }
    r.pass = std::abs(r.z_score) <= r.z_threshold || dev <= r.drift_budget;
    out.push_back(std::move(r));
  }
  return out;
}

inline double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) {
    m = std::max(m, x);
  }
  return m;
}

}  // namespace detail

/// E_{gamma_0}[psi(Phi_t^N u)] = E_{gamma_0}[psi(u)] for each psi, paired on the same samples.
/**
 * `gspec` must be the BBM measure with s = 0; the flow uses `p` (truncation N, time step, scheme).
 */
inline std::vector<VerdictReport> invariance_test_gamma0(const GaussianSpec& gspec, const std::vector<TestFunction>& psis,
                                                         double t, const BbmParams& p, const MonteCarloOptions& opt) {
  if (gspec.model != Model::bbm || gspec.s != 0.0) {
    throw std::invalid_argument("invariance_test_gamma0: needs the BBM Gaussian measure with s = 0");
  }
  BbmParams bp = p;
  bp.beta = gspec.beta;
  std::vector<detail::PairedSample> samples(opt.count);
  parallel_for(opt.count, opt.threads, [&](std::size_t i) {
    const TorusField u = sample_gamma(gspec, opt.seed, i);
    const FlowResult f = flow_bbm(u, bp, t);
    auto& s = samples[i];
    for (const auto& psi : psis) {
      s.lhs.push_back(psi.eval(f.state));
      s.rhs.push_back(psi.eval(u));
    }
    s.drift = detail::max_of(f.max_relative_drift);
  });
  const nlohmann::json params{{"beta", bp.beta}, {"N", bp.N}, {"n_samp", gspec.n_samp}, {"t", t},
                              {"dt", bp.dt}, {"integrator", to_string(bp.integrator)}};
  return detail::paired_reports("invariance_gamma0", psis, samples, opt, params);
}

inline VerdictReport invariance_test_gamma0(const GaussianSpec& gspec, const TestFunction& psi, double t,
                                            const BbmParams& p, const MonteCarloOptions& opt) {
  return invariance_test_gamma0(gspec, std::vector<TestFunction>{psi}, t, p, opt).front();
}

namespace detail {

template <class DensityModel, class LogWeight>
std::vector<PairedSample> quasi_samples(const GaussianSpec& gspec, const DensityModel& model,
                                        const std::vector<TestFunction>& psis, double t, const MonteCarloOptions& opt,
                                        LogWeight log_weight) {
  std::vector<PairedSample> samples(opt.count);
  parallel_for(opt.count, opt.threads, [&](std::size_t i) {
    const TorusField u = sample_gamma(gspec, opt.seed, i);
    const double lw = log_weight(u);
    auto& s = samples[i];
    if (lw == kRejected) {
      s.accepted = false;
      s.lhs.assign(psis.size(), 0.0);
      s.rhs.assign(psis.size(), 0.0);
      return;
    }
    const FlowResult f = model_flow(u, model, t);
    const double transported = std::exp(lw + log_density_endpoint(u, f.state, model));
    const double w = std::exp(lw);
    for (const auto& psi : psis) {
      s.lhs.push_back(psi.eval(f.state) * transported);
      s.rhs.push_back(psi.eval(u) * w);
    }
    s.drift = max_of(f.max_relative_drift);
    s.drift_weight = std::max(w, transported);
  });
  if (std::none_of(samples.begin(), samples.end(), [](const PairedSample& s) { return s.accepted; })) {
    throw std::domain_error("quasi-invariance test: every sample is rejected by the cut-off");
  }
  return samples;
}

}  // namespace detail

/// Paired test of E_gamma[w psi(Phi_t u) f(t, u)] = E_gamma[w psi(u)], w the cut-off weight and
/// f(t, u) = exp(W(u) - W(Phi_t u)); exact at finite N.
inline std::vector<VerdictReport> quasi_invariance_test_bbm(const GaussianSpec& gspec, const CutoffSpec& cspec,
                                                            const std::vector<TestFunction>& psis, double t,
                                                            const BbmParams& p, const MonteCarloOptions& opt) {
  if (gspec.model != Model::bbm) {
    throw std::invalid_argument("quasi_invariance_test_bbm: needs the BBM Gaussian measure");
  }
  BbmDensityModel model{p, gspec.s, cspec.r};
  model.params.beta = gspec.beta;
  model.params.N = cspec.N;
  const auto samples = detail::quasi_samples(gspec, model, psis, t, opt, [&](const TorusField& u) {
    return log_weight_bbm(u, cspec, gspec.s, gspec.beta);
  });
  const nlohmann::json params{{"beta", gspec.beta}, {"s", gspec.s},   {"r", cspec.r},
                              {"R", detail::extended_real(cspec.R)},   {"N", cspec.N},
                              {"n_samp", gspec.n_samp}, {"t", t},      {"dt", p.dt},
                              {"integrator", to_string(p.integrator)}, {"proven_range", model.proven_range()}};
  return detail::paired_reports("quasi_invariance_bbm", psis, samples, opt, params);
}

inline std::vector<VerdictReport> quasi_invariance_test_nls(const GaussianSpec& gspec, const CutoffSpec& cspec,
                                                            const ModifiedEnergy& corr,
                                                            const std::vector<TestFunction>& psis, double t,
                                                            const NlsParams& p, const MonteCarloOptions& opt) {
  if (gspec.model != Model::nls) {
    throw std::invalid_argument("quasi_invariance_test_nls: needs the NLS Gaussian measure");
  }
  NlsDensityModel model{p, gspec.k, cspec.r, corr};
  model.params.N = cspec.N;
  model.params.k = gspec.k;
  const auto samples = detail::quasi_samples(gspec, model, psis, t, opt, [&](const TorusField& u) {
    return log_weight_nls(u, cspec, gspec.k, corr);
  });
  const nlohmann::json params{{"k", gspec.k},
                              {"r", cspec.r},
                              {"R", detail::extended_real(cspec.R)},
                              {"N", cspec.N},
                              {"n_samp", gspec.n_samp},
                              {"constraint", cspec.nls_constraint_full_field ? "full_field" : "projected"},
                              {"correction", corr.name},
                              {"t", t},
                              {"dt", p.dt},
                              {"integrator", to_string(p.integrator)}};
  return detail::paired_reports("quasi_invariance_nls", psis, samples, opt, params);
}

struct LpEstimate {
  double estimate = 0.0;
  double log_estimate = 0.0;
  double se = 0.0;
  double relative_se = 0.0;
  double ess = 0.0;
  double integrand_ess = 0.0;
  double p = 1.0;
  double t = 0.0;
};

namespace detail {
template <class DensityModel>
LpEstimate density_lp_core(const WeightedEnsemble& ens, double t, double p, const DensityModel& model,
                           unsigned threads) {
  if (!(p >= 1.0)) {
    throw std::invalid_argument("density_lp_estimate: p must be >= 1");
  }
  std::vector<double> log_values(ens.size(), 0.0);
  parallel_for(ens.size(), threads, [&](std::size_t i) {
    if (ens.log_weights[i] == kRejected) {
      return;
    }
    log_values[i] = p * log_density(ens.samples[i], t, model);
  });
  LogWeightedMean lv;
  const WeightedMean m = self_normalized_mean_of_exp(ens.log_weights, log_values, &lv);
  if (m.ess < 10.0) {
    throw std::domain_error("density_lp_estimate: effective sample size below 10");
  }
  return {m.estimate, lv.log_estimate, m.se, lv.relative_se, m.ess, lv.integrand_ess, p, t};
}
}  // namespace detail

/// Self-normalized estimate of int f(t, u)^p d rho / int d rho for the BBM cut-off measure.
inline LpEstimate density_lp_estimate(const WeightedEnsemble& ens, double t, double p, const BbmParams& params,
                                      unsigned threads = 1) {
  BbmDensityModel model{params, ens.gspec.s, ens.cspec.r};
  model.params.beta = ens.gspec.beta;
  model.params.N = ens.cspec.N;
  return detail::density_lp_core(ens, t, p, model, threads);
}

/// NLS version; only times with |t| <= t_window are admitted.
inline LpEstimate density_lp_estimate(const WeightedEnsemble& ens, double t, double p, const NlsParams& params,
                                      const ModifiedEnergy& corr, double t_window = 0.25, unsigned threads = 1) {
  if (std::abs(t) > t_window) {
    throw std::domain_error("density_lp_estimate: |t| exceeds the configured NLS time window");
  }
  NlsDensityModel model{params, ens.gspec.k, ens.cspec.r, corr};
  model.params.N = ens.cspec.N;
  model.params.k = ens.gspec.k;
  return detail::density_lp_core(ens, t, p, model, threads);
}

namespace detail {

/// Sum over the real coordinates of E_N of fourth-order centered differences of the matching
/// velocity component.
template <class Rhs>
double divergence_fd(const TorusField& head, Rhs rhs, double h) {
  const int n_max = head.n_max();
  const int first = head.is_real() ? 0 : -n_max;
  const auto shifted = [&](int n, cplx e) {
    TorusField v = head;
    v.set(n, head[n] + e);
    return rhs(v)[n];
  };
  double acc = 0.0;
  for (int n = first; n <= n_max; ++n) {
    const int parts = head.is_real() && n == 0 ? 1 : 2;
    for (int part = 0; part < parts; ++part) {
      const cplx e = part == 0 ? cplx{h, 0.0} : cplx{0.0, h};
      const cplx d = (8.0 * (shifted(n, e) - shifted(n, -e)) - (shifted(n, 2.0 * e) - shifted(n, -2.0 * e))) /
                     (12.0 * h);
      acc += part == 0 ? d.real() : d.imag();
    }
  }
  return acc;
}

}  // namespace detail

/// |div| of the truncated BBM vector field on E_N at P_N u (exactly 0 by the Liouville property).
inline double jacobian_divergence_check(const TorusField& u, const BbmParams& p, double h = 1e-2) {
  const TorusField head = project(u, p.N).with_band(std::min(p.N, u.n_max()));
  return std::abs(detail::divergence_fd(head, [&](const TorusField& v) { return bbm_rhs(v, p); }, h));
}

inline double jacobian_divergence_check(const TorusField& u, const NlsParams& p, double h = 1e-2) {
  const TorusField head = project(u, p.N).with_band(std::min(p.N, u.n_max()));
  return std::abs(detail::divergence_fd(head, [&](const TorusField& v) { return nls_rhs(v, p); }, h));
}

struct RecurrencePoint {
  double t = 0.0;
  double distance = 0.0;
  double running_min = std::numeric_limits<double>::quiet_NaN();  ///< NaN inside the exclusion window
};

/// Distance ||Phi_t u0 - u0||_{C^alpha} (Besov-type proxy) at probe times, with its running minimum after t >= exclusion.
inline std::vector<RecurrencePoint> recurrence_experiment(const TorusField& u0, double alpha, const BbmParams& p,
                                                          double horizon, double probe_stride,
                                                          double exclusion = 1.0) {
  if (!(alpha > 0.0) || !(alpha < (p.beta - 1.0) / 2.0)) {
    throw std::invalid_argument("recurrence_experiment: alpha must lie in (0, (beta - 1) / 2)");
  }
  if (!(probe_stride > 0.0) || !(horizon >= 0.0)) {
    throw std::invalid_argument("recurrence_experiment: need probe_stride > 0 and horizon >= 0");
  }
  const int store_every = std::max(1, static_cast<int>(std::lround(probe_stride / p.dt)));
  const Trajectory traj = integrate_bbm(u0, p, horizon, store_every);
  std::vector<RecurrencePoint> out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    RecurrencePoint pt;
    pt.t = traj.times[i];
    pt.distance = besov_proxy_norm(traj.states[i] - u0, alpha);
    if (pt.t >= exclusion) {
      best = std::min(best, pt.distance);
      pt.running_min = best;
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace qinv

#endif
