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

#ifndef QINV_MEASURES_HPP
#define QINV_MEASURES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qinv/nls.hpp"
#include "qinv/parallel.hpp"
#include "qinv/rng.hpp"
#include "qinv/spectral.hpp"

/**
 * \file
 * \brief Gaussian measures gamma_s (BBM) and gamma_{2k} (NLS), importance weights of the cut-off
 * measures rho_{s,N} and mu_{2k,N}, and weighted Monte Carlo utilities.
 *
 * The weighted measures are never sampled directly: samples come from the Gaussian measure and
 * carry log-weights, with -infinity standing for the rigid cut-off indicator.
 */

namespace qinv {

enum class Model { bbm, nls };

inline std::string to_string(Model m) { return m == Model::bbm ? "bbm" : "nls"; }

inline Model model_from_string(const std::string& name) {
  if (name == "bbm") {
    return Model::bbm;
  }
  if (name == "nls") {
    return Model::nls;
  }
  throw std::invalid_argument("unknown model '" + name + "'");
}

/// Parameters of gamma_s (covariance (1 + |n|^{2s+beta})^{-1}) or gamma_{2k} ((1 + |n|^{4k})^{-1}).
struct GaussianSpec {
  Model model = Model::bbm;
  double s = 0.0;
  int k = 2;
  double beta = 1.5;
  int n_samp = 32;

  void validate() const {
    if (n_samp < 0) {
      throw std::invalid_argument("GaussianSpec: n_samp must be >= 0");
    }
    if (model == Model::bbm) {
      if (!(beta > 1.0)) {
        throw std::invalid_argument("GaussianSpec: beta must be > 1");
      }
      if (!(s >= 0.0)) {
        throw std::invalid_argument("GaussianSpec: s must be >= 0");
      }
    } else if (k < 2) {
      throw std::invalid_argument("GaussianSpec: k must be >= 2");
    }
  }

  /// Variance scale (1 + |n|^{2s+beta})^{-1} or (1 + |n|^{4k})^{-1} of mode n.
  [[nodiscard]] double covariance(int n) const {
    const double exponent = model == Model::bbm ? 2.0 * s + beta : 4.0 * k;
    return 1.0 / (1.0 + std::pow(std::abs(n), exponent));
  }
};

/// Cut-off parameters: exponent r, rigid level R (may be +infinity) and weight truncation N.
struct CutoffSpec {
  double r = 3.0;
  double R = 3.0;
  int N = 8;
  /// NLS only: evaluate ||u||_{L^2} + E_1(u) on the full sampled field instead of on P_N u.
  bool nls_constraint_full_field = false;

  void validate() const {
    if (!(R > 0.0)) {
      throw std::invalid_argument("CutoffSpec: R must be > 0");
    }
    if (!(r > 0.0)) {
      throw std::invalid_argument("CutoffSpec: r must be > 0");
    }
    if (N < 0) {
      throw std::invalid_argument("CutoffSpec: N must be >= 0");
    }
  }
};

/// Draws the (seed, index) sample of the Gaussian measure on modes |n| <= n_samp.
/**
 * BBM (real): c_0 = g_0 and, for n > 0, c_n = (h_n + i l_n) / sqrt(2) scaled by the covariance
 * square root, with c_{-n} = conj(c_n); h, l, g_0 standard normals. NLS (complex): c_n = g_n scaled,
 * g_n with independent N(0, 1) real and imaginary parts, so that gamma_{2k} restricted to the
 * retained modes has density proportional to exp(-1/2 ||P_N u||^2_{H^{2k}}).
 */
inline TorusField sample_gamma(const GaussianSpec& spec, std::uint64_t seed, std::uint64_t index) {
  spec.validate();
  CounterRng rng{seed, index};
  std::normal_distribution<double> normal{0.0, 1.0};
  if (spec.model == Model::bbm) {
    TorusField u{spec.n_samp, Reality::real};
    u.set(0, normal(rng) * std::sqrt(spec.covariance(0)));
    for (int n = 1; n <= spec.n_samp; ++n) {
      const double h = normal(rng);
      const double l = normal(rng);
      u.set(n, cplx{h, l} * std::sqrt(0.5 * spec.covariance(n)));
    }
    return u;
  }
  TorusField u{spec.n_samp, Reality::complex};
  for (int n = -spec.n_samp; n <= spec.n_samp; ++n) {
    const double re = normal(rng);
    const double im = normal(rng);
    u.set(n, cplx{re, im} * std::sqrt(spec.covariance(n)));
  }
  return u;
}

inline constexpr double kRejected = -std::numeric_limits<double>::infinity();

/// log of 1{||u||_{H^{beta/2}} <= R} exp(-||P_N u||^{2r}_{H^s}); the indicator uses the full field.
inline double log_weight_bbm(const TorusField& u, const CutoffSpec& c, double s, double beta) {
  if (sobolev_norm(u, beta / 2.0) > c.R) {
    return kRejected;
  }
  return -std::pow(sobolev_norm(project(u, c.N), s), 2.0 * c.r);
}

/// ||u||_{L^2} + E_1(u), the quantity bounded by the rigid NLS cut-off.
inline double nls_constraint_value(const TorusField& u) { return mass(u) + energy_e1(u); }

/// log of 1{constraint <= R} exp(-R_{2k}(P_N u) - ||P_N u||^{2r}_{H^{2k-1}}).
inline double log_weight_nls(const TorusField& u, const CutoffSpec& c, int k, const ModifiedEnergy& correction) {
  const TorusField pu = project(u, c.N).with_band(std::min(c.N, u.n_max()));
  const double constraint = c.nls_constraint_full_field ? nls_constraint_value(u) : nls_constraint_value(pu);
  if (constraint > c.R) {
    return kRejected;
  }
  return -correction.eval(pu) - std::pow(sobolev_norm(pu, 2.0 * k - 1.0), 2.0 * c.r);
}

/// Gaussian samples with the log-weights of the cut-off measure.
struct WeightedEnsemble {
  std::vector<TorusField> samples;
  std::vector<double> log_weights;
  std::uint64_t seed = 0;
  GaussianSpec gspec;
  CutoffSpec cspec;

  [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
};

inline double log_weight(const TorusField& u, const GaussianSpec& g, const CutoffSpec& c,
                         const ModifiedEnergy& correction) {
  return g.model == Model::bbm ? log_weight_bbm(u, c, g.s, g.beta) : log_weight_nls(u, c, g.k, correction);
}

/// `count` samples (seed, 0..count-1) with their log-weights.
inline WeightedEnsemble ensemble_sample(const GaussianSpec& gspec, const CutoffSpec& cspec, std::size_t count,
                                        std::uint64_t seed, const ModifiedEnergy& correction = ModifiedEnergy::zero(),
                                        unsigned threads = 1) {
  if (count < 1) {
    throw std::invalid_argument("ensemble_sample: count must be >= 1");
  }
  gspec.validate();
  cspec.validate();
  WeightedEnsemble ens{std::vector<TorusField>(count), std::vector<double>(count), seed, gspec, cspec};
  parallel_for(count, threads, [&](std::size_t i) {
    ens.samples[i] = sample_gamma(gspec, seed, i);
    ens.log_weights[i] = log_weight(ens.samples[i], gspec, cspec, correction);
  });
  return ens;
}

// ---------------------------------------------------------------------------------------------
// Weighted estimators

struct WeightedMean {
  double estimate = 0.0;
  double se = 0.0;
  double ess = 0.0;  ///< effective sample size (sum w)^2 / sum w^2
};

/// Self-normalized importance estimate sum w x / sum w with its delta-method standard error.
inline WeightedMean self_normalized_mean(std::span<const double> log_weights, std::span<const double> values) {
  if (log_weights.size() != values.size()) {
    throw std::invalid_argument("self_normalized_mean: size mismatch");
  }
  double top = kRejected;
  for (double lw : log_weights) {
    top = std::max(top, lw);
  }
  if (!std::isfinite(top)) {
    throw std::domain_error("self_normalized_mean: every sample is rejected");
  }
  const std::size_t n = values.size();
  std::vector<double> w(n);
  std::vector<double> wx(n);
  std::vector<double> w2(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(log_weights[i] - top);
    wx[i] = w[i] * values[i];
    w2[i] = w[i] * w[i];
  }
  const double sw = pairwise_sum(w);
  WeightedMean out;
  out.estimate = pairwise_sum(wx) / sw;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = values[i] - out.estimate;
    wx[i] = w2[i] * d * d;
  }
  out.se = std::sqrt(pairwise_sum(wx)) / sw;
  out.ess = sw * sw / pairwise_sum(w2);
  return out;
}

/// Log-space view of a self-normalized estimate whose value may exceed the double range.
struct LogWeightedMean {
  double log_estimate = 0.0;
  double relative_se = 0.0;    ///< se / estimate
  double integrand_ess = 0.0;  ///< (sum w x)^2 / sum (w x)^2, the number of samples carrying the estimate
};

/// Self-normalized estimate of sum w exp(l) / sum w evaluated in log space, for values exp(l)
/// whose magnitudes would overflow.
inline WeightedMean self_normalized_mean_of_exp(std::span<const double> log_weights,
                                                std::span<const double> log_values, LogWeightedMean* log_view = nullptr) {
  if (log_weights.size() != log_values.size()) {
    throw std::invalid_argument("self_normalized_mean_of_exp: size mismatch");
  }
  const std::size_t n = log_values.size();
  double top = kRejected;
  double ztop = kRejected;
  std::vector<double> z(n, kRejected);
  for (std::size_t i = 0; i < n; ++i) {
    top = std::max(top, log_weights[i]);
    if (log_weights[i] != kRejected) {
      z[i] = log_weights[i] + log_values[i];
      ztop = std::max(ztop, z[i]);
    }
  }
  if (!std::isfinite(top)) {
    throw std::domain_error("self_normalized_mean_of_exp: every sample is rejected");
  }
  std::vector<double> w(n);
  std::vector<double> w2(n);
  std::vector<double> wx(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(log_weights[i] - top);
    w2[i] = w[i] * w[i];
    wx[i] = std::exp(z[i] - ztop);
  }
  const double sw = pairwise_sum(w);
  const double swx = pairwise_sum(wx);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    sq[i] = wx[i] * wx[i];
  }
  const double integrand_ess = swx * swx / pairwise_sum(sq);
  const double log_est = (std::log(swx) - std::log(sw)) + (ztop - top);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::exp(z[i] - top - log_est) - w[i];
    sq[i] = d * d;
  }
  const double relative_se = std::sqrt(pairwise_sum(sq)) / sw;
  WeightedMean out;
  out.estimate = std::exp(log_est);
  out.se = out.estimate * relative_se;
  out.ess = sw * sw / pairwise_sum(w2);
  if (log_view != nullptr) {
    *log_view = {log_est, relative_se, integrand_ess};
  }
  return out;
}

/// Mean and standard error of plain i.i.d. values.
inline WeightedMean plain_mean(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  WeightedMean out;
  out.estimate = pairwise_sum(values) / n;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    sq[i] = (values[i] - out.estimate) * (values[i] - out.estimate);
  }
  out.se = values.size() > 1 ? std::sqrt(pairwise_sum(sq) / (n - 1.0) / n) : 0.0;
  out.ess = n;
  return out;
}

// ---------------------------------------------------------------------------------------------
// Tails

struct TailPoint {
  double t = 0.0;
  double survival = 0.0;
  double se = 0.0;
};

struct TailCurve {
  std::vector<TailPoint> points;
  double a = 0.0;  ///< 2 r kappa (2s - beta) / (2 varsigma - beta)
  double b = 0.0;  ///< 4 r (s - beta) / (2 varsigma - beta)

  /// Least-squares slope of log(survival) against t^a over the points with positive survival.
  [[nodiscard]] double log_survival_slope() const {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& p : points) {
      if (p.survival > 0.0) {
        x.push_back(std::pow(p.t, a));
        y.push_back(std::log(p.survival));
      }
    }
    if (x.size() < 2) {
      throw std::domain_error("log_survival_slope: fewer than two positive survival estimates");
    }
    const double n = static_cast<double>(x.size());
    const double mx = pairwise_sum(x) / n;
    const double my = pairwise_sum(y) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
  }
};

/// Weighted estimates of rho(||P_N u||_{H^varsigma} >= t^kappa) over increasing thresholds t.
inline TailCurve tail_survival(const WeightedEnsemble& ens, double varsigma, double kappa, int N,
                               std::span<const double> thresholds) {
  const double beta = ens.gspec.beta;
  if (2.0 * varsigma == beta) {
    throw std::invalid_argument("tail_survival: 2 varsigma = beta makes the exponents degenerate");
  }
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw std::invalid_argument("tail_survival: thresholds must be increasing");
  }
  const double r = ens.cspec.r;
  const double s = ens.gspec.s;
  TailCurve curve;
  curve.a = 2.0 * r * kappa * (2.0 * s - beta) / (2.0 * varsigma - beta);
  curve.b = 4.0 * r * (s - beta) / (2.0 * varsigma - beta);
  std::vector<double> norms(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) {
    norms[i] = sobolev_norm(project(ens.samples[i], N), varsigma);
  }
  std::vector<double> indicator(ens.size());
  for (double t : thresholds) {
    const double level = std::pow(t, kappa);
    for (std::size_t i = 0; i < ens.size(); ++i) {
      indicator[i] = norms[i] >= level ? 1.0 : 0.0;
    }
    const auto m = self_normalized_mean(ens.log_weights, indicator);
    curve.points.push_back({t, m.estimate, m.se});
  }
  return curve;
}

/// sup_{x >= 0} x^a exp(-x^{2r} / p) = (a p / (2r))^{a/(2r)} e^{-a/(2r)} (1 when a = 0).
inline double sup_moment(double a, double r, double p) {
  if (a < 0.0 || !(r > 0.0) || !(p >= 1.0)) {
    throw std::invalid_argument("sup_moment: need a >= 0, r > 0, p >= 1");
  }
  if (a == 0.0) {
    return 1.0;
  }
  const double q = a / (2.0 * r);
  return std::pow(q * p, q) * std::exp(-q);
}

// ---------------------------------------------------------------------------------------------
// JSON

inline void to_json(nlohmann::json& j, const GaussianSpec& g) {
  j = {{"model", to_string(g.model)}, {"s", g.s}, {"k", g.k}, {"beta", g.beta}, {"n_samp", g.n_samp}};
}
inline void from_json(const nlohmann::json& j, GaussianSpec& g) {
  g.model = model_from_string(j.at("model").get<std::string>());
  g.s = j.at("s").get<double>();
  g.k = j.at("k").get<int>();
  g.beta = j.at("beta").get<double>();
  g.n_samp = j.at("n_samp").get<int>();
}

namespace detail {
inline nlohmann::json extended_real(double v) {
  if (std::isfinite(v)) {
    return v;
  }
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}
inline double extended_real(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") {
      return std::numeric_limits<double>::infinity();
    }
    if (s == "-inf") {
      return -std::numeric_limits<double>::infinity();
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}
}  // namespace detail

inline void to_json(nlohmann::json& j, const CutoffSpec& c) {
  j = {{"r", c.r}, {"R", detail::extended_real(c.R)}, {"N", c.N}, {"nls_constraint_full_field", c.nls_constraint_full_field}};
}
inline void from_json(const nlohmann::json& j, CutoffSpec& c) {
  c.r = j.at("r").get<double>();
  c.R = detail::extended_real(j.at("R"));
  c.N = j.at("N").get<int>();
  c.nls_constraint_full_field = j.value("nls_constraint_full_field", false);
}

/// One JSON object per line: {index, seed, log_weight, gaussian, cutoff, sample}; -inf is written as "-inf".
inline void write_ensemble_jsonl(std::ostream& os, const WeightedEnsemble& ens) {
  for (std::size_t i = 0; i < ens.size(); ++i) {
    nlohmann::json line{{"index", i},
                        {"seed", ens.seed},
                        {"log_weight", detail::extended_real(ens.log_weights[i])},
                        {"gaussian", ens.gspec},
                        {"cutoff", ens.cspec},
                        {"sample", ens.samples[i]}};
    os << line.dump() << '\n';
  }
}

inline WeightedEnsemble read_ensemble_jsonl(std::istream& is) {
  WeightedEnsemble ens;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) {
      continue;
    }
    const auto j = nlohmann::json::parse(line);
    if (j.at("index").get<std::size_t>() != ens.size()) {
      throw std::runtime_error("read_ensemble_jsonl: indices out of order");
    }
    ens.seed = j.at("seed").get<std::uint64_t>();
    ens.gspec = j.at("gaussian").get<GaussianSpec>();
    ens.cspec = j.at("cutoff").get<CutoffSpec>();
    ens.log_weights.push_back(detail::extended_real(j.at("log_weight")));
    ens.samples.push_back(j.at("sample").get<TorusField>());
  }
  return ens;
}

}  // namespace qinv

#endif
