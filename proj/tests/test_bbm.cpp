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

#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qinv/bbm.hpp"
#include "qinv/measures.hpp"

namespace {

using qinv::cplx;
using qinv::Reality;
using qinv::TorusField;

TorusField cos_x(int n_max) {
  TorusField u{n_max, Reality::real};
  u.set(1, 0.5);
  return u;
}

TorusField smooth_sample(int n_max, std::uint64_t index, double s = 2.0) {
  qinv::GaussianSpec g;
  g.s = s;
  g.n_samp = n_max;
  return qinv::sample_gamma(g, 17, index);
}

qinv::BbmParams params(int N, double dt = 1e-3, double beta = 1.5) {
  qinv::BbmParams p;
  p.N = N;
  p.dt = dt;
  p.beta = beta;
  return p;
}

TEST(BbmRhs, ZeroAndConstantGiveZero) {
  EXPECT_EQ(qinv::bbm_rhs(TorusField{6, Reality::real}, params(4)).max_abs(), 0.0);
  TorusField c{6, Reality::real};
  c.set(0, 1.7);
  EXPECT_EQ(qinv::bbm_rhs(c, params(4)).max_abs(), 0.0);
}

TEST(BbmRhs, CosineMatchesHandConvolution) {
  const double beta = 2.0;
  const auto rhs = qinv::bbm_rhs(cos_x(4), params(2, 1e-3, beta));
  const double w1 = 1.0 / (1.0 + 1.0);
  const double w2 = 2.0 / (1.0 + std::pow(2.0, beta));
  EXPECT_NEAR(std::abs(rhs[1] - cplx{0.0, -w1 * 0.5}), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(rhs[2] - cplx{0.0, -w2 * 0.25}), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(rhs[-2] - cplx{0.0, w2 * 0.25}), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(rhs[0]), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(rhs[3]), 0.0, 1e-15);
}

TEST(BbmRhs, TailModesReceiveOnlyTheLinearTerm) {
  const auto u = oracle::random_field(10, Reality::real, 4, 1.0);
  const auto p = params(3, 1e-3, 1.7);
  const auto rhs = qinv::bbm_rhs(u, p);
  for (int n = 4; n <= 10; ++n) {
    const cplx linear = cplx{0.0, -qinv::bbm_frequency(n, p.beta)} * u[n];
    EXPECT_NEAR(std::abs(rhs[n] - linear), 0.0, 1e-15);
  }
  EXPECT_TRUE(rhs.is_real());
}

TEST(BbmRhs, ComplexInputRejected) {
  EXPECT_THROW(qinv::integrate_bbm(oracle::random_field(3, Reality::complex, 1), params(3), 0.1), std::invalid_argument);
}

TEST(IntegrateBbm, LinearFlowMatchesClosedForm) {
  auto p = params(8, 1e-3);
  p.nonlinearity_enabled = false;
  const auto u0 = oracle::random_field(8, Reality::real, 12, 1.0);
  const auto u1 = qinv::flow_bbm(u0, p, 1.0).state;
  for (int n = -8; n <= 8; ++n) {
    const cplx expected = std::polar(1.0, -qinv::bbm_frequency(n, p.beta)) * u0[n];
    EXPECT_NEAR(std::abs(u1[n] - expected), 0.0, 1e-10);
  }
}

TEST(IntegrateBbm, HbetaDriftSmallAtN32) {
  const auto u0 = smooth_sample(32, 0, 0.0);
  const auto f = qinv::flow_bbm(u0, params(32, 1e-3), 1.0);
  EXPECT_LE(f.max_relative_drift.at(0), 1e-8);
  EXPECT_NEAR(qinv::sobolev_norm(qinv::project(f.state, 32), 0.75), qinv::sobolev_norm(u0, 0.75),
              1e-8 * qinv::sobolev_norm(u0, 0.75));
}

TEST(IntegrateBbm, Rk4ConvergesAtFourthOrder) {
  auto u0 = smooth_sample(8, 1, 0.0);
  u0 *= 3.0;
  const double t = 2.0;
  const auto reference = qinv::flow_bbm(u0, params(8, 0.2 / 8), t).state;
  const double e1 = qinv::sobolev_norm(qinv::flow_bbm(u0, params(8, 0.2), t).state - reference, 0.0);
  const double e2 = qinv::sobolev_norm(qinv::flow_bbm(u0, params(8, 0.1), t).state - reference, 0.0);
  const double factor = e1 / e2;
  EXPECT_GT(factor, 12.0);
  EXPECT_LT(factor, 20.0);
}

TEST(IntegrateBbm, TailModuliPreserved) {
  const auto u0 = smooth_sample(24, 2, 0.5);
  const auto u1 = qinv::flow_bbm(u0, params(8), 0.7).state;
  for (int n = 9; n <= 24; ++n) {
    EXPECT_NEAR(std::abs(u1[n]), std::abs(u0[n]), 1e-12);
  }
}

TEST(IntegrateBbm, TimeReversible) {
  const auto u0 = smooth_sample(16, 3);
  const auto p = params(16);
  const auto there = qinv::flow_bbm(u0, p, 0.5).state;
  const auto back = qinv::flow_bbm(there, p, -0.5).state;
  EXPECT_LE(qinv::sobolev_norm(back - u0, 2.0), 1e-7);
}

TEST(IntegrateBbm, GroupProperty) {
  const auto u0 = smooth_sample(16, 4);
  const auto p = params(16);
  const auto whole = qinv::flow_bbm(u0, p, 0.5).state;
  const auto split = qinv::flow_bbm(qinv::flow_bbm(u0, p, 0.2).state, p, 0.3).state;
  EXPECT_LE(qinv::sobolev_norm(whole - split, 2.0), 1e-7);
}

TEST(IntegrateBbm, MidpointConservesQuadraticInvariantTightly) {
  auto p = params(8, 1e-2);
  p.integrator = qinv::Integrator::implicit_midpoint;
  const auto u0 = smooth_sample(8, 5, 0.0);
  const auto f = qinv::flow_bbm(u0, p, 1.0);
  EXPECT_LE(f.max_relative_drift.at(0), 1e-11);
}

TEST(IntegrateBbm, PreservesReality) {
  const auto u1 = qinv::flow_bbm(smooth_sample(12, 6), params(6), 0.3).state;
  EXPECT_TRUE(u1.is_real());
  EXPECT_EQ(u1[0].imag(), 0.0);
  for (int n = 1; n <= 12; ++n) {
    EXPECT_EQ(u1[-n], std::conj(u1[n]));
  }
}

TEST(SkewAdjointness, LinearGeneratorIsSkewInHbeta2) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto v = oracle::random_field(20, Reality::real, seed);
    const auto lv = qinv::apply_multiplier(qinv::multipliers::l_beta(1.5), v);
    EXPECT_LE(std::abs(qinv::hsigma_inner(v, lv, 0.75)), 1e-12 * qinv::sobolev_norm_sq(v, 0.75));
  }
}

TEST(Duhamel, ZeroDatumConvergesImmediately) {
  const auto r = qinv::duhamel_local_solve(TorusField{8, Reality::real}, params(8), 0.1, 1e-12, 50);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.state.max_abs(), 0.0);
}

TEST(Duhamel, AgreesWithIntegrator) {
  const auto u0 = smooth_sample(8, 7);
  const auto p = params(8, 1e-3);
  const double T = 0.1;
  const auto d = qinv::duhamel_local_solve(u0, p, T, 1e-13, 100, 0.2, 1024);
  const auto i = qinv::flow_bbm(u0, p, T).state;
  EXPECT_LE(qinv::sobolev_norm(d.state - i, 2.0), 1e-6);
  EXPECT_LT(d.contraction_factor, 1.0);
}

TEST(Duhamel, TrapezoidErrorIsSecondOrder) {
  const auto u0 = smooth_sample(8, 7);
  const auto p = params(8, 1e-3);
  const double T = 0.2;
  const auto exact = qinv::flow_bbm(u0, p, T).state;
  const double e64 = qinv::sobolev_norm(qinv::duhamel_local_solve(u0, p, T, 1e-13, 100, 0.2, 64).state - exact, 2.0);
  const double e128 = qinv::sobolev_norm(qinv::duhamel_local_solve(u0, p, T, 1e-13, 100, 0.2, 128).state - exact, 2.0);
  EXPECT_NEAR(e64 / e128, 4.0, 0.4);
}

TEST(Duhamel, DivergesFarOutsideContractionWindow) {
  auto u0 = smooth_sample(8, 8, 0.0);
  u0 *= 50.0;
  EXPECT_THROW(qinv::duhamel_local_solve(u0, params(8), 20.0, 1e-12, 30), qinv::DuhamelError);
}

TEST(Duhamel, CalibratedWindowContractsOnRandomData) {
  const double alpha = 0.2;
  const double k_max = 5.0;
  const auto p = params(8);
  std::vector<TorusField> calibration;
  for (std::uint64_t i = 1000; calibration.size() < 20; ++i) {
    auto u = smooth_sample(8, i);
    if (qinv::besov_proxy_norm(u, alpha) <= k_max) {
      calibration.push_back(std::move(u));
    }
  }
  const double c_cal = qinv::calibrate_duhamel_constant(calibration, p, alpha);
  ASSERT_GT(c_cal, 0.0);
  int tested = 0;
  for (std::uint64_t i = 0; tested < 20; ++i) {
    const auto u0 = smooth_sample(8, 200 + i);
    const double K = qinv::besov_proxy_norm(u0, alpha);
    if (K > k_max) {
      continue;
    }
    ++tested;
    const auto r = qinv::duhamel_local_solve(u0, p, c_cal / (1.0 + K), 1e-12, 200, alpha);
    EXPECT_LE(r.contraction_factor, 0.5);
  }
}

TEST(FlowCompare, IdenticalTruncationsAgree) {
  const auto u0 = smooth_sample(16, 9);
  const std::vector<qinv::NormSpec> norms{{qinv::NormSpec::Kind::sobolev, 1.0}, {qinv::NormSpec::Kind::holder, 0.3}};
  for (const auto& e : qinv::flow_compare(u0, 8, 8, params(8), 0.5, norms)) {
    EXPECT_EQ(e.value, 0.0);
  }
  for (const auto& e : qinv::flow_compare(u0, 4, 16, params(8), 0.0, norms)) {
    EXPECT_EQ(e.value, 0.0);
  }
}

TEST(FlowCompare, ErrorsDecreaseWithTruncation) {
  const auto u0 = smooth_sample(64, 10, 1.0);
  const std::vector<qinv::NormSpec> norms{{qinv::NormSpec::Kind::sobolev, 0.5}};
  double previous = std::numeric_limits<double>::infinity();
  for (int N : {4, 8, 16}) {
    const double e = qinv::flow_compare(u0, N, 64, params(N, 1e-2), 0.5, norms).front().value;
    EXPECT_LE(e, previous);
    previous = e;
  }
}

TEST(FlowCompare, RejectsBadOrdering) {
  EXPECT_THROW(qinv::flow_compare(smooth_sample(8, 0), 8, 4, params(4), 0.1, {}), std::invalid_argument);
  EXPECT_THROW(qinv::flow_compare(smooth_sample(8, 0), 4, 16, params(4), 0.1, {}), std::invalid_argument);
}

TEST(GrowthDiagnostics, LinearFlowHasZeroDerivatives) {
  auto p = params(8, 1e-2);
  p.nonlinearity_enabled = false;
  const auto traj = qinv::integrate_bbm(smooth_sample(8, 11), p, 0.2, 5);
  const auto d = qinv::bbm_growth_diagnostics(traj, p, 1.25, 0.2, 2.0);
  ASSERT_EQ(d.series.size(), 4u);
  for (const auto& s : d.series) {
    for (double v : s.derivative) {
      EXPECT_NEAR(v, 0.0, 1e-13);
    }
    EXPECT_LE(s.max_ratio, 1e-12);
  }
}

TEST(GrowthDiagnostics, AnalyticDerivativeMatchesFiniteDifference) {
  const auto p = params(8, 1e-3);
  auto u0 = smooth_sample(8, 12, 0.0);
  u0 *= 2.0;
  const double sigma = 1.25;
  const auto traj = qinv::integrate_bbm(u0, p, 0.2, 1);
  const auto d = qinv::bbm_growth_diagnostics(traj, p, sigma, 0.2, 2.0);
  const auto& sub = d.get("sub_quadratic");
  double scale = 0.0;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < traj.states.size(); ++i) {
    const double fd = (qinv::sobolev_norm_sq(traj.states[i + 1], sigma) - qinv::sobolev_norm_sq(traj.states[i - 1], sigma)) /
                      (traj.times[i + 1] - traj.times[i - 1]);
    worst = std::max(worst, std::abs(fd - sub.derivative[i]));
    scale = std::max(scale, std::abs(sub.derivative[i]));
  }
  EXPECT_LE(worst, 1e-4 * std::max(scale, 1.0));
}

TEST(GrowthDiagnostics, RatiosFiniteOnEnsemble) {
  const auto p = params(8, 1e-2);
  double constant = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto traj = qinv::integrate_bbm(smooth_sample(8, 300 + i, 0.0), p, 0.5, 10);
    const auto d = qinv::bbm_growth_diagnostics(traj, p, 1.25, 0.2, 2.0);
    const double m = d.get("sub_quadratic").max_ratio;
    ASSERT_TRUE(std::isfinite(m));
    constant = std::max(constant, m);
  }
  RecordProperty("sub_quadratic_constant", std::to_string(constant));
  EXPECT_TRUE(std::isfinite(constant));
}

TEST(GrowthDiagnostics, RestrictionViolationsThrow) {
  const auto p = params(8, 1e-2);
  const auto traj = qinv::integrate_bbm(smooth_sample(8, 13), p, 0.05, 5);
  EXPECT_THROW(qinv::bbm_growth_diagnostics(traj, p, 1.25, 0.6, 2.0), std::invalid_argument);
  EXPECT_THROW(qinv::bbm_growth_diagnostics(traj, p, 0.8, 0.2, 2.0), std::invalid_argument);
  EXPECT_THROW(qinv::bbm_growth_diagnostics(traj, p, 1.25, 0.0, 2.0), std::invalid_argument);
}

TEST(BbmParams, Validation) {
  EXPECT_THROW(params(8, 1e-3, 1.0).validate(), std::invalid_argument);
  EXPECT_THROW(params(8, 0.0).validate(), std::invalid_argument);
  EXPECT_NO_THROW(params(8).validate());
}

}  // namespace
