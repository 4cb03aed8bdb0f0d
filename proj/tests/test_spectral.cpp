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
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qinv/spectral.hpp"

namespace {

using qinv::cplx;
using qinv::Reality;
using qinv::TorusField;

TorusField cos_x() {
  TorusField u{1, Reality::real};
  u.set(1, 0.5);
  return u;
}

TorusField sin_x() {
  TorusField u{1, Reality::real};
  u.set(1, cplx{0.0, -0.5});
  return u;
}

TorusField mode(int n, int n_max, cplx c = 1.0) {
  TorusField u{n_max, Reality::complex};
  u.set(n, c);
  return u;
}

bool hermitian(const TorusField& u) {
  if (u[0].imag() != 0.0) {
    return false;
  }
  for (int n = 1; n <= u.n_max(); ++n) {
    if (u[-n] != std::conj(u[n])) {
      return false;
    }
  }
  return true;
}

TEST(TorusField, RealFieldIsExactlyHermitian) {
  const auto u = oracle::random_field(6, Reality::real, 3);
  EXPECT_TRUE(hermitian(u));
  EXPECT_THROW((TorusField{1, Reality::real, {cplx{1, 0}, cplx{0, 0}, cplx{2, 0}}}), std::invalid_argument);
}

TEST(TorusField, OutOfBandCoefficientsAreZero) {
  const auto u = oracle::random_field(3, Reality::complex, 1);
  EXPECT_EQ(u[4], cplx{});
  EXPECT_EQ(u[-7], cplx{});
  TorusField v{2, Reality::complex};
  EXPECT_THROW(v.set(3, 1.0), std::out_of_range);
}

TEST(TorusField, ComplexScalingOfRealFieldThrows) {
  auto u = cos_x();
  EXPECT_THROW(u *= cplx(0.0, 1.0), std::invalid_argument);
}

TEST(SobolevNorm, Examples) {
  EXPECT_DOUBLE_EQ(qinv::sobolev_norm(cos_x(), 0.7), 1.0);
  EXPECT_DOUBLE_EQ(qinv::sobolev_norm(cos_x(), 3.0), 1.0);
  EXPECT_DOUBLE_EQ(qinv::sobolev_norm(TorusField{4, Reality::real}, 1.0), 0.0);
  EXPECT_NEAR(qinv::sobolev_norm(mode(2, 2), 1.0), std::sqrt(5.0), 1e-15);
}

TEST(SobolevNorm, ParsevalWeightAtSigmaZero) {
  const auto u = oracle::random_field(5, Reality::complex, 11);
  double sum = 0.0;
  for (int n = -5; n <= 5; ++n) {
    sum += std::norm(u[n]);
  }
  EXPECT_NEAR(qinv::sobolev_norm_sq(u, 0.0), 2.0 * sum, 1e-12 * sum);
}

TEST(SobolevNorm, ProjectionDoesNotIncreaseNorm) {
  const auto u = oracle::random_field(12, Reality::real, 5);
  for (double sigma : {0.0, 0.5, 1.0, 2.5}) {
    for (int N = 0; N <= 13; ++N) {
      EXPECT_LE(qinv::sobolev_norm(qinv::project(u, N), sigma), qinv::sobolev_norm(u, sigma));
    }
  }
}

TEST(HsigmaInner, Examples) {
  const auto u = oracle::random_field(7, Reality::complex, 2);
  EXPECT_NEAR(qinv::hsigma_inner(u, u, 1.3), qinv::sobolev_norm_sq(u, 1.3), 1e-12 * qinv::sobolev_norm_sq(u, 1.3));
  EXPECT_EQ(qinv::hsigma_inner(mode(1, 1), mode(1, 1, cplx{0.0, 1.0}), 2.0), 0.0);
  EXPECT_EQ(qinv::hsigma_inner(cos_x(), sin_x(), 1.0), 0.0);
  EXPECT_THROW(qinv::hsigma_inner(mode(1, 1), mode(1, 2), 1.0), std::invalid_argument);
}

TEST(HolderNorm, Constant) {
  TorusField c{0, Reality::real};
  c.set(0, -2.5);
  const auto h = qinv::holder_norm(c.with_band(4), 0.5, 64);
  EXPECT_NEAR(h.grid, 2.5, 1e-14);
  EXPECT_EQ(qinv::holder_norm(TorusField{4, Reality::real}, 0.5, 64).grid, 0.0);
}

TEST(HolderNorm, CosineMatchesDenseGridOracle) {
  const double oracle_value = oracle::dense_holder(cos_x(), 0.5, 1000);
  const auto h = qinv::holder_norm(cos_x(), 0.5, 256);
  EXPECT_NEAR(h.grid, oracle_value, 0.01 * oracle_value);
  EXPECT_GT(h.besov, 0.0);
}

TEST(HolderNorm, RejectsBadArguments) {
  EXPECT_THROW(qinv::holder_norm(cos_x(), 1.0, 64), std::invalid_argument);
  EXPECT_THROW(qinv::holder_norm(cos_x(), 0.0, 64), std::invalid_argument);
  EXPECT_THROW(qinv::holder_norm(cos_x().with_band(32), 0.5, 64), std::invalid_argument);
}

TEST(Project, Examples) {
  EXPECT_EQ(qinv::project(mode(3, 3), 2), (TorusField{3, Reality::complex}));
  EXPECT_EQ(qinv::project(cos_x(), 2), cos_x());
  const auto u = oracle::random_field(4, Reality::real, 8);
  const auto p0 = qinv::project(u, 0);
  EXPECT_EQ(p0[0], u[0]);
  for (int n = 1; n <= 4; ++n) {
    EXPECT_EQ(p0[n], cplx{});
  }
}

TEST(Project, IdempotentAndSelfAdjoint) {
  const auto u = oracle::random_field(9, Reality::complex, 21);
  const auto v = oracle::random_field(9, Reality::complex, 22);
  EXPECT_EQ(qinv::project(qinv::project(u, 4), 4), qinv::project(u, 4));
  EXPECT_NEAR(qinv::hsigma_inner(qinv::project(u, 4), v, 0.0), qinv::hsigma_inner(u, qinv::project(v, 4), 0.0), 1e-13);
}

TEST(LittlewoodPaley, Examples) {
  const auto e2 = mode(2, 2);
  EXPECT_EQ(qinv::lp_block(e2, 1), e2);
  EXPECT_EQ(qinv::lp_block(e2, 0), (TorusField{2, Reality::complex}));
}

TEST(LittlewoodPaley, BlocksSumToFieldAndAreDisjoint) {
  const auto u = oracle::random_field(13, Reality::real, 4);
  TorusField sum{13, Reality::real};
  for (int j = 0; j < qinv::lp_block_count(13); ++j) {
    sum += qinv::lp_block(u, j);
  }
  EXPECT_EQ(sum, u);
  for (int j = 1; j < 5; ++j) {
    for (int k = 1; k < 5; ++k) {
      if (j != k) {
        EXPECT_EQ(qinv::lp_block(qinv::lp_block(u, j), k), (TorusField{13, Reality::real}));
      }
    }
  }
}

TEST(Multipliers, Examples) {
  const auto e1 = mode(1, 3);
  EXPECT_EQ(qinv::apply_multiplier(qinv::multipliers::abs_derivative(1.7), e1), e1);
  const double beta = 1.5;
  for (int n = -3; n <= 3; ++n) {
    const auto out = qinv::apply_multiplier(qinv::multipliers::l_beta(beta), mode(n, 3));
    EXPECT_NEAR(std::abs(out[n] - cplx{0.0, n / (1.0 + std::pow(std::abs(n), beta))}), 0.0, 1e-15);
  }
  TorusField c{2, Reality::real};
  c.set(0, 3.0);
  EXPECT_EQ(qinv::apply_multiplier(qinv::multipliers::lambda(2.0), c), c);
  EXPECT_EQ(qinv::apply_multiplier(qinv::multipliers::abs_derivative(2.0), c), (TorusField{2, Reality::real}));
}

TEST(Multipliers, UndefinedSymbolThrows) {
  const qinv::Multiplier bad{[](int n) { return cplx{1.0 / n, 0.0}; }, qinv::SymbolParity::general};
  EXPECT_THROW(qinv::apply_multiplier(bad, cos_x()), std::domain_error);
}

TEST(Multipliers, ReflectionSymmetricSymbolsPreserveReality) {
  const auto u = oracle::random_field(6, Reality::real, 9);
  for (const auto& m : {qinv::multipliers::derivative(), qinv::multipliers::l_beta(1.5),
                        qinv::multipliers::lambda(0.75), qinv::multipliers::abs_derivative(1.5),
                        qinv::multipliers::compose(qinv::multipliers::derivative(), qinv::multipliers::lambda(1.0))}) {
    const auto out = qinv::apply_multiplier(m, u);
    EXPECT_TRUE(out.is_real());
    EXPECT_TRUE(hermitian(out));
  }
}

TEST(QuadraticProduct, CosineSquared) {
  const auto p = qinv::quadratic_product(cos_x(), cos_x());
  EXPECT_NEAR(p[0].real(), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(p[2] - 0.25), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(p[-2] - 0.25), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(p[1]), 0.0, 1e-15);
}

TEST(QuadraticProduct, ZeroFactor) {
  const auto u = oracle::random_field(5, Reality::real, 1);
  EXPECT_EQ(qinv::quadratic_product(u, TorusField{5, Reality::real}).max_abs(), 0.0);
}

TEST(QuadraticProduct, MatchesDirectConvolution) {
  for (int n_max = 0; n_max <= 8; ++n_max) {
    for (auto reality : {Reality::real, Reality::complex}) {
      const auto u = oracle::random_field(n_max, reality, 100 + n_max);
      const auto v = oracle::random_field(n_max, reality, 200 + n_max);
      const auto fast = qinv::quadratic_product(u, v);
      const auto slow = oracle::direct_product(u, v, 2 * n_max);
      EXPECT_LE(oracle::max_coeff_diff(fast, slow), 1e-13 * std::max(1.0, slow.max_abs()));
      EXPECT_EQ(fast.reality(), reality);
    }
  }
}

TEST(QuadraticProduct, RealityMismatchThrows) {
  EXPECT_THROW(qinv::quadratic_product(cos_x(), mode(1, 1)), std::invalid_argument);
}

TEST(QuinticNonlinearity, UnimodularAndConstant) {
  const auto e1 = mode(1, 1);
  EXPECT_LE(oracle::max_coeff_diff(qinv::quintic_nonlinearity(e1, 1), e1), 1e-15);
  TorusField c{0, Reality::complex};
  c.set(0, cplx{0.6, -0.3});
  const cplx expected = std::pow(std::abs(c[0]), 4) * c[0];
  EXPECT_NEAR(std::abs(qinv::quintic_nonlinearity(c)[0] - expected), 0.0, 1e-15);
}

TEST(QuinticNonlinearity, MatchesDirectQuintupleConvolution) {
  for (int n_max = 0; n_max <= 4; ++n_max) {
    for (auto reality : {Reality::real, Reality::complex}) {
      const auto u = oracle::random_field(n_max, reality, 300 + n_max);
      const auto fast = qinv::quintic_nonlinearity(u);
      const auto slow = oracle::direct_quintic(u);
      EXPECT_LE(oracle::max_coeff_diff(fast, slow), 1e-12 * std::max(1.0, slow.max_abs()));
      EXPECT_EQ(fast.n_max(), 5 * n_max);
    }
  }
}

TEST(QuinticNonlinearity, RealInputStaysReal) {
  const auto out = qinv::quintic_nonlinearity(oracle::random_field(3, Reality::real, 5));
  EXPECT_TRUE(out.is_real());
  EXPECT_TRUE(hermitian(out));
}

TEST(RealityPreservation, OperationsKeepHermitianSymmetry) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto u = oracle::random_field(7, Reality::real, seed);
    EXPECT_TRUE(hermitian(qinv::project(u, 3)));
    EXPECT_TRUE(hermitian(qinv::lp_block(u, 2)));
    EXPECT_TRUE(hermitian(qinv::quadratic_product(u, u)));
  }
}

TEST(LpNorm, NormalizedMeasure) {
  TorusField c{0, Reality::complex};
  c.set(0, 2.0);
  EXPECT_NEAR(qinv::lp_norm(c, 6.0), 2.0, 1e-14);
  const double l6 = qinv::lp_norm(cos_x(), 6.0);
  EXPECT_NEAR(std::pow(l6, 6.0), oracle::mean_power_quadrature(cos_x(), 6.0, 1 << 12), 1e-13);
  EXPECT_NEAR(qinv::lp_norm(cos_x(), std::numeric_limits<double>::infinity()), 1.0, 1e-12);
  EXPECT_THROW(qinv::lp_norm(cos_x(), 0.5), std::invalid_argument);
}

TEST(W1Inf, SineWave) {
  TorusField u{3, Reality::real};
  u.set(3, cplx{0.0, -0.5});
  EXPECT_NEAR(qinv::w1inf_norm(u), 4.0, 1e-12);
}

TEST(Json, RoundTrip) {
  for (auto reality : {Reality::real, Reality::complex}) {
    const auto u = oracle::random_field(5, reality, 77);
    const nlohmann::json j = u;
    EXPECT_EQ(j.at("coeffs").size(), 11u);
    const auto back = nlohmann::json::parse(j.dump()).get<TorusField>();
    EXPECT_EQ(back, u);
  }
}

TEST(Fft, GoodSizesAreSmooth) {
  for (std::size_t n : {1u, 7u, 17u, 97u, 1000u}) {
    auto m = qinv::detail::good_fft_size(n);
    EXPECT_GE(m, n);
    for (std::size_t p : {2u, 3u, 5u}) {
      while (m % p == 0) {
        m /= p;
      }
    }
    EXPECT_EQ(m, 1u);
  }
}

}  // namespace
