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

#include <atomic>
#include <numeric>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qinv/bbm.hpp"
#include "qinv/parallel.hpp"
#include "qinv/rng.hpp"

namespace {

using qinv::Reality;
using qinv::TorusField;

TEST(CounterRng, DeterministicPerKey) {
  qinv::CounterRng a{7, 3};
  qinv::CounterRng b{7, 3};
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a(), b());
  }
}

TEST(CounterRng, DistinctStreamsDiffer) {
  std::set<std::uint64_t> first;
  for (std::uint64_t stream = 0; stream < 1000; ++stream) {
    qinv::CounterRng r{1, stream};
    first.insert(r());
  }
  EXPECT_EQ(first.size(), 1000u);
}

TEST(CounterRng, DiscardMatchesDraws) {
  qinv::CounterRng a{5, 9};
  qinv::CounterRng b{5, 9};
  for (int i = 0; i < 17; ++i) {
    a();
  }
  b.discard(17);
  EXPECT_EQ(a(), b());
  EXPECT_EQ(a.counter(), b.counter());
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(257);
  qinv::parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) {
    EXPECT_EQ(h.load(), 1);
  }
}

TEST(ParallelFor, RethrowsBodyException) {
  EXPECT_THROW(qinv::parallel_for(50, 3,
                                  [](std::size_t i) {
                                    if (i == 31) {
                                      throw std::runtime_error("boom");
                                    }
                                  }),
               std::runtime_error);
}

TEST(PairwiseSum, MatchesAccumulate) {
  std::vector<double> v(1001);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_EQ(qinv::pairwise_sum(v), 1001.0 * 1002.0 / 2.0);
  EXPECT_EQ(qinv::pairwise_sum(std::vector<double>{}), 0.0);
}

qinv::BbmParams params(int N) {
  qinv::BbmParams p;
  p.N = N;
  p.dt = 1e-2;
  return p;
}

TEST(Evolve, StoresEveryStrideAndLastState) {
  const auto u0 = oracle::random_field(6, Reality::real, 1, 2.0);
  const auto traj = qinv::integrate_bbm(u0, params(4), 0.25, 10);
  ASSERT_EQ(traj.times.size(), 4u);
  EXPECT_EQ(traj.times.front(), 0.0);
  EXPECT_NEAR(traj.times[1], 0.1, 1e-15);
  EXPECT_NEAR(traj.times[2], 0.2, 1e-15);
  EXPECT_EQ(traj.times.back(), 0.25);
  EXPECT_EQ(traj.states.size(), traj.times.size());
  EXPECT_EQ(traj.diagnostics.size(), traj.times.size());
  EXPECT_EQ(traj.states.front(), u0);
}

TEST(Evolve, TimesStrictlyMonotoneAndStatesShareShape) {
  const auto u0 = oracle::random_field(5, Reality::real, 2, 2.0);
  for (double t : {0.37, -0.37}) {
    const auto traj = qinv::integrate_bbm(u0, params(3), t, 3);
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
      if (t > 0) {
        EXPECT_GT(traj.times[i], traj.times[i - 1]);
      } else {
        EXPECT_LT(traj.times[i], traj.times[i - 1]);
      }
      EXPECT_EQ(traj.states[i].n_max(), u0.n_max());
      EXPECT_EQ(traj.states[i].reality(), u0.reality());
    }
  }
}

TEST(Evolve, FlowAgreesWithLastStoredState) {
  const auto u0 = oracle::random_field(8, Reality::real, 3, 2.0);
  const auto p = params(5);
  const auto traj = qinv::integrate_bbm(u0, p, 0.3, 7);
  const auto f = qinv::flow_bbm(u0, p, 0.3);
  EXPECT_EQ(traj.final_state(), f.state);
  EXPECT_EQ(traj.max_relative_drift, f.max_relative_drift);
}

TEST(Evolve, ZeroTimeIsIdentity) {
  const auto u0 = oracle::random_field(8, Reality::real, 3, 2.0);
  EXPECT_EQ(qinv::flow_bbm(u0, params(5), 0.0).state, u0);
}

TEST(Evolve, RejectsBadStride) {
  EXPECT_THROW(qinv::integrate_bbm(TorusField{2, Reality::real}, params(2), 0.1, 0), std::invalid_argument);
}

TEST(Evolve, BlowUpRaisesErrorWithTime) {
  auto u0 = oracle::random_field(4, Reality::real, 4);
  u0 *= 1e5;
  qinv::BbmParams p = params(4);
  p.dt = 0.5;
  try {
    qinv::flow_bbm(u0, p, 50.0);
    FAIL() << "expected IntegrationError";
  } catch (const qinv::IntegrationError& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LE(e.time(), 50.0);
  }
}

TEST(TrajectoryExport, CsvHasHeaderAndOneRowPerState) {
  const auto traj = qinv::integrate_bbm(oracle::random_field(4, Reality::real, 5, 2.0), params(4), 0.05, 1, {1.0});
  std::ostringstream os;
  qinv::write_trajectory_csv(os, traj);
  std::istringstream is{os.str()};
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("time,", 0), 0u);
  EXPECT_NE(line.find("PN_hbeta2"), std::string::npos);
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++rows;
  }
  EXPECT_EQ(rows, traj.times.size());
}

TEST(TrajectoryExport, JsonCarriesFullStates) {
  const auto traj = qinv::integrate_bbm(oracle::random_field(4, Reality::real, 6, 2.0), params(4), 0.05, 2);
  const auto j = qinv::trajectory_to_json(traj);
  ASSERT_EQ(j.at("states").size(), traj.states.size());
  EXPECT_EQ(j.at("states").back().get<TorusField>(), traj.final_state());
}

}  // namespace
