//
// Copyright 2026 The streamsyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "streamsyn/noise.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include "gtest/gtest.h"
#include "stats_util.hpp"

namespace streamsyn {
namespace {

TEST(IntLaplaceTest, PmfMatchesClosedForm) {
  // (1 - e^-1/s) / (1 + e^-1/s) = tanh(1 / (2s)).
  EXPECT_NEAR(IntLaplace(1.0).pmf(0), 0.46211715726000974, 1e-15);
  EXPECT_NEAR(IntLaplace(2.0).pmf(0), 0.24491866240370913, 1e-15);
  EXPECT_DOUBLE_EQ(IntLaplace(1.0).pmf(3), IntLaplace(1.0).pmf(-3));
  EXPECT_DOUBLE_EQ(int_laplace_pmf(1.0, 0), IntLaplace(1.0).pmf(0));
}

TEST(IntLaplaceTest, RejectsNonPositiveScale) {
  EXPECT_THROW(IntLaplace(0.0), ParameterError);
  EXPECT_THROW(IntLaplace(-1.0), ParameterError);
  EXPECT_THROW(IntLaplace(std::nan("")), ParameterError);
}

TEST(IntLaplaceTest, MassConcentratesWithinFiftySigma) {
  for (double sigma : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    const IntLaplace law(sigma);
    const auto k = static_cast<std::int64_t>(std::floor(50 * sigma));
    double mass = 0.0;
    for (std::int64_t z = -k; z <= k; ++z) mass += law.pmf(z);
    EXPECT_GT(mass, 1.0 - 1e-12) << "sigma=" << sigma;
    EXPECT_LT(2.0 * law.upper_tail(k + 1), 1e-20) << "sigma=" << sigma;
  }
}

TEST(IntLaplaceTest, TailMatchesPmfSum) {
  const IntLaplace law(1.7);
  for (std::int64_t k : {-4, -1, 0, 1, 5}) {
    double tail = 0.0;
    for (std::int64_t z = k; z <= 400; ++z) tail += law.pmf(z);
    EXPECT_NEAR(law.upper_tail(k), tail, 1e-12) << k;
  }
}

TEST(IntLaplaceTest, VarianceFormula) {
  const IntLaplace law(2.5);
  double v = 0.0;
  for (std::int64_t z = -2000; z <= 2000; ++z) v += law.pmf(z) * static_cast<double>(z * z);
  EXPECT_NEAR(law.variance(), v, 1e-9);
  EXPECT_LE(law.variance(), 2 * 2.5 * 2.5);
}

TEST(SamplerTest, MeanZeroAndVarianceBounded) {
  const auto m = testing::int_laplace_moments(1.0, 1'000'000, 11);
  EXPECT_NEAR(m.mean, 0.0, 0.01);
  EXPECT_LE(m.variance, 2.0 * 1.0 + 0.02);
}

TEST(SamplerTest, EmpiricalVarianceNearExact) {
  for (double sigma : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    const auto m = testing::int_laplace_moments(sigma, 1'000'000, 3);
    const double exact = IntLaplace(sigma).variance();
    EXPECT_GE(m.variance, 0.5 * exact) << sigma;
    EXPECT_LE(m.variance, 1.5 * exact) << sigma;
  }
}

TEST(SamplerTest, ChiSquareSigmaThree) {
  const auto res = testing::int_laplace_chi_square(3.0, 1'000'000, 19);
  EXPECT_TRUE(res.pass) << "stat=" << res.statistic << " crit=" << res.critical
                        << " dof=" << res.dof;
}

TEST(NoiseStreamTest, SameKeyReproducesSequence) {
  NoiseStream a(RngSeed{42, 7});
  NoiseStream b(RngSeed{42, 7});
  NoiseStream c(RngSeed{42, 8});
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.int_laplace(3.0);
    EXPECT_EQ(x, b.int_laplace(3.0));
    differs |= x != c.int_laplace(3.0);
  }
  EXPECT_TRUE(differs);
}

TEST(NoiseStreamTest, SubstreamIsPureAndDistinct) {
  NoiseStream parent(RngSeed{1, 2});
  NoiseStream s1 = parent.substream(9);
  parent.next_u64();
  NoiseStream s2 = NoiseStream(RngSeed{1, 2}).substream(9);
  NoiseStream other = parent.substream(10);
  EXPECT_EQ(s1.next_u64(), s2.next_u64());
  EXPECT_NE(s1.next_u64(), other.next_u64());
}

TEST(NoiseStreamTest, DisabledNoiseDrawsZeroButCounts) {
  NoiseStream rng(RngSeed{5, 5}, false);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(rng.int_laplace(100.0), 0);
  EXPECT_EQ(rng.draws(), 10u);
}

TEST(NoiseStreamTest, GeometricTrialsMean) {
  NoiseStream rng(RngSeed{8, 1});
  const double q = 0.2;
  double s = 0.0;
  constexpr int kN = 200'000;
  for (int i = 0; i < kN; ++i) s += static_cast<double>(rng.trials_until_success(q));
  EXPECT_NEAR(s / kN, 1.0 / q, 0.05);
  EXPECT_EQ(rng.trials_until_success(1.0), 1u);
  EXPECT_EQ(rng.trials_until_success(0.0), NoiseStream::kNever);
}

}  // namespace
}  // namespace streamsyn
