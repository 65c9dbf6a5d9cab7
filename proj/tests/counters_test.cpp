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

#include "streamsyn/counters.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace streamsyn {
namespace {

using testing::bernoulli_stream;
using testing::ConstSchedule;
using testing::inhom_noise_free;
using testing::prefix_sums;
using testing::sparse_noise_free;

TEST(BinaryCounterTest, NoiseFreePrefixSums) {
  BinaryCounter c(8, 1.0, NoiseStream(RngSeed{1, 1}, false));
  std::vector<std::int64_t> outs;
  for (bool b : {true, false, true, true}) {
    c.feed(b);
    outs.push_back(c.output());
  }
  EXPECT_EQ(outs, (std::vector<std::int64_t>{1, 1, 2, 3}));
}

TEST(BinaryCounterTest, HugeEpsilonIsExact) {
  const auto bits = bernoulli_stream(300, 0.4, 3);
  const auto truth = prefix_sums(bits);
  BinaryCounter c(300, 1e9, NoiseStream(RngSeed{2, 2}));
  for (std::size_t i = 0; i < bits.size(); ++i) {
    c.feed(bits[i]);
    ASSERT_EQ(c.output(), truth[i]);
  }
}

TEST(BinaryCounterTest, RejectsFeedsPastHorizonAndBadParameters) {
  BinaryCounter c(2, 1.0, NoiseStream());
  c.feed(true);
  c.feed(true);
  EXPECT_THROW(c.feed(true), StateError);
  EXPECT_THROW(BinaryCounter(0, 1.0, NoiseStream()), ParameterError);
  EXPECT_THROW(BinaryCounter(4, 0.0, NoiseStream()), ParameterError);
}

TEST(BinaryCounterTest, AllOnesErrorPolylog) {
  constexpr std::uint64_t kT = 1024;
  double total = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    BinaryCounter c(kT, 1.0, NoiseStream(RngSeed{static_cast<std::uint64_t>(trial), 3}));
    for (std::uint64_t i = 0; i < kT; ++i) c.feed(true);
    total += std::abs(static_cast<double>(c.output() - static_cast<std::int64_t>(kT)));
  }
  EXPECT_LE(total / 100.0, 200.0);
}

TEST(BinaryCounterTest, SkipZerosMatchesFeeding) {
  BinaryCounter a(64, 1.0, NoiseStream(RngSeed{9, 9}));
  BinaryCounter b(64, 1.0, NoiseStream(RngSeed{9, 9}));
  a.feed(true);
  b.feed(true);
  a.skip_zeros(20);
  for (int i = 0; i < 20; ++i) b.feed(false);
  EXPECT_EQ(a.output(), b.output());
}

TEST(HybridCounterTest, NoiseFreeExact) {
  const auto bits = bernoulli_stream(5000, 0.3, 4);
  const auto truth = prefix_sums(bits);
  HybridCounter c(1.0, NoiseStream(RngSeed{1, 4}, false));
  for (std::size_t i = 0; i < bits.size(); ++i) {
    c.feed(bits[i]);
    ASSERT_EQ(c.output(), truth[i]);
  }
}

TEST(HybridCounterTest, LedgerChargesEpsilonAtEveryTime) {
  HybridCounter c(0.7, NoiseStream());
  c.skip_zeros(1000);
  const auto ledger = c.ledger();
  for (std::uint64_t t = 1; t <= 1000; ++t) EXPECT_DOUBLE_EQ(charge_at(ledger, t), 0.7);
}

TEST(HybridCounterTest, ErrorGrowsLikeLogPower) {
  constexpr int kTrials = 50;
  constexpr int kMaxLevel = 14;
  std::vector<double> err(kMaxLevel + 1, 0.0);
  for (int trial = 0; trial < kTrials; ++trial) {
    const auto bits = bernoulli_stream(std::size_t{1} << kMaxLevel, 0.5, 100 + trial);
    HybridCounter c(1.0, NoiseStream(RngSeed{static_cast<std::uint64_t>(trial), 6}));
    std::int64_t truth = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      c.feed(bits[i]);
      truth += bits[i];
      const std::uint64_t t = i + 1;
      if (std::has_single_bit(t)) {
        err[static_cast<std::size_t>(std::bit_width(t) - 1)] +=
            std::abs(static_cast<double>(c.output() - truth)) / kTrials;
      }
    }
  }
  // Least-squares slope of mean error against log(t)^1.5 over t = 2^6..2^14.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int k = 6; k <= kMaxLevel; ++k) {
    const double x = std::pow(k * std::log(2.0), 1.5);
    sx += x;
    sy += err[static_cast<std::size_t>(k)];
    sxx += x * x;
    sxy += x * err[static_cast<std::size_t>(k)];
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_GT(slope, 0.0);
  EXPECT_TRUE(std::isfinite(slope));
  EXPECT_LE(err[kMaxLevel], 50.0 * std::pow(kMaxLevel * std::log(2.0), 1.5));
  EXPECT_LT(err[kMaxLevel], 0.05 * (1 << kMaxLevel));  // sublinear in t
}

TEST(SparseCounterTest, ThresholdUsesNaturalLog) {
  EXPECT_NEAR(SparseCounter::threshold_for(1024, 1.0), 62.383246250395075, 1e-12);
}

TEST(SparseCounterTest, NoiseFreeZeroStreamNeverSeals) {
  for (auto checks : {SegmentChecks::kPerStep, SegmentChecks::kGeometricSkip}) {
    SparseCounter c(512, 1.0, NoiseStream(RngSeed{1, 1}, false), {checks, CarryUpdate::kReplace});
    for (int i = 0; i < 512; ++i) {
      c.feed(false);
      ASSERT_EQ(c.output(), 0);
    }
    EXPECT_TRUE(c.sealed_segments().empty());
    EXPECT_THROW(c.feed(false), StateError);
  }
}

TEST(SparseCounterTest, NoiseFreeMatchesSegmentOracle) {
  for (int s = 0; s < 50; ++s) {
    const auto bits = bernoulli_stream(700, 0.05 + 0.02 * s, 500 + s);
    const auto expected = sparse_noise_free(bits, 1024, 0.5);
    for (auto checks : {SegmentChecks::kPerStep, SegmentChecks::kGeometricSkip}) {
      SparseCounter c(1024, 0.5, NoiseStream(RngSeed{1, 2}, false), {checks, CarryUpdate::kReplace});
      for (std::size_t i = 0; i < bits.size(); ++i) {
        c.feed(bits[i]);
        ASSERT_EQ(c.output(), expected[i]) << "stream " << s << " t=" << i + 1;
        ASSERT_LE(c.true_count() - c.output(), c.open_segment_count());
      }
    }
  }
}

TEST(SparseCounterTest, AccumulateModeDoubleCounts) {
  SparseCounter c(64, 1e3, NoiseStream(RngSeed{}, false), {SegmentChecks::kPerStep, CarryUpdate::kAccumulate});
  // T0 ~ 0.037, so every nonempty segment seals at the next check.
  for (int i = 0; i < 6; ++i) c.feed(true);
  EXPECT_GT(c.output(), 5);
}

TEST(SparseCounterTest, DrawCountPerStep) {
  const auto bits = bernoulli_stream(2000, 0.2, 8);
  SparseCounter c(2048, 1.0, NoiseStream(RngSeed{3, 3}), {SegmentChecks::kPerStep, CarryUpdate::kReplace});
  for (bool b : bits) c.feed(b);
  const std::uint64_t seals = c.sealed_segments().size();
  EXPECT_GT(seals, 0u);
  // One threshold per opened segment, one comparison per check; a sealing
  // check is repeated for the next segment.
  EXPECT_EQ(c.noise_draws(), bits.size() + 2 * seals + 1);
}

TEST(SparseCounterTest, SealedSegmentsNonEmptyOnBoundedNoise) {
  constexpr std::uint64_t kT = 4096;
  const double eps = 1.0;
  const double bound = (2.0 / eps) * (2.0 * std::log(static_cast<double>(kT)) + std::log(2.0));
  int bounded_trials = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto bits = bernoulli_stream(kT, 0.1, 900 + trial);
    SparseCounter c(kT, eps, NoiseStream(RngSeed{static_cast<std::uint64_t>(trial), 1}),
                    {SegmentChecks::kPerStep, CarryUpdate::kReplace});
    for (bool b : bits) c.feed(b);
    if (static_cast<double>(c.max_abs_draw()) > bound) continue;
    ++bounded_trials;
    for (auto s : c.sealed_segments()) EXPECT_GE(s, 1);
    EXPECT_LE(c.sealed_segments().size(), static_cast<std::size_t>(c.true_count()) + 1);
  }
  EXPECT_GT(bounded_trials, 30);
}

TEST(SparseCounterTest, GeometricSkipSplitInvariant) {
  SparseCounter a(4096, 0.3, NoiseStream(RngSeed{4, 4}));
  SparseCounter b(4096, 0.3, NoiseStream(RngSeed{4, 4}));
  const auto bits = bernoulli_stream(4000, 0.3, 12);
  std::uint64_t zeros = 0;
  for (bool bit : bits) {
    if (!bit) {
      a.skip_zeros(1);
      ++zeros;
      continue;
    }
    b.skip_zeros(zeros);
    zeros = 0;
    a.feed(true);
    b.feed(true);
    ASSERT_EQ(a.output(), b.output());
  }
  b.skip_zeros(zeros);
  EXPECT_EQ(a.output(), b.output());
  EXPECT_EQ(a.sealed_segments(), b.sealed_segments());
}

TEST(SparseCounterTest, CheckPoliciesAgreeInLaw) {
  // Dense stream so segments seal often; compare the mean number of sealed
  // segments and the mean final output between the two check policies.
  constexpr int kTrials = 1500;
  constexpr std::uint64_t kT = 256;
  const auto bits = bernoulli_stream(kT, 0.8, 77);
  double seals[2] = {0, 0}, outs[2] = {0, 0}, seals2[2] = {0, 0};
  int idx = 0;
  for (auto checks : {SegmentChecks::kPerStep, SegmentChecks::kGeometricSkip}) {
    for (int trial = 0; trial < kTrials; ++trial) {
      SparseCounter c(kT, 1.0, NoiseStream(RngSeed{static_cast<std::uint64_t>(trial), 50u + idx}),
                      {checks, CarryUpdate::kReplace});
      for (bool b : bits) c.feed(b);
      const double s = static_cast<double>(c.sealed_segments().size());
      seals[idx] += s / kTrials;
      seals2[idx] += s * s / kTrials;
      outs[idx] += static_cast<double>(c.output()) / kTrials;
    }
    ++idx;
  }
  const double var = 0.5 * (seals2[0] - seals[0] * seals[0] + seals2[1] - seals[1] * seals[1]);
  const double se = std::sqrt(2.0 * var / kTrials);
  EXPECT_NEAR(seals[0], seals[1], 4.0 * se + 1e-9);
  EXPECT_NEAR(outs[0], outs[1], 0.05 * std::abs(outs[0]) + 5.0);
}

TEST(SparseCounterTest, MonteCarloErrorWithinLogRate) {
  constexpr std::uint64_t kT = 4096;
  constexpr int kOnes = 32;
  double total = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 gen(trial);
    std::vector<bool> bits(kT, false);
    for (int placed = 0; placed < kOnes;) {
      const auto pos = gen() % kT;
      if (!bits[pos]) {
        bits[pos] = true;
        ++placed;
      }
    }
    SparseCounter c(kT, 1.0, NoiseStream(RngSeed{static_cast<std::uint64_t>(trial), 21}));
    for (bool b : bits) c.feed(b);
    total += std::abs(static_cast<double>(c.output() - c.true_count()));
  }
  const double rate = std::log(4096.0) + std::pow(std::log(33.0), 1.5);
  EXPECT_LE(total / 100.0, 40.0 * rate);
}

TEST(SparseCounterTest, LedgerSumsToEpsilon) {
  SparseCounter c(100, 0.8, NoiseStream());
  for (std::uint64_t t = 1; t <= 100; ++t) EXPECT_DOUBLE_EQ(charge_at(c.ledger(), t), 0.8);
}

TEST(InhomogeneousCounterTest, NoiseFreeMatchesOracle) {
  const ConstSchedule eps = [](int r) { return 0.5 + 0.1 * r; };
  for (int s = 0; s < 20; ++s) {
    const auto bits = bernoulli_stream(3000, 0.02 * (s + 1), 40 + s);
    for (int r0 : {0, 2, 5}) {
      const auto expected = inhom_noise_free(bits, r0, eps);
      InhomogeneousCounter<ConstSchedule> c(r0, eps, NoiseStream(RngSeed{7, 7}, false));
      for (std::size_t i = 0; i < bits.size(); ++i) {
        c.feed(bits[i]);
        if (expected[i] < 0) {
          ASSERT_THROW(c.output(), StateError);
        } else {
          ASSERT_EQ(c.output(), expected[i]) << "r0=" << r0 << " t=" << i + 1;
        }
      }
    }
  }
}

TEST(InhomogeneousCounterTest, LevelZeroIsExactOnSingleBit) {
  // Level 0 has horizon 1, so T0 = 0 and the carry picks up X_1 at t = 2.
  InhomogeneousCounter<ConstSchedule> c(0, [](int) { return 1.0; }, NoiseStream({}, false));
  c.feed(true);
  EXPECT_EQ(c.output(), 0);
  c.feed(true);
  EXPECT_EQ(c.output(), 1);
}

TEST(InhomogeneousCounterTest, IgnoresBitsBeforeStartingLevel) {
  const ConstSchedule eps = [](int) { return 1.0; };
  for (std::uint64_t diff = 1; diff <= 3; ++diff) {
    auto bits = bernoulli_stream(600, 0.3, 5);
    auto other = bits;
    other[diff - 1] = !other[diff - 1];
    InhomogeneousCounter<ConstSchedule> a(2, eps, NoiseStream(RngSeed{11, 1}));
    InhomogeneousCounter<ConstSchedule> b(2, eps, NoiseStream(RngSeed{11, 1}));
    for (std::size_t i = 0; i < bits.size(); ++i) {
      a.feed(bits[i]);
      b.feed(other[i]);
      if (i + 1 < 4) {
        EXPECT_THROW(a.output(), StateError);
      } else {
        ASSERT_EQ(a.output(), b.output());
      }
    }
  }
}

TEST(InhomogeneousCounterTest, LedgerChargesLevelBudget) {
  const ConstSchedule eps = [](int r) { return 1.0 / (r + 1); };
  InhomogeneousCounter<ConstSchedule> c(3, eps, NoiseStream());
  c.skip_zeros(200);
  const auto ledger = c.ledger();
  for (std::uint64_t t = 1; t < 8; ++t) EXPECT_EQ(charge_at(ledger, t), 0.0);
  for (std::uint64_t t = 8; t <= 200; ++t) {
    const int r = static_cast<int>(std::bit_width(t)) - 1;
    EXPECT_DOUBLE_EQ(charge_at(ledger, t), eps(r)) << t;
  }
}

TEST(InhomogeneousCounterTest, RejectsNonPositiveSchedule) {
  InhomogeneousCounter<ConstSchedule> c(1, [](int r) { return r < 3 ? 1.0 : 0.0; }, NoiseStream());
  EXPECT_THROW(c.skip_zeros(100), ParameterError);
  EXPECT_THROW(InhomogeneousCounter<ConstSchedule>(-1, [](int) { return 1.0; }, NoiseStream()),
               ParameterError);
}

TEST(InhomogeneousCounterTest, SkipMatchesFeeding) {
  const ConstSchedule eps = [](int) { return 0.3; };
  InhomogeneousCounter<ConstSchedule> a(1, eps, NoiseStream(RngSeed{2, 9}));
  InhomogeneousCounter<ConstSchedule> b(1, eps, NoiseStream(RngSeed{2, 9}));
  const auto bits = bernoulli_stream(5000, 0.1, 31);
  std::uint64_t pending = 0;
  for (bool bit : bits) {
    a.feed(bit);
    if (!bit) {
      ++pending;
      continue;
    }
    b.skip_zeros(pending);
    pending = 0;
    b.feed(true);
    ASSERT_EQ(a.output(), b.output());
  }
  b.skip_zeros(pending);
  EXPECT_EQ(a.output(), b.output());
}

TEST(InhomogeneousCounterTest, ErrorDecomposesBySlot) {
  const ConstSchedule eps = [](int) { return 0.5; };
  const auto bits = bernoulli_stream(4095, 0.5, 3);
  const auto clean = inhom_noise_free(bits, 2, eps);
  std::int64_t pre_start = 0;
  for (int i = 0; i < 3; ++i) pre_start += bits[static_cast<std::size_t>(i)];

  // Carry noise only: the deviation from the noise-free output is constant
  // inside a level and changes only at level boundaries.
  InhomogeneousCounter<ConstSchedule> carry_only(2, eps, NoiseStream(RngSeed{1, 1}), {},
                                                 NoiseSlots{false, true});
  // No noise at all: at every level start the output is the exact count
  // since 2^r0, so the error is exactly the ignored prefix.
  InhomogeneousCounter<ConstSchedule> none(2, eps, NoiseStream(RngSeed{1, 1}), {},
                                           NoiseSlots{false, false});
  std::int64_t truth = 0;
  std::int64_t level_offset = 0;
  bool saw_noise = false;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    carry_only.feed(bits[i]);
    none.feed(bits[i]);
    truth += bits[i];
    const std::uint64_t t = i + 1;
    if (t < 4) continue;
    ASSERT_EQ(none.output(), clean[i]);
    const std::int64_t dev = carry_only.output() - clean[i];
    if (std::has_single_bit(t)) {
      level_offset = dev;
      saw_noise |= dev != 0;
      EXPECT_EQ(truth - bits[i] - none.output(), pre_start) << t;
    } else {
      ASSERT_EQ(dev, level_offset) << t;
    }
  }
  EXPECT_TRUE(saw_noise);
}

}  // namespace
}  // namespace streamsyn
