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

#ifndef STREAMSYN_COUNTERS_HPP_
#define STREAMSYN_COUNTERS_HPP_

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "streamsyn/errors.hpp"
#include "streamsyn/noise.hpp"

namespace streamsyn {

inline constexpr std::uint64_t kUnbounded = ~std::uint64_t{0};

// One privacy charge: `epsilon` protects every input arriving at a time in
// [first, last].
struct LedgerEntry {
  std::string mechanism;
  std::uint64_t first = 0;
  std::uint64_t last = 0;
  double epsilon = 0.0;

  bool covers(std::uint64_t t) const { return first <= t && t <= last; }
};

inline double charge_at(const std::vector<LedgerEntry>& ledger, std::uint64_t t) {
  double total = 0.0;
  for (const auto& e : ledger) {
    if (e.covers(t)) total += e.epsilon;
  }
  return total;
}

// Streaming counter over a Boolean stream. Each feed advances time by one.
class OnlineCounter {
 public:
  virtual ~OnlineCounter() = default;

  virtual void feed(bool bit) = 0;
  // Equivalent to `n` calls of feed(false), usually much cheaper.
  virtual void skip_zeros(std::uint64_t n) {
    for (std::uint64_t i = 0; i < n; ++i) feed(false);
  }
  // Private count N_t at the current time t.
  virtual std::int64_t output() const = 0;
  // True count S_t. Test and evaluation use only.
  virtual std::int64_t true_count() const = 0;
  virtual std::uint64_t time() const = 0;
  virtual std::vector<LedgerEntry> ledger() const = 0;
};

namespace internal {

// Nonzero items of a stream, in time order, with running sums.
class ValueSeries {
 public:
  void append(std::uint64_t time, std::int64_t value) {
    if (value == 0) return;
    times_.push_back(time);
    cumulative_.push_back(total() + value);
  }

  std::int64_t total() const { return cumulative_.empty() ? 0 : cumulative_.back(); }

  // Sum of items at times <= t.
  std::int64_t sum_through(std::uint64_t t) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const auto n = it - times_.begin();
    return n == 0 ? 0 : cumulative_[static_cast<std::size_t>(n - 1)];
  }

  std::int64_t range_sum(std::uint64_t first, std::uint64_t last) const {
    if (last < first) return 0;
    return sum_through(last) - (first == 0 ? 0 : sum_through(first - 1));
  }

  const std::vector<std::uint64_t>& times() const { return times_; }

 private:
  std::vector<std::uint64_t> times_;
  std::vector<std::int64_t> cumulative_;
};

inline int ceil_log2(std::uint64_t n) {
  return n <= 1 ? 0 : static_cast<int>(std::bit_width(n - 1));
}

inline int floor_log2(std::uint64_t n) { return static_cast<int>(std::bit_width(n)) - 1; }

// Dyadic-tree prefix estimate of the items at local times [1, pos], where
// local time 1 is absolute time `base`. Node (level l, index m) covers local
// [m 2^l + 1, (m + 1) 2^l] and carries its own Lap_Z(sigma) draw, fixed by
// the node identity, so evaluation order never changes the result.
inline std::int64_t dyadic_prefix(const ValueSeries& series, std::uint64_t base,
                                  std::uint64_t pos, double sigma,
                                  const NoiseStream& nodes) {
  std::int64_t out = 0;
  std::uint64_t covered = 0;
  for (int level = 63; level >= 0; --level) {
    const std::uint64_t width = std::uint64_t{1} << level;
    if ((pos & width) == 0) continue;
    const std::uint64_t first = base + covered;
    const std::uint64_t node = (static_cast<std::uint64_t>(level) << 56) | (covered >> level);
    NoiseStream draw = nodes.substream(node);
    out += series.range_sum(first, first + width - 1) + draw.int_laplace(sigma);
    covered += width;
  }
  return out;
}

}  // namespace internal

// Binary mechanism over a finite horizon T: every item enters
// ceil(log2 T) + 1 dyadic partial sums, each perturbed once with
// Lap_Z((ceil(log2 T) + 1) / eps).
class BinaryCounter final : public OnlineCounter {
 public:
  BinaryCounter(std::uint64_t horizon, double epsilon, NoiseStream stream)
      : horizon_(horizon), epsilon_(epsilon), nodes_(stream) {
    if (horizon == 0) throw ParameterError("BinaryCounter: horizon must be >= 1");
    if (!(epsilon > 0.0)) throw ParameterError("BinaryCounter: epsilon must be > 0");
    sigma_ = static_cast<double>(internal::ceil_log2(horizon) + 1) / epsilon;
  }

  void feed(bool bit) override { feed_value(bit ? 1 : 0); }

  void feed_value(std::int64_t value) {
    if (t_ >= horizon_) throw StateError("BinaryCounter: fed beyond horizon");
    ++t_;
    series_.append(t_, value);
  }

  void skip_zeros(std::uint64_t n) override {
    if (n > horizon_ - t_) throw StateError("BinaryCounter: fed beyond horizon");
    t_ += n;
  }

  std::int64_t output() const override {
    return internal::dyadic_prefix(series_, 1, t_, sigma_, nodes_);
  }
  std::int64_t true_count() const override { return series_.total(); }
  std::uint64_t time() const override { return t_; }
  std::uint64_t horizon() const { return horizon_; }
  double node_sigma() const { return sigma_; }

  std::vector<LedgerEntry> ledger() const override {
    return {{"binary", 1, horizon_, epsilon_}};
  }

 private:
  std::uint64_t horizon_;
  double epsilon_;
  double sigma_ = 1.0;
  NoiseStream nodes_;
  std::uint64_t t_ = 0;
  internal::ValueSeries series_;
};

// Infinite-horizon hybrid mechanism. Time is cut into levels
// [2^k, 2^(k+1)). Half the budget releases a noisy block sum per completed
// level (Lap_Z(2/eps), one block per item); the other half runs a binary
// mechanism with horizon 2^k inside level k. Output at t in level k is the
// sum of the noisy blocks before k plus the intra-level binary estimate.
class HybridCounter final : public OnlineCounter {
 public:
  HybridCounter(double epsilon, NoiseStream stream)
      : epsilon_(epsilon),
        anchors_(stream.substream(1)),
        levels_(stream.substream(2)) {
    if (!(epsilon > 0.0)) throw ParameterError("HybridCounter: epsilon must be > 0");
  }

  void feed(bool bit) override { feed_value(bit ? 1 : 0); }
  void feed_value(std::int64_t value) {
    ++t_;
    series_.append(t_, value);
  }
  void skip_zeros(std::uint64_t n) override { t_ += n; }

  std::int64_t output() const override {
    if (t_ == 0) return 0;
    const int k = internal::floor_log2(t_);
    std::int64_t out = 0;
    for (int i = 0; i < k; ++i) {
      const std::uint64_t lo = std::uint64_t{1} << i;
      NoiseStream draw = anchors_.substream(static_cast<std::uint64_t>(i));
      out += series_.range_sum(lo, 2 * lo - 1) + draw.int_laplace(2.0 / epsilon_);
    }
    const std::uint64_t base = std::uint64_t{1} << k;
    const double sigma = static_cast<double>(k + 1) / (epsilon_ / 2.0);
    out += internal::dyadic_prefix(series_, base, t_ - base + 1, sigma,
                                   levels_.substream(static_cast<std::uint64_t>(k)));
    return out;
  }

  std::int64_t true_count() const override { return series_.total(); }
  std::uint64_t time() const override { return t_; }
  double epsilon() const { return epsilon_; }

  std::vector<LedgerEntry> ledger() const override {
    std::vector<LedgerEntry> out;
    for (int k = 0; t_ > 0 && k <= internal::floor_log2(t_); ++k) {
      const std::uint64_t lo = std::uint64_t{1} << k;
      out.push_back({"hybrid-block", lo, 2 * lo - 1, epsilon_ / 2.0});
      out.push_back({"hybrid-binary", lo, 2 * lo - 1, epsilon_ / 2.0});
    }
    return out;
  }

 private:
  double epsilon_;
  NoiseStream anchors_;
  NoiseStream levels_;
  std::uint64_t t_ = 0;
  internal::ValueSeries series_;
};

enum class SegmentChecks {
  // One fresh comparison draw per check, as written.
  kPerStep,
  // Between changes of the segment count every check has the same failure
  // probability, so the next failing check is sampled directly as a
  // geometric time. Same output law, O(1) per run of zeros.
  kGeometricSkip,
};

enum class CarryUpdate {
  // Private prefix of sealed segments := current subroutine output.
  kReplace,
  // Literal accumulation of successive subroutine outputs.
  kAccumulate,
};

struct SparseOptions {
  SegmentChecks checks = SegmentChecks::kGeometricSkip;
  CarryUpdate update = CarryUpdate::kReplace;
};

// Finite-horizon sparse counter. Time is cut into segments; a segment seals
// when its count plus fresh Lap_Z(2/eps) exceeds a private threshold
// T0 + Lap_Z(2/eps), T0 = 9 ln(T) / eps. Each sealed segment's count is fed
// as one item to a hybrid counter with eps/2; the output stays frozen at the
// private sum of sealed segments while a segment is open.
class SparseCounter final : public OnlineCounter {
 public:
  SparseCounter(std::uint64_t horizon, double epsilon, NoiseStream stream,
                SparseOptions options = {})
      : horizon_(horizon),
        epsilon_(epsilon),
        options_(options),
        stream_(stream),
        sub_(epsilon / 2.0, stream.substream(1)) {
    if (horizon == 0) throw ParameterError("SparseCounter: horizon must be >= 1");
    if (!(epsilon > 0.0)) throw ParameterError("SparseCounter: epsilon must be > 0");
    base_threshold_ = threshold_for(horizon, epsilon);
    open_segment();
    if (options_.checks == SegmentChecks::kGeometricSkip) schedule_failure(1);
  }

  static double threshold_for(std::uint64_t horizon, double epsilon) {
    return 9.0 * std::log(static_cast<double>(horizon)) / epsilon;
  }

  void feed(bool bit) override {
    if (t_ >= horizon_) throw StateError("SparseCounter: fed beyond horizon");
    ++t_;
    if (options_.checks == SegmentChecks::kPerStep) {
      while (segment_ + stream_.int_laplace(compare_law()) > threshold_) seal();
    } else {
      while (next_failure_ <= t_) {
        seal();
        schedule_failure(t_);
      }
    }
    if (bit) {
      ++segment_;
      ++ones_;
      if (options_.checks == SegmentChecks::kGeometricSkip) schedule_failure(t_ + 1);
    }
  }

  void skip_zeros(std::uint64_t n) override {
    if (n > horizon_ - t_) throw StateError("SparseCounter: fed beyond horizon");
    if (options_.checks == SegmentChecks::kPerStep) {
      OnlineCounter::skip_zeros(n);
      return;
    }
    const std::uint64_t target = t_ + n;
    while (next_failure_ <= target) {
      const std::uint64_t at = next_failure_;
      seal();
      schedule_failure(at);
    }
    t_ = target;
  }

  std::int64_t output() const override { return carry_; }
  std::int64_t true_count() const override { return ones_; }
  std::uint64_t time() const override { return t_; }
  std::uint64_t horizon() const { return horizon_; }
  double base_threshold() const { return base_threshold_; }

  std::vector<LedgerEntry> ledger() const override {
    return {{"sparse-segmentation", 1, horizon_, epsilon_ / 2.0},
            {"sparse-subroutine", 1, horizon_, epsilon_ / 2.0}};
  }

  // Instrumentation.
  std::int64_t open_segment_count() const { return segment_; }
  const std::vector<std::int64_t>& sealed_segments() const { return sealed_; }
  std::uint64_t noise_draws() const { return stream_.draws(); }
  std::uint64_t max_abs_draw() const { return stream_.max_abs_draw(); }

 private:
  IntLaplace compare_law() const { return IntLaplace(2.0 / epsilon_); }

  void open_segment() {
    segment_ = 0;
    threshold_ = base_threshold_ + static_cast<double>(stream_.int_laplace(compare_law()));
  }

  void seal() {
    sealed_.push_back(segment_);
    sub_.feed_value(segment_);
    if (options_.update == CarryUpdate::kReplace) {
      carry_ = sub_.output();
    } else {
      carry_ += sub_.output();
    }
    open_segment();
  }

  // The next check happens at time `from`; draw the time of the first check
  // that fails while the segment count stays as it is now.
  void schedule_failure(std::uint64_t from) {
    const double slack = std::floor(threshold_ - static_cast<double>(segment_));
    double q;
    if (!stream_.noise_enabled()) {
      q = slack < 0.0 ? 1.0 : 0.0;
    } else if (slack >= 0x1p62) {
      q = 0.0;
    } else if (slack <= -0x1p62) {
      q = 1.0;
    } else {
      q = compare_law().upper_tail(static_cast<std::int64_t>(slack) + 1);
    }
    const std::uint64_t trials = stream_.trials_until_success(q);
    next_failure_ = trials == NoiseStream::kNever || trials > horizon_
                        ? NoiseStream::kNever
                        : from + trials - 1;
  }

  std::uint64_t horizon_;
  double epsilon_;
  SparseOptions options_;
  NoiseStream stream_;
  HybridCounter sub_;
  double base_threshold_ = 0.0;
  double threshold_ = 0.0;
  std::int64_t segment_ = 0;
  std::int64_t carry_ = 0;
  std::int64_t ones_ = 0;
  std::uint64_t t_ = 0;
  std::uint64_t next_failure_ = NoiseStream::kNever;
  std::vector<std::int64_t> sealed_;
};

// Which noise sources of an inhomogeneous counter are live. Lets tests
// attribute error to one slot at a time.
struct NoiseSlots {
  bool segments = true;
  bool carry = true;
};

// Level-structured sparse counter. Bits before 2^r0 are ignored. Level r
// covers [2^r, 2^(r+1)) and runs a fresh sparse counter with horizon 2^r
// and eps_r / 2; at the level's end the carry absorbs the level's exact sum
// plus Lap_Z(2 / eps_r). Output N_t = carry + c_t for t >= 2^r0.
//
// `Schedule` maps a level r >= r0 to eps_r > 0.
template <class Schedule>
class InhomogeneousCounter final : public OnlineCounter {
 public:
  InhomogeneousCounter(int start_level, Schedule schedule, NoiseStream stream,
                       SparseOptions options = {}, NoiseSlots slots = {})
      : start_level_(start_level),
        schedule_(std::move(schedule)),
        stream_(stream),
        options_(options),
        slots_(slots) {
    if (start_level < 0 || start_level > 62) {
      throw ParameterError("InhomogeneousCounter: starting level out of range");
    }
  }

  std::uint64_t start_time() const { return std::uint64_t{1} << start_level_; }
  int start_level() const { return start_level_; }

  void feed(bool bit) override {
    ++t_;
    if (bit) ++ones_;
    if (t_ < start_time()) return;
    roll_to(t_);
    sparse_->feed(bit);
    if (bit) ++level_sum_;
  }

  void skip_zeros(std::uint64_t n) override {
    const std::uint64_t target = t_ + n;
    while (t_ < target) {
      if (t_ + 1 < start_time()) {
        t_ = std::min(target, start_time() - 1);
        continue;
      }
      roll_to(t_ + 1);
      const std::uint64_t level_last = (std::uint64_t{2} << level_) - 1;
      const std::uint64_t stop = std::min(target, level_last);
      sparse_->skip_zeros(stop - t_);
      t_ = stop;
    }
  }

  std::int64_t output() const override {
    if (t_ < start_time()) {
      throw StateError("InhomogeneousCounter: no output before time 2^r0 = " +
                       std::to_string(start_time()));
    }
    return carry_ + sparse_->output();
  }

  std::int64_t true_count() const override { return ones_; }
  std::uint64_t time() const override { return t_; }
  int level() const { return level_; }
  std::int64_t carry() const { return carry_; }
  const SparseCounter* active_level() const { return sparse_ ? &*sparse_ : nullptr; }

  std::vector<LedgerEntry> ledger() const override {
    std::vector<LedgerEntry> out;
    if (!sparse_) return out;
    for (int r = start_level_; r <= level_; ++r) {
      const double eps = schedule_(r);
      const std::uint64_t lo = std::uint64_t{1} << r;
      out.push_back({"inhom-sparse", lo, 2 * lo - 1, eps / 2.0});
      out.push_back({"inhom-carry", lo, 2 * lo - 1, eps / 2.0});
    }
    return out;
  }

 private:
  void open_level(int r) {
    const double eps = schedule_(r);
    if (!(eps > 0.0)) {
      throw ParameterError("InhomogeneousCounter: schedule must be positive at level " +
                           std::to_string(r));
    }
    level_ = r;
    level_eps_ = eps;
    level_sum_ = 0;
    NoiseStream s = stream_.substream(2 * static_cast<std::uint64_t>(r));
    if (!slots_.segments) s = s.with_noise(false);
    sparse_.emplace(std::uint64_t{1} << r, eps / 2.0, s, options_);
  }

  // Close every level that ends before time u.
  void roll_to(std::uint64_t u) {
    if (!sparse_) open_level(start_level_);
    while (u > (std::uint64_t{2} << level_) - 1) {
      NoiseStream draw = stream_.substream(2 * static_cast<std::uint64_t>(level_) + 1);
      if (!slots_.carry) draw = draw.with_noise(false);
      carry_ += level_sum_ + draw.int_laplace(2.0 / level_eps_);
      open_level(level_ + 1);
    }
  }

  int start_level_;
  Schedule schedule_;
  NoiseStream stream_;
  SparseOptions options_;
  NoiseSlots slots_;
  std::optional<SparseCounter> sparse_;
  int level_ = 0;
  double level_eps_ = 0.0;
  std::int64_t level_sum_ = 0;
  std::int64_t carry_ = 0;
  std::int64_t ones_ = 0;
  std::uint64_t t_ = 0;
};

}  // namespace streamsyn

#endif  // STREAMSYN_COUNTERS_HPP_
