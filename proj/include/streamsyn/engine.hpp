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

#ifndef STREAMSYN_ENGINE_HPP_
#define STREAMSYN_ENGINE_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "streamsyn/consistency.hpp"
#include "streamsyn/counters.hpp"
#include "streamsyn/errors.hpp"
#include "streamsyn/noise.hpp"
#include "streamsyn/partition.hpp"
#include "streamsyn/schedule.hpp"

namespace streamsyn {

// Flat list of points in [0,1]^d.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / static_cast<std::size_t>(dim_); }
  bool empty() const { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  void push_back(std::span<const double> x) { coords_.insert(coords_.end(), x.begin(), x.end()); }
  void reserve(std::size_t n) { coords_.reserve(n * static_cast<std::size_t>(dim_)); }
  const std::vector<double>& coords() const { return coords_; }

  static PointSet from_rows(const std::vector<std::vector<double>>& rows) {
    PointSet s(rows.empty() ? 1 : static_cast<int>(rows.front().size()));
    for (const auto& r : rows) s.push_back(r);
    return s;
  }

 private:
  int dim_ = 0;
  std::vector<double> coords_;
};

struct SyntheticDataset {
  std::uint64_t time = 0;
  PointSet points;
};

struct EngineConfig {
  int dim = 2;
  double epsilon = 1.0;
  std::optional<Mode> mode;  // default: replay-hybrid for d = 1, inhom-sparse otherwise
  std::uint64_t seed = 0;
  bool noise_enabled = true;
  SparseOptions sparse;
  // Keep the 1-bit times seen by every counter (audit instrumentation).
  // Replay-hybrid mode always keeps them; it replays from them.
  bool record_inputs = false;
};

// Online private synthetic data. At time t the tree has depth
// r = floor(log2 t); every region of level 1..r owns a private counter of
// the points it contains, and the released dataset places the consistent
// leaf counts at leaf centers.
class Engine {
 public:
  explicit Engine(EngineConfig cfg)
      : cfg_(cfg),
        schedule_(cfg.epsilon, cfg.dim, cfg.mode.value_or(default_mode(cfg.dim))),
        tree_(cfg.dim),
        noise_(NoiseStream(RngSeed{cfg.seed, static_cast<std::uint64_t>(schedule_.mode())},
                           cfg.noise_enabled)),
        points_(cfg.dim) {
    if (schedule_.mode() == Mode::kInhomSparse && cfg.dim < 2) {
      throw ParameterError("inhom-sparse mode needs d >= 2 (its level budgets vanish at d = 1)");
    }
  }

  const EngineConfig& config() const { return cfg_; }
  const PrivacySchedule& schedule() const { return schedule_; }
  Mode mode() const { return schedule_.mode(); }
  std::uint64_t time() const { return t_; }
  int depth() const { return tree_.depth(); }
  int dim() const { return cfg_.dim; }
  const PointSet& history() const { return points_; }

  // Consumes x_t. Rejects out-of-domain points without changing state.
  void ingest(std::span<const double> x) {
    check_point(x, cfg_.dim);
    ++t_;
    points_.push_back(x);
    while (t_ >= (std::uint64_t{2} << tree_.depth())) grow();
    std::uint64_t h = 1;
    for (int j = 1; j <= tree_.depth(); ++j) {
      h = 2 * h + static_cast<std::uint64_t>(split_bit(x, j - 1));
      Slot& slot = tree_.at_heap(h);
      OnlineCounter& c = slot.counter();
      c.skip_zeros(t_ - 1 - c.time());
      c.feed(true);
      if (recording()) slot.ones.push_back(t_);
    }
  }

  SyntheticDataset step(std::span<const double> x) {
    ingest(x);
    return synthetic();
  }

  // Heap-ordered private counts N_theta for levels 1..r; entry 1 holds t.
  std::vector<std::int64_t> noisy_counts() {
    const std::size_t n = std::size_t{2} << tree_.depth();
    std::vector<std::int64_t> out(n, 0);
    out[1] = static_cast<std::int64_t>(t_);
    for (std::size_t h = 2; h < n; ++h) {
      OnlineCounter& c = tree_.at_heap(h).counter();
      c.skip_zeros(t_ - c.time());
      out[h] = c.output();
    }
    return out;
  }

  std::vector<std::int64_t> consistent_counts() {
    return make_consistent(noisy_counts(), static_cast<std::int64_t>(t_), tree_.depth());
  }

  // Heap-ordered true counts n_theta at the current time.
  std::vector<std::int64_t> true_counts() const {
    const std::size_t n = std::size_t{2} << tree_.depth();
    std::vector<std::int64_t> out(n, 0);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      std::uint64_t h = 1;
      ++out[1];
      for (int j = 1; j <= tree_.depth(); ++j) {
        h = 2 * h + static_cast<std::uint64_t>(split_bit(points_[i], j - 1));
        ++out[h];
      }
    }
    return out;
  }

  // m_theta copies of each leaf's center.
  SyntheticDataset emit(std::span<const std::int64_t> consistent) const {
    SyntheticDataset out{t_, PointSet(cfg_.dim)};
    out.points.reserve(t_);
    const int r = tree_.depth();
    const std::uint64_t first = std::uint64_t{1} << r;
    for (std::uint64_t h = first; h < 2 * first; ++h) {
      const std::int64_t m = consistent[h];
      if (m <= 0) continue;
      const std::vector<double> c = make_region(RegionIndex::from_heap(h), cfg_.dim).center();
      for (std::int64_t k = 0; k < m; ++k) out.points.push_back(c);
    }
    return out;
  }

  SyntheticDataset synthetic() { return emit(consistent_counts()); }

  // Times of the 1-bits observed by a region's counter (instrumentation).
  const std::vector<std::uint64_t>& region_inputs(std::uint64_t heap) const {
    if (!recording()) throw StateError("region_inputs: engine was built without record_inputs");
    return tree_.at_heap(heap).ones;
  }
  std::vector<LedgerEntry> region_ledger(std::uint64_t heap) {
    OnlineCounter& c = tree_.at_heap(heap).counter();
    c.skip_zeros(t_ - c.time());
    return c.ledger();
  }
  static std::uint64_t creation_time(std::uint64_t heap) {
    return std::uint64_t{1} << RegionIndex::from_heap(heap).level();
  }

  nlohmann::json snapshot_json() {
    const auto consistent = consistent_counts();
    nlohmann::json regions = nlohmann::json::array();
    for (std::uint64_t h = 2; h < consistent.size(); ++h) {
      const auto ledger = region_ledger(h);
      double total = 0.0;
      for (const auto& e : ledger) total += e.epsilon;
      regions.push_back({{"index", RegionIndex::from_heap(h).str()},
                         {"ledger_total", total},
                         {"charge_now", charge_at(ledger, t_)},
                         {"consistent", consistent[h]}});
    }
    return {{"time", t_},
            {"depth", tree_.depth()},
            {"mode", to_string(mode())},
            {"epsilon", cfg_.epsilon},
            {"dim", cfg_.dim},
            {"regions", std::move(regions)}};
  }

  // Bit k of the path of x: the (k / d)-th binary digit of coordinate k mod d,
  // with the closed upper boundary mapped to 1.
  int split_bit(std::span<const double> x, int k) const {
    const double v = x[static_cast<std::size_t>(k % cfg_.dim)];
    if (v >= 1.0) return 1;
    const double scaled = std::ldexp(v, k / cfg_.dim + 1);
    return static_cast<int>(static_cast<std::uint64_t>(scaled) & 1u);
  }

 private:
  // Counters live inline in the heap-ordered slot array.
  using InhomCounter = InhomogeneousCounter<GeometricLevelSchedule>;
  struct Slot {
    std::variant<std::monostate, InhomCounter, HybridCounter> state;
    std::vector<std::uint64_t> ones;

    OnlineCounter& counter() {
      if (auto* c = std::get_if<InhomCounter>(&state)) return *c;
      return std::get<HybridCounter>(state);
    }
  };

  bool recording() const { return cfg_.record_inputs || mode() == Mode::kReplayHybrid; }

  void grow() {
    const std::vector<RegionIndex> created = tree_.refine();
    const int r = tree_.depth();
    for (const RegionIndex& idx : created) {
      Slot& slot = tree_.at(idx);
      const NoiseStream stream = noise_.substream(idx.heap());
      if (mode() == Mode::kInhomSparse) {
        slot.state.emplace<InhomCounter>(r, schedule_.level_schedule(r), stream, cfg_.sparse);
        slot.counter().skip_zeros(t_ - 1);
      } else {
        slot.state.emplace<HybridCounter>(schedule_.replay_epsilon(r), stream);
      }
    }
    if (mode() == Mode::kReplayHybrid) {
      // History 1..t-1 replayed from the parent's inputs.
      for (const RegionIndex& idx : created) {
        Slot& slot = tree_.at(idx);
        const auto& parent_ones =
            idx.level() == 1 ? all_times() : tree_.at(idx.parent()).ones;
        for (std::uint64_t s : parent_ones) {
          if (s >= t_) break;
          if (split_bit(points_[s - 1], idx.level() - 1) != idx.bit(idx.level() - 1)) continue;
          OnlineCounter& c = slot.counter();
          c.skip_zeros(s - 1 - c.time());
          c.feed(true);
          slot.ones.push_back(s);
        }
      }
    }
  }

  const std::vector<std::uint64_t>& all_times() {
    while (all_times_.size() < t_) all_times_.push_back(all_times_.size() + 1);
    return all_times_;
  }

  EngineConfig cfg_;
  PrivacySchedule schedule_;
  PartitionTree<Slot> tree_;
  NoiseStream noise_;
  PointSet points_;
  std::vector<std::uint64_t> all_times_;
  std::uint64_t t_ = 0;
};

}  // namespace streamsyn

#endif  // STREAMSYN_ENGINE_HPP_
