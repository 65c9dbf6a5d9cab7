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

#ifndef STREAMSYN_PARTITION_HPP_
#define STREAMSYN_PARTITION_HPP_

#include <cmath>
#include <cstdint>
#include <bit>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "streamsyn/errors.hpp"

namespace streamsyn {

// Address of a cell of the binary hierarchical partition: a bit string
// theta, read from the root. Stored as (level, value) with the first bit in
// the most significant position.
class RegionIndex {
 public:
  RegionIndex() = default;
  RegionIndex(int level, std::uint64_t bits) : level_(level), bits_(bits) {}

  static RegionIndex root() { return {}; }

  // Heap numbering: root 1, children of h are 2h and 2h + 1.
  static RegionIndex from_heap(std::uint64_t heap) {
    const int level = static_cast<int>(std::bit_width(heap)) - 1;
    return {level, heap ^ (std::uint64_t{1} << level)};
  }

  static RegionIndex parse(std::string_view s) {
    std::uint64_t bits = 0;
    for (char c : s) {
      if (c != '0' && c != '1') throw ParameterError("RegionIndex: bad bit string");
      bits = (bits << 1) | static_cast<std::uint64_t>(c - '0');
    }
    return {static_cast<int>(s.size()), bits};
  }

  int level() const { return level_; }
  std::uint64_t bits() const { return bits_; }
  std::uint64_t heap() const { return (std::uint64_t{1} << level_) | bits_; }
  int bit(int k) const { return static_cast<int>((bits_ >> (level_ - 1 - k)) & 1); }

  RegionIndex child(int b) const { return {level_ + 1, (bits_ << 1) | static_cast<std::uint64_t>(b)}; }
  RegionIndex parent() const { return {level_ - 1, bits_ >> 1}; }
  bool is_prefix_of(const RegionIndex& other) const {
    return level_ <= other.level_ && (other.bits_ >> (other.level_ - level_)) == bits_;
  }

  std::string str() const {
    std::string s(static_cast<std::size_t>(level_), '0');
    for (int k = 0; k < level_; ++k) s[static_cast<std::size_t>(k)] = static_cast<char>('0' + bit(k));
    return s;
  }

  friend bool operator==(const RegionIndex&, const RegionIndex&) = default;
  friend auto operator<=>(const RegionIndex& a, const RegionIndex& b) {
    if (a.level_ != b.level_) return a.level_ <=> b.level_;
    return a.bits_ <=> b.bits_;
  }

 private:
  int level_ = 0;
  std::uint64_t bits_ = 0;
};

// Axis-aligned cell. Split k halves axis k mod d. Intervals are half-open,
// except that the upper-most cell on each axis is closed at 1.
struct Region {
  RegionIndex index;
  std::vector<double> lower;
  std::vector<double> upper;

  int dim() const { return static_cast<int>(lower.size()); }
  int split_axis() const { return index.level() % dim(); }

  double volume() const {
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= upper[static_cast<std::size_t>(a)] - lower[static_cast<std::size_t>(a)];
    return v;
  }

  // l-infinity diameter, 2^-floor(level / d).
  double diameter() const { return std::ldexp(1.0, -(index.level() / dim())); }

  bool contains(std::span<const double> x) const {
    for (int a = 0; a < dim(); ++a) {
      const auto i = static_cast<std::size_t>(a);
      const double v = x[i];
      if (v < lower[i]) return false;
      if (upper[i] == 1.0 ? v > 1.0 : v >= upper[i]) return false;
    }
    return true;
  }

  std::vector<double> center() const {
    std::vector<double> c(lower.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (lower[i] + upper[i]);
    return c;
  }
};

inline double region_diameter(int level, int dim) { return std::ldexp(1.0, -(level / dim)); }

inline void check_point(std::span<const double> x, int dim) {
  if (static_cast<int>(x.size()) != dim) {
    throw DomainError("point has dimension " + std::to_string(x.size()) + ", expected " +
                      std::to_string(dim));
  }
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("point coordinate outside [0,1]");
  }
}

inline Region make_region(const RegionIndex& index, int dim) {
  Region r{index, std::vector<double>(static_cast<std::size_t>(dim), 0.0),
           std::vector<double>(static_cast<std::size_t>(dim), 1.0)};
  for (int k = 0; k < index.level(); ++k) {
    const auto a = static_cast<std::size_t>(k % dim);
    const double mid = 0.5 * (r.lower[a] + r.upper[a]);
    (index.bit(k) ? r.lower[a] : r.upper[a]) = mid;
  }
  return r;
}

// Cell at `level` containing x. Bit k is 0 iff coordinate k mod d lies in
// the lower half of its current interval.
inline RegionIndex locate(std::span<const double> x, int dim, int level) {
  check_point(x, dim);
  if (level < 0 || level > 62) throw ParameterError("locate: level out of range");
  thread_local std::vector<double> lo, hi;
  lo.assign(static_cast<std::size_t>(dim), 0.0);
  hi.assign(static_cast<std::size_t>(dim), 1.0);
  std::uint64_t bits = 0;
  for (int k = 0; k < level; ++k) {
    const auto a = static_cast<std::size_t>(k % dim);
    const double mid = 0.5 * (lo[a] + hi[a]);
    const bool upper = x[a] >= mid;
    bits = (bits << 1) | (upper ? 1u : 0u);
    (upper ? lo[a] : hi[a]) = mid;
  }
  return {level, bits};
}

// Breadth-first growing partition tree of [0,1]^d with one attachment per
// region, stored in heap order (index 1 is the root).
template <class Attachment>
class PartitionTree {
 public:
  explicit PartitionTree(int dim) : dim_(dim) {
    if (dim < 1) throw ParameterError("PartitionTree: dimension must be >= 1");
    levels_.emplace_back(1);
  }

  int dim() const { return dim_; }
  int depth() const { return depth_; }
  std::uint64_t region_count() const { return (std::uint64_t{2} << depth_) - 1; }

  // Adds every child of the current leaves; returns them in breadth-first
  // (lexicographic) order.
  std::vector<RegionIndex> refine() {
    if (depth_ >= 62) throw StateError("PartitionTree: maximum depth reached");
    ++depth_;
    levels_.emplace_back(std::size_t{1} << depth_);
    std::vector<RegionIndex> created;
    created.reserve(std::size_t{1} << depth_);
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << depth_); ++b) created.emplace_back(depth_, b);
    return created;
  }

  RegionIndex locate(std::span<const double> x, int level) const {
    if (level > depth_) throw ParameterError("locate: level exceeds tree depth");
    return streamsyn::locate(x, dim_, level);
  }

  Region region(const RegionIndex& idx) const { return make_region(idx, dim_); }
  static std::uint64_t creation_time(const RegionIndex& idx) {
    return std::uint64_t{1} << idx.level();
  }

  Attachment& at(const RegionIndex& idx) {
    return levels_[static_cast<std::size_t>(idx.level())][static_cast<std::size_t>(idx.bits())];
  }
  const Attachment& at(const RegionIndex& idx) const {
    return levels_[static_cast<std::size_t>(idx.level())][static_cast<std::size_t>(idx.bits())];
  }
  Attachment& at_heap(std::uint64_t h) { return at(RegionIndex::from_heap(h)); }
  const Attachment& at_heap(std::uint64_t h) const { return at(RegionIndex::from_heap(h)); }

  nlohmann::json to_json() const {
    nlohmann::json regions = nlohmann::json::array();
    for (std::uint64_t h = 1; h <= region_count(); ++h) {
      const Region r = region(RegionIndex::from_heap(h));
      regions.push_back({{"index", r.index.str()},
                         {"lower", r.lower},
                         {"upper", r.upper},
                         {"creation_time", creation_time(r.index)}});
    }
    return {{"dim", dim_}, {"depth", depth_}, {"regions", std::move(regions)}};
  }

 private:
  int dim_;
  int depth_ = 0;
  // One array per level, so refining never moves existing attachments.
  std::vector<std::vector<Attachment>> levels_;
};

}  // namespace streamsyn

#endif  // STREAMSYN_PARTITION_HPP_
