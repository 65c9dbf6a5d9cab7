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

#ifndef STREAMSYN_HARNESS_AUDIT_HPP_
#define STREAMSYN_HARNESS_AUDIT_HPP_

#include <algorithm>
#include <bit>
#include <cstdint>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "streamsyn/engine.hpp"
#include "streamsyn/errors.hpp"

namespace streamsyn::harness {

struct AuditReport {
  std::uint64_t t_diff = 0;  // 1-based; 0 when the streams are identical
  std::uint64_t length = 0;
  int depth = 0;
  std::vector<std::uint64_t> influenced;  // heap indices, sorted
  std::vector<std::uint64_t> predicted;   // heap indices, sorted
  double path_charge[2] = {0.0, 0.0};     // summed epsilon at t_diff along each path
  double epsilon = 0.0;

  bool influence_matches() const { return influenced == predicted; }
  bool ledger_ok() const {
    constexpr double kSlack = 1e-12;
    return path_charge[0] <= epsilon / 2 + kSlack && path_charge[1] <= epsilon / 2 + kSlack;
  }
  bool ok() const { return influence_matches() && ledger_ok(); }
};

// Index of the single differing position (1-based), 0 for identical
// streams. Throws ValidationError unless the streams are neighbors.
inline std::uint64_t neighbor_position(const PointSet& a, const PointSet& b) {
  if (a.dim() != b.dim()) throw ValidationError("audit: streams have different dimensions");
  if (a.size() != b.size()) throw ValidationError("audit: streams have different lengths");
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::equal(a[i].begin(), a[i].end(), b[i].begin())) continue;
    if (pos != 0) throw ValidationError("audit: streams differ in more than one position");
    pos = i + 1;
  }
  return pos;
}

// Runs both streams through engines with identical seeds and compares the
// bit streams seen by every counter. The prediction: only regions holding
// exactly one of the two differing points, and only those whose counter
// observes time t_diff (inhom-sparse: created at 2^j <= t_diff; replay-hybrid:
// every level, through the replayed history).
inline AuditReport run_audit(const EngineConfig& cfg, const PointSet& a, const PointSet& b) {
  AuditReport rep;
  rep.t_diff = neighbor_position(a, b);
  rep.length = a.size();
  rep.epsilon = cfg.epsilon;
  if (a.size() == 0) return rep;

  EngineConfig ec = cfg;
  ec.record_inputs = true;
  Engine ea(ec), eb(ec);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ea.ingest(a[i]);
    eb.ingest(b[i]);
  }
  rep.depth = ea.depth();
  const std::uint64_t regions = std::uint64_t{2} << rep.depth;
  for (std::uint64_t h = 2; h < regions; ++h) {
    if (ea.region_inputs(h) != eb.region_inputs(h)) rep.influenced.push_back(h);
  }
  if (rep.t_diff == 0) return rep;

  const std::span<const double> x = a[rep.t_diff - 1];
  const std::span<const double> y = b[rep.t_diff - 1];
  const int top = ea.mode() == Mode::kInhomSparse
                      ? std::min(rep.depth, static_cast<int>(std::bit_width(rep.t_diff)) - 1)
                      : rep.depth;
  std::set<std::uint64_t> predicted;
  std::uint64_t hx = 1, hy = 1;
  for (int j = 1; j <= rep.depth; ++j) {
    hx = 2 * hx + static_cast<std::uint64_t>(ea.split_bit(x, j - 1));
    hy = 2 * hy + static_cast<std::uint64_t>(ea.split_bit(y, j - 1));
    if (j <= top && hx != hy) {
      predicted.insert(hx);
      predicted.insert(hy);
    }
    rep.path_charge[0] += charge_at(ea.region_ledger(hx), rep.t_diff);
    rep.path_charge[1] += charge_at(ea.region_ledger(hy), rep.t_diff);
  }
  rep.predicted.assign(predicted.begin(), predicted.end());
  return rep;
}

inline void write_audit(std::ostream& out, const AuditReport& rep) {
  auto list = [&](const std::vector<std::uint64_t>& hs) {
    out << '[';
    for (std::size_t i = 0; i < hs.size(); ++i) {
      out << (i ? " " : "") << RegionIndex::from_heap(hs[i]).str();
    }
    out << ']';
  };
  out << "t_diff=" << rep.t_diff << " length=" << rep.length << " depth=" << rep.depth << "\n";
  out << "influenced=";
  list(rep.influenced);
  out << "\npredicted=";
  list(rep.predicted);
  out << "\npath_charge=" << rep.path_charge[0] << "," << rep.path_charge[1]
      << " limit=" << rep.epsilon / 2 << "\n";
  out << "influence_matches=" << (rep.influence_matches() ? "yes" : "no")
      << " ledger_ok=" << (rep.ledger_ok() ? "yes" : "no") << "\n";
}

}  // namespace streamsyn::harness

#endif  // STREAMSYN_HARNESS_AUDIT_HPP_
