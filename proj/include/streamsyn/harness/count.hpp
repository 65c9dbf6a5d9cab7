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

#ifndef STREAMSYN_HARNESS_COUNT_HPP_
#define STREAMSYN_HARNESS_COUNT_HPP_

#include <algorithm>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "streamsyn/counters.hpp"
#include "streamsyn/errors.hpp"
#include "streamsyn/noise.hpp"
#include "streamsyn/schedule.hpp"

namespace streamsyn::harness {

enum class Mechanism { kBinary, kHybrid, kSparse, kInhom };

inline Mechanism parse_mechanism(std::string_view s) {
  if (s == "binary") return Mechanism::kBinary;
  if (s == "hybrid") return Mechanism::kHybrid;
  if (s == "sparse") return Mechanism::kSparse;
  if (s == "inhom") return Mechanism::kInhom;
  throw ParameterError("unknown mechanism '" + std::string(s) + "'");
}

struct CountConfig {
  Mechanism mechanism = Mechanism::kHybrid;
  double epsilon = 1.0;
  std::uint64_t horizon = 0;  // binary / sparse; 0 means the stream length
  int start_level = 0;        // inhom
  double alpha = 1.0;         // inhom: eps_r = epsilon * alpha^(r0 - r)
  std::uint64_t seed = 0;
  bool noise_enabled = true;
  SparseOptions sparse;
};

struct CountRow {
  std::uint64_t t = 0;
  std::int64_t private_count = 0;
  std::int64_t true_count = 0;
};

inline std::unique_ptr<OnlineCounter> make_counter(const CountConfig& cfg,
                                                   std::uint64_t length) {
  const NoiseStream stream(RngSeed{cfg.seed, static_cast<std::uint64_t>(cfg.mechanism)},
                           cfg.noise_enabled);
  const std::uint64_t horizon = cfg.horizon == 0 ? std::max<std::uint64_t>(length, 1) : cfg.horizon;
  switch (cfg.mechanism) {
    case Mechanism::kBinary:
      return std::make_unique<BinaryCounter>(horizon, cfg.epsilon, stream);
    case Mechanism::kHybrid:
      return std::make_unique<HybridCounter>(cfg.epsilon, stream);
    case Mechanism::kSparse:
      return std::make_unique<SparseCounter>(horizon, cfg.epsilon, stream, cfg.sparse);
    case Mechanism::kInhom:
      if (!(cfg.alpha > 0.0) || !(cfg.epsilon > 0.0)) {
        throw ParameterError("inhom: epsilon and alpha must be positive");
      }
      return std::make_unique<InhomogeneousCounter<GeometricLevelSchedule>>(
          cfg.start_level, GeometricLevelSchedule{cfg.epsilon, cfg.alpha, cfg.start_level},
          stream, cfg.sparse);
  }
  throw ParameterError("unknown mechanism");
}

// One row per time step with a defined output; the inhomogeneous counter
// starts reporting at 2^r0.
inline std::vector<CountRow> run_count(const CountConfig& cfg, const std::vector<bool>& bits) {
  const bool finite = cfg.mechanism == Mechanism::kBinary || cfg.mechanism == Mechanism::kSparse;
  if (finite && cfg.horizon != 0 && cfg.horizon < bits.size()) {
    throw ParameterError("count: stream is longer than --horizon");
  }
  auto counter = make_counter(cfg, bits.size());
  const std::uint64_t first =
      cfg.mechanism == Mechanism::kInhom ? std::uint64_t{1} << cfg.start_level : 1;
  std::vector<CountRow> rows;
  for (bool b : bits) {
    counter->feed(b);
    if (counter->time() < first) continue;
    rows.push_back({counter->time(), counter->output(), counter->true_count()});
  }
  return rows;
}

// CSV: t,n_t[,s_t].
inline void write_count_csv(std::ostream& out, const std::vector<CountRow>& rows,
                            bool with_truth) {
  out << "t,n_t" << (with_truth ? ",s_t" : "") << "\n";
  for (const CountRow& r : rows) {
    out << r.t << ',' << r.private_count;
    if (with_truth) out << ',' << r.true_count;
    out << '\n';
  }
}

}  // namespace streamsyn::harness

#endif  // STREAMSYN_HARNESS_COUNT_HPP_
