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

#ifndef STREAMSYN_HARNESS_PERF_HPP_
#define STREAMSYN_HARNESS_PERF_HPP_

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <ostream>
#include <vector>

#include "streamsyn/engine.hpp"
#include "streamsyn/errors.hpp"
#include "streamsyn/harness/bench.hpp"
#include "streamsyn/harness/streams.hpp"

namespace streamsyn::harness {

struct PerfConfig {
  std::vector<int> dims{2};
  std::uint64_t tmin = 1u << 10;
  std::uint64_t tmax = 1u << 17;
  int repeats = 3;
  double epsilon = 1.0;
  std::uint64_t seed = 0;
  double max_doubling_ratio = 2.6;
  double max_dim_ratio = 6.0;  // slowest / fastest dimension at tmax, per 4x in d
};

struct PerfSeries {
  int dim = 0;
  std::vector<std::uint64_t> t;
  std::vector<double> seconds;  // cumulative, min over repeats
  std::vector<double> ratios;   // seconds[k] / seconds[k-1]

  double max_ratio() const {
    return ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
  }
};

struct PerfReport {
  PerfConfig config;
  std::vector<PerfSeries> series;

  bool doubling_ok() const {
    for (const auto& s : series) {
      if (s.max_ratio() > config.max_doubling_ratio) return false;
    }
    return true;
  }
  // Time at tmax of dimension `hi` over dimension `lo`.
  double dim_ratio(int lo, int hi) const {
    const PerfSeries* a = nullptr;
    const PerfSeries* b = nullptr;
    for (const auto& s : series) {
      if (s.dim == lo) a = &s;
      if (s.dim == hi) b = &s;
    }
    if (!a || !b) throw ParameterError("perf: dimension not measured");
    return b->seconds.back() / a->seconds.back();
  }
};

// Cumulative wall time of ingesting t points and releasing the synthetic
// dataset at every power of two up to t.
inline PerfSeries time_dimension(const PerfConfig& cfg, int dim) {
  PerfSeries s;
  s.dim = dim;
  for (std::uint64_t t = cfg.tmin; t <= cfg.tmax; t *= 2) s.t.push_back(t);
  s.seconds.assign(s.t.size(), std::numeric_limits<double>::infinity());

  StreamSpec spec;
  spec.dim = dim;
  spec.seed = derive_key(cfg.seed, static_cast<std::uint64_t>(dim));
  const PointSet points = PointGenerator(spec).take(cfg.tmax);
  using Clock = std::chrono::steady_clock;
  for (int rep = 0; rep < cfg.repeats; ++rep) {
    EngineConfig ec;
    ec.dim = dim;
    ec.epsilon = cfg.epsilon;
    ec.seed = cfg.seed + static_cast<std::uint64_t>(rep);
    Engine engine(ec);
    std::size_t k = 0;
    std::uint64_t sink = 0;
    const auto start = Clock::now();
    for (std::uint64_t t = 1; t <= cfg.tmax; ++t) {
      engine.ingest(points[t - 1]);
      if (is_power_of_two(t)) sink += engine.synthetic().points.size();
      if (k < s.t.size() && t == s.t[k]) {
        const double el = std::chrono::duration<double>(Clock::now() - start).count();
        s.seconds[k] = std::min(s.seconds[k], el);
        ++k;
      }
    }
    if (sink == 0) throw StateError("perf: empty release");
  }
  for (std::size_t i = 1; i < s.seconds.size(); ++i) s.ratios.push_back(s.seconds[i] / s.seconds[i - 1]);
  return s;
}

inline PerfReport run_perf(const PerfConfig& cfg) {
  if (!is_power_of_two(cfg.tmin) || !is_power_of_two(cfg.tmax) || cfg.tmin > cfg.tmax) {
    throw ParameterError("perf: tmin and tmax must be powers of two with tmin <= tmax");
  }
  if (cfg.repeats < 1) throw ParameterError("perf: repeats must be >= 1");
  PerfReport rep;
  rep.config = cfg;
  for (int d : cfg.dims) {
    if (d < 1) throw ParameterError("perf: dimension must be >= 1");
    rep.series.push_back(time_dimension(cfg, d));
  }
  return rep;
}

// CSV: dim,t,cumulative_seconds,ratio (ratio empty on the first row).
inline void write_perf_csv(std::ostream& out, const PerfReport& rep) {
  out << "dim,t,cumulative_seconds,ratio\n";
  for (const auto& s : rep.series) {
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      out << s.dim << ',' << s.t[i] << ',' << s.seconds[i] << ',';
      if (i > 0) out << s.ratios[i - 1];
      out << '\n';
    }
  }
}

}  // namespace streamsyn::harness

#endif  // STREAMSYN_HARNESS_PERF_HPP_
