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

#ifndef STREAMSYN_HARNESS_BENCH_HPP_
#define STREAMSYN_HARNESS_BENCH_HPP_

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "streamsyn/engine.hpp"
#include "streamsyn/errors.hpp"
#include "streamsyn/harness/streams.hpp"
#include "streamsyn/metrics.hpp"

#ifndef STREAMSYN_GIT_DESCRIBE
#define STREAMSYN_GIT_DESCRIBE "unknown"
#endif

namespace streamsyn::harness {

inline std::string build_version() { return STREAMSYN_GIT_DESCRIBE; }

struct BenchConfig {
  EngineConfig engine;
  StreamSpec stream;
  int trials = 20;
  std::uint64_t tmax = 1u << 14;
  std::uint64_t fit_from = 1u << 8;
  std::size_t exact_cap = 2048;
  int threads = 1;
};

struct BenchRow {
  std::uint64_t t = 0;
  int trial = 0;
  std::optional<double> w1_exact;
  double w1_tree_bound = 0.0;
  double lipschitz_gap = 0.0;
  double wall_per_step = 0.0;

  // Exact value when available, the tree bound otherwise.
  double w1() const { return w1_exact ? *w1_exact : w1_tree_bound; }
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t points = 0;
};

struct BenchReport {
  BenchConfig config;
  std::vector<BenchRow> rows;  // sorted by (trial, t)
  std::vector<std::uint64_t> checkpoints;
  std::vector<double> mean_w1;  // per checkpoint
  std::vector<bool> exact;      // per checkpoint: every trial used exact W1
  SlopeFit fit;         // common slope, one intercept per W1 estimator
  SlopeFit pooled_fit;  // single line through the mixed series
};

inline bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Two-sided 97.5% Student-t quantiles, df = 1..30.
inline double t_quantile_975(std::size_t df) {
  static constexpr double kTable[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                      2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                      2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                      2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (df == 0) return std::numeric_limits<double>::infinity();
  return df <= 30 ? kTable[df - 1] : 1.96;
}

// Least squares y = a_g + b x with one intercept per group and a common
// slope b; a 95% interval for b. With a single group this is plain OLS.
inline SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                         const std::vector<int>& group = {}) {
  if (x.size() != y.size() || (!group.empty() && group.size() != x.size())) {
    throw ParameterError("fit_line: size mismatch");
  }
  std::vector<int> g = group.empty() ? std::vector<int>(x.size(), 0) : group;
  std::vector<int> labels = g;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (x.size() < labels.size() + 1) throw ParameterError("fit_line: too few points");

  std::vector<double> mx(labels.size(), 0.0), my(labels.size(), 0.0), cnt(labels.size(), 0.0);
  auto slot = [&](int label) {
    return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), label) -
                                    labels.begin());
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t k = slot(g[i]);
    mx[k] += x[i];
    my[k] += y[i];
    cnt[k] += 1.0;
  }
  for (std::size_t k = 0; k < labels.size(); ++k) {
    mx[k] /= cnt[k];
    my[k] /= cnt[k];
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t k = slot(g[i]);
    sxx += (x[i] - mx[k]) * (x[i] - mx[k]);
    sxy += (x[i] - mx[k]) * (y[i] - my[k]);
  }
  if (!(sxx > 0.0)) throw ParameterError("fit_line: x does not vary within groups");
  SlopeFit f;
  f.points = x.size();
  f.slope = sxy / sxx;
  const std::size_t first = slot(g[0]);
  f.intercept = my[first] - f.slope * mx[first];
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t k = slot(g[i]);
    const double r = y[i] - my[k] - f.slope * (x[i] - mx[k]);
    sse += r * r;
  }
  const std::size_t df = x.size() - labels.size() - 1;
  f.stderr_slope = df == 0 ? 0.0 : std::sqrt(sse / static_cast<double>(df) / sxx);
  const double half = df == 0 ? 0.0 : t_quantile_975(df) * f.stderr_slope;
  f.ci_low = f.slope - half;
  f.ci_high = f.slope + half;
  return f;
}

// One trial: feeds a fresh stream into a fresh engine and evaluates every
// power-of-two checkpoint up to tmax.
inline std::vector<BenchRow> run_trial(const BenchConfig& cfg, int trial) {
  EngineConfig ec = cfg.engine;
  ec.seed = derive_key(cfg.engine.seed, 2 * static_cast<std::uint64_t>(trial));
  StreamSpec ss = cfg.stream;
  ss.dim = ec.dim;
  ss.seed = derive_key(cfg.stream.seed, 2 * static_cast<std::uint64_t>(trial) + 1);
  Engine engine(ec);
  PointGenerator gen(ss);
  const auto queries = builtin_queries(ec.dim, cfg.stream.seed);

  std::vector<BenchRow> rows;
  std::uint64_t next_checkpoint = 1;
  std::uint64_t last_checkpoint = 0;
  double ingest_seconds = 0.0;
  using Clock = std::chrono::steady_clock;
  for (std::uint64_t t = 1; t <= cfg.tmax; ++t) {
    const std::vector<double> x = gen.next();
    const auto start = Clock::now();
    engine.ingest(x);
    ingest_seconds += std::chrono::duration<double>(Clock::now() - start).count();
    if (t != next_checkpoint) continue;

    BenchRow row;
    row.t = t;
    row.trial = trial;
    row.wall_per_step = ingest_seconds / static_cast<double>(t - last_checkpoint);
    const auto m = engine.consistent_counts();
    const PointSet synth = engine.emit(m).points;
    const PointSet& truth = engine.history();
    row.w1_tree_bound = w1_tree_bound(engine.true_counts(), m, engine.depth(), ec.dim, t);
    if (ec.dim == 1) {
      row.w1_exact = w1_1d(truth, synth);
    } else if (t <= cfg.exact_cap && t <= kMatchingCap) {
      row.w1_exact = w1_matching(truth, synth);
    }
    row.lipschitz_gap = lipschitz_gap(truth, synth, queries);
    rows.push_back(row);

    ingest_seconds = 0.0;
    last_checkpoint = t;
    next_checkpoint *= 2;
  }
  return rows;
}

inline void validate(const BenchConfig& cfg) {
  if (cfg.trials < 1) throw ParameterError("bench: trials must be >= 1");
  if (!is_power_of_two(cfg.tmax)) throw ParameterError("bench: tmax must be a power of two");
  if (!is_power_of_two(cfg.fit_from) || cfg.fit_from * 2 > cfg.tmax) {
    throw ParameterError("bench: fit window needs at least two checkpoints");
  }
  if (cfg.threads < 1) throw ParameterError("bench: threads must be >= 1");
}

// Fits log2(mean W1) against log2(t) over checkpoints in [fit_from, tmax].
inline void summarize(BenchReport& report) {
  const BenchConfig& cfg = report.config;
  report.checkpoints.clear();
  for (std::uint64_t t = 1; t <= cfg.tmax; t *= 2) report.checkpoints.push_back(t);
  report.mean_w1.assign(report.checkpoints.size(), 0.0);
  report.exact.assign(report.checkpoints.size(), true);
  std::vector<int> seen(report.checkpoints.size(), 0);
  for (const BenchRow& r : report.rows) {
    const auto k = static_cast<std::size_t>(std::bit_width(r.t) - 1);
    report.mean_w1[k] += r.w1();
    if (!r.w1_exact) report.exact[k] = false;
    ++seen[k];
  }
  std::vector<double> x, y;
  std::vector<int> group;
  for (std::size_t k = 0; k < report.checkpoints.size(); ++k) {
    if (seen[k] > 0) report.mean_w1[k] /= seen[k];
    if (report.checkpoints[k] < cfg.fit_from) continue;
    x.push_back(static_cast<double>(k));
    y.push_back(std::log2(std::max(report.mean_w1[k], 1e-300)));
    group.push_back(report.exact[k] ? 1 : 0);
  }
  report.pooled_fit = fit_line(x, y);
  // A group with a single checkpoint only fixes its own intercept.
  report.fit = fit_line(x, y, group);
}

inline BenchReport run_bench(const BenchConfig& cfg) {
  validate(cfg);
  std::vector<std::vector<BenchRow>> per_trial(static_cast<std::size_t>(cfg.trials));
  std::atomic<int> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  auto worker = [&] {
    for (int i = next++; i < cfg.trials; i = next++) {
      try {
        per_trial[static_cast<std::size_t>(i)] = run_trial(cfg, i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int threads = std::min(cfg.threads, cfg.trials);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  BenchReport report;
  report.config = cfg;
  for (auto& rows : per_trial) report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  summarize(report);
  return report;
}

inline void write_metadata(std::ostream& out, const BenchConfig& cfg) {
  out << "# mode=" << to_string(cfg.engine.mode.value_or(default_mode(cfg.engine.dim)))
      << " epsilon=" << cfg.engine.epsilon << " dim=" << cfg.engine.dim
      << " seed=" << cfg.engine.seed << " stream=" << to_string(cfg.stream)
      << " trials=" << cfg.trials << " tmax=" << cfg.tmax
      << " noise=" << (cfg.engine.noise_enabled ? "on" : "off") << " build=" << build_version()
      << "\n";
}

// CSV: t,trial,w1_exact,w1_tree_bound,lipschitz_gap,wall_time_per_step.
// w1_exact is empty where it was not evaluated.
inline void write_csv(std::ostream& out, const BenchReport& report) {
  write_metadata(out, report.config);
  out << "t,trial,w1_exact,w1_tree_bound,lipschitz_gap,wall_time_per_step\n";
  out << std::setprecision(10);
  for (const BenchRow& r : report.rows) {
    out << r.t << ',' << r.trial << ',';
    if (r.w1_exact) out << *r.w1_exact;
    out << ',' << r.w1_tree_bound << ',' << r.lipschitz_gap << ',' << r.wall_per_step << '\n';
  }
}

inline void write_summary(std::ostream& out, const BenchReport& report) {
  out << std::setprecision(6) << "# slope=" << report.fit.slope << " ci95=["
      << report.fit.ci_low << "," << report.fit.ci_high << "] points=" << report.fit.points
      << " fit_from=" << report.config.fit_from << " pooled_slope=" << report.pooled_fit.slope
      << "\n";
  for (std::size_t k = 0; k < report.checkpoints.size(); ++k) {
    out << "# t=" << report.checkpoints[k] << " mean_w1=" << report.mean_w1[k]
        << (report.exact[k] ? " exact" : " bound") << "\n";
  }
}

}  // namespace streamsyn::harness

#endif  // STREAMSYN_HARNESS_BENCH_HPP_
