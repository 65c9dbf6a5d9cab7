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

#ifndef STREAMSYN_SCHEDULE_HPP_
#define STREAMSYN_SCHEDULE_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "streamsyn/errors.hpp"

namespace streamsyn {

enum class Mode {
  // Per-region inhomogeneous sparse counters, eps_{j,r} = C1 eps alpha^(j-r).
  kInhomSparse,
  // Per-region hybrid counters with eps_j = (3/pi^2) eps / (j+1)^2, fed the
  // full replayed history at creation.
  kReplayHybrid,
};

inline std::string to_string(Mode m) {
  return m == Mode::kInhomSparse ? "inhom-sparse" : "replay-hybrid";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "inhom-sparse") return Mode::kInhomSparse;
  if (s == "replay-hybrid") return Mode::kReplayHybrid;
  throw ParameterError("unknown mode '" + std::string(s) + "'");
}

inline Mode default_mode(int dim) { return dim == 1 ? Mode::kReplayHybrid : Mode::kInhomSparse; }

// Per-level budget of one region's inhomogeneous counter: level r gets
// scale * alpha^(region_level - r).
struct GeometricLevelSchedule {
  double scale = 0.0;
  double alpha = 1.0;
  int region_level = 0;

  double operator()(int r) const { return scale * std::pow(alpha, region_level - r); }
};

class PrivacySchedule {
 public:
  PrivacySchedule(double epsilon, int dim, Mode mode) : epsilon_(epsilon), dim_(dim), mode_(mode) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw ParameterError("epsilon must be positive and finite");
    }
    if (dim < 1) throw ParameterError("dimension must be >= 1");
  }

  double epsilon() const { return epsilon_; }
  int dim() const { return dim_; }
  Mode mode() const { return mode_; }

  // alpha = 2^((1 - 1/d) / 2).
  double alpha() const { return std::exp2((1.0 - 1.0 / dim_) / 2.0); }
  // C1 = (1 - 2^(-(1 - 1/d)/2)) / 2. Zero for d = 1.
  double c1() const { return (1.0 - 1.0 / alpha()) / 2.0; }

  // Budget of a level-j region's counter during time level r >= j.
  double inhom_epsilon(int j, int r) const {
    return c1() * epsilon_ * std::pow(alpha(), j - r);
  }
  GeometricLevelSchedule level_schedule(int region_level) const {
    return {c1() * epsilon_, alpha(), region_level};
  }

  // Budget of a level-j region's hybrid counter.
  double replay_epsilon(int j) const {
    const double k = static_cast<double>(j + 1);
    return 3.0 / (std::numbers::pi * std::numbers::pi) * epsilon_ / (k * k);
  }

  // Total charge along one root-to-level-s path for an input at time level
  // s (inhom) or to depth s (replay), root excluded.
  double path_charge(int s) const {
    double total = 0.0;
    for (int j = 1; j <= s; ++j) {
      total += mode_ == Mode::kInhomSparse ? inhom_epsilon(j, s) : replay_epsilon(j);
    }
    return total;
  }

 private:
  double epsilon_;
  int dim_;
  Mode mode_;
};

struct BudgetReport {
  // partial_sums[s - 1] = sum_{j=1}^s eps_{j,s} (inhom) or
  // sum_{j=0}^s eps_j (replay, root term included).
  std::vector<double> partial_sums;
  double max_ratio = 0.0;  // max partial sum / (eps/2)
  // Replay mode: sum_{j>=0} eps_j evaluated with an Euler-Maclaurin tail.
  double replay_total = 0.0;
  bool ok = true;
};

inline BudgetReport budget_check(const PrivacySchedule& sched, int s_max) {
  if (s_max < 1) throw ParameterError("budget_check: s_max must be >= 1");
  BudgetReport rep;
  const double half = sched.epsilon() / 2.0;
  for (int s = 1; s <= s_max; ++s) {
    double sum = 0.0;
    if (sched.mode() == Mode::kInhomSparse) {
      for (int j = 1; j <= s; ++j) sum += sched.inhom_epsilon(j, s);
    } else {
      for (int j = 0; j <= s; ++j) sum += sched.replay_epsilon(j);
    }
    rep.partial_sums.push_back(sum);
    rep.max_ratio = std::max(rep.max_ratio, sum / half);
  }
  constexpr int kTerms = 1000;
  double head = 0.0;
  for (int k = kTerms; k >= 1; --k) head += 1.0 / (static_cast<double>(k) * k);
  const double n = kTerms;
  const double tail = 1.0 / n - 1.0 / (2 * n * n) + 1.0 / (6 * n * n * n);
  rep.replay_total =
      3.0 / (std::numbers::pi * std::numbers::pi) * sched.epsilon() * (head + tail);
  rep.ok = rep.max_ratio <= 1.0 + 1e-12;
  return rep;
}

}  // namespace streamsyn

#endif  // STREAMSYN_SCHEDULE_HPP_
