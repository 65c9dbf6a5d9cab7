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

#ifndef STREAMSYN_METRICS_HPP_
#define STREAMSYN_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "streamsyn/engine.hpp"
#include "streamsyn/errors.hpp"
#include "streamsyn/partition.hpp"

namespace streamsyn {

inline double linf_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Exact W1 between two 1-D empirical measures. Equal sizes use the sorted
// matching; otherwise integrate |F - G| over the merged support.
inline double w1_1d(const PointSet& mu, const PointSet& nu) {
  if (mu.dim() != 1 || nu.dim() != 1) throw ParameterError("w1_1d: both measures must be 1-D");
  if (mu.empty() || nu.empty()) throw ParameterError("w1_1d: empty measure");
  std::vector<double> x = mu.coords();
  std::vector<double> y = nu.coords();
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  if (x.size() == y.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
    return s / static_cast<double>(x.size());
  }
  const double wx = 1.0 / static_cast<double>(x.size());
  const double wy = 1.0 / static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double fx = 0.0, fy = 0.0, prev = std::min(x.front(), y.front()), total = 0.0;
  while (i < x.size() || j < y.size()) {
    const double next = j == y.size() || (i < x.size() && x[i] <= y[j]) ? x[i] : y[j];
    total += std::abs(fx - fy) * (next - prev);
    prev = next;
    while (i < x.size() && x[i] == next) fx = static_cast<double>(++i) * wx;
    while (j < y.size() && y[j] == next) fy = static_cast<double>(++j) * wy;
  }
  return total;
}

inline constexpr std::size_t kMatchingCap = 2048;

// Exact W1 under the l-infinity ground cost via a minimum-cost perfect
// matching (shortest augmenting paths with potentials, O(n^3)).
inline double w1_matching(const PointSet& mu, const PointSet& nu) {
  const std::size_t n = mu.size();
  if (nu.size() != n) throw ParameterError("w1_matching: measures must have equal sizes");
  if (mu.dim() != nu.dim()) throw ParameterError("w1_matching: dimension mismatch");
  if (n == 0) throw ParameterError("w1_matching: empty measure");
  if (n > kMatchingCap) {
    throw ParameterError("w1_matching: n = " + std::to_string(n) + " exceeds the cap of " +
                         std::to_string(kMatchingCap) + "; use w1_tree_bound instead");
  }
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = linf_distance(mu[i], nu[j]);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      const double* row = &cost[(i0 - 1) * n];
      const double ui0 = u[i0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - ui0 - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += cost[(p[j] - 1) * n + (j - 1)];
  return total / static_cast<double>(n);
}

// Hierarchical upper bound on W1 between the true and synthetic measures
// from heap-ordered counts at depth r:
//   (1/t) sum_{internal theta} max(|l_theta0|, |l_theta1|) diam(theta) + 2^-floor(r/d),
// with l = m - n.
inline double w1_tree_bound(std::span<const std::int64_t> true_counts,
                            std::span<const std::int64_t> synth_counts, int depth, int dim,
                            std::uint64_t t) {
  const std::size_t n = std::size_t{2} << depth;
  if (true_counts.size() < n || synth_counts.size() < n) {
    throw ParameterError("w1_tree_bound: count vectors shorter than the tree");
  }
  if (t == 0) throw ParameterError("w1_tree_bound: t must be >= 1");
  double sum = 0.0;
  for (std::size_t h = 1; h < n / 2; ++h) {
    const auto l0 = std::abs(synth_counts[2 * h] - true_counts[2 * h]);
    const auto l1 = std::abs(synth_counts[2 * h + 1] - true_counts[2 * h + 1]);
    const int level = static_cast<int>(std::bit_width(h)) - 1;
    sum += static_cast<double>(std::max(l0, l1)) * region_diameter(level, dim);
  }
  return sum / static_cast<double>(t) + region_diameter(depth, dim);
}

// A test function with Lipschitz constant <= 1 under l-infinity.
struct LipschitzQuery {
  std::string name;
  std::function<double(std::span<const double>)> eval;
};

// Coordinate projections, distances to random anchors, and minima of random
// affine maps whose gradients have l1 norm <= 1.
inline std::vector<LipschitzQuery> builtin_queries(int dim, std::uint64_t seed, int random_count = 8) {
  std::vector<LipschitzQuery> out;
  for (int a = 0; a < dim; ++a) {
    out.push_back({"coord" + std::to_string(a),
                   [a](std::span<const double> x) { return x[static_cast<std::size_t>(a)]; }});
  }
  std::mt19937_64 gen(seed);
  auto unit = [&gen] { return static_cast<double>(gen() >> 11) * 0x1p-53; };
  for (int k = 0; k < random_count; ++k) {
    std::vector<double> anchor(static_cast<std::size_t>(dim));
    for (auto& c : anchor) c = unit();
    out.push_back({"anchor" + std::to_string(k), [anchor](std::span<const double> x) {
                     return linf_distance(x, anchor);
                   }});
  }
  for (int k = 0; k < random_count; ++k) {
    struct Piece {
      std::vector<double> w;
      double c;
    };
    std::vector<Piece> pieces(3);
    for (auto& pc : pieces) {
      pc.w.resize(static_cast<std::size_t>(dim));
      double l1 = 0.0;
      for (auto& w : pc.w) {
        w = 2.0 * unit() - 1.0;
        l1 += std::abs(w);
      }
      const double scale = unit() / std::max(l1, 1e-300);
      for (auto& w : pc.w) w *= scale;
      pc.c = unit();
    }
    out.push_back({"minaffine" + std::to_string(k), [pieces](std::span<const double> x) {
                     double best = std::numeric_limits<double>::infinity();
                     for (const auto& pc : pieces) {
                       double v = pc.c;
                       for (std::size_t i = 0; i < x.size(); ++i) v += pc.w[i] * x[i];
                       best = std::min(best, v);
                     }
                     return best;
                   }});
  }
  return out;
}

inline double mean_of(const PointSet& s, const LipschitzQuery& q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += q.eval(s[i]);
  return acc / static_cast<double>(s.size());
}

// max_f |E_mu f - E_nu f| over the given queries; a lower bound on W1.
inline double lipschitz_gap(const PointSet& mu, const PointSet& nu,
                            const std::vector<LipschitzQuery>& queries) {
  if (queries.empty()) throw ParameterError("lipschitz_gap: empty query list");
  if (mu.empty() || nu.empty()) throw ParameterError("lipschitz_gap: empty measure");
  double gap = 0.0;
  for (const auto& q : queries) gap = std::max(gap, std::abs(mean_of(mu, q) - mean_of(nu, q)));
  return gap;
}

}  // namespace streamsyn

#endif  // STREAMSYN_METRICS_HPP_
