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

#ifndef STREAMSYN_CONSISTENCY_HPP_
#define STREAMSYN_CONSISTENCY_HPP_

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "streamsyn/errors.hpp"

namespace streamsyn {

// Splits a parent total m >= 0 between two children with clamped noisy
// counts a, b >= 0 so that the results sum to m and both adjustments share
// a sign.
//
// Surplus D = m - a - b >= 0: ceil(D/2) goes to the larger child (ties to
// child 0), floor(D/2) to the other. Deficit: taken from the larger child
// first (ties to child 0), the remainder from its sibling.
inline std::pair<std::int64_t, std::int64_t> split_consistent(std::int64_t m, std::int64_t a,
                                                              std::int64_t b) {
  const std::int64_t d = m - a - b;
  const bool first_larger = a >= b;
  std::int64_t big = first_larger ? a : b;
  std::int64_t small = first_larger ? b : a;
  if (d >= 0) {
    big += d - d / 2;
    small += d / 2;
  } else {
    const std::int64_t deficit = -d;
    const std::int64_t from_big = std::min(deficit, big);
    big -= from_big;
    small -= deficit - from_big;
  }
  return first_larger ? std::pair{big, small} : std::pair{small, big};
}

// Top-down consistency pass over a heap-ordered count vector (index 1 is the
// root; levels 1..depth present). The root total is `root`; returns
// nonnegative integers with m[2h] + m[2h+1] = m[h] at every internal node.
inline std::vector<std::int64_t> make_consistent(std::span<const std::int64_t> noisy,
                                                 std::int64_t root, int depth) {
  const std::size_t n = std::size_t{2} << depth;
  if (noisy.size() < n) throw ParameterError("make_consistent: count vector too short");
  if (root < 0) throw ParameterError("make_consistent: negative root count");
  std::vector<std::int64_t> m(n, 0);
  m[1] = root;
  for (std::size_t h = 1; h < n / 2; ++h) {
    const auto [c0, c1] =
        split_consistent(m[h], std::max<std::int64_t>(noisy[2 * h], 0),
                         std::max<std::int64_t>(noisy[2 * h + 1], 0));
    m[2 * h] = c0;
    m[2 * h + 1] = c1;
  }
  return m;
}

}  // namespace streamsyn

#endif  // STREAMSYN_CONSISTENCY_HPP_
