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

#ifndef STREAMSYN_TESTS_ORACLES_HPP_
#define STREAMSYN_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace streamsyn::testing {

using ConstSchedule = std::function<double(int)>;

std::vector<bool> bernoulli_stream(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<bool> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(gen() >> 11) * 0x1p-53 < p;
  return out;
}

std::vector<std::int64_t> prefix_sums(const std::vector<bool>& bits) {
  std::vector<std::int64_t> out;
  std::int64_t s = 0;
  for (bool b : bits) out.push_back(s += b);
  return out;
}

// Noise-free sparse counting, written directly from the segment loop: before
// consuming X_t, seal while the open count exceeds T0; the output is the
// sum of sealed segments.
std::vector<std::int64_t> sparse_noise_free(const std::vector<bool>& bits, std::uint64_t horizon,
                                            double epsilon) {
  const double t0 = 9.0 * std::log(static_cast<double>(horizon)) / epsilon;
  std::int64_t sealed = 0, open = 0;
  std::vector<std::int64_t> out;
  for (bool b : bits) {
    while (static_cast<double>(open) > t0) {
      sealed += open;
      open = 0;
    }
    open += b;
    out.push_back(sealed);
  }
  return out;
}

// Noise-free inhomogeneous counting: level-wise sparse oracle plus exact
// carries. Entries before 2^r0 are -1.
std::vector<std::int64_t> inhom_noise_free(const std::vector<bool>& bits, int r0,
                                           const ConstSchedule& eps) {
  std::vector<std::int64_t> out(bits.size(), -1);
  std::int64_t carry = 0;
  for (int r = r0;; ++r) {
    const std::size_t lo = std::size_t{1} << r;
    if (lo > bits.size()) break;
    const std::size_t hi = std::min(2 * lo - 1, bits.size());
    std::vector<bool> level(bits.begin() + static_cast<std::ptrdiff_t>(lo - 1),
                            bits.begin() + static_cast<std::ptrdiff_t>(hi));
    const auto c = sparse_noise_free(level, lo, eps(r) / 2.0);
    for (std::size_t i = 0; i < level.size(); ++i) out[lo - 1 + i] = carry + c[i];
    for (bool b : level) carry += b;
  }
  return out;
}

}  // namespace streamsyn::testing

#endif  // STREAMSYN_TESTS_ORACLES_HPP_
