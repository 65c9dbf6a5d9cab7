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

#ifndef STREAMSYN_NOISE_HPP_
#define STREAMSYN_NOISE_HPP_

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>

#include "streamsyn/errors.hpp"

namespace streamsyn {

// Integer (two-sided geometric) Laplace law on Z:
//   f(z) = (1 - p) / (1 + p) * p^|z|,  p = exp(-1 / sigma).
class IntLaplace {
 public:
  explicit IntLaplace(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw ParameterError("IntLaplace: sigma must be positive and finite, got " +
                           std::to_string(sigma));
    }
  }

  double sigma() const { return sigma_; }
  double decay() const { return std::exp(-1.0 / sigma_); }

  double pmf(std::int64_t z) const {
    const double p = decay();
    const double mag = static_cast<double>(z < 0 ? -z : z);
    return (1.0 - p) / (1.0 + p) * std::exp(-mag / sigma_);
  }

  // P(Z >= k).
  double upper_tail(std::int64_t k) const {
    const double p = decay();
    if (k >= 1) return std::exp(-static_cast<double>(k) / sigma_) / (1.0 + p);
    // 1 - P(Z <= k - 1) = 1 - P(Z >= 1 - k).
    return 1.0 - std::exp(-static_cast<double>(1 - k) / sigma_) / (1.0 + p);
  }

  // Var(Z) = 2p / (1 - p)^2.
  double variance() const {
    const double p = decay();
    const double q = -std::expm1(-1.0 / sigma_);
    return 2.0 * p / (q * q);
  }

 private:
  double sigma_;
};

inline double int_laplace_pmf(double sigma, std::int64_t z) {
  return IntLaplace(sigma).pmf(z);
}

// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Pure derivation of a child stream key. Used to give every counter, level
// and mechanism slot its own independent noise stream.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t key) {
  return mix64(parent ^ mix64(key + 0x9e3779b97f4a7c15ULL));
}

struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// Deterministic noise source: a SplitMix64 sequence keyed by (seed, stream).
// Single owner; copying forks an identical sequence.
//
// With noise disabled every Laplace draw is forced to 0 (the draw is still
// counted), which gives exact oracles for noise-free tests.
class NoiseStream {
 public:
  NoiseStream() : NoiseStream(RngSeed{}) {}
  explicit NoiseStream(RngSeed s, bool noise_enabled = true)
      : key_(derive_key(mix64(s.seed), s.stream_id)),
        state_(key_),
        enabled_(noise_enabled) {}

  // Independent child stream; does not advance this one.
  NoiseStream substream(std::uint64_t key) const {
    NoiseStream child;
    child.key_ = derive_key(key_, key);
    child.state_ = child.key_;
    child.enabled_ = enabled_;
    return child;
  }

  bool noise_enabled() const { return enabled_; }
  NoiseStream with_noise(bool enabled) const {
    NoiseStream copy = *this;
    copy.enabled_ = enabled;
    return copy;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Exp(1). A zero 53-bit block means U < 2^-53; since U is then uniform on
  // that block again, add 53 ln 2 and redraw. The support is not truncated.
  double exponential() {
    constexpr double kBlock = 53.0 * 0.69314718055994530942;
    double acc = 0.0;
    for (;;) {
      const std::uint64_t u = next_u64() >> 11;
      if (u == 0) {
        acc += kBlock;
        continue;
      }
      return acc - std::log((static_cast<double>(u) + 0.5) * 0x1p-53);
    }
  }

  // Number of failures G with P(G >= g) = exp(-g / sigma).
  std::uint64_t geometric(double sigma) {
    const double g = std::floor(exponential() * sigma);
    if (g >= 0x1p63) return std::numeric_limits<std::uint64_t>::max() / 2;
    return static_cast<std::uint64_t>(g);
  }

  // Lap_Z(sigma) as the difference of two i.i.d. geometric variables.
  std::int64_t int_laplace(const IntLaplace& dist) {
    ++draws_;
    if (!enabled_) return 0;
    const auto a = static_cast<std::int64_t>(geometric(dist.sigma()));
    const auto b = static_cast<std::int64_t>(geometric(dist.sigma()));
    const std::int64_t z = a - b;
    const std::uint64_t mag = static_cast<std::uint64_t>(z < 0 ? -z : z);
    if (mag > max_abs_) max_abs_ = mag;
    return z;
  }
  std::int64_t int_laplace(double sigma) { return int_laplace(IntLaplace(sigma)); }

  // Number of Bernoulli(q) trials up to and including the first success,
  // in {1, 2, ...}; kNever when q == 0.
  static constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t trials_until_success(double q) {
    if (q >= 1.0) return 1;
    if (!(q > 0.0)) return kNever;
    const double rate = -std::log1p(-q);
    const double g = std::floor(exponential() / rate);
    if (g >= 0x1p62) return kNever;
    return 1 + static_cast<std::uint64_t>(g);
  }

  std::uint64_t draws() const { return draws_; }
  std::uint64_t max_abs_draw() const { return max_abs_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t state_ = 0;
  bool enabled_ = true;
  std::uint64_t draws_ = 0;
  std::uint64_t max_abs_ = 0;
};

}  // namespace streamsyn

#endif  // STREAMSYN_NOISE_HPP_
