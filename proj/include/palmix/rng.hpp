// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include "palmix/errors.hpp"
#include "palmix/geometry.hpp"

namespace palmix {

// SplitMix64 finalizer. Bijective on 64-bit words.
inline std::uint64_t split_mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Key of substream i of a stream with key `key`. The map i -> key' is
// injective for a fixed parent key: i is first spread by an odd multiplier
// (a bijection mod 2^64) and the sum is passed through the SplitMix64
// bijection. Distinct substream indices therefore never collide.
inline std::uint64_t derive_stream_key(std::uint64_t key, std::uint64_t index) {
  return split_mix64(key + 0x9E3779B97F4A7C15ull * (index + 1));
}

// Deterministic random stream: xoshiro256++ state seeded from a 64-bit key
// via SplitMix64 (the seeding recommended by the generator's authors).
// Identical keys give bitwise-identical output sequences on every platform.
// Substreams derive from the construction key, not from consumed state, so
// a replicate's stream does not depend on how siblings were scheduled.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(seed) {
    std::uint64_t z = seed;
    for (auto& word : state_) {
      z = split_mix64(z);
      word = z;
    }
  }

  std::uint64_t key() const { return key_; }

  RngStream substream(std::uint64_t index) const {
    return RngStream(derive_stream_key(key_, index));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  // Uniform point in a box window; one draw per axis, in axis order.
  Point uniform_in(const Window& w) {
    std::array<double, 3> c{};
    for (int i = 0; i < w.dim(); ++i) c[static_cast<std::size_t>(i)] = uniform(w.lower()[i], w.upper()[i]);
    return Point(std::span<const double>(c.data(), static_cast<std::size_t>(w.dim())));
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  // Poisson count by Knuth's product-of-uniforms method, exact for any mean.
  // Means above 500 are split into chunks and summed (Poisson additivity),
  // which keeps exp(-mean) away from underflow.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0) || !std::isfinite(mean)) throw InvalidModel("poisson mean must be finite and >= 0");
    std::uint64_t total = 0;
    while (mean > 500.0) {
      total += poisson_small(500.0);
      mean -= 500.0;
    }
    return total + poisson_small(mean);
  }

  // Index draw proportional to nonnegative weights (no normalization
  // required). Consumes exactly one uniform on success. A zero-weight entry
  // is never selected.
  std::size_t categorical(std::span<const double> weights) {
    if (weights.empty()) throw EmptyInput("categorical requires at least one weight");
    double total = 0;
    for (const double w : weights) {
      if (!(w >= 0) || !std::isfinite(w)) throw InvalidModel("categorical weights must be finite and >= 0");
      total += w;
    }
    if (total <= 0) throw EmptyInput("categorical requires a positive weight");
    const double threshold = uniform() * total;
    double cum = 0;
    std::size_t last_positive = 0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
      if (weights[j] > 0) {
        last_positive = j;
        cum += weights[j];
        if (threshold < cum) return j;
      }
    }
    return last_positive;  // threshold fell into the rounding tail
  }

 private:
  std::uint64_t poisson_small(double mean) {
    if (mean <= 0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  std::uint64_t key_;
  std::array<std::uint64_t, 4> state_{};
  double cached_ = 0;
  bool have_cached_ = false;
};

}  // namespace palmix
