/* Copyright 2026 The twdkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Deterministic, seedable random source (splitmix64-seeded xoshiro256**).
// The same seed produces the same stream on every platform, so any pipeline
// built on top of it is reproducible byte for byte. Not cryptographic.

#ifndef TWD_RNG_HPP_
#define TWD_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace twd {

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

// Single-owner pseudo-random stream. Parallel workers each take a fork();
// a RandomSource itself is never shared between threads.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform 1-based index in {1..n}. Rejection sampling, so every index has
  // probability exactly 1/n (no modulo bias).
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be >= 1");
    const std::uint64_t range = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range) + 1;
  }

  // Uniform real in the half-open range [lo, hi).
  double uniform_real(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
      throw std::invalid_argument("uniform_real: need finite lo < hi");
    const double u = unit();  // [0, 1)
    double r = lo + u * (hi - lo);
    if (r >= hi) r = std::nextafter(hi, lo);
    return r;
  }

  // Gaussian via Box-Muller; consumes exactly two draws per call.
  double normal(double mean = 0.0, double stddev = 1.0) {
    const double u1 = 1.0 - unit();  // (0, 1], keeps log() finite
    const double u2 = unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    return mean + stddev * radius * std::cos(two_pi * u2);
  }

  // Independent substream keyed by (seed, label). Deterministic: forking the
  // same label twice gives identical streams. Leaves this source untouched.
  RandomSource fork(std::string_view label) const {
    // Seed bytes hashed in a fixed order so the key is platform independent.
    char bytes[8];
    for (int i = 0; i < 8; ++i)
      bytes[i] = static_cast<char>(seed_ >> (8 * (7 - i)));
    std::uint64_t h = fnv1a64(std::string_view(bytes, 8));
    h = fnv1a64(label, h);
    return RandomSource(h);
  }

 private:
  double unit() { return (next_u64() >> 11) * 0x1.0p-53; }

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t state_[4];
};

}  // namespace twd

#endif  // TWD_RNG_HPP_
