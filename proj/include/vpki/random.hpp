/* Copyright 2026 The vpki Authors
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

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string_view>

#include "vpki/bytes.hpp"

namespace vpki {

/// Source of key material, serials, salts and nonces. Simulation mode uses a
/// seeded HashDrbg so that whole runs replay bit-identically; live mode uses
/// the operating system generator.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  std::uint64_t next_u64();
  /// Uniform in [0, bound). bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound);
  /// Uniform in [0, 1).
  double uniform_unit();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_unit(); }

  template <std::size_t N>
  std::array<std::uint8_t, N> array() {
    std::array<std::uint8_t, N> out{};
    fill(out);
    return out;
  }
  Bytes bytes(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
  }
};

/// SHA-256 in counter mode over a 32-byte seed.
class HashDrbg final : public RandomSource {
 public:
  explicit HashDrbg(std::uint64_t seed);
  HashDrbg(std::uint64_t seed, std::string_view label);
  explicit HashDrbg(const std::array<std::uint8_t, 32>& seed);

  void fill(std::span<std::uint8_t> out) override;

  /// Derives an independent child stream; the parent state is unchanged.
  HashDrbg fork(std::string_view label) const;

 private:
  void refill();

  std::array<std::uint8_t, 32> seed_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 32> block_{};
  std::size_t used_ = 32;
};

class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Fisher-Yates permutation of [0, n) driven by `rng`.
std::vector<std::size_t> random_permutation(std::size_t n, RandomSource& rng);

}  // namespace vpki
