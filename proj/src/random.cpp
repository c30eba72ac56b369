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

#include "vpki/random.hpp"

#include <openssl/rand.h>
#include <openssl/sha.h>

#include <numeric>

namespace vpki {

std::uint64_t RandomSource::next_u64() {
  std::array<std::uint8_t, 8> b{};
  fill(b);
  std::uint64_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

std::uint64_t RandomSource::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::invalid_request, "uniform_below(0)");
  // Rejection sampling keeps every residue equally likely.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  for (;;) {
    auto v = next_u64();
    if (v < limit) return v % bound;
  }
}

double RandomSource::uniform_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

namespace {
std::array<std::uint8_t, 32> seed_block(std::uint64_t seed, std::string_view label) {
  ByteWriter w;
  w.str("vpki-drbg").u64(seed).str(label);
  std::array<std::uint8_t, 32> out{};
  SHA256(w.data().data(), w.data().size(), out.data());
  return out;
}
}  // namespace

HashDrbg::HashDrbg(std::uint64_t seed) : seed_(seed_block(seed, "")) {}

HashDrbg::HashDrbg(std::uint64_t seed, std::string_view label) : seed_(seed_block(seed, label)) {}

HashDrbg::HashDrbg(const std::array<std::uint8_t, 32>& seed) : seed_(seed) {}

void HashDrbg::refill() {
  ByteWriter w;
  w.fixed(seed_).u64(counter_++);
  SHA256(w.data().data(), w.data().size(), block_.data());
  used_ = 0;
}

void HashDrbg::fill(std::span<std::uint8_t> out) {
  for (auto& b : out) {
    if (used_ == block_.size()) refill();
    b = block_[used_++];
  }
}

HashDrbg HashDrbg::fork(std::string_view label) const {
  ByteWriter w;
  w.str("fork").fixed(seed_).str(label);
  std::array<std::uint8_t, 32> child{};
  SHA256(w.data().data(), w.data().size(), child.data());
  return HashDrbg(child);
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw Error(ErrorCode::entropy_failure, "RAND_bytes");
  }
}

std::vector<std::size_t> random_permutation(std::size_t n, RandomSource& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    auto j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace vpki
