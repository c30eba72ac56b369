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

/*
 * ECDSA over P-256 with SHA-256, deterministic nonces (RFC 6979), and an
 * ECIES-style sealed envelope (ephemeral ECDH + AES-128-CCM).
 *
 * Fixed-width encodings:
 *   public key   33 bytes  SEC1 compressed point
 *   signature    64 bytes  r || s, big-endian
 *   digest       32 bytes  SHA-256
 *
 * Keys, signatures and envelopes are immutable values and safe to share
 * between threads.
 */

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>

#include "vpki/bytes.hpp"
#include "vpki/random.hpp"

namespace vpki {

struct Digest {
  std::array<std::uint8_t, 32> bytes{};
  auto operator<=>(const Digest&) const = default;
  std::string hex() const { return to_hex(bytes); }
};

struct Signature {
  std::array<std::uint8_t, 64> bytes{};
  auto operator<=>(const Signature&) const = default;
};

struct PublicKey {
  std::array<std::uint8_t, 33> bytes{};
  auto operator<=>(const PublicKey&) const = default;
  std::string hex() const { return to_hex(bytes); }
};

/// A validated scalar in [1, n). There is deliberately no encode() here:
/// credentials and logs only ever carry the public half.
class PrivateKey {
 public:
  /// Throws Error(malformed_key) unless 0 < scalar < n.
  static PrivateKey from_scalar(const std::array<std::uint8_t, 32>& scalar);

  const std::array<std::uint8_t, 32>& scalar() const { return scalar_; }
  PublicKey public_key() const;

  bool operator==(const PrivateKey&) const = default;

 private:
  PrivateKey() = default;
  std::array<std::uint8_t, 32> scalar_{};
};

struct KeyPair {
  PrivateKey private_key;
  PublicKey public_key;
};

/// Live mode: system entropy. With a seed: bit-identical output per seed.
KeyPair generate_keypair(std::optional<std::uint64_t> seed = std::nullopt);
KeyPair generate_keypair(RandomSource& rng);

/// Public key decoded once to a curve point, for verifiers that check many
/// signatures under the same key.
class VerifyingKey {
 public:
  /// Throws Error(malformed_key) if the encoding is not a curve point.
  explicit VerifyingKey(const PublicKey& key);

  const PublicKey& encoded() const { return encoded_; }
  bool verify(ByteView message, const Signature& sig) const;

 private:
  struct Point;
  PublicKey encoded_;
  std::shared_ptr<const Point> point_;
};

Signature sign(ByteView message, const PrivateKey& key);
bool verify(ByteView message, const Signature& sig, const PublicKey& key);

Digest digest(ByteView message);

struct SealedEnvelope {
  PublicKey ephemeral_public;
  Bytes ciphertext;
  std::array<std::uint8_t, 16> auth_tag{};

  bool operator==(const SealedEnvelope&) const = default;

  Bytes encode() const;
  static SealedEnvelope decode(ByteView data);
};

SealedEnvelope seal(ByteView message, const PublicKey& recipient, RandomSource& rng);
SealedEnvelope seal(ByteView message, const PublicKey& recipient);

/// Throws Error(open_failed) on any tamper or on a non-recipient key.
Bytes open(const SealedEnvelope& envelope, const PrivateKey& key);

}  // namespace vpki
