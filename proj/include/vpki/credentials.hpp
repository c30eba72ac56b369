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
 * Credential data model shared by authorities and vehicles.
 *
 * Every signed object has a to-be-signed form `tbs()` that starts with a
 * one-byte type tag, followed by its fields in a fixed order; `encode()`
 * appends the 64-byte signature. Files wrap that in the "VPKI" magic and a
 * version byte. docs/encoding.md is the byte-level reference.
 */

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vpki/bytes.hpp"
#include "vpki/crypto.hpp"

namespace vpki {

/// Integer seconds, virtual or wall clock.
using Timestamp = std::int64_t;

inline constexpr std::uint8_t kFormatVersion = 1;

enum class TypeTag : std::uint8_t {
  authority_certificate = 0x01,
  long_term_certificate = 0x02,
  pseudonym = 0x03,
  token = 0x04,
  crl = 0x05,
  lifetime_policy = 0x06,
  beacon = 0x07,
  authorization_order = 0x08,
  ground_truth = 0x09,
  ltca_state = 0x0a,
  pca_state = 0x0b,
};

/// Half-open [start, end).
struct ValidityInterval {
  Timestamp start = 0;
  Timestamp end = 0;

  bool contains(Timestamp t) const { return start <= t && t < end; }
  bool overlaps(const ValidityInterval& o) const { return start < o.end && o.start < end; }
  Timestamp length() const { return end - start; }
  auto operator<=>(const ValidityInterval&) const = default;
};

struct Serial {
  std::array<std::uint8_t, 16> bytes{};

  static Serial random(RandomSource& rng) { return Serial{rng.array<16>()}; }
  static Serial from_hex(std::string_view hex);
  std::string hex() const { return to_hex(bytes); }
  auto operator<=>(const Serial&) const = default;
};

enum class Role : std::uint8_t { rca = 1, hca = 2, ltca = 3, pca = 4, ra = 5 };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);

struct AuthorityCertificate {
  std::string authority_id;
  Role role = Role::rca;
  PublicKey public_key;
  ValidityInterval validity;
  std::string issuer_id;
  Signature signature;

  bool self_signed() const { return issuer_id == authority_id; }
  Bytes tbs() const;
  Bytes encode() const;
  static AuthorityCertificate decode(ByteReader& r);
  bool operator==(const AuthorityCertificate&) const = default;
};

struct LongTermCertificate {
  Serial serial;
  std::string vehicle_id;
  PublicKey public_key;
  std::string issuer_id;
  ValidityInterval validity;
  Signature signature;

  Bytes tbs() const;
  Bytes encode() const;
  static LongTermCertificate decode(ByteReader& r);
  bool operator==(const LongTermCertificate&) const = default;
};

/// Short-term anonymised certificate. Carries no vehicle-identifying field.
struct Pseudonym {
  Serial serial;
  PublicKey public_key;
  ValidityInterval validity;
  std::string issuer_id;
  Signature signature;

  Bytes tbs() const;
  Bytes encode() const;
  static Pseudonym decode(ByteReader& r);
  bool operator==(const Pseudonym&) const = default;
};

/// Single-use LTCA authorisation for one pseudonym request. pca_binding is
/// digest(pca_id || salt), so the LTCA never learns the target PCA.
struct Token {
  Serial serial;
  Digest pca_binding;
  std::uint64_t period_tag = 0;
  ValidityInterval validity;
  std::string issuer_id;
  Signature signature;

  Bytes tbs() const;
  Bytes encode() const;
  static Token decode(ByteReader& r);
  bool operator==(const Token&) const = default;
};

/// Full (non-delta) revocation list. revoked_serials is kept sorted and
/// duplicate-free so that equal lists encode identically.
struct Crl {
  std::string issuer_id;
  std::uint64_t sequence_number = 0;
  Timestamp issued_at = 0;
  std::vector<Serial> revoked_serials;
  Signature signature;

  void normalize();
  bool contains(const Serial& s) const;
  Bytes tbs() const;
  Bytes encode() const;
  static Crl decode(ByteReader& r);
  bool operator==(const Crl&) const = default;
};

/// Universal pseudonym-lifetime grid, signed by a root and distributed with
/// the trust store. Slot boundaries sit at epoch_origin + n * slot_duration;
/// periods (the token granularity) at epoch_origin + n * period_length.
struct LifetimePolicy {
  std::string issuer_id;
  Timestamp epoch_origin = 0;
  std::int64_t slot_duration = 600;
  std::int64_t period_length = 86400;
  Timestamp issued_at = 0;
  Signature signature;

  void validate() const;
  std::int64_t slots_per_period() const { return period_length / slot_duration; }
  ValidityInterval period(std::uint64_t tag) const;
  std::uint64_t period_of(Timestamp t) const;
  /// i-th slot inside period `tag`.
  ValidityInterval slot(std::uint64_t tag, std::int64_t i) const;
  bool aligned(const ValidityInterval& v) const;

  Bytes tbs() const;
  Bytes encode() const;
  static LifetimePolicy decode(ByteReader& r);
  bool operator==(const LifetimePolicy&) const = default;
};

/// K higher-level CAs, L LTCAs, M PCAs with K <= L <= M.
struct TrustTopology {
  std::uint32_t hca_count = 1;
  std::uint32_t ltca_count = 1;
  std::uint32_t pca_count = 1;
  /// (issuer authority id, subject authority id)
  std::vector<std::pair<std::string, std::string>> cross_certifications;

  void validate() const;
};

using Credential =
    std::variant<AuthorityCertificate, LongTermCertificate, Pseudonym, Token, Crl, LifetimePolicy>;

/// digest(pca_id || salt): commits a token to one PCA without revealing which.
Digest make_pca_binding(std::string_view pca_id, ByteView salt);

template <class T>
void sign_credential(T& obj, const PrivateKey& key) {
  obj.signature = sign(obj.tbs(), key);
}

/// Signature-bearing body without the file header.
Bytes canonical_encode(const Credential& c);
Credential canonical_decode(ByteView data);

/// "VPKI" || version || canonical_encode(c)
Bytes encode_file(const Credential& c);
Credential decode_file(ByteView data);

std::string describe(const Credential& c);

Bytes read_file(const std::string& path);
void write_file(const std::string& path, ByteView data);

}  // namespace vpki

template <>
struct std::hash<vpki::Serial> {
  std::size_t operator()(const vpki::Serial& s) const noexcept {
    std::size_t h = 0;
    for (int i = 0; i < 8; ++i) h = (h << 8) | s.bytes[i];
    return h;
  }
};
