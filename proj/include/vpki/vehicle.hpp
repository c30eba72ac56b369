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
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "vpki/chain.hpp"
#include "vpki/credentials.hpp"
#include "vpki/wire.hpp"

namespace vpki {

/// Milliseconds; beacons are stamped at a finer grain than credentials.
using Millis = std::int64_t;

inline Timestamp to_seconds(Millis ms) { return ms >= 0 ? ms / 1000 : -((-ms + 999) / 1000); }

struct Position {
  double x = 0;
  double y = 0;
  bool operator==(const Position&) const = default;
};

struct Beacon {
  Bytes payload;
  Position position;
  Millis timestamp = 0;
  Pseudonym pseudonym;
  Signature signature;

  /// payload || position || timestamp, behind the beacon type tag.
  Bytes signed_bytes() const;
  Bytes encode() const;
  static Beacon decode(ByteView data);
  bool operator==(const Beacon&) const = default;
};

struct PoolEntry {
  Pseudonym pseudonym;
  PrivateKey key;
};

/// Pseudonyms ordered by validity start, at most one valid at any instant.
class PseudonymPool {
 public:
  /// Throws pool_conflict if any new entry overlaps a held or already used
  /// one; nothing is added in that case.
  void add(std::vector<PoolEntry> entries);

  /// The entry whose validity contains `now`. Entries that ended at or
  /// before `now` move to the used set and are dropped.
  const PoolEntry* current(Timestamp now);

  std::size_t size() const { return entries_.size(); }
  const std::vector<PoolEntry>& entries() const { return entries_; }
  const std::set<Serial>& used_serials() const { return used_; }
  /// End of the last held or used validity interval.
  std::optional<Timestamp> coverage_end() const { return coverage_end_; }

 private:
  std::vector<PoolEntry> entries_;
  std::set<Serial> used_;
  std::vector<ValidityInterval> used_intervals_;
  std::optional<Timestamp> coverage_end_;
};

enum class BeaconVerdict : std::uint8_t { accept, bad_chain, bad_signature, stale, revoked };

std::string_view to_string(BeaconVerdict v);

struct VerifierStats {
  std::uint64_t accepted = 0;
  std::uint64_t bad_chain = 0;
  std::uint64_t bad_signature = 0;
  std::uint64_t stale = 0;
  std::uint64_t revoked = 0;
  std::uint64_t crl_updates = 0;
  std::uint64_t crl_stale = 0;
};

/// Receiver-side check of neighbour beacons. Order: freshness, revocation,
/// pseudonym chain at the beacon timestamp, beacon signature. Pseudonyms that
/// passed the chain check are cached with their decoded key, so steady-state
/// cost is one ECDSA verification per beacon.
class BeaconVerifier {
 public:
  explicit BeaconVerifier(std::shared_ptr<const TrustStore> trust_store, Millis tolerance = 2000);

  BeaconVerdict verify(const Beacon& beacon, Millis now);
  /// Throws Error(bad_signature) for a CRL that does not verify.
  CrlCache::Update process_crl(const Crl& crl, Timestamp now);

  const CrlCache& crls() const { return crls_; }
  const VerifierStats& stats() const { return stats_; }
  Millis tolerance() const { return tolerance_; }
  void set_trust_store(std::shared_ptr<const TrustStore> store);
  /// Drops cached pseudonyms that expired before `now`.
  void prune(Timestamp now);

 private:
  struct Cached {
    Pseudonym pseudonym;
    VerifyingKey key;
  };
  BeaconVerdict count(BeaconVerdict v);

  std::shared_ptr<const TrustStore> store_;
  Millis tolerance_;
  CrlCache crls_;
  std::unordered_map<Serial, Cached> cache_;
  VerifierStats stats_;
};

/// Synchronous request/response path to an authority, used by
/// Vehicle::refill. The simulator drives RefillSession directly instead.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual Bytes call(const std::string& authority_id, ByteView frame) = 0;
};

struct RefillPlan {
  std::uint64_t period_tag = 0;
  std::string pca_id;
  std::size_t key_count = 0;
  /// Honoured only by PCAs in flexible mode.
  std::optional<Timestamp> requested_start;
  /// Pool the pseudonyms go to. Honest vehicles use one pool; the Sybil
  /// attacker keeps one per PCA.
  std::string lane;
};

class Vehicle;

/// One token-then-pseudonyms acquisition. Both legs are sealed; the LTCA
/// sees only the blinded PCA binding, the PCA sees only the token.
class RefillSession {
 public:
  RefillSession(Vehicle& vehicle, RefillPlan plan, Timestamp now);

  const RefillPlan& plan() const { return plan_; }
  const std::string& ltca_id() const;
  /// Sealed token request for the vehicle's LTCA.
  const Bytes& token_request() const { return token_call_.frame; }
  /// Consumes the LTCA reply, returns the sealed request for the PCA.
  Bytes on_token_response(ByteView frame, Timestamp now);
  /// Consumes the PCA reply and extends the pool.
  std::vector<Pseudonym> on_pseudonym_response(ByteView frame, Timestamp now);

  const std::optional<Token>& token() const { return token_; }

 private:
  PendingCall build_token_call(Timestamp now);

  Vehicle& vehicle_;
  RefillPlan plan_;
  Bytes salt_;
  Digest binding_;
  PendingCall token_call_;
  std::optional<PendingCall> pseudonym_call_;
  std::optional<Token> token_;
  std::vector<KeyPair> keys_;
};

class Vehicle {
 public:
  Vehicle(std::string vehicle_id, KeyPair long_term_key, std::shared_ptr<const TrustStore> trust_store,
          LifetimePolicy policy, std::unique_ptr<RandomSource> rng, Millis tolerance = 2000);

  const std::string& id() const { return id_; }
  const KeyPair& long_term_key() const { return ltk_; }
  void set_ltc(LongTermCertificate ltc);
  const std::optional<LongTermCertificate>& ltc() const { return ltc_; }
  const LifetimePolicy& policy() const { return policy_; }
  const TrustStore& trust_store() const { return *store_; }
  RandomSource& rng() { return *rng_; }

  /// Sealed registration request for `ltca_id`.
  PendingCall registration_request(const std::string& ltca_id);

  std::unique_ptr<RefillSession> begin_refill(RefillPlan plan, Timestamp now);
  /// Runs both legs over `transport`. Authority errors propagate.
  std::vector<Pseudonym> refill(RefillPlan plan, Transport& transport, Timestamp now);

  PseudonymPool& pool(const std::string& lane = "") { return pools_[lane]; }
  const std::map<std::string, PseudonymPool>& pools() const { return pools_; }
  const PoolEntry* current_pseudonym(Timestamp now, const std::string& lane = "");

  /// Throws Error(no_valid_pseudonym) when the pool has nothing valid.
  Beacon sign_beacon(ByteView payload, Position position, Millis now, const std::string& lane = "");

  BeaconVerifier& verifier() { return verifier_; }
  std::uint64_t signed_count() const { return signed_; }

 private:
  friend class RefillSession;
  std::string id_;
  KeyPair ltk_;
  std::shared_ptr<const TrustStore> store_;
  LifetimePolicy policy_;
  std::unique_ptr<RandomSource> rng_;
  std::optional<LongTermCertificate> ltc_;
  std::map<std::string, PseudonymPool> pools_;
  BeaconVerifier verifier_;
  std::uint64_t signed_ = 0;
};

/// Public key of `authority_id` from the trust store.
const PublicKey& authority_key(const TrustStore& store, const std::string& authority_id);

}  // namespace vpki
