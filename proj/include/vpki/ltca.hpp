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

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vpki/chain.hpp"
#include "vpki/credentials.hpp"
#include "vpki/wire.hpp"

namespace vpki {

struct LtcaConfig {
  std::int64_t ltc_lifetime = 5 * 365 * 86400;
  /// One token per (vehicle, period_tag). Disabling it opens the multi-PCA
  /// Sybil path and exists only for the attack scenarios.
  bool period_ledger = true;
  LifetimePolicy policy;
};

/// What the LTCA keeps about an operation. Never holds a PCA identifier or a
/// pseudonym serial; `note` is only written by instrumentation hooks.
struct LtcaAuditEntry {
  Timestamp at = 0;
  std::string kind;
  std::string vehicle_id;
  std::optional<std::uint64_t> period_tag;
  std::optional<Serial> token_serial;
  std::string order_id;
  std::string note;

  bool operator==(const LtcaAuditEntry&) const = default;
};

class Ltca {
 public:
  Ltca(AuthorityCertificate cert, KeyPair key, LtcaConfig config,
       std::shared_ptr<const TrustStore> trust_store, std::unique_ptr<RandomSource> rng);

  const std::string& id() const { return cert_.authority_id; }
  const AuthorityCertificate& certificate() const { return cert_; }
  const PrivateKey& private_key() const { return key_.private_key; }
  const LtcaConfig& config() const { return config_; }

  LongTermCertificate register_vehicle(const std::string& vehicle_id, const PublicKey& public_key,
                                       Timestamp now);

  /// Authenticates the request under the vehicle's LTC and enforces the
  /// per-period ledger with an atomic check-and-insert.
  Token issue_token(const TokenRequest& request, Timestamp now);

  /// Operator-side revocation; returns the next CRL. Idempotent for an
  /// already revoked vehicle.
  Crl revoke_vehicle(const std::string& vehicle_id, Timestamp now);
  /// Same, on an RA order (action revoke_vehicle).
  Crl revoke_vehicle(const AuthorizationOrder& order, Timestamp now);

  std::string resolve_token(const Serial& token_serial, const AuthorizationOrder& order,
                            Timestamp now);

  Crl publish_crl(Timestamp now);

  std::optional<LongTermCertificate> ltc(const std::string& vehicle_id) const;
  bool is_revoked(const std::string& vehicle_id) const;
  std::vector<LtcaAuditEntry> audit_log() const;
  /// Entries appended after the first `from`.
  std::vector<LtcaAuditEntry> audit_since(std::size_t from) const;
  /// (vehicle_id, period_tag) -> token serial. Holds more than one serial per
  /// key only when the period ledger is disabled.
  std::multimap<std::pair<std::string, std::uint64_t>, Serial> token_ledger() const;

  Bytes serialize_state() const;
  void restore_state(ByteView data);

  void set_trust_store(std::shared_ptr<const TrustStore> store);
  /// Called on every audit entry before it is appended. Test and
  /// fault-injection instrumentation only.
  void set_audit_hook(std::function<void(LtcaAuditEntry&)> hook);

 private:
  void append_audit(LtcaAuditEntry entry);
  void check_order(const AuthorizationOrder& order, OrderAction action, Timestamp now) const;
  Crl sign_crl_locked(Timestamp now);

  AuthorityCertificate cert_;
  KeyPair key_;
  LtcaConfig config_;
  std::shared_ptr<const TrustStore> trust_store_;
  std::unique_ptr<RandomSource> rng_;

  mutable std::mutex mu_;
  std::map<std::string, LongTermCertificate> registry_;
  std::multimap<std::pair<std::string, std::uint64_t>, Serial> ledger_;
  std::map<Serial, std::string> token_owner_;
  std::set<std::string> revoked_;
  std::vector<LtcaAuditEntry> audit_;
  std::uint64_t crl_sequence_ = 0;
  std::function<void(LtcaAuditEntry&)> audit_hook_;
};

}  // namespace vpki
