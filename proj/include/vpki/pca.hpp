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

enum class LifetimeMode : std::uint8_t {
  /// Pseudonyms fill whole slots of the universal grid from the period start.
  grid = 0,
  /// Legacy: the vehicle picks the start time inside the token's period.
  flexible = 1,
};

std::string_view to_string(LifetimeMode m);
LifetimeMode lifetime_mode_from_string(std::string_view s);

struct PcaConfig {
  LifetimePolicy policy;
  LifetimeMode mode = LifetimeMode::grid;
  /// Check digest(pca_id || salt) against the token. Off only in the
  /// guards-off attack scenarios.
  bool enforce_binding = true;
  bool parallel_signing = true;
};

/// What the PCA keeps per served request: the token, the LTCA that signed
/// it and the pseudonyms issued under it. No vehicle identity.
struct IssuanceRecord {
  Serial token_serial;
  std::string ltca_id;
  std::uint64_t period_tag = 0;
  Timestamp arrival = 0;
  std::vector<Serial> pseudonyms;
  std::vector<ValidityInterval> validity;

  bool operator==(const IssuanceRecord&) const = default;
};

struct PcaAuditEntry {
  Timestamp at = 0;
  std::string kind;
  std::optional<Serial> token_serial;
  std::optional<Serial> pseudonym_serial;
  std::uint32_t count = 0;
  std::string order_id;
  std::string note;

  bool operator==(const PcaAuditEntry&) const = default;
};

struct PseudonymOwner {
  Serial token_serial;
  /// LTCA that signed the token, so a resolver knows where to go next.
  std::string ltca_id;
};

class Pca {
 public:
  Pca(AuthorityCertificate cert, KeyPair key, PcaConfig config,
      std::shared_ptr<const TrustStore> trust_store, std::unique_ptr<RandomSource> rng);

  const std::string& id() const { return cert_.authority_id; }
  const AuthorityCertificate& certificate() const { return cert_; }
  const PrivateKey& private_key() const { return key_.private_key; }
  const PcaConfig& config() const { return config_; }

  /// Tokens are accepted ahead of their period so vehicles can refill in
  /// advance; they are refused once the period is over.
  std::vector<Pseudonym> issue_pseudonyms(const PseudonymRequest& request, Timestamp now);

  /// Order action revoke_token or revoke_serials. Serials already expired at
  /// `now` are left off the list.
  Crl revoke_pseudonyms(const AuthorizationOrder& order, Timestamp now);

  PseudonymOwner resolve_pseudonym(const Serial& serial, const AuthorizationOrder& order,
                                   Timestamp now);

  Crl publish_crl(Timestamp now);

  std::vector<IssuanceRecord> issuance_ledger() const;
  std::optional<IssuanceRecord> record(const Serial& token_serial) const;
  std::vector<PcaAuditEntry> audit_log() const;
  /// Entries appended after the first `from`.
  std::vector<PcaAuditEntry> audit_since(std::size_t from) const;
  std::uint64_t crl_sequence() const;

  Bytes serialize_state() const;
  void restore_state(ByteView data);

  void set_trust_store(std::shared_ptr<const TrustStore> store);
  void set_audit_hook(std::function<void(PcaAuditEntry&)> hook);

 private:
  struct SerialInfo {
    Serial token;
    ValidityInterval validity;
  };

  void check_order(const AuthorizationOrder& order, OrderAction action, Timestamp now) const;
  void append_audit(PcaAuditEntry entry);
  Crl sign_crl_locked(Timestamp now);
  std::vector<ValidityInterval> plan_validity(const PseudonymRequest& request) const;

  AuthorityCertificate cert_;
  KeyPair key_;
  PcaConfig config_;
  std::shared_ptr<const TrustStore> trust_store_;
  std::unique_ptr<RandomSource> rng_;

  mutable std::mutex mu_;
  std::map<Serial, IssuanceRecord> ledger_;
  std::map<Serial, SerialInfo> serial_index_;
  std::map<Serial, Timestamp> revoked_;  // serial -> validity end
  std::vector<PcaAuditEntry> audit_;
  std::uint64_t crl_sequence_ = 0;
  std::function<void(PcaAuditEntry&)> audit_hook_;
};

}  // namespace vpki
