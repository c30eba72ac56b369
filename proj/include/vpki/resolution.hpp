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

// Resolution authority. Resolving a pseudonym takes two signed orders: the
// PCA maps the pseudonym to its token, the LTCA maps the token to a vehicle.
// Orders are journaled before each authority call and can be resumed after
// an authority was unreachable.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vpki/chain.hpp"
#include "vpki/ltca.hpp"
#include "vpki/pca.hpp"
#include "vpki/wire.hpp"

namespace vpki {

/// Calls into a PCA. Implementations throw Error(authority_unreachable) when
/// the PCA cannot be reached.
class PcaLink {
 public:
  virtual ~PcaLink() = default;
  virtual PseudonymOwner resolve_pseudonym(const Serial& serial, const AuthorizationOrder& order) = 0;
  virtual Crl revoke_pseudonyms(const AuthorizationOrder& order) = 0;
};

class LtcaLink {
 public:
  virtual ~LtcaLink() = default;
  virtual std::string resolve_token(const Serial& token, const AuthorizationOrder& order) = 0;
  virtual Crl revoke_vehicle(const AuthorizationOrder& order) = 0;
};

using Clock = std::function<Timestamp()>;

/// In-process adapters with an on/off switch for outage tests.
class LocalPcaLink final : public PcaLink {
 public:
  LocalPcaLink(Pca& pca, Clock clock) : pca_(pca), clock_(std::move(clock)) {}
  PseudonymOwner resolve_pseudonym(const Serial& serial, const AuthorizationOrder& order) override;
  Crl revoke_pseudonyms(const AuthorizationOrder& order) override;
  void set_online(bool online) { online_ = online; }

 private:
  void check() const;
  Pca& pca_;
  Clock clock_;
  bool online_ = true;
};

class LocalLtcaLink final : public LtcaLink {
 public:
  LocalLtcaLink(Ltca& ltca, Clock clock) : ltca_(ltca), clock_(std::move(clock)) {}
  std::string resolve_token(const Serial& token, const AuthorizationOrder& order) override;
  Crl revoke_vehicle(const AuthorizationOrder& order) override;
  void set_online(bool online) { online_ = online; }

 private:
  void check() const;
  Ltca& ltca_;
  Clock clock_;
  bool online_ = true;
};

enum class OrderState : std::uint8_t { pending = 0, pca_resolved = 1, completed = 2 };

std::string_view to_string(OrderState s);

struct ResolutionOrder {
  std::string order_id;
  Serial pseudonym_serial;
  std::string pca_id;
  std::string justification;
  OrderState state = OrderState::pending;
  Timestamp created_at = 0;
  std::optional<Timestamp> pca_answered_at;
  std::optional<Timestamp> ltca_answered_at;
  std::optional<Serial> token_serial;
  std::string ltca_id;
  std::string vehicle_id;
  bool revocation_triggered = false;
  Signature signature;  // RA signature over the request fields

  Bytes tbs() const;
  void write(ByteWriter& w) const;
  static ResolutionOrder read(ByteReader& r);
  bool operator==(const ResolutionOrder&) const = default;
};

struct RaAuditEntry {
  Timestamp at = 0;
  std::string kind;
  std::string order_id;
  Serial pseudonym_serial;
  std::string vehicle_id;

  bool operator==(const RaAuditEntry&) const = default;
};

struct RevocationEffects {
  Crl ltca_crl;
  Crl pca_crl;
};

class ResolutionAuthority {
 public:
  ResolutionAuthority(AuthorityCertificate cert, KeyPair key,
                      std::shared_ptr<const TrustStore> trust_store);

  const std::string& id() const { return cert_.authority_id; }
  const AuthorityCertificate& certificate() const { return cert_; }

  void add_pca(const std::string& pca_id, std::shared_ptr<PcaLink> link);
  void add_ltca(const std::string& ltca_id, std::shared_ptr<LtcaLink> link);
  /// Receives the encoded RA state after every order transition.
  void set_journal(std::function<void(const Bytes&)> journal);

  AuthorizationOrder sign_order(const std::string& order_id, OrderAction action, Bytes target,
                                Timestamp now) const;

  /// Runs the order to completion. On an unreachable authority the order is
  /// kept in its last state and the error is rethrown; resume() continues it.
  ResolutionOrder resolve(const Pseudonym& pseudonym, const std::string& justification,
                          Timestamp now);
  ResolutionOrder resume(const std::string& order_id, Timestamp now);

  /// Revokes the vehicle at its LTCA and the token's pseudonyms at the PCA.
  /// A second call returns the same effects without contacting anyone.
  RevocationEffects trigger_revocation(const std::string& order_id, Timestamp now);

  std::optional<ResolutionOrder> order(const std::string& order_id) const;
  std::vector<ResolutionOrder> orders() const;
  std::vector<RaAuditEntry> audit_log() const;

  Bytes serialize_state() const;
  void restore_state(ByteView data);

 private:
  ResolutionOrder advance(ResolutionOrder o, Timestamp now);
  void store_locked(const ResolutionOrder& o);
  Bytes serialize_locked() const;
  PcaLink& pca_link(const std::string& id) const;
  LtcaLink& ltca_link(const std::string& id) const;

  AuthorityCertificate cert_;
  KeyPair key_;
  std::shared_ptr<const TrustStore> trust_store_;
  std::map<std::string, std::shared_ptr<PcaLink>> pcas_;
  std::map<std::string, std::shared_ptr<LtcaLink>> ltcas_;
  std::function<void(const Bytes&)> journal_;

  mutable std::mutex mu_;
  std::map<std::string, ResolutionOrder> orders_;
  std::map<std::string, RevocationEffects> effects_;
  std::vector<RaAuditEntry> audit_;
  std::uint64_t next_order_ = 1;
};

}  // namespace vpki
