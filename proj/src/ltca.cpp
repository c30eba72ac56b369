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

#include "vpki/ltca.hpp"

#include <algorithm>

namespace vpki {

namespace {

void write_audit(ByteWriter& w, const LtcaAuditEntry& e) {
  w.i64(e.at).str(e.kind).str(e.vehicle_id);
  w.u8(e.period_tag ? 1 : 0);
  if (e.period_tag) w.u64(*e.period_tag);
  w.u8(e.token_serial ? 1 : 0);
  if (e.token_serial) w.fixed(e.token_serial->bytes);
  w.str(e.order_id).str(e.note);
}

LtcaAuditEntry read_audit(ByteReader& r) {
  LtcaAuditEntry e;
  e.at = r.i64();
  e.kind = r.str();
  e.vehicle_id = r.str();
  if (r.u8()) e.period_tag = r.u64();
  if (r.u8()) e.token_serial = Serial{r.fixed<16>()};
  e.order_id = r.str();
  e.note = r.str();
  return e;
}

}  // namespace

Ltca::Ltca(AuthorityCertificate cert, KeyPair key, LtcaConfig config,
           std::shared_ptr<const TrustStore> trust_store, std::unique_ptr<RandomSource> rng)
    : cert_(std::move(cert)),
      key_(std::move(key)),
      config_(std::move(config)),
      trust_store_(std::move(trust_store)),
      rng_(std::move(rng)) {
  if (cert_.role != Role::ltca) throw Error(ErrorCode::invalid_request, "certificate is not an LTCA");
  if (!rng_) rng_ = std::make_unique<SystemRandom>();
}

LongTermCertificate Ltca::register_vehicle(const std::string& vehicle_id,
                                           const PublicKey& public_key, Timestamp now) {
  std::lock_guard lock(mu_);
  if (revoked_.contains(vehicle_id)) throw Error(ErrorCode::revoked_identity, vehicle_id);
  if (registry_.contains(vehicle_id)) throw Error(ErrorCode::duplicate_registration, vehicle_id);
  LongTermCertificate ltc;
  ltc.serial = Serial::random(*rng_);
  ltc.vehicle_id = vehicle_id;
  ltc.public_key = public_key;
  ltc.issuer_id = id();
  ltc.validity = {now, now + config_.ltc_lifetime};
  sign_credential(ltc, key_.private_key);
  registry_.emplace(vehicle_id, ltc);
  append_audit({.at = now, .kind = "register", .vehicle_id = vehicle_id});
  return ltc;
}

Token Ltca::issue_token(const TokenRequest& request, Timestamp now) {
  std::lock_guard lock(mu_);
  auto it = registry_.find(request.vehicle_id);
  if (it == registry_.end()) throw Error(ErrorCode::invalid_ltc, "unregistered vehicle");
  if (revoked_.contains(request.vehicle_id)) throw Error(ErrorCode::revoked, request.vehicle_id);
  const auto& ltc = it->second;
  if (!ltc.validity.contains(now)) throw Error(ErrorCode::invalid_ltc, "LTC outside validity");
  if (!verify(request.tbs(), request.signature, ltc.public_key)) {
    throw Error(ErrorCode::invalid_ltc, "request signature does not verify under the LTC");
  }
  auto period = config_.policy.period(request.period_tag);
  if (period.end <= now) throw Error(ErrorCode::invalid_request, "period already over");

  auto key = std::make_pair(request.vehicle_id, request.period_tag);
  if (config_.period_ledger && ledger_.contains(key)) {
    throw Error(ErrorCode::duplicate_period_request,
                request.vehicle_id + " period " + std::to_string(request.period_tag));
  }

  Token token;
  token.serial = Serial::random(*rng_);
  token.pca_binding = request.pca_binding;
  token.period_tag = request.period_tag;
  token.validity = period;
  token.issuer_id = id();
  sign_credential(token, key_.private_key);

  ledger_.emplace(key, token.serial);
  token_owner_.emplace(token.serial, request.vehicle_id);
  append_audit({.at = now,
                .kind = "token",
                .vehicle_id = request.vehicle_id,
                .period_tag = request.period_tag,
                .token_serial = token.serial});
  return token;
}

Crl Ltca::revoke_vehicle(const std::string& vehicle_id, Timestamp now) {
  std::lock_guard lock(mu_);
  if (!registry_.contains(vehicle_id)) throw Error(ErrorCode::unknown_vehicle, vehicle_id);
  if (revoked_.insert(vehicle_id).second) {
    append_audit({.at = now, .kind = "revoke", .vehicle_id = vehicle_id});
  }
  return sign_crl_locked(now);
}

Crl Ltca::revoke_vehicle(const AuthorizationOrder& order, Timestamp now) {
  check_order(order, OrderAction::revoke_vehicle, now);
  auto vehicle_id = order.target_vehicle();
  std::lock_guard lock(mu_);
  if (!registry_.contains(vehicle_id)) throw Error(ErrorCode::unknown_vehicle, vehicle_id);
  if (revoked_.insert(vehicle_id).second) {
    append_audit(
        {.at = now, .kind = "revoke", .vehicle_id = vehicle_id, .order_id = order.order_id});
  }
  return sign_crl_locked(now);
}

std::string Ltca::resolve_token(const Serial& token_serial, const AuthorizationOrder& order,
                                Timestamp now) {
  check_order(order, OrderAction::resolve_token, now);
  if (order.target_serial() != token_serial) {
    throw Error(ErrorCode::unauthorized, "order does not name this token");
  }
  std::lock_guard lock(mu_);
  auto it = token_owner_.find(token_serial);
  if (it == token_owner_.end()) throw Error(ErrorCode::unknown_token, token_serial.hex());
  bool seen = std::any_of(audit_.begin(), audit_.end(), [&](const LtcaAuditEntry& e) {
    return e.kind == "resolve" && e.order_id == order.order_id;
  });
  if (!seen) {
    append_audit({.at = now,
                  .kind = "resolve",
                  .vehicle_id = it->second,
                  .token_serial = token_serial,
                  .order_id = order.order_id});
  }
  return it->second;
}

Crl Ltca::publish_crl(Timestamp now) {
  std::lock_guard lock(mu_);
  return sign_crl_locked(now);
}

Crl Ltca::sign_crl_locked(Timestamp now) {
  Crl crl;
  crl.issuer_id = id();
  crl.sequence_number = ++crl_sequence_;
  crl.issued_at = now;
  for (const auto& v : revoked_) crl.revoked_serials.push_back(registry_.at(v).serial);
  crl.normalize();
  sign_credential(crl, key_.private_key);
  return crl;
}

void Ltca::check_order(const AuthorizationOrder& order, OrderAction action, Timestamp now) const {
  std::shared_ptr<const TrustStore> store;
  {
    std::lock_guard lock(mu_);
    store = trust_store_;
  }
  auto verdict = verify_signed(order.issuer_id, order.tbs(), order.signature, {Role::ra},
                               std::nullopt, std::nullopt, *store, now, nullptr);
  if (!verdict.ok()) {
    throw Error(ErrorCode::unauthorized, "order rejected: " + std::string(to_string(verdict.status)));
  }
  if (order.action != action) throw Error(ErrorCode::unauthorized, "order action mismatch");
}

std::optional<LongTermCertificate> Ltca::ltc(const std::string& vehicle_id) const {
  std::lock_guard lock(mu_);
  auto it = registry_.find(vehicle_id);
  if (it == registry_.end()) return std::nullopt;
  return it->second;
}

bool Ltca::is_revoked(const std::string& vehicle_id) const {
  std::lock_guard lock(mu_);
  return revoked_.contains(vehicle_id);
}

std::vector<LtcaAuditEntry> Ltca::audit_since(std::size_t from) const {
  std::lock_guard lock(mu_);
  if (from >= audit_.size()) return {};
  return {audit_.begin() + static_cast<std::ptrdiff_t>(from), audit_.end()};
}

std::vector<LtcaAuditEntry> Ltca::audit_log() const {
  std::lock_guard lock(mu_);
  return audit_;
}

std::multimap<std::pair<std::string, std::uint64_t>, Serial> Ltca::token_ledger() const {
  std::lock_guard lock(mu_);
  return ledger_;
}

void Ltca::append_audit(LtcaAuditEntry entry) {
  if (audit_hook_) audit_hook_(entry);
  audit_.push_back(std::move(entry));
}

void Ltca::set_trust_store(std::shared_ptr<const TrustStore> store) {
  std::lock_guard lock(mu_);
  trust_store_ = std::move(store);
}

void Ltca::set_audit_hook(std::function<void(LtcaAuditEntry&)> hook) {
  std::lock_guard lock(mu_);
  audit_hook_ = std::move(hook);
}

Bytes Ltca::serialize_state() const {
  std::lock_guard lock(mu_);
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(TypeTag::ltca_state)).bytes(cert_.encode());
  w.u32(static_cast<std::uint32_t>(registry_.size()));
  for (const auto& [vid, ltc] : registry_) w.bytes(ltc.encode());
  w.u32(static_cast<std::uint32_t>(ledger_.size()));
  for (const auto& [key, serial] : ledger_) w.str(key.first).u64(key.second).fixed(serial.bytes);
  w.u32(static_cast<std::uint32_t>(revoked_.size()));
  for (const auto& v : revoked_) w.str(v);
  w.u32(static_cast<std::uint32_t>(audit_.size()));
  for (const auto& e : audit_) write_audit(w, e);
  w.u64(crl_sequence_);
  return std::move(w).take();
}

void Ltca::restore_state(ByteView data) {
  ByteReader r(data);
  if (r.u8() != static_cast<std::uint8_t>(TypeTag::ltca_state)) {
    throw Error(ErrorCode::decode_error, "not an LTCA state");
  }
  auto cert_bytes = r.bytes();
  ByteReader cr(cert_bytes);
  if (AuthorityCertificate::decode(cr) != cert_) {
    throw Error(ErrorCode::decode_error, "state belongs to another authority");
  }
  decltype(registry_) registry;
  decltype(ledger_) ledger;
  decltype(token_owner_) owners;
  decltype(revoked_) revoked;
  decltype(audit_) audit;
  for (auto n = r.u32(); n > 0; --n) {
    auto b = r.bytes();
    ByteReader lr(b);
    auto ltc = LongTermCertificate::decode(lr);
    lr.expect_end();
    registry.emplace(ltc.vehicle_id, ltc);
  }
  for (auto n = r.u32(); n > 0; --n) {
    auto vid = r.str();
    auto tag = r.u64();
    Serial s{r.fixed<16>()};
    ledger.emplace(std::make_pair(vid, tag), s);
    owners.emplace(s, vid);
  }
  for (auto n = r.u32(); n > 0; --n) revoked.insert(r.str());
  for (auto n = r.u32(); n > 0; --n) audit.push_back(read_audit(r));
  auto seq = r.u64();
  r.expect_end();

  std::lock_guard lock(mu_);
  registry_ = std::move(registry);
  ledger_ = std::move(ledger);
  token_owner_ = std::move(owners);
  revoked_ = std::move(revoked);
  audit_ = std::move(audit);
  crl_sequence_ = seq;
}

}  // namespace vpki
