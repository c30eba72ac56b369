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


#include "vpki/resolution.hpp"

#include <cstdio>

namespace vpki {

void LocalPcaLink::check() const {
  if (!online_) throw Error(ErrorCode::authority_unreachable, pca_.id());
}

PseudonymOwner LocalPcaLink::resolve_pseudonym(const Serial& serial,
                                               const AuthorizationOrder& order) {
  check();
  return pca_.resolve_pseudonym(serial, order, clock_());
}

Crl LocalPcaLink::revoke_pseudonyms(const AuthorizationOrder& order) {
  check();
  return pca_.revoke_pseudonyms(order, clock_());
}

void LocalLtcaLink::check() const {
  if (!online_) throw Error(ErrorCode::authority_unreachable, ltca_.id());
}

std::string LocalLtcaLink::resolve_token(const Serial& token, const AuthorizationOrder& order) {
  check();
  return ltca_.resolve_token(token, order, clock_());
}

Crl LocalLtcaLink::revoke_vehicle(const AuthorizationOrder& order) {
  check();
  return ltca_.revoke_vehicle(order, clock_());
}

std::string_view to_string(OrderState s) {
  switch (s) {
    case OrderState::pending: return "pending";
    case OrderState::pca_resolved: return "pca-resolved";
    case OrderState::completed: return "completed";
  }
  return "?";
}

namespace {

void write_opt_time(ByteWriter& w, const std::optional<Timestamp>& t) {
  w.u8(t ? 1 : 0);
  if (t) w.i64(*t);
}

std::optional<Timestamp> read_opt_time(ByteReader& r) {
  if (r.u8() == 0) return std::nullopt;
  return r.i64();
}

}  // namespace

Bytes ResolutionOrder::tbs() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(TypeTag::authorization_order))
      .str(order_id)
      .fixed(pseudonym_serial.bytes)
      .str(pca_id)
      .str(justification)
      .i64(created_at);
  return std::move(w).take();
}

void ResolutionOrder::write(ByteWriter& w) const {
  w.str(order_id).fixed(pseudonym_serial.bytes).str(pca_id).str(justification);
  w.u8(static_cast<std::uint8_t>(state)).i64(created_at);
  write_opt_time(w, pca_answered_at);
  write_opt_time(w, ltca_answered_at);
  w.u8(token_serial ? 1 : 0);
  if (token_serial) w.fixed(token_serial->bytes);
  w.str(ltca_id).str(vehicle_id).u8(revocation_triggered ? 1 : 0).fixed(signature.bytes);
}

ResolutionOrder ResolutionOrder::read(ByteReader& r) {
  ResolutionOrder o;
  o.order_id = r.str();
  o.pseudonym_serial.bytes = r.fixed<16>();
  o.pca_id = r.str();
  o.justification = r.str();
  auto st = r.u8();
  if (st > 2) throw Error(ErrorCode::decode_error, "bad order state");
  o.state = static_cast<OrderState>(st);
  o.created_at = r.i64();
  o.pca_answered_at = read_opt_time(r);
  o.ltca_answered_at = read_opt_time(r);
  if (r.u8()) o.token_serial = Serial{r.fixed<16>()};
  o.ltca_id = r.str();
  o.vehicle_id = r.str();
  o.revocation_triggered = r.u8() != 0;
  o.signature.bytes = r.fixed<64>();
  return o;
}

ResolutionAuthority::ResolutionAuthority(AuthorityCertificate cert, KeyPair key,
                                         std::shared_ptr<const TrustStore> trust_store)
    : cert_(std::move(cert)), key_(std::move(key)), trust_store_(std::move(trust_store)) {
  if (cert_.role != Role::ra) throw Error(ErrorCode::invalid_request, "certificate is not an RA");
}

void ResolutionAuthority::add_pca(const std::string& pca_id, std::shared_ptr<PcaLink> link) {
  pcas_[pca_id] = std::move(link);
}

void ResolutionAuthority::add_ltca(const std::string& ltca_id, std::shared_ptr<LtcaLink> link) {
  ltcas_[ltca_id] = std::move(link);
}

void ResolutionAuthority::set_journal(std::function<void(const Bytes&)> journal) {
  journal_ = std::move(journal);
}

PcaLink& ResolutionAuthority::pca_link(const std::string& id) const {
  auto it = pcas_.find(id);
  if (it == pcas_.end()) throw Error(ErrorCode::authority_unreachable, "no link to " + id);
  return *it->second;
}

LtcaLink& ResolutionAuthority::ltca_link(const std::string& id) const {
  auto it = ltcas_.find(id);
  if (it == ltcas_.end()) throw Error(ErrorCode::authority_unreachable, "no link to " + id);
  return *it->second;
}

AuthorizationOrder ResolutionAuthority::sign_order(const std::string& order_id, OrderAction action,
                                                   Bytes target, Timestamp now) const {
  AuthorizationOrder o;
  o.order_id = order_id;
  o.action = action;
  o.target = std::move(target);
  o.issuer_id = id();
  o.issued_at = now;
  sign_credential(o, key_.private_key);
  return o;
}

void ResolutionAuthority::store_locked(const ResolutionOrder& o) {
  orders_[o.order_id] = o;
  if (journal_) journal_(serialize_locked());
}

ResolutionOrder ResolutionAuthority::resolve(const Pseudonym& pseudonym,
                                             const std::string& justification, Timestamp now) {
  auto verdict = verify_chain(pseudonym, *trust_store_, pseudonym.validity.start);
  if (!verdict.ok()) {
    throw Error(ErrorCode::invalid_request,
                "pseudonym does not verify: " + std::string(to_string(verdict.status)));
  }
  ResolutionOrder o;
  {
    std::lock_guard lock(mu_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "ORD-%06llu", static_cast<unsigned long long>(next_order_++));
    o.order_id = buf;
    o.pseudonym_serial = pseudonym.serial;
    o.pca_id = pseudonym.issuer_id;
    o.justification = justification;
    o.created_at = now;
    sign_credential(o, key_.private_key);
    store_locked(o);
  }
  return advance(std::move(o), now);
}

ResolutionOrder ResolutionAuthority::resume(const std::string& order_id, Timestamp now) {
  auto o = order(order_id);
  if (!o) throw Error(ErrorCode::invalid_request, "unknown order " + order_id);
  return advance(std::move(*o), now);
}

ResolutionOrder ResolutionAuthority::advance(ResolutionOrder o, Timestamp now) {
  if (o.state == OrderState::pending) {
    auto order = sign_order(o.order_id, OrderAction::resolve_pseudonym,
                            AuthorizationOrder::serial_target(o.pseudonym_serial), now);
    PseudonymOwner owner;
    try {
      owner = pca_link(o.pca_id).resolve_pseudonym(o.pseudonym_serial, order);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::unknown_pseudonym) throw Error(ErrorCode::pca_unknown_serial, e.what());
      throw;
    }
    o.token_serial = owner.token_serial;
    o.ltca_id = owner.ltca_id;
    o.pca_answered_at = now;
    o.state = OrderState::pca_resolved;
    std::lock_guard lock(mu_);
    store_locked(o);
  }
  if (o.state == OrderState::pca_resolved) {
    auto order = sign_order(o.order_id, OrderAction::resolve_token,
                            AuthorizationOrder::serial_target(*o.token_serial), now);
    try {
      o.vehicle_id = ltca_link(o.ltca_id).resolve_token(*o.token_serial, order);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::unknown_token) throw Error(ErrorCode::ltca_unknown_token, e.what());
      throw;
    }
    o.ltca_answered_at = now;
    o.state = OrderState::completed;
    std::lock_guard lock(mu_);
    audit_.push_back({.at = now,
                      .kind = "resolve",
                      .order_id = o.order_id,
                      .pseudonym_serial = o.pseudonym_serial,
                      .vehicle_id = o.vehicle_id});
    store_locked(o);
  }
  return o;
}

RevocationEffects ResolutionAuthority::trigger_revocation(const std::string& order_id,
                                                          Timestamp now) {
  auto o = order(order_id);
  if (!o) throw Error(ErrorCode::invalid_request, "unknown order " + order_id);
  if (o->state != OrderState::completed) throw Error(ErrorCode::order_pending, order_id);
  {
    std::lock_guard lock(mu_);
    if (auto it = effects_.find(order_id); it != effects_.end()) return it->second;
  }
  RevocationEffects fx;
  fx.ltca_crl = ltca_link(o->ltca_id)
                    .revoke_vehicle(sign_order(order_id + "/ltc", OrderAction::revoke_vehicle,
                                               AuthorizationOrder::vehicle_target(o->vehicle_id),
                                               now));
  fx.pca_crl = pca_link(o->pca_id)
                   .revoke_pseudonyms(sign_order(order_id + "/pseudonyms", OrderAction::revoke_token,
                                                 AuthorizationOrder::serial_target(*o->token_serial),
                                                 now));
  std::lock_guard lock(mu_);
  o->revocation_triggered = true;
  effects_[order_id] = fx;
  audit_.push_back({.at = now,
                    .kind = "revoke",
                    .order_id = order_id,
                    .pseudonym_serial = o->pseudonym_serial,
                    .vehicle_id = o->vehicle_id});
  store_locked(*o);
  return fx;
}

std::optional<ResolutionOrder> ResolutionAuthority::order(const std::string& order_id) const {
  std::lock_guard lock(mu_);
  auto it = orders_.find(order_id);
  if (it == orders_.end()) return std::nullopt;
  return it->second;
}

std::vector<ResolutionOrder> ResolutionAuthority::orders() const {
  std::lock_guard lock(mu_);
  std::vector<ResolutionOrder> out;
  for (const auto& [k, v] : orders_) out.push_back(v);
  return out;
}

std::vector<RaAuditEntry> ResolutionAuthority::audit_log() const {
  std::lock_guard lock(mu_);
  return audit_;
}

Bytes ResolutionAuthority::serialize_state() const {
  std::lock_guard lock(mu_);
  return serialize_locked();
}

Bytes ResolutionAuthority::serialize_locked() const {
  ByteWriter w;
  w.u64(next_order_).u32(static_cast<std::uint32_t>(orders_.size()));
  for (const auto& [k, v] : orders_) v.write(w);
  w.u32(static_cast<std::uint32_t>(audit_.size()));
  for (const auto& e : audit_) {
    w.i64(e.at).str(e.kind).str(e.order_id).fixed(e.pseudonym_serial.bytes).str(e.vehicle_id);
  }
  return std::move(w).take();
}

void ResolutionAuthority::restore_state(ByteView data) {
  ByteReader r(data);
  auto next = r.u64();
  decltype(orders_) orders;
  decltype(audit_) audit;
  for (auto n = r.u32(); n > 0; --n) {
    auto o = ResolutionOrder::read(r);
    if (!verify(o.tbs(), o.signature, key_.public_key)) {
      throw Error(ErrorCode::bad_signature, "journaled order " + o.order_id);
    }
    orders.emplace(o.order_id, std::move(o));
  }
  for (auto n = r.u32(); n > 0; --n) {
    RaAuditEntry e;
    e.at = r.i64();
    e.kind = r.str();
    e.order_id = r.str();
    e.pseudonym_serial.bytes = r.fixed<16>();
    e.vehicle_id = r.str();
    audit.push_back(std::move(e));
  }
  r.expect_end();
  std::lock_guard lock(mu_);
  next_order_ = next;
  orders_ = std::move(orders);
  audit_ = std::move(audit);
  effects_.clear();
}

}  // namespace vpki
