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


#include "vpki/pca.hpp"

#include <algorithm>

#include "vpki/kernels.hpp"

namespace vpki {

std::string_view to_string(LifetimeMode m) { return m == LifetimeMode::grid ? "grid" : "flexible"; }

LifetimeMode lifetime_mode_from_string(std::string_view s) {
  if (s == "grid") return LifetimeMode::grid;
  if (s == "flexible") return LifetimeMode::flexible;
  throw Error(ErrorCode::spec_invalid, "unknown lifetime mode " + std::string(s));
}

Pca::Pca(AuthorityCertificate cert, KeyPair key, PcaConfig config,
         std::shared_ptr<const TrustStore> trust_store, std::unique_ptr<RandomSource> rng)
    : cert_(std::move(cert)),
      key_(std::move(key)),
      config_(std::move(config)),
      trust_store_(std::move(trust_store)),
      rng_(std::move(rng)) {
  if (cert_.role != Role::pca) throw Error(ErrorCode::invalid_request, "certificate is not a PCA");
  config_.policy.validate();
  if (!rng_) rng_ = std::make_unique<SystemRandom>();
}

std::vector<ValidityInterval> Pca::plan_validity(const PseudonymRequest& request) const {
  const auto& policy = config_.policy;
  const auto tag = request.token.period_tag;
  const auto n = static_cast<std::int64_t>(request.public_keys.size());
  std::vector<ValidityInterval> out;
  out.reserve(request.public_keys.size());
  if (config_.mode == LifetimeMode::grid) {
    for (std::int64_t i = 0; i < n; ++i) out.push_back(policy.slot(tag, i));
    return out;
  }
  auto period = policy.period(tag);
  auto start = request.requested_start.value_or(period.start);
  if (!period.contains(start)) {
    throw Error(ErrorCode::invalid_request, "requested start outside the token period");
  }
  for (std::int64_t i = 0; i < n; ++i) {
    auto s = start + i * policy.slot_duration;
    out.push_back({s, s + policy.slot_duration});
  }
  return out;
}

std::vector<Pseudonym> Pca::issue_pseudonyms(const PseudonymRequest& request, Timestamp now) {
  const auto& token = request.token;
  std::shared_ptr<const TrustStore> store;
  {
    std::lock_guard lock(mu_);
    store = trust_store_;
  }
  if (now >= token.validity.end) throw Error(ErrorCode::token_expired, token.serial.hex());
  if (token.validity != config_.policy.period(token.period_tag)) {
    throw Error(ErrorCode::invalid_token, "token validity is not its period");
  }
  auto verdict = verify_chain(token, *store, std::max(now, token.validity.start));
  if (verdict.status == ChainStatus::expired) throw Error(ErrorCode::token_expired);
  if (!verdict.ok()) {
    throw Error(ErrorCode::invalid_token, std::string(to_string(verdict.status)));
  }
  if (config_.enforce_binding && make_pca_binding(id(), request.salt) != token.pca_binding) {
    throw Error(ErrorCode::wrong_pca_binding, id());
  }
  if (request.public_keys.empty()) throw Error(ErrorCode::invalid_request, "no public keys");
  if (static_cast<std::int64_t>(request.public_keys.size()) > config_.policy.slots_per_period()) {
    throw Error(ErrorCode::too_many_keys, std::to_string(request.public_keys.size()));
  }
  {
    auto keys = request.public_keys;
    std::sort(keys.begin(), keys.end(),
              [](const PublicKey& a, const PublicKey& b) { return a.bytes < b.bytes; });
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
      throw Error(ErrorCode::invalid_request, "duplicate public keys");
    }
    for (const auto& k : keys) VerifyingKey{k};
  }
  auto validity = plan_validity(request);

  std::lock_guard lock(mu_);
  if (ledger_.contains(token.serial)) throw Error(ErrorCode::token_replayed, token.serial.hex());

  std::vector<Pseudonym> out(request.public_keys.size());
  std::vector<Bytes> tbs(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].serial = Serial::random(*rng_);
    out[i].public_key = request.public_keys[i];
    out[i].validity = validity[i];
    out[i].issuer_id = id();
    tbs[i] = out[i].tbs();
  }
  auto sigs = config_.parallel_signing ? sign_batch(tbs, key_.private_key)
                                       : sign_batch_serial(tbs, key_.private_key);

  IssuanceRecord rec{.token_serial = token.serial,
                     .ltca_id = token.issuer_id,
                     .period_tag = token.period_tag,
                     .arrival = now};
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].signature = sigs[i];
    rec.pseudonyms.push_back(out[i].serial);
    rec.validity.push_back(out[i].validity);
    serial_index_.emplace(out[i].serial, SerialInfo{token.serial, out[i].validity});
  }
  ledger_.emplace(token.serial, std::move(rec));
  append_audit({.at = now,
                .kind = "issue",
                .token_serial = token.serial,
                .count = static_cast<std::uint32_t>(out.size())});
  return out;
}

Crl Pca::revoke_pseudonyms(const AuthorizationOrder& order, Timestamp now) {
  if (order.action != OrderAction::revoke_token && order.action != OrderAction::revoke_serials) {
    throw Error(ErrorCode::unauthorized, "order action mismatch");
  }
  check_order(order, order.action, now);
  std::lock_guard lock(mu_);
  std::vector<std::pair<Serial, Timestamp>> targets;
  std::optional<Serial> token_serial;
  if (order.action == OrderAction::revoke_token) {
    token_serial = order.target_serial();
    auto it = ledger_.find(*token_serial);
    if (it == ledger_.end()) throw Error(ErrorCode::unknown_target, token_serial->hex());
    for (std::size_t i = 0; i < it->second.pseudonyms.size(); ++i) {
      targets.emplace_back(it->second.pseudonyms[i], it->second.validity[i].end);
    }
  } else {
    for (const auto& s : order.target_serials()) {
      auto it = serial_index_.find(s);
      if (it == serial_index_.end()) throw Error(ErrorCode::unknown_target, s.hex());
      targets.emplace_back(s, it->second.validity.end);
    }
  }
  std::uint32_t added = 0;
  for (const auto& [serial, end] : targets) {
    if (end > now && revoked_.emplace(serial, end).second) ++added;
  }
  append_audit({.at = now,
                .kind = "revoke",
                .token_serial = token_serial,
                .count = added,
                .order_id = order.order_id});
  return sign_crl_locked(now);
}

PseudonymOwner Pca::resolve_pseudonym(const Serial& serial, const AuthorizationOrder& order,
                                      Timestamp now) {
  check_order(order, OrderAction::resolve_pseudonym, now);
  if (order.target_serial() != serial) {
    throw Error(ErrorCode::unauthorized, "order does not name this pseudonym");
  }
  std::lock_guard lock(mu_);
  auto it = serial_index_.find(serial);
  if (it == serial_index_.end()) throw Error(ErrorCode::unknown_pseudonym, serial.hex());
  bool seen = std::any_of(audit_.begin(), audit_.end(), [&](const PcaAuditEntry& e) {
    return e.kind == "resolve" && e.order_id == order.order_id;
  });
  if (!seen) {
    append_audit({.at = now,
                  .kind = "resolve",
                  .token_serial = it->second.token,
                  .pseudonym_serial = serial,
                  .order_id = order.order_id});
  }
  return {it->second.token, ledger_.at(it->second.token).ltca_id};
}

Crl Pca::publish_crl(Timestamp now) {
  std::lock_guard lock(mu_);
  return sign_crl_locked(now);
}

Crl Pca::sign_crl_locked(Timestamp now) {
  std::erase_if(revoked_, [&](const auto& kv) { return kv.second <= now; });
  Crl crl;
  crl.issuer_id = id();
  crl.sequence_number = ++crl_sequence_;
  crl.issued_at = now;
  for (const auto& [serial, end] : revoked_) crl.revoked_serials.push_back(serial);
  crl.normalize();
  sign_credential(crl, key_.private_key);
  return crl;
}

void Pca::check_order(const AuthorizationOrder& order, OrderAction action, Timestamp now) const {
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

std::vector<IssuanceRecord> Pca::issuance_ledger() const {
  std::lock_guard lock(mu_);
  std::vector<IssuanceRecord> out;
  for (const auto& [k, v] : ledger_) out.push_back(v);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.arrival, a.token_serial) < std::tie(b.arrival, b.token_serial);
  });
  return out;
}

std::vector<PcaAuditEntry> Pca::audit_since(std::size_t from) const {
  std::lock_guard lock(mu_);
  if (from >= audit_.size()) return {};
  return {audit_.begin() + static_cast<std::ptrdiff_t>(from), audit_.end()};
}

std::optional<IssuanceRecord> Pca::record(const Serial& token_serial) const {
  std::lock_guard lock(mu_);
  auto it = ledger_.find(token_serial);
  if (it == ledger_.end()) return std::nullopt;
  return it->second;
}

std::vector<PcaAuditEntry> Pca::audit_log() const {
  std::lock_guard lock(mu_);
  return audit_;
}

std::uint64_t Pca::crl_sequence() const {
  std::lock_guard lock(mu_);
  return crl_sequence_;
}

void Pca::append_audit(PcaAuditEntry entry) {
  if (audit_hook_) audit_hook_(entry);
  audit_.push_back(std::move(entry));
}

void Pca::set_trust_store(std::shared_ptr<const TrustStore> store) {
  std::lock_guard lock(mu_);
  trust_store_ = std::move(store);
}

void Pca::set_audit_hook(std::function<void(PcaAuditEntry&)> hook) {
  std::lock_guard lock(mu_);
  audit_hook_ = std::move(hook);
}

namespace {

void write_optional_serial(ByteWriter& w, const std::optional<Serial>& s) {
  w.u8(s ? 1 : 0);
  if (s) w.fixed(s->bytes);
}

std::optional<Serial> read_optional_serial(ByteReader& r) {
  if (r.u8() == 0) return std::nullopt;
  return Serial{r.fixed<16>()};
}

}  // namespace

Bytes Pca::serialize_state() const {
  std::lock_guard lock(mu_);
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(TypeTag::pca_state)).bytes(cert_.encode());
  w.u32(static_cast<std::uint32_t>(ledger_.size()));
  for (const auto& [serial, rec] : ledger_) {
    w.fixed(serial.bytes).str(rec.ltca_id).u64(rec.period_tag).i64(rec.arrival);
    w.u32(static_cast<std::uint32_t>(rec.pseudonyms.size()));
    for (std::size_t i = 0; i < rec.pseudonyms.size(); ++i) {
      w.fixed(rec.pseudonyms[i].bytes).i64(rec.validity[i].start).i64(rec.validity[i].end);
    }
  }
  w.u32(static_cast<std::uint32_t>(revoked_.size()));
  for (const auto& [serial, end] : revoked_) w.fixed(serial.bytes).i64(end);
  w.u32(static_cast<std::uint32_t>(audit_.size()));
  for (const auto& e : audit_) {
    w.i64(e.at).str(e.kind);
    write_optional_serial(w, e.token_serial);
    write_optional_serial(w, e.pseudonym_serial);
    w.u32(e.count).str(e.order_id).str(e.note);
  }
  w.u64(crl_sequence_);
  return std::move(w).take();
}

void Pca::restore_state(ByteView data) {
  ByteReader r(data);
  if (r.u8() != static_cast<std::uint8_t>(TypeTag::pca_state)) {
    throw Error(ErrorCode::decode_error, "not a PCA state");
  }
  auto cert_bytes = r.bytes();
  ByteReader cr(cert_bytes);
  if (AuthorityCertificate::decode(cr) != cert_) {
    throw Error(ErrorCode::decode_error, "state belongs to another authority");
  }
  decltype(ledger_) ledger;
  decltype(serial_index_) index;
  decltype(revoked_) revoked;
  decltype(audit_) audit;
  for (auto n = r.u32(); n > 0; --n) {
    IssuanceRecord rec;
    rec.token_serial = Serial{r.fixed<16>()};
    rec.ltca_id = r.str();
    rec.period_tag = r.u64();
    rec.arrival = r.i64();
    for (auto k = r.u32(); k > 0; --k) {
      Serial s{r.fixed<16>()};
      ValidityInterval v;
      v.start = r.i64();
      v.end = r.i64();
      rec.pseudonyms.push_back(s);
      rec.validity.push_back(v);
      index.emplace(s, SerialInfo{rec.token_serial, v});
    }
    ledger.emplace(rec.token_serial, std::move(rec));
  }
  for (auto n = r.u32(); n > 0; --n) {
    Serial s{r.fixed<16>()};
    revoked.emplace(s, r.i64());
  }
  for (auto n = r.u32(); n > 0; --n) {
    PcaAuditEntry e;
    e.at = r.i64();
    e.kind = r.str();
    e.token_serial = read_optional_serial(r);
    e.pseudonym_serial = read_optional_serial(r);
    e.count = r.u32();
    e.order_id = r.str();
    e.note = r.str();
    audit.push_back(std::move(e));
  }
  auto seq = r.u64();
  r.expect_end();

  std::lock_guard lock(mu_);
  ledger_ = std::move(ledger);
  serial_index_ = std::move(index);
  revoked_ = std::move(revoked);
  audit_ = std::move(audit);
  crl_sequence_ = seq;
}

}  // namespace vpki
