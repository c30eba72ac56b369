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


#include "vpki/vehicle.hpp"

#include <algorithm>

namespace vpki {

// --- beacon -----------------------------------------------------------------

Bytes Beacon::signed_bytes() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(TypeTag::beacon)).bytes(payload).f64(position.x).f64(position.y).i64(timestamp);
  return std::move(w).take();
}

Bytes Beacon::encode() const {
  ByteWriter w;
  w.raw(signed_bytes()).bytes(pseudonym.encode()).fixed(signature.bytes);
  return std::move(w).take();
}

Beacon Beacon::decode(ByteView data) {
  ByteReader r(data);
  if (r.u8() != static_cast<std::uint8_t>(TypeTag::beacon)) {
    throw Error(ErrorCode::decode_error, "not a beacon");
  }
  Beacon b;
  b.payload = r.bytes();
  b.position.x = r.f64();
  b.position.y = r.f64();
  b.timestamp = r.i64();
  auto pb = r.bytes();
  ByteReader pr(pb);
  b.pseudonym = Pseudonym::decode(pr);
  pr.expect_end();
  b.signature.bytes = r.fixed<64>();
  r.expect_end();
  return b;
}

// --- pool -------------------------------------------------------------------

void PseudonymPool::add(std::vector<PoolEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const PoolEntry& a, const PoolEntry& b) {
    return a.pseudonym.validity.start < b.pseudonym.validity.start;
  });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& v = entries[i].pseudonym.validity;
    if (i > 0 && entries[i - 1].pseudonym.validity.overlaps(v)) {
      throw Error(ErrorCode::pool_conflict, "new pseudonyms overlap each other");
    }
    for (const auto& e : entries_) {
      if (e.pseudonym.validity.overlaps(v)) throw Error(ErrorCode::pool_conflict, "overlaps a held pseudonym");
    }
    for (const auto& u : used_intervals_) {
      if (u.overlaps(v)) throw Error(ErrorCode::pool_conflict, "overlaps a used pseudonym");
    }
  }
  for (auto& e : entries) {
    coverage_end_ = std::max(coverage_end_.value_or(e.pseudonym.validity.end), e.pseudonym.validity.end);
    entries_.push_back(std::move(e));
  }
  std::sort(entries_.begin(), entries_.end(), [](const PoolEntry& a, const PoolEntry& b) {
    return a.pseudonym.validity.start < b.pseudonym.validity.start;
  });
}

const PoolEntry* PseudonymPool::current(Timestamp now) {
  auto expired = std::find_if(entries_.begin(), entries_.end(),
                              [&](const PoolEntry& e) { return e.pseudonym.validity.end > now; });
  for (auto it = entries_.begin(); it != expired; ++it) {
    used_.insert(it->pseudonym.serial);
    used_intervals_.push_back(it->pseudonym.validity);
  }
  entries_.erase(entries_.begin(), expired);
  if (!entries_.empty() && entries_.front().pseudonym.validity.contains(now)) return &entries_.front();
  return nullptr;
}

// --- verifier ---------------------------------------------------------------

std::string_view to_string(BeaconVerdict v) {
  switch (v) {
    case BeaconVerdict::accept: return "accept";
    case BeaconVerdict::bad_chain: return "bad-chain";
    case BeaconVerdict::bad_signature: return "bad-signature";
    case BeaconVerdict::stale: return "stale";
    case BeaconVerdict::revoked: return "revoked";
  }
  return "?";
}

BeaconVerifier::BeaconVerifier(std::shared_ptr<const TrustStore> trust_store, Millis tolerance)
    : store_(std::move(trust_store)), tolerance_(tolerance) {}

BeaconVerdict BeaconVerifier::count(BeaconVerdict v) {
  switch (v) {
    case BeaconVerdict::accept: ++stats_.accepted; break;
    case BeaconVerdict::bad_chain: ++stats_.bad_chain; break;
    case BeaconVerdict::bad_signature: ++stats_.bad_signature; break;
    case BeaconVerdict::stale: ++stats_.stale; break;
    case BeaconVerdict::revoked: ++stats_.revoked; break;
  }
  return v;
}

BeaconVerdict BeaconVerifier::verify(const Beacon& beacon, Millis now) {
  if (std::abs(now - beacon.timestamp) > tolerance_) return count(BeaconVerdict::stale);
  const auto& p = beacon.pseudonym;
  if (crls_.is_revoked(p.issuer_id, p.serial)) return count(BeaconVerdict::revoked);

  const auto at = to_seconds(beacon.timestamp);
  auto it = cache_.find(p.serial);
  if (it == cache_.end() || !(it->second.pseudonym == p)) {
    if (!verify_chain(p, *store_, at).ok()) return count(BeaconVerdict::bad_chain);
    std::optional<VerifyingKey> key;
    try {
      key.emplace(p.public_key);
    } catch (const Error&) {
      return count(BeaconVerdict::bad_chain);
    }
    it = cache_.insert_or_assign(p.serial, Cached{p, *key}).first;
  } else if (!p.validity.contains(at)) {
    return count(BeaconVerdict::bad_chain);
  }
  if (!it->second.key.verify(beacon.signed_bytes(), beacon.signature)) {
    return count(BeaconVerdict::bad_signature);
  }
  return count(BeaconVerdict::accept);
}

CrlCache::Update BeaconVerifier::process_crl(const Crl& crl, Timestamp now) {
  auto u = crls_.process(crl, *store_, now);
  if (u == CrlCache::Update::updated) {
    ++stats_.crl_updates;
  } else {
    ++stats_.crl_stale;
  }
  return u;
}

void BeaconVerifier::set_trust_store(std::shared_ptr<const TrustStore> store) {
  store_ = std::move(store);
  cache_.clear();
}

void BeaconVerifier::prune(Timestamp now) {
  std::erase_if(cache_, [&](const auto& kv) { return kv.second.pseudonym.validity.end < now; });
}

// --- acquisition ------------------------------------------------------------

const PublicKey& authority_key(const TrustStore& store, const std::string& authority_id) {
  const auto* cert = store.first(authority_id);
  if (!cert) throw Error(ErrorCode::unknown_target, "no certificate for " + authority_id);
  return cert->public_key;
}

RefillSession::RefillSession(Vehicle& vehicle, RefillPlan plan, Timestamp now)
    : vehicle_(vehicle),
      plan_(std::move(plan)),
      salt_(vehicle.rng().bytes(16)),
      binding_(make_pca_binding(plan_.pca_id, salt_)),
      token_call_(build_token_call(now)) {}

PendingCall RefillSession::build_token_call(Timestamp now) {
  if (!vehicle_.ltc_) throw Error(ErrorCode::invalid_ltc, "vehicle has no LTC");
  if (!vehicle_.ltc_->validity.contains(now)) throw Error(ErrorCode::invalid_ltc, "LTC outside validity");
  TokenRequest req;
  req.vehicle_id = vehicle_.id();
  req.period_tag = plan_.period_tag;
  req.pca_binding = binding_;
  req.sent_at = now;
  req.signature = sign(req.tbs(), vehicle_.ltk_.private_key);
  return make_request(MessageType::token, req.encode(),
                      authority_key(vehicle_.trust_store(), ltca_id()), vehicle_.rng());
}

const std::string& RefillSession::ltca_id() const { return vehicle_.ltc_->issuer_id; }

Bytes RefillSession::on_token_response(ByteView frame, Timestamp now) {
  auto body = open_response(frame, token_call_.reply_key).value();
  ByteReader r(body);
  auto token = Token::decode(r);
  r.expect_end();
  if (token.pca_binding != binding_ || token.period_tag != plan_.period_tag) {
    throw Error(ErrorCode::invalid_token, "token does not match the request");
  }
  if (!verify_chain(token, vehicle_.trust_store(), std::max(now, token.validity.start)).ok()) {
    throw Error(ErrorCode::invalid_token, "token does not verify");
  }
  token_ = token;

  auto& rng = vehicle_.rng();
  PseudonymRequest req;
  req.token = token;
  req.salt = salt_;
  req.requested_start = plan_.requested_start;
  keys_.clear();
  for (std::size_t i = 0; i < plan_.key_count; ++i) {
    keys_.push_back(generate_keypair(rng));
    req.public_keys.push_back(keys_.back().public_key);
  }
  pseudonym_call_ = make_request(MessageType::pseudonyms, req.encode(),
                                 authority_key(vehicle_.trust_store(), plan_.pca_id), rng);
  return pseudonym_call_->frame;
}

std::vector<Pseudonym> RefillSession::on_pseudonym_response(ByteView frame, Timestamp) {
  if (!pseudonym_call_) throw Error(ErrorCode::invalid_request, "no pseudonym request outstanding");
  auto ps = decode_pseudonym_list(open_response(frame, pseudonym_call_->reply_key).value());
  if (ps.size() != keys_.size()) throw Error(ErrorCode::invalid_request, "pseudonym count mismatch");
  std::vector<PoolEntry> entries;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i].public_key != keys_[i].public_key || ps[i].issuer_id != plan_.pca_id) {
      throw Error(ErrorCode::invalid_request, "pseudonym does not match the request");
    }
    if (!verify_chain(ps[i], vehicle_.trust_store(), ps[i].validity.start).ok()) {
      throw Error(ErrorCode::bad_signature, "pseudonym does not verify");
    }
    entries.push_back({ps[i], keys_[i].private_key});
  }
  vehicle_.pool(plan_.lane).add(std::move(entries));
  return ps;
}

// --- vehicle ----------------------------------------------------------------

Vehicle::Vehicle(std::string vehicle_id, KeyPair long_term_key,
                 std::shared_ptr<const TrustStore> trust_store, LifetimePolicy policy,
                 std::unique_ptr<RandomSource> rng, Millis tolerance)
    : id_(std::move(vehicle_id)),
      ltk_(std::move(long_term_key)),
      store_(std::move(trust_store)),
      policy_(std::move(policy)),
      rng_(std::move(rng)),
      verifier_(store_, tolerance) {
  if (!rng_) rng_ = std::make_unique<SystemRandom>();
}

void Vehicle::set_ltc(LongTermCertificate ltc) {
  if (ltc.vehicle_id != id_ || ltc.public_key != ltk_.public_key) {
    throw Error(ErrorCode::invalid_ltc, "LTC does not belong to this vehicle");
  }
  ltc_ = std::move(ltc);
}

PendingCall Vehicle::registration_request(const std::string& ltca_id) {
  RegisterRequest req{id_, ltk_.public_key};
  return make_request(MessageType::register_vehicle, req.encode(), authority_key(*store_, ltca_id),
                      *rng_);
}

std::unique_ptr<RefillSession> Vehicle::begin_refill(RefillPlan plan, Timestamp now) {
  return std::make_unique<RefillSession>(*this, std::move(plan), now);
}

std::vector<Pseudonym> Vehicle::refill(RefillPlan plan, Transport& transport, Timestamp now) {
  auto session = begin_refill(std::move(plan), now);
  auto token_reply = transport.call(session->ltca_id(), session->token_request());
  auto pca_request = session->on_token_response(token_reply, now);
  auto pca_reply = transport.call(session->plan().pca_id, pca_request);
  return session->on_pseudonym_response(pca_reply, now);
}

const PoolEntry* Vehicle::current_pseudonym(Timestamp now, const std::string& lane) {
  return pools_[lane].current(now);
}

Beacon Vehicle::sign_beacon(ByteView payload, Position position, Millis now, const std::string& lane) {
  const auto* entry = current_pseudonym(to_seconds(now), lane);
  if (!entry) throw Error(ErrorCode::no_valid_pseudonym, id_);
  Beacon b;
  b.payload.assign(payload.begin(), payload.end());
  b.position = position;
  b.timestamp = now;
  b.pseudonym = entry->pseudonym;
  b.signature = sign(b.signed_bytes(), entry->key);
  ++signed_;
  return b;
}

}  // namespace vpki
