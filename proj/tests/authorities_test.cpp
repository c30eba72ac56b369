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


#include <doctest.h>

#include "world.hpp"

using namespace vpki;
using testing::World;

namespace {

TokenRequest token_request(Vehicle& v, std::uint64_t period, const Digest& binding, Timestamp now) {
  TokenRequest r;
  r.vehicle_id = v.id();
  r.period_tag = period;
  r.pca_binding = binding;
  r.sent_at = now;
  r.signature = sign(r.tbs(), v.long_term_key().private_key);
  return r;
}

PseudonymRequest pseudonym_request(const Token& t, const Bytes& salt, std::size_t keys, RandomSource& rng) {
  PseudonymRequest r;
  r.token = t;
  r.salt = salt;
  for (std::size_t i = 0; i < keys; ++i) r.public_keys.push_back(generate_keypair(rng).public_key);
  return r;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ok;
}

}  // namespace

TEST_CASE("ltca registration and token ledger") {
  World w;
  auto v = w.vehicle("V001");
  auto& ltca = w.ltca();
  CHECK(code_of([&] { ltca.register_vehicle("V001", v->long_term_key().public_key, w.now); }) ==
        ErrorCode::duplicate_registration);

  Bytes salt(16, 1);
  auto binding = make_pca_binding("PCA-1", salt);
  auto req = token_request(*v, w.period(), binding, w.now);
  auto token = ltca.issue_token(req, w.now);
  CHECK(token.validity == w.dep.policy.period(w.period()));
  CHECK(token.pca_binding == binding);
  CHECK(verify_chain(token, *w.dep.trust_store, w.now).ok());

  CHECK(code_of([&] { ltca.issue_token(req, w.now); }) == ErrorCode::duplicate_period_request);
  auto next = token_request(*v, w.period() + 1, binding, w.now);
  CHECK_NOTHROW(ltca.issue_token(next, w.now));

  auto forged = token_request(*v, w.period() + 2, binding, w.now);
  forged.signature.bytes[3] ^= 1;
  CHECK(code_of([&] { ltca.issue_token(forged, w.now); }) == ErrorCode::invalid_ltc);

  auto crl = ltca.revoke_vehicle("V001", w.now);
  CHECK(crl.contains(v->ltc()->serial));
  CHECK(code_of([&] { ltca.issue_token(token_request(*v, w.period() + 3, binding, w.now), w.now); }) ==
        ErrorCode::revoked);
  CHECK(code_of([&] { ltca.register_vehicle("V001", v->long_term_key().public_key, w.now); }) ==
        ErrorCode::revoked_identity);
}

TEST_CASE("ltca without the period ledger hands out several tokens") {
  World w(2, {}, LifetimeMode::grid, 600, 86400, false);
  auto v = w.vehicle("V001");
  Bytes salt(16, 1);
  auto req = token_request(*v, w.period(), make_pca_binding("PCA-1", salt), w.now);
  w.ltca().issue_token(req, w.now);
  w.ltca().issue_token(req, w.now);
  CHECK(w.ltca().token_ledger().count({"V001", w.period()}) == 2);
}

TEST_CASE("ltca audit entries carry no pca or pseudonym data") {
  World w;
  auto v = w.vehicle("V001");
  v->refill({.period_tag = w.period(), .pca_id = "PCA-1", .key_count = 3}, w, w.now);
  auto dump = w.ltca().serialize_state();
  for (const auto& s : v->pool().entries()) CHECK_FALSE(contains_subsequence(dump, s.pseudonym.serial.bytes));
  CHECK_FALSE(contains_subsequence(dump, as_bytes("PCA-1")));
}

TEST_CASE("pca issuance checks") {
  World w;
  HashDrbg rng(3, "pca");
  auto v = w.vehicle("V001");
  Bytes salt(16, 2);
  auto token = w.ltca().issue_token(token_request(*v, w.period(), make_pca_binding("PCA-1", salt), w.now), w.now);
  auto& pca = w.pca();

  CHECK(code_of([&] { pca.issue_pseudonyms(pseudonym_request(token, Bytes(16, 3), 2, rng), w.now); }) ==
        ErrorCode::wrong_pca_binding);
  CHECK(code_of([&] { pca.issue_pseudonyms(pseudonym_request(token, salt, 145, rng), w.now); }) ==
        ErrorCode::too_many_keys);
  auto tampered = token;
  tampered.period_tag += 1;
  tampered.validity = w.dep.policy.period(tampered.period_tag);
  CHECK(code_of([&] { pca.issue_pseudonyms(pseudonym_request(tampered, salt, 2, rng), w.now); }) ==
        ErrorCode::invalid_token);

  auto ps = pca.issue_pseudonyms(pseudonym_request(token, salt, 4, rng), w.now);
  REQUIRE(ps.size() == 4);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CHECK(ps[i].validity == w.dep.policy.slot(w.period(), static_cast<std::int64_t>(i)));
    CHECK(verify_chain(ps[i], *w.dep.trust_store, ps[i].validity.start).ok());
  }
  CHECK(code_of([&] { pca.issue_pseudonyms(pseudonym_request(token, salt, 4, rng), w.now); }) ==
        ErrorCode::token_replayed);
  auto end = token.validity.end;
  CHECK(code_of([&] { pca.issue_pseudonyms(pseudonym_request(token, salt, 1, rng), end); }) ==
        ErrorCode::token_expired);

  auto rec = pca.record(token.serial);
  REQUIRE(rec);
  CHECK(rec->ltca_id == w.ltca().id());
  CHECK(rec->pseudonyms.size() == 4);
}

TEST_CASE("pca accepts a token ahead of its period") {
  World w;
  HashDrbg rng(4, "ahead");
  auto v = w.vehicle("V001");
  Bytes salt(16, 2);
  auto token =
      w.ltca().issue_token(token_request(*v, w.period() + 1, make_pca_binding("PCA-1", salt), w.now), w.now);
  auto ps = w.pca().issue_pseudonyms(pseudonym_request(token, salt, 2, rng), w.now);
  CHECK(ps.front().validity.start == token.validity.start);
}

TEST_CASE("flexible mode honours the requested start") {
  World w(5, {}, LifetimeMode::flexible);
  HashDrbg rng(5, "flex");
  auto v = w.vehicle("V001");
  Bytes salt(16, 2);
  auto token = w.ltca().issue_token(token_request(*v, w.period(), make_pca_binding("PCA-1", salt), w.now), w.now);
  auto req = pseudonym_request(token, salt, 3, rng);
  req.requested_start = 1234;
  auto ps = w.pca().issue_pseudonyms(req, w.now);
  CHECK(ps[0].validity == ValidityInterval{1234, 1834});
  CHECK(ps[2].validity == ValidityInterval{2434, 3034});
  req.requested_start = token.validity.end;
  CHECK(code_of([&] { w.pca().issue_pseudonyms(req, w.now); }) == ErrorCode::invalid_request);
}

TEST_CASE("pca state round trip") {
  World w;
  auto v = w.vehicle("V001");
  v->refill({.period_tag = w.period(), .pca_id = "PCA-1", .key_count = 2}, w, w.now);
  auto state = w.pca().serialize_state();
  auto before = w.pca().issuance_ledger();
  World fresh;
  fresh.pca().restore_state(state);
  CHECK(fresh.pca().issuance_ledger() == before);
  CHECK(fresh.pca().serialize_state() == state);
  CHECK_THROWS_AS(fresh.ltca().restore_state(state), Error);
}

TEST_CASE("resolution needs both authorities") {
  World w;
  auto v = w.vehicle("V001");
  w.vehicle("V002");
  v->refill({.period_tag = w.period(), .pca_id = "PCA-1", .key_count = 2}, w, w.now);
  const auto& p = v->pool().entries().front().pseudonym;

  ResolutionAuthority ra(w.dep.certificate(w.dep.ra_id), w.dep.key(w.dep.ra_id), w.dep.trust_store);
  auto clock = [&] { return w.now; };
  auto pca_link = std::make_shared<LocalPcaLink>(w.pca(), clock);
  auto ltca_link = std::make_shared<LocalLtcaLink>(w.ltca(), clock);
  ra.add_pca("PCA-1", pca_link);
  ra.add_ltca(w.ltca().id(), ltca_link);
  std::vector<Bytes> journal;
  ra.set_journal([&](const Bytes& b) { journal.push_back(b); });

  ltca_link->set_online(false);
  CHECK(code_of([&] { ra.resolve(p, "incident 1", w.now); }) == ErrorCode::authority_unreachable);
  auto pending = ra.orders().front();
  CHECK(pending.state == OrderState::pca_resolved);
  CHECK(pending.vehicle_id.empty());
  CHECK(code_of([&] { ra.trigger_revocation(pending.order_id, w.now); }) == ErrorCode::order_pending);

  ltca_link->set_online(true);
  auto done = ra.resume(pending.order_id, w.now);
  CHECK(done.state == OrderState::completed);
  CHECK(done.vehicle_id == "V001");
  CHECK(journal.size() >= 3);

  auto fx = ra.trigger_revocation(done.order_id, w.now);
  CHECK(fx.ltca_crl.contains(v->ltc()->serial));
  for (const auto& e : v->pool().entries()) {
    CHECK(fx.pca_crl.contains(e.pseudonym.serial) == (e.pseudonym.validity.end > w.now));
  }
  auto again = ra.trigger_revocation(done.order_id, w.now + 5);
  CHECK(again.pca_crl == fx.pca_crl);

  ResolutionAuthority restored(w.dep.certificate(w.dep.ra_id), w.dep.key(w.dep.ra_id), w.dep.trust_store);
  restored.restore_state(journal.back());
  CHECK(restored.orders() == ra.orders());
}

TEST_CASE("authorities refuse orders not signed by the ra") {
  World w;
  auto v = w.vehicle("V001");
  v->refill({.period_tag = w.period(), .pca_id = "PCA-1", .key_count = 1}, w, w.now);
  auto serial = v->pool().entries().front().pseudonym.serial;

  auto good = w.order("O-1", OrderAction::resolve_pseudonym, AuthorizationOrder::serial_target(serial));
  auto owner = w.pca().resolve_pseudonym(serial, good, w.now);

  auto forged = good;
  forged.issuer_id = "PCA-1";
  sign_credential(forged, w.dep.key("PCA-1").private_key);
  CHECK(code_of([&] { w.pca().resolve_pseudonym(serial, forged, w.now); }) == ErrorCode::unauthorized);

  auto wrong_action = w.order("O-2", OrderAction::revoke_vehicle, AuthorizationOrder::serial_target(serial));
  CHECK(code_of([&] { w.pca().resolve_pseudonym(serial, wrong_action, w.now); }) == ErrorCode::unauthorized);

  auto other = w.order("O-3", OrderAction::resolve_token, AuthorizationOrder::serial_target(Serial{}));
  CHECK(code_of([&] { w.ltca().resolve_token(owner.token_serial, other, w.now); }) == ErrorCode::unauthorized);

  auto ok = w.order("O-4", OrderAction::resolve_token, AuthorizationOrder::serial_target(owner.token_serial));
  CHECK(w.ltca().resolve_token(owner.token_serial, ok, w.now) == "V001");
}

TEST_CASE("pca revocation skips expired serials") {
  World w(8, {}, LifetimeMode::grid, 60, 600);
  auto v = w.vehicle("V001");
  v->refill({.period_tag = w.period(), .pca_id = "PCA-1", .key_count = 10}, w, w.now);
  std::vector<Serial> serials;
  for (const auto& e : v->pool().entries()) serials.push_back(e.pseudonym.serial);
  // now = 1000 sits in slot [960, 1020) of period [600, 1200).
  auto crl = w.pca().revoke_pseudonyms(
      w.order("O-1", OrderAction::revoke_serials, AuthorizationOrder::serials_target(serials)), w.now);
  CHECK(crl.revoked_serials.size() == 4);
  CHECK(verify_chain(crl, *w.dep.trust_store, w.now).ok());
}
