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

#include "properties.hpp"

using namespace vpki;
using testing::make_deployment;
using testing::make_pseudonym;

TEST_CASE("file framing") {
  HashDrbg rng(1, "frame");
  auto c = testing::random_credential(rng, 2);
  auto file = encode_file(c);
  CHECK(std::string(file.begin(), file.begin() + 4) == "VPKI");
  CHECK(file[4] == kFormatVersion);
  CHECK(file[5] == static_cast<std::uint8_t>(TypeTag::pseudonym));

  auto bad_magic = file;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_file(bad_magic), Error);
  auto bad_version = file;
  bad_version[4] = 2;
  CHECK_THROWS_AS(decode_file(bad_version), Error);
}

TEST_CASE("truncated and padded encodings are rejected") {
  HashDrbg rng(2, "trunc");
  for (int kind = 0; kind < 6; ++kind) {
    auto body = canonical_encode(testing::random_credential(rng, kind));
    for (std::size_t cut : {std::size_t{1}, std::size_t{17}, body.size() - 1}) {
      if (cut >= body.size()) continue;
      CHECK_THROWS_AS(canonical_decode(ByteView(body).first(cut)), Error);
    }
    auto padded = body;
    padded.push_back(0);
    CHECK_THROWS_AS(canonical_decode(padded), Error);
  }
}

TEST_CASE("crl serials must be sorted and unique on the wire") {
  HashDrbg rng(3, "crl");
  Crl c;
  c.issuer_id = "PCA-1";
  auto a = Serial::random(rng), b = Serial::random(rng);
  c.revoked_serials = {a, b, a};
  c.normalize();
  CHECK(c.revoked_serials.size() == 2);
  CHECK(c.contains(a));
  CHECK(c.contains(b));
  CHECK(canonical_decode(canonical_encode(c)) == Credential(c));
  std::swap(c.revoked_serials[0], c.revoked_serials[1]);
  CHECK_THROWS_AS(canonical_decode(canonical_encode(c)), Error);
}

TEST_CASE("lifetime grid arithmetic") {
  LifetimePolicy p;
  p.epoch_origin = 100;
  p.slot_duration = 60;
  p.period_length = 600;
  CHECK(p.slots_per_period() == 10);
  CHECK(p.period(0) == ValidityInterval{100, 700});
  CHECK(p.period(3) == ValidityInterval{1900, 2500});
  CHECK(p.period_of(699) == 0);
  CHECK(p.period_of(700) == 1);
  CHECK(p.slot(1, 2) == ValidityInterval{820, 880});
  CHECK(p.aligned({820, 880}));
  CHECK_FALSE(p.aligned({821, 881}));
  CHECK_FALSE(p.aligned({820, 940}));
  p.period_length = 610;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("pca binding commits to the pca") {
  Bytes salt(16, 7);
  CHECK(make_pca_binding("PCA-1", salt) == make_pca_binding("PCA-1", salt));
  CHECK(make_pca_binding("PCA-1", salt) != make_pca_binding("PCA-2", salt));
  Bytes other(16, 8);
  CHECK(make_pca_binding("PCA-1", salt) != make_pca_binding("PCA-1", other));
}

TEST_CASE("chain verification outcomes") {
  auto dep = make_deployment(5);
  HashDrbg rng(5, "chain");
  const auto& store = *dep.trust_store;
  auto pca = dep.pca_ids.front();
  auto p = make_pseudonym(dep, pca, {1000, 1600}, rng);

  CHECK(verify_chain(p, store, 1000).ok());
  CHECK(verify_chain(p, store, 999).status == ChainStatus::not_yet_valid);
  CHECK(verify_chain(p, store, 1600).status == ChainStatus::expired);

  auto forged = p;
  forged.validity.end += 1;
  CHECK(verify_chain(forged, store, 1000).status == ChainStatus::bad_signature);

  auto by_ltca = make_pseudonym(dep, dep.ltca_ids.front(), {1000, 1600}, rng);
  CHECK(verify_chain(by_ltca, store, 1000).status == ChainStatus::role_violation);

  auto stranger = make_pseudonym(dep, pca, {1000, 1600}, rng);
  stranger.issuer_id = "PCA-9";
  CHECK(verify_chain(stranger, store, 1000).status == ChainStatus::no_path_to_root);

  Crl crl;
  crl.issuer_id = pca;
  crl.sequence_number = 1;
  crl.issued_at = 1000;
  crl.revoked_serials = {p.serial};
  sign_credential(crl, dep.key(pca).private_key);
  CrlCache cache;
  CHECK(cache.process(crl, store, 1000) == CrlCache::Update::updated);
  CHECK(verify_chain(p, store, 1000, &cache).status == ChainStatus::revoked);

  auto older = crl;
  older.sequence_number = 0;
  older.revoked_serials.clear();
  sign_credential(older, dep.key(pca).private_key);
  CHECK(cache.process(older, store, 1000) == CrlCache::Update::stale);
  CHECK(cache.is_revoked(pca, p.serial));

  auto tampered = crl;
  tampered.sequence_number = 5;
  CHECK_THROWS_AS(cache.process(tampered, store, 1000), Error);
}

TEST_CASE("removing the intermediate breaks the path") {
  auto dep = make_deployment(6);
  HashDrbg rng(6, "without");
  auto p = make_pseudonym(dep, dep.pca_ids.front(), {0, 600}, rng);
  const auto& store = *dep.trust_store;
  auto idx = store.find(dep.hca_ids.front());
  REQUIRE(idx.size() == 1);
  CHECK(verify_chain(p, store.without(idx.front()), 10).status == ChainStatus::no_path_to_root);
}

TEST_CASE("cross-certification adds a path") {
  TrustTopology topo{2, 2, 2, {{"HCA-2", "PCA-1"}}};
  auto dep = make_deployment(7, topo);
  HashDrbg rng(7, "cross");
  auto p = make_pseudonym(dep, "PCA-1", {0, 600}, rng);
  const auto& store = *dep.trust_store;
  CHECK(store.find("PCA-1").size() == 2);
  // Either intermediate alone is enough.
  for (const auto& h : dep.hca_ids) {
    CHECK(verify_chain(p, store.without(store.find(h).front()), 10).ok());
  }
}

TEST_CASE("topology constraints") {
  CHECK_THROWS_AS((TrustTopology{2, 1, 3, {}}.validate()), Error);
  CHECK_THROWS_AS((TrustTopology{1, 3, 2, {}}.validate()), Error);
  CHECK_NOTHROW((TrustTopology{1, 2, 2, {}}.validate()));
}

TEST_CASE("property: canonical encoding") {
  auto r = testing::canonical_encoding_suite(300, 2);
  CHECK_MESSAGE(r.ok(), r.first_failure);
}

TEST_CASE("property: chain monotonicity") {
  auto r = testing::chain_monotonicity_suite(300, 2);
  CHECK_MESSAGE(r.ok(), r.first_failure);
  CHECK(r.accepted > r.cases / 4);
  CHECK(r.accepted < r.cases);
}
