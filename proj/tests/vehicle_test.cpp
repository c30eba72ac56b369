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
#include "vpki/kernels.hpp"
#include "vpki/shuffle_proxy.hpp"

using namespace vpki;
using testing::World;

namespace {

PoolEntry entry(const Deployment& dep, ValidityInterval v, RandomSource& rng) {
  auto k = generate_keypair(rng);
  auto p = testing::make_pseudonym(dep, dep.pca_ids.front(), v, rng);
  p.public_key = k.public_key;
  sign_credential(p, dep.key(dep.pca_ids.front()).private_key);
  return {p, k.private_key};
}

}  // namespace

TEST_CASE("pool keeps at most one pseudonym valid at a time") {
  auto dep = testing::make_deployment(1);
  HashDrbg rng(1, "pool");
  PseudonymPool pool;
  pool.add({entry(dep, {0, 10}, rng), entry(dep, {10, 20}, rng)});
  CHECK(pool.size() == 2);
  CHECK_THROWS_AS(pool.add({entry(dep, {15, 25}, rng)}), Error);
  CHECK_THROWS_AS(pool.add({entry(dep, {30, 40}, rng), entry(dep, {35, 45}, rng)}), Error);
  CHECK(pool.size() == 2);

  REQUIRE(pool.current(5) != nullptr);
  CHECK(pool.current(5)->pseudonym.validity.start == 0);
  CHECK(pool.current(12)->pseudonym.validity.start == 10);
  CHECK(pool.used_serials().size() == 1);
  // A used interval still blocks overlap after it was dropped.
  CHECK_THROWS_AS(pool.add({entry(dep, {5, 8}, rng)}), Error);
  CHECK(pool.current(20) == nullptr);
  CHECK(pool.coverage_end() == 20);
}

TEST_CASE("refill over the sealed channel") {
  World w;
  auto v = w.vehicle("V001");
  auto ps = v->refill({.period_tag = w.period(), .pca_id = "PCA-1", .key_count = 5}, w, w.now);
  CHECK(ps.size() == 5);
  CHECK(v->pool().size() == 5);
  CHECK(v->current_pseudonym(w.now) != nullptr);
  CHECK_THROWS_AS(v->refill({.period_tag = w.period(), .pca_id = "PCA-1", .key_count = 5}, w, w.now), Error);
}

TEST_CASE("beacon verification") {
  World w;
  auto a = w.vehicle("V001");
  auto b = w.vehicle("V002");
  a->refill({.period_tag = w.period(), .pca_id = "PCA-1", .key_count = 3}, w, w.now);
  Millis t = w.now * 1000 + 250;
  auto beacon = a->sign_beacon(as_bytes("cam"), {12.5, -3}, t);
  CHECK(Beacon::decode(beacon.encode()) == beacon);

  auto& ver = b->verifier();
  CHECK(ver.verify(beacon, t + 10) == BeaconVerdict::accept);
  CHECK(ver.verify(beacon, t + 10) == BeaconVerdict::accept);
  CHECK(ver.verify(beacon, t + 2001) == BeaconVerdict::stale);

  auto moved = beacon;
  moved.position.x += 1;
  CHECK(ver.verify(moved, t) == BeaconVerdict::bad_signature);

  auto foreign = moved;
  foreign.pseudonym = testing::make_pseudonym(w.dep, "PCA-1", beacon.pseudonym.validity, a->rng());
  foreign.pseudonym.issuer_id = "PCA-7";
  CHECK(ver.verify(foreign, t) == BeaconVerdict::bad_chain);

  auto crl = w.pca().revoke_pseudonyms(
      w.order("O-1", OrderAction::revoke_serials, AuthorizationOrder::serials_target({beacon.pseudonym.serial})),
      w.now);
  CHECK(ver.process_crl(crl, w.now) == CrlCache::Update::updated);
  CHECK(ver.verify(beacon, t) == BeaconVerdict::revoked);
  CHECK(ver.stats().accepted == 2);
  CHECK(ver.stats().revoked == 1);

  CHECK_THROWS_AS(b->sign_beacon(as_bytes("cam"), {}, t), Error);
}

TEST_CASE("shuffle batches") {
  HashDrbg rng(9, "proxy");
  std::vector<Bytes> frames;
  std::vector<std::string> origins;
  for (int i = 0; i < 6; ++i) {
    frames.push_back(Bytes{static_cast<std::uint8_t>(i)});
    origins.push_back("V" + std::to_string(i));
  }
  auto b = shuffle_batch(frames, origins, 6, rng);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(b.frames[i] == frames[b.permutation[i]]);
    CHECK(b.origins[i] == origins[b.permutation[i]]);
  }
  CHECK_THROWS_AS(shuffle_batch({frames[0]}, {origins[0]}, 2, rng), Error);
  CHECK(shuffle_batch({frames[0]}, {origins[0]}, 2, rng, true).underflow);
}

TEST_CASE("shuffle proxy flushes on size or timeout") {
  ShuffleProxy proxy(3, 100, std::make_unique<HashDrbg>(1, "p"));
  CHECK_FALSE(proxy.submit({1}, "a", 0));
  CHECK_FALSE(proxy.submit({2}, "b", 10));
  CHECK(proxy.deadline() == 100);
  CHECK_FALSE(proxy.poll(99));
  auto full = proxy.submit({3}, "c", 20);
  REQUIRE(full);
  CHECK(full->frames.size() == 3);
  CHECK_FALSE(full->underflow);
  CHECK(proxy.pending() == 0);

  proxy.submit({4}, "d", 200);
  auto short_batch = proxy.poll(300);
  REQUIRE(short_batch);
  CHECK(short_batch->underflow);
  CHECK(proxy.underflows() == 1);
}

TEST_CASE("parallel kernels match the serial ones") {
  HashDrbg rng(10, "kernels");
  auto k = generate_keypair(rng);
  std::vector<Bytes> msgs;
  for (int i = 0; i < 64; ++i) msgs.push_back(rng.bytes(40 + i));
  auto par = sign_batch(msgs, k.private_key);
  auto ser = sign_batch_serial(msgs, k.private_key);
  CHECK(par == ser);

  VerifyingKey vk(k.public_key);
  auto bad = par;
  for (std::size_t i = 0; i < bad.size(); i += 3) bad[i].bytes[10] ^= 4;
  std::vector<VerifyJob> jobs;
  for (std::size_t i = 0; i < msgs.size(); ++i) jobs.push_back({msgs[i], &bad[i], &vk});
  auto vp = verify_batch(jobs);
  CHECK(vp == verify_batch_serial(jobs));
  for (std::size_t i = 0; i < vp.size(); ++i) CHECK(vp[i] == (i % 3 == 0 ? 0 : 1));
}
