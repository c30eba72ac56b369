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

// Randomised property suites shared by the unit tests and the acceptance
// runner. Each returns how many cases ran and the first counterexample.

#include <string>

#include "vpki/chain.hpp"
#include "vpki/credentials.hpp"
#include "vpki/crypto.hpp"
#include "vpki/deployment.hpp"
#include "vpki/random.hpp"

namespace vpki::testing {

struct SuiteResult {
  std::size_t cases = 0;
  std::size_t failures = 0;
  /// Cases the unmodified input accepted (chain suite only).
  std::size_t accepted = 0;
  std::string first_failure;

  void fail(const std::string& what) {
    if (failures++ == 0) first_failure = what;
  }
  bool ok() const { return failures == 0; }
};

inline Deployment make_deployment(std::uint64_t seed, TrustTopology topology = {}, std::int64_t slot = 600,
                                  std::int64_t period = 86400) {
  HashDrbg rng(seed, "deployment");
  LifetimePolicy tmpl;
  tmpl.slot_duration = slot;
  tmpl.period_length = period;
  return Deployment::build(topology, tmpl, 0, 1'000'000'000, rng);
}

inline Pseudonym make_pseudonym(const Deployment& dep, const std::string& issuer, ValidityInterval validity,
                                RandomSource& rng) {
  Pseudonym p;
  p.serial = Serial::random(rng);
  p.public_key = generate_keypair(rng).public_key;
  p.validity = validity;
  p.issuer_id = issuer;
  sign_credential(p, dep.key(issuer).private_key);
  return p;
}

/// verify(m, sign(m, k), pub(k)) accepts; a one-bit change of the message,
/// a different key, or a one-bit change of the signature rejects.
inline SuiteResult sign_verify_suite(std::size_t cases, std::uint64_t seed) {
  SuiteResult r;
  HashDrbg rng(seed, "sign-verify");
  for (std::size_t i = 0; i < cases; ++i, ++r.cases) {
    auto k = generate_keypair(rng);
    auto other = generate_keypair(rng);
    auto m = rng.bytes(1 + rng.uniform_below(512));
    auto sig = sign(m, k.private_key);
    if (!verify(m, sig, k.public_key)) r.fail("round trip rejected, case " + std::to_string(i));
    auto flipped = m;
    flipped[rng.uniform_below(flipped.size())] ^= static_cast<std::uint8_t>(1u << rng.uniform_below(8));
    if (verify(flipped, sig, k.public_key)) r.fail("flipped message accepted, case " + std::to_string(i));
    if (verify(m, sig, other.public_key)) r.fail("foreign key accepted, case " + std::to_string(i));
    auto bad = sig;
    bad.bytes[rng.uniform_below(64)] ^= 0x01;
    if (verify(m, bad, k.public_key)) r.fail("flipped signature accepted, case " + std::to_string(i));
  }
  return r;
}

/// open(seal(m)) = m for sizes up to 64 KiB; any single-byte change of the
/// envelope and any non-recipient key make open fail.
inline SuiteResult seal_open_suite(std::size_t cases, std::uint64_t seed) {
  SuiteResult r;
  HashDrbg rng(seed, "seal-open");
  auto recipient = generate_keypair(rng);
  auto stranger = generate_keypair(rng);
  for (std::size_t i = 0; i < cases; ++i, ++r.cases) {
    std::size_t size = i == 0 ? 0 : i == 1 ? 65536 : rng.uniform_below(i % 10 == 0 ? 65537 : 2048);
    auto m = rng.bytes(size);
    auto env = seal(m, recipient.public_key, rng);
    try {
      if (open(env, recipient.private_key) != m) r.fail("round trip changed bytes, case " + std::to_string(i));
    } catch (const Error&) {
      r.fail("round trip failed, case " + std::to_string(i));
    }
    auto wire = env.encode();
    auto pos = rng.uniform_below(wire.size());
    wire[pos] ^= static_cast<std::uint8_t>(1 + rng.uniform_below(255));
    try {
      auto tampered = SealedEnvelope::decode(wire);
      open(tampered, recipient.private_key);
      r.fail("tampered byte " + std::to_string(pos) + " accepted, case " + std::to_string(i));
    } catch (const Error&) {
    }
    try {
      open(env, stranger.private_key);
      r.fail("non-recipient opened, case " + std::to_string(i));
    } catch (const Error&) {
    }
  }
  return r;
}

inline Credential random_credential(RandomSource& rng, int kind) {
  auto id = [&] { return "X-" + std::to_string(rng.uniform_below(1000)); };
  auto when = [&] {
    Timestamp a = static_cast<Timestamp>(rng.uniform_below(1u << 30));
    return ValidityInterval{a, a + 1 + static_cast<Timestamp>(rng.uniform_below(1u << 20))};
  };
  auto key = [&] { return generate_keypair(rng).public_key; };
  Signature sig;
  rng.fill(sig.bytes);
  switch (kind % 6) {
    case 0: {
      AuthorityCertificate c{id(), static_cast<Role>(1 + rng.uniform_below(5)), key(), when(), id(), sig};
      return c;
    }
    case 1:
      return LongTermCertificate{Serial::random(rng), "V" + std::to_string(rng.uniform_below(1000)), key(), id(),
                                 when(), sig};
    case 2:
      return Pseudonym{Serial::random(rng), key(), when(), id(), sig};
    case 3: {
      Token t;
      t.serial = Serial::random(rng);
      rng.fill(t.pca_binding.bytes);
      t.period_tag = rng.next_u64();
      t.validity = when();
      t.issuer_id = id();
      t.signature = sig;
      return t;
    }
    case 4: {
      Crl c;
      c.issuer_id = id();
      c.sequence_number = rng.next_u64();
      c.issued_at = static_cast<Timestamp>(rng.uniform_below(1u << 30));
      for (auto n = rng.uniform_below(20); n > 0; --n) c.revoked_serials.push_back(Serial::random(rng));
      c.normalize();
      c.signature = sig;
      return c;
    }
    default: {
      LifetimePolicy p;
      p.issuer_id = id();
      p.slot_duration = 1 + static_cast<std::int64_t>(rng.uniform_below(1000));
      p.period_length = p.slot_duration * (1 + static_cast<std::int64_t>(rng.uniform_below(100)));
      p.epoch_origin = static_cast<Timestamp>(rng.uniform_below(1u << 30));
      p.issued_at = p.epoch_origin;
      p.signature = sig;
      return p;
    }
  }
}

/// encode . decode . encode is a fixed point, decode inverts encode, and a
/// copy built field by field encodes to the same bytes.
inline SuiteResult canonical_encoding_suite(std::size_t cases, std::uint64_t seed) {
  SuiteResult r;
  HashDrbg rng(seed, "canonical");
  for (std::size_t i = 0; i < cases; ++i, ++r.cases) {
    auto c = random_credential(rng, static_cast<int>(i));
    auto once = canonical_encode(c);
    auto decoded = canonical_decode(once);
    auto twice = canonical_encode(decoded);
    if (once != twice) r.fail("not a fixed point, case " + std::to_string(i));
    if (!(decoded == c)) r.fail("decode does not invert encode, case " + std::to_string(i));
    auto copy = std::visit([](const auto& x) { return Credential(x); }, c);
    if (canonical_encode(copy) != once) r.fail("equal objects encode differently, case " + std::to_string(i));
    if (decode_file(encode_file(c)) != c) r.fail("file round trip, case " + std::to_string(i));
  }
  return r;
}

/// Removing one certificate from the trust store never turns a rejected
/// pseudonym into an accepted one.
inline SuiteResult chain_monotonicity_suite(std::size_t cases, std::uint64_t seed) {
  SuiteResult r;
  TrustTopology topo{2, 2, 3, {{"HCA-1", "PCA-2"}, {"HCA-2", "LTCA-1"}}};
  auto dep = make_deployment(seed, topo);
  HashDrbg rng(seed, "monotone");
  const auto& store = *dep.trust_store;
  std::vector<std::string> signers = dep.pca_ids;
  signers.push_back(dep.ltca_ids.front());  // wrong role
  for (std::size_t i = 0; i < cases; ++i, ++r.cases) {
    const auto& issuer = signers[rng.uniform_below(signers.size())];
    Timestamp start = static_cast<Timestamp>(rng.uniform_below(1'000'000));
    auto p = make_pseudonym(dep, issuer, {start, start + 600}, rng);
    if (rng.uniform_below(8) == 0) p.signature.bytes[0] ^= 1;
    Timestamp now = start + static_cast<Timestamp>(rng.uniform_below(1200)) - 300;
    auto full = verify_chain(p, store, now);
    if (full.ok()) ++r.accepted;
    auto smaller = store.without(rng.uniform_below(store.certificates().size()));
    auto reduced = verify_chain(p, smaller, now);
    if (reduced.ok() && !full.ok()) {
      r.fail("removal turned reject into accept, case " + std::to_string(i) + " (" +
             std::string(to_string(full.status)) + ")");
    }
  }
  return r;
}

}  // namespace vpki::testing
