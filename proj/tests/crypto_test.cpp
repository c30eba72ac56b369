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
#include "vpki/crypto.hpp"
#include "vpki/random.hpp"

using namespace vpki;

namespace {

std::array<std::uint8_t, 32> scalar(std::string_view hex) {
  std::array<std::uint8_t, 32> out{};
  auto b = from_hex(hex);
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

}  // namespace

TEST_CASE("sha256 reference digests") {
  CHECK(digest(as_bytes("")).hex() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(digest(as_bytes("abc")).hex() == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(digest(as_bytes("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")).hex() ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  std::string million(1'000'000, 'a');
  CHECK(digest(as_bytes(million)).hex() == "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
  CHECK(digest(as_bytes("vpki")).hex() == "666d7b59f0aa21065b6076a12bd9fd308cb3cf0451d092c95efb1ad2b7dc67cc");
  CHECK(digest(as_bytes(std::string_view("vpki\0", 5))).hex() ==
        "0063fab5d22a4002bb11689990a76760034d52924802ed710fec3b40a394096f");
}

TEST_CASE("deterministic P-256 signatures match the published vectors") {
  auto key = PrivateKey::from_scalar(scalar("C9AFA9D845BA75166B5C215767B1D6934E50C3DB36E89B127B8A622B120F6721"));
  CHECK(key.public_key().hex() == "0360fed4ba255a9d31c961eb74c6356d68c049b8923b61fa6ce669622e60f29fb6");

  auto sample = sign(as_bytes("sample"), key);
  CHECK(to_hex(sample.bytes) ==
        "efd48b2aacb6a8fd1140dd9cd45e81d69d2c877b56aaf991c34d0ea84eaf3716"
        "f7cb1c942d657c41d436c7a1b6e29f65f3e900dbb9aff4064dc4ab2f843acda8");
  auto test = sign(as_bytes("test"), key);
  CHECK(to_hex(test.bytes) ==
        "f1abb023518351cd71d881567b1ea663ed3efcf6c5132b354f28d3b0b7d38367"
        "019f4113742a2b14bd25926b49c649155f267e60d3814b4c0cc84250e46f0083");
  CHECK(verify(as_bytes("sample"), sample, key.public_key()));
  CHECK_FALSE(verify(as_bytes("sample"), test, key.public_key()));
}

TEST_CASE("signatures from an independent implementation verify") {
  auto key = PrivateKey::from_scalar(scalar("1f2e3d4c5b6a79880102030405060708090a0b0c0d0e0f101112131415161718"));
  CHECK(key.public_key().hex() == "02945bafbfe49bbffe5c33d49cd083da75ce805aaf1f2a82cfb010e0968163582a");
  Signature sig;
  auto raw = from_hex(
      "81118b7dda41a5eff632c13606d188d492acf01a76d1843dd95baec04bc16d78"
      "745c35f4470b63923d2b57e7a485d65739d91b959820170afab7fc20f2d0fa2f");
  std::copy(raw.begin(), raw.end(), sig.bytes.begin());
  CHECK(verify(as_bytes("beacon at 48.85N 2.35E"), sig, key.public_key()));
  CHECK_FALSE(verify(as_bytes("beacon at 48.85N 2.36E"), sig, key.public_key()));
  VerifyingKey vk(key.public_key());
  CHECK(vk.verify(as_bytes("beacon at 48.85N 2.35E"), sig));
}

TEST_CASE("scalar multiplication of a small scalar") {
  std::array<std::uint8_t, 32> s{};
  s[31] = 0x2a;
  CHECK(PrivateKey::from_scalar(s).public_key().hex() ==
        "026780c5fc70275e2c7061a0e7877bb174deadeb9887027f3fa83654158ba7f50c");
}

TEST_CASE("out of range scalars and points are refused") {
  std::array<std::uint8_t, 32> zero{};
  CHECK_THROWS_AS(PrivateKey::from_scalar(zero), Error);
  std::array<std::uint8_t, 32> order = scalar("FFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551");
  CHECK_THROWS_AS(PrivateKey::from_scalar(order), Error);
  PublicKey junk;
  junk.bytes.fill(0xff);
  junk.bytes[0] = 0x02;
  CHECK_THROWS_AS(VerifyingKey{junk}, Error);
  Signature sig;
  CHECK_FALSE(verify(as_bytes("x"), sig, generate_keypair(std::uint64_t{3}).public_key));
}

TEST_CASE("seeded key generation is reproducible") {
  CHECK(generate_keypair(std::uint64_t{9}).public_key == generate_keypair(std::uint64_t{9}).public_key);
  CHECK(generate_keypair(std::uint64_t{9}).public_key != generate_keypair(std::uint64_t{10}).public_key);
}

TEST_CASE("sealed envelopes") {
  HashDrbg rng(4, "seal");
  auto k = generate_keypair(rng);
  auto m = rng.bytes(300);
  auto a = seal(m, k.public_key, rng);
  auto b = seal(m, k.public_key, rng);
  CHECK(a.encode() != b.encode());
  CHECK(open(SealedEnvelope::decode(a.encode()), k.private_key) == m);
  auto wire = a.encode();
  wire.pop_back();
  CHECK_THROWS_AS(open(SealedEnvelope::decode(wire), k.private_key), Error);
}

TEST_CASE("drbg streams") {
  HashDrbg a(5, "x"), b(5, "x"), c(5, "y");
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() != c.next_u64());
  auto f1 = a.fork("child");
  auto f2 = b.fork("child");
  CHECK(f1.next_u64() == f2.next_u64());
}

TEST_CASE("random permutation is uniform over positions") {
  // Chi-square over the position of element 0 in a permutation of 8.
  HashDrbg rng(42, "chi2");
  constexpr std::size_t n = 8, trials = 10000;
  std::array<double, n> counts{};
  for (std::size_t t = 0; t < trials; ++t) {
    auto p = random_permutation(n, rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (p[i] == 0) counts[i] += 1;
    }
  }
  double expected = static_cast<double>(trials) / n, chi2 = 0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 24.32);  // 7 df, p = 0.001
}

TEST_CASE("property: sign/verify") {
  auto r = testing::sign_verify_suite(200, 1);
  CHECK_MESSAGE(r.ok(), r.first_failure);
}

TEST_CASE("property: seal/open") {
  auto r = testing::seal_open_suite(100, 1);
  CHECK_MESSAGE(r.ok(), r.first_failure);
}
