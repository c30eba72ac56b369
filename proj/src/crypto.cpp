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

#include "vpki/crypto.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/obj_mac.h>
#include <openssl/sha.h>

#include <cstring>

namespace vpki {

namespace {

struct BnDeleter {
  void operator()(BIGNUM* p) const { BN_clear_free(p); }
};
struct PointDeleter {
  void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
struct CtxDeleter {
  void operator()(BN_CTX* p) const { BN_CTX_free(p); }
};
struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};

using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;
using PointPtr = std::unique_ptr<EC_POINT, PointDeleter>;

struct Curve {
  EC_GROUP* group = nullptr;
  const BIGNUM* order = nullptr;

  Curve() {
    group = EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1);
    if (group == nullptr) throw std::runtime_error("P-256 unavailable");
    order = EC_GROUP_get0_order(group);
  }
  ~Curve() { EC_GROUP_free(group); }
  Curve(const Curve&) = delete;
  Curve& operator=(const Curve&) = delete;
};

const Curve& curve() {
  static const Curve c;
  return c;
}

BN_CTX* bn_ctx() {
  thread_local std::unique_ptr<BN_CTX, CtxDeleter> ctx(BN_CTX_new());
  return ctx.get();
}

BnPtr bn_new() {
  BnPtr p(BN_new());
  if (!p) throw std::bad_alloc();
  return p;
}

BnPtr bn_from(ByteView b) {
  BnPtr p(BN_bin2bn(b.data(), static_cast<int>(b.size()), nullptr));
  if (!p) throw std::bad_alloc();
  return p;
}

template <std::size_t N>
std::array<std::uint8_t, N> bn_to_array(const BIGNUM* v) {
  std::array<std::uint8_t, N> out{};
  if (BN_bn2binpad(v, out.data(), static_cast<int>(N)) != static_cast<int>(N)) {
    throw std::runtime_error("bignum does not fit");
  }
  return out;
}

PointPtr point_new() {
  PointPtr p(EC_POINT_new(curve().group));
  if (!p) throw std::bad_alloc();
  return p;
}

PointPtr decode_point(const PublicKey& key) {
  auto p = point_new();
  if (EC_POINT_oct2point(curve().group, p.get(), key.bytes.data(), key.bytes.size(), bn_ctx()) != 1 ||
      EC_POINT_is_at_infinity(curve().group, p.get())) {
    throw Error(ErrorCode::malformed_key, "public key is not a P-256 point");
  }
  return p;
}

PublicKey encode_point(const EC_POINT* p) {
  PublicKey out;
  auto n = EC_POINT_point2oct(curve().group, p, POINT_CONVERSION_COMPRESSED, out.bytes.data(),
                              out.bytes.size(), bn_ctx());
  if (n != out.bytes.size()) throw std::runtime_error("point encoding failed");
  return out;
}

bool scalar_in_range(const BIGNUM* v) {
  return !BN_is_zero(v) && !BN_is_negative(v) && BN_cmp(v, curve().order) < 0;
}

std::array<std::uint8_t, 32> sha256(ByteView m) {
  std::array<std::uint8_t, 32> out{};
  SHA256(m.data(), m.size(), out.data());
  return out;
}

std::array<std::uint8_t, 32> hmac_sha256(const std::array<std::uint8_t, 32>& key,
                                         std::initializer_list<ByteView> parts) {
  Bytes msg;
  for (auto p : parts) msg.insert(msg.end(), p.begin(), p.end());
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg.data(), msg.size(), out.data(), &len);
  return out;
}

// RFC 6979 section 3.2 for a 256-bit group order and SHA-256 (qlen == hlen,
// so bits2int is the identity on 32-byte strings).
class NonceGenerator {
 public:
  NonceGenerator(const std::array<std::uint8_t, 32>& x, const std::array<std::uint8_t, 32>& h1) {
    auto h = bn_from(h1);
    if (BN_cmp(h.get(), curve().order) >= 0) BN_sub(h.get(), h.get(), curve().order);
    auto h_octets = bn_to_array<32>(h.get());
    v_.fill(0x01);
    k_.fill(0x00);
    const std::uint8_t zero = 0x00, one = 0x01;
    k_ = hmac_sha256(k_, {v_, ByteView(&zero, 1), x, h_octets});
    v_ = hmac_sha256(k_, {v_});
    k_ = hmac_sha256(k_, {v_, ByteView(&one, 1), x, h_octets});
    v_ = hmac_sha256(k_, {v_});
  }

  BnPtr next() {
    for (;;) {
      if (!first_) {
        const std::uint8_t zero = 0x00;
        k_ = hmac_sha256(k_, {v_, ByteView(&zero, 1)});
        v_ = hmac_sha256(k_, {v_});
      }
      first_ = false;
      v_ = hmac_sha256(k_, {v_});
      auto k = bn_from(v_);
      if (scalar_in_range(k.get())) return k;
    }
  }

 private:
  std::array<std::uint8_t, 32> v_{};
  std::array<std::uint8_t, 32> k_{};
  bool first_ = true;
};

bool verify_point(ByteView message, const Signature& sig, const EC_POINT* q) {
  const auto& c = curve();
  auto* ctx = bn_ctx();
  auto r = bn_from(ByteView(sig.bytes.data(), 32));
  auto s = bn_from(ByteView(sig.bytes.data() + 32, 32));
  if (!scalar_in_range(r.get()) || !scalar_in_range(s.get())) return false;
  auto e = bn_from(sha256(message));
  auto w = bn_new();
  if (BN_mod_inverse(w.get(), s.get(), c.order, ctx) == nullptr) return false;
  auto u1 = bn_new();
  auto u2 = bn_new();
  BN_mod_mul(u1.get(), e.get(), w.get(), c.order, ctx);
  BN_mod_mul(u2.get(), r.get(), w.get(), c.order, ctx);
  auto x_point = point_new();
  if (EC_POINT_mul(c.group, x_point.get(), u1.get(), q, u2.get(), ctx) != 1) return false;
  if (EC_POINT_is_at_infinity(c.group, x_point.get())) return false;
  auto x = bn_new();
  if (EC_POINT_get_affine_coordinates(c.group, x_point.get(), x.get(), nullptr, ctx) != 1) return false;
  auto v = bn_new();
  BN_nnmod(v.get(), x.get(), c.order, ctx);
  return BN_cmp(v.get(), r.get()) == 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Keys

PrivateKey PrivateKey::from_scalar(const std::array<std::uint8_t, 32>& scalar) {
  auto d = bn_from(scalar);
  if (!scalar_in_range(d.get())) throw Error(ErrorCode::malformed_key, "scalar out of range");
  PrivateKey k;
  k.scalar_ = scalar;
  return k;
}

PublicKey PrivateKey::public_key() const {
  auto d = bn_from(scalar_);
  auto q = point_new();
  if (EC_POINT_mul(curve().group, q.get(), d.get(), nullptr, nullptr, bn_ctx()) != 1) {
    throw Error(ErrorCode::malformed_key, "scalar multiplication failed");
  }
  return encode_point(q.get());
}

KeyPair generate_keypair(RandomSource& rng) {
  for (;;) {
    auto candidate = rng.array<32>();
    auto d = bn_from(candidate);
    if (!scalar_in_range(d.get())) continue;
    auto priv = PrivateKey::from_scalar(candidate);
    auto pub = priv.public_key();
    return KeyPair{priv, pub};
  }
}

KeyPair generate_keypair(std::optional<std::uint64_t> seed) {
  if (seed) {
    HashDrbg drbg(*seed, "keygen");
    return generate_keypair(drbg);
  }
  SystemRandom sys;
  return generate_keypair(sys);
}

struct VerifyingKey::Point {
  PointPtr p;
};

VerifyingKey::VerifyingKey(const PublicKey& key)
    : encoded_(key), point_(std::make_shared<Point>(Point{decode_point(key)})) {}

bool VerifyingKey::verify(ByteView message, const Signature& sig) const {
  return verify_point(message, sig, point_->p.get());
}

// ---------------------------------------------------------------------------
// Signatures

Signature sign(ByteView message, const PrivateKey& key) {
  const auto& c = curve();
  auto* ctx = bn_ctx();
  auto h1 = sha256(message);
  auto d = bn_from(key.scalar());
  auto e = bn_from(h1);
  NonceGenerator nonces(key.scalar(), h1);
  auto r_point = point_new();
  auto x = bn_new();
  auto r = bn_new();
  auto s = bn_new();
  auto kinv = bn_new();
  auto tmp = bn_new();
  for (;;) {
    auto k = nonces.next();
    if (EC_POINT_mul(c.group, r_point.get(), k.get(), nullptr, nullptr, ctx) != 1 ||
        EC_POINT_get_affine_coordinates(c.group, r_point.get(), x.get(), nullptr, ctx) != 1) {
      throw std::runtime_error("ECDSA point multiplication failed");
    }
    BN_nnmod(r.get(), x.get(), c.order, ctx);
    if (BN_is_zero(r.get())) continue;
    if (BN_mod_inverse(kinv.get(), k.get(), c.order, ctx) == nullptr) continue;
    BN_mod_mul(tmp.get(), r.get(), d.get(), c.order, ctx);
    BN_mod_add(tmp.get(), tmp.get(), e.get(), c.order, ctx);
    BN_mod_mul(s.get(), kinv.get(), tmp.get(), c.order, ctx);
    if (BN_is_zero(s.get())) continue;
    break;
  }
  Signature sig;
  auto rb = bn_to_array<32>(r.get());
  auto sb = bn_to_array<32>(s.get());
  std::copy(rb.begin(), rb.end(), sig.bytes.begin());
  std::copy(sb.begin(), sb.end(), sig.bytes.begin() + 32);
  return sig;
}

bool verify(ByteView message, const Signature& sig, const PublicKey& key) {
  PointPtr q;
  try {
    q = decode_point(key);
  } catch (const Error&) {
    return false;
  }
  return verify_point(message, sig, q.get());
}

Digest digest(ByteView message) { return Digest{sha256(message)}; }

// ---------------------------------------------------------------------------
// Sealed envelopes

namespace {

constexpr std::size_t kNonceLen = 12;
constexpr std::size_t kTagLen = 16;

struct SessionKeys {
  std::array<std::uint8_t, 16> key{};
  std::array<std::uint8_t, kNonceLen> nonce{};
};

SessionKeys derive_session(const EC_POINT* shared, const PublicKey& ephemeral,
                           const PublicKey& recipient) {
  auto x = bn_new();
  if (EC_POINT_get_affine_coordinates(curve().group, shared, x.get(), nullptr, bn_ctx()) != 1) {
    throw Error(ErrorCode::open_failed, "ecdh");
  }
  auto shared_x = bn_to_array<32>(x.get());
  ByteWriter w;
  w.str("vpki-seal-v1").fixed(shared_x).fixed(ephemeral.bytes).fixed(recipient.bytes);
  auto okm = sha256(w.data());
  SessionKeys keys;
  std::copy_n(okm.begin(), 16, keys.key.begin());
  std::copy_n(okm.begin() + 16, kNonceLen, keys.nonce.begin());
  return keys;
}

PointPtr ecdh(const PrivateKey& priv, const PublicKey& peer) {
  auto q = decode_point(peer);
  auto d = bn_from(priv.scalar());
  auto out = point_new();
  if (EC_POINT_mul(curve().group, out.get(), nullptr, q.get(), d.get(), bn_ctx()) != 1 ||
      EC_POINT_is_at_infinity(curve().group, out.get())) {
    throw Error(ErrorCode::open_failed, "ecdh");
  }
  return out;
}

using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

CipherCtx ccm_context(bool encrypt, const SessionKeys& keys, const std::uint8_t* tag) {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw std::bad_alloc();
  auto init = encrypt ? EVP_EncryptInit_ex : EVP_DecryptInit_ex;
  bool ok = init(ctx.get(), EVP_aes_128_ccm(), nullptr, nullptr, nullptr) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_IVLEN, kNonceLen, nullptr) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_TAG, kTagLen,
                                const_cast<std::uint8_t*>(tag)) == 1 &&
            init(ctx.get(), nullptr, nullptr, keys.key.data(), keys.nonce.data()) == 1;
  if (!ok) throw std::runtime_error("AES-CCM init failed");
  return ctx;
}

}  // namespace

SealedEnvelope seal(ByteView message, const PublicKey& recipient, RandomSource& rng) {
  auto eph = generate_keypair(rng);
  auto shared = ecdh(eph.private_key, recipient);
  auto keys = derive_session(shared.get(), eph.public_key, recipient);

  SealedEnvelope env;
  env.ephemeral_public = eph.public_key;
  env.ciphertext.resize(message.size());
  auto ctx = ccm_context(true, keys, nullptr);
  int len = 0;
  bool ok = EVP_EncryptUpdate(ctx.get(), nullptr, &len, nullptr, static_cast<int>(message.size())) == 1 &&
            EVP_EncryptUpdate(ctx.get(), nullptr, &len, env.ephemeral_public.bytes.data(),
                              static_cast<int>(env.ephemeral_public.bytes.size())) == 1;
  // A zero-length update still has to run so CCM finalises the MAC.
  std::uint8_t empty = 0;
  ok = ok && EVP_EncryptUpdate(ctx.get(), message.empty() ? &empty : env.ciphertext.data(), &len,
                               message.empty() ? &empty : message.data(),
                               static_cast<int>(message.size())) == 1;
  ok = ok && EVP_EncryptFinal_ex(ctx.get(), nullptr, &len) == 1 &&
       EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_GET_TAG, kTagLen, env.auth_tag.data()) == 1;
  if (!ok) throw std::runtime_error("AES-CCM encryption failed");
  return env;
}

SealedEnvelope seal(ByteView message, const PublicKey& recipient) {
  SystemRandom sys;
  return seal(message, recipient, sys);
}

Bytes open(const SealedEnvelope& envelope, const PrivateKey& key) {
  PointPtr shared;
  try {
    shared = ecdh(key, envelope.ephemeral_public);
  } catch (const Error&) {
    throw Error(ErrorCode::open_failed, "bad ephemeral key");
  }
  auto keys = derive_session(shared.get(), envelope.ephemeral_public, key.public_key());
  auto ctx = ccm_context(false, keys, envelope.auth_tag.data());
  Bytes plain(envelope.ciphertext.size());
  int len = 0;
  std::uint8_t empty = 0;
  bool ok =
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, nullptr, static_cast<int>(plain.size())) == 1 &&
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, envelope.ephemeral_public.bytes.data(),
                        static_cast<int>(envelope.ephemeral_public.bytes.size())) == 1 &&
      EVP_DecryptUpdate(ctx.get(), plain.empty() ? &empty : plain.data(), &len,
                        envelope.ciphertext.empty() ? &empty : envelope.ciphertext.data(),
                        static_cast<int>(envelope.ciphertext.size())) == 1;
  if (!ok) throw Error(ErrorCode::open_failed, "authentication tag mismatch");
  return plain;
}

Bytes SealedEnvelope::encode() const {
  ByteWriter w;
  w.fixed(ephemeral_public.bytes).bytes(ciphertext).fixed(auth_tag);
  return std::move(w).take();
}

SealedEnvelope SealedEnvelope::decode(ByteView data) {
  ByteReader r(data);
  SealedEnvelope env;
  env.ephemeral_public.bytes = r.fixed<33>();
  env.ciphertext = r.bytes();
  env.auth_tag = r.fixed<16>();
  r.expect_end();
  return env;
}

}  // namespace vpki
