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

#include "vpki/credentials.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "json.hpp"

namespace vpki {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'V', 'P', 'K', 'I'};

void put_validity(ByteWriter& w, const ValidityInterval& v) { w.i64(v.start).i64(v.end); }

ValidityInterval get_validity(ByteReader& r) {
  ValidityInterval v;
  v.start = r.i64();
  v.end = r.i64();
  if (!(v.start < v.end)) throw Error(ErrorCode::decode_error, "empty validity interval");
  return v;
}

void expect_tag(ByteReader& r, TypeTag tag) {
  auto t = r.u8();
  if (t != static_cast<std::uint8_t>(tag)) throw Error(ErrorCode::decode_error, "wrong type tag");
}

Bytes with_signature(Bytes tbs, const Signature& sig) {
  tbs.insert(tbs.end(), sig.bytes.begin(), sig.bytes.end());
  return tbs;
}

Signature get_signature(ByteReader& r) { return Signature{r.fixed<64>()}; }

}  // namespace

Serial Serial::from_hex(std::string_view hex) {
  auto b = vpki::from_hex(hex);
  if (b.size() != 16) throw Error(ErrorCode::decode_error, "serial must be 16 bytes");
  Serial s;
  std::copy(b.begin(), b.end(), s.bytes.begin());
  return s;
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::rca: return "RCA";
    case Role::hca: return "HCA";
    case Role::ltca: return "LTCA";
    case Role::pca: return "PCA";
    case Role::ra: return "RA";
  }
  return "?";
}

Role role_from_string(std::string_view s) {
  for (auto r : {Role::rca, Role::hca, Role::ltca, Role::pca, Role::ra}) {
    if (to_string(r) == s) return r;
  }
  throw Error(ErrorCode::decode_error, "unknown role " + std::string(s));
}

// --- AuthorityCertificate -------------------------------------------------

Bytes AuthorityCertificate::tbs() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(TypeTag::authority_certificate))
      .str(authority_id)
      .u8(static_cast<std::uint8_t>(role))
      .fixed(public_key.bytes);
  put_validity(w, validity);
  w.str(issuer_id);
  return std::move(w).take();
}

Bytes AuthorityCertificate::encode() const { return with_signature(tbs(), signature); }

AuthorityCertificate AuthorityCertificate::decode(ByteReader& r) {
  expect_tag(r, TypeTag::authority_certificate);
  AuthorityCertificate c;
  c.authority_id = r.str();
  auto role = r.u8();
  if (role < 1 || role > 5) throw Error(ErrorCode::decode_error, "bad role");
  c.role = static_cast<Role>(role);
  c.public_key.bytes = r.fixed<33>();
  c.validity = get_validity(r);
  c.issuer_id = r.str();
  c.signature = get_signature(r);
  return c;
}

// --- LongTermCertificate --------------------------------------------------

Bytes LongTermCertificate::tbs() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(TypeTag::long_term_certificate))
      .fixed(serial.bytes)
      .str(vehicle_id)
      .fixed(public_key.bytes)
      .str(issuer_id);
  put_validity(w, validity);
  return std::move(w).take();
}

Bytes LongTermCertificate::encode() const { return with_signature(tbs(), signature); }

LongTermCertificate LongTermCertificate::decode(ByteReader& r) {
  expect_tag(r, TypeTag::long_term_certificate);
  LongTermCertificate c;
  c.serial.bytes = r.fixed<16>();
  c.vehicle_id = r.str();
  c.public_key.bytes = r.fixed<33>();
  c.issuer_id = r.str();
  c.validity = get_validity(r);
  c.signature = get_signature(r);
  return c;
}

// --- Pseudonym ------------------------------------------------------------

Bytes Pseudonym::tbs() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(TypeTag::pseudonym)).fixed(serial.bytes).fixed(public_key.bytes);
  put_validity(w, validity);
  w.str(issuer_id);
  return std::move(w).take();
}

Bytes Pseudonym::encode() const { return with_signature(tbs(), signature); }

Pseudonym Pseudonym::decode(ByteReader& r) {
  expect_tag(r, TypeTag::pseudonym);
  Pseudonym p;
  p.serial.bytes = r.fixed<16>();
  p.public_key.bytes = r.fixed<33>();
  p.validity = get_validity(r);
  p.issuer_id = r.str();
  p.signature = get_signature(r);
  return p;
}

// --- Token ----------------------------------------------------------------

Bytes Token::tbs() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(TypeTag::token))
      .fixed(serial.bytes)
      .fixed(pca_binding.bytes)
      .u64(period_tag);
  put_validity(w, validity);
  w.str(issuer_id);
  return std::move(w).take();
}

Bytes Token::encode() const { return with_signature(tbs(), signature); }

Token Token::decode(ByteReader& r) {
  expect_tag(r, TypeTag::token);
  Token t;
  t.serial.bytes = r.fixed<16>();
  t.pca_binding.bytes = r.fixed<32>();
  t.period_tag = r.u64();
  t.validity = get_validity(r);
  t.issuer_id = r.str();
  t.signature = get_signature(r);
  return t;
}

// --- Crl ------------------------------------------------------------------

void Crl::normalize() {
  std::sort(revoked_serials.begin(), revoked_serials.end());
  revoked_serials.erase(std::unique(revoked_serials.begin(), revoked_serials.end()),
                        revoked_serials.end());
}

bool Crl::contains(const Serial& s) const {
  return std::binary_search(revoked_serials.begin(), revoked_serials.end(), s);
}

Bytes Crl::tbs() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(TypeTag::crl)).str(issuer_id).u64(sequence_number).i64(issued_at);
  w.u32(static_cast<std::uint32_t>(revoked_serials.size()));
  for (const auto& s : revoked_serials) w.fixed(s.bytes);
  return std::move(w).take();
}

Bytes Crl::encode() const { return with_signature(tbs(), signature); }

Crl Crl::decode(ByteReader& r) {
  expect_tag(r, TypeTag::crl);
  Crl c;
  c.issuer_id = r.str();
  c.sequence_number = r.u64();
  c.issued_at = r.i64();
  auto n = r.u32();
  if (n > r.remaining() / 16) throw Error(ErrorCode::decode_error, "truncated serial list");
  c.revoked_serials.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Serial s{r.fixed<16>()};
    if (!c.revoked_serials.empty() && !(c.revoked_serials.back() < s)) {
      throw Error(ErrorCode::decode_error, "CRL serials not in canonical order");
    }
    c.revoked_serials.push_back(s);
  }
  c.signature = get_signature(r);
  return c;
}

// --- LifetimePolicy -------------------------------------------------------

void LifetimePolicy::validate() const {
  if (slot_duration <= 0 || period_length <= 0) {
    throw Error(ErrorCode::spec_invalid, "slot and period durations must be positive");
  }
  if (period_length % slot_duration != 0) {
    throw Error(ErrorCode::spec_invalid, "period length must be a whole number of slots");
  }
}

ValidityInterval LifetimePolicy::period(std::uint64_t tag) const {
  auto start = epoch_origin + static_cast<Timestamp>(tag) * period_length;
  return {start, start + period_length};
}

std::uint64_t LifetimePolicy::period_of(Timestamp t) const {
  if (t < epoch_origin) return 0;
  return static_cast<std::uint64_t>((t - epoch_origin) / period_length);
}

ValidityInterval LifetimePolicy::slot(std::uint64_t tag, std::int64_t i) const {
  auto start = period(tag).start + i * slot_duration;
  return {start, start + slot_duration};
}

bool LifetimePolicy::aligned(const ValidityInterval& v) const {
  return v.length() == slot_duration && (v.start - epoch_origin) % slot_duration == 0;
}

Bytes LifetimePolicy::tbs() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(TypeTag::lifetime_policy))
      .str(issuer_id)
      .i64(epoch_origin)
      .i64(slot_duration)
      .i64(period_length)
      .i64(issued_at);
  return std::move(w).take();
}

Bytes LifetimePolicy::encode() const { return with_signature(tbs(), signature); }

LifetimePolicy LifetimePolicy::decode(ByteReader& r) {
  expect_tag(r, TypeTag::lifetime_policy);
  LifetimePolicy p;
  p.issuer_id = r.str();
  p.epoch_origin = r.i64();
  p.slot_duration = r.i64();
  p.period_length = r.i64();
  p.issued_at = r.i64();
  p.signature = get_signature(r);
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::decode_error, e.what());
  }
  return p;
}

// --- TrustTopology --------------------------------------------------------

void TrustTopology::validate() const {
  if (hca_count == 0 || ltca_count == 0 || pca_count == 0) {
    throw Error(ErrorCode::spec_invalid, "topology needs at least one HCA, LTCA and PCA");
  }
  if (!(hca_count <= ltca_count && ltca_count <= pca_count)) {
    throw Error(ErrorCode::spec_invalid, "topology must satisfy K <= L <= M");
  }
}

Digest make_pca_binding(std::string_view pca_id, ByteView salt) {
  ByteWriter w;
  w.str(pca_id).raw(salt);
  return digest(w.data());
}

// --- Generic encoding -----------------------------------------------------

Bytes canonical_encode(const Credential& c) {
  return std::visit([](const auto& v) { return v.encode(); }, c);
}

Credential canonical_decode(ByteView data) {
  if (data.empty()) throw Error(ErrorCode::decode_error, "empty input");
  ByteReader r(data);
  Credential out;
  switch (static_cast<TypeTag>(data[0])) {
    case TypeTag::authority_certificate: out = AuthorityCertificate::decode(r); break;
    case TypeTag::long_term_certificate: out = LongTermCertificate::decode(r); break;
    case TypeTag::pseudonym: out = Pseudonym::decode(r); break;
    case TypeTag::token: out = Token::decode(r); break;
    case TypeTag::crl: out = Crl::decode(r); break;
    case TypeTag::lifetime_policy: out = LifetimePolicy::decode(r); break;
    default: throw Error(ErrorCode::decode_error, "not a credential type");
  }
  r.expect_end();
  return out;
}

Bytes encode_file(const Credential& c) {
  ByteWriter w;
  w.fixed(kMagic).u8(kFormatVersion).raw(canonical_encode(c));
  return std::move(w).take();
}

Credential decode_file(ByteView data) {
  ByteReader r(data);
  if (r.fixed<4>() != kMagic) throw Error(ErrorCode::decode_error, "missing VPKI magic");
  if (r.u8() != kFormatVersion) throw Error(ErrorCode::decode_error, "unsupported format version");
  return canonical_decode(data.subspan(5));
}

namespace {

nlohmann::json validity_json(const ValidityInterval& v) {
  return {{"start", v.start}, {"end", v.end}};
}

struct Describer {
  nlohmann::json operator()(const AuthorityCertificate& c) const {
    return {{"type", "authority-certificate"}, {"authority_id", c.authority_id},
            {"role", to_string(c.role)},       {"public_key", c.public_key.hex()},
            {"validity", validity_json(c.validity)}, {"issuer_id", c.issuer_id},
            {"signature", to_hex(c.signature.bytes)}};
  }
  nlohmann::json operator()(const LongTermCertificate& c) const {
    return {{"type", "long-term-certificate"}, {"serial", c.serial.hex()},
            {"vehicle_id", c.vehicle_id},      {"public_key", c.public_key.hex()},
            {"issuer_id", c.issuer_id},        {"validity", validity_json(c.validity)},
            {"signature", to_hex(c.signature.bytes)}};
  }
  nlohmann::json operator()(const Pseudonym& p) const {
    return {{"type", "pseudonym"},          {"serial", p.serial.hex()},
            {"public_key", p.public_key.hex()}, {"validity", validity_json(p.validity)},
            {"issuer_id", p.issuer_id},     {"signature", to_hex(p.signature.bytes)}};
  }
  nlohmann::json operator()(const Token& t) const {
    return {{"type", "token"},           {"serial", t.serial.hex()},
            {"pca_binding", t.pca_binding.hex()}, {"period_tag", t.period_tag},
            {"validity", validity_json(t.validity)}, {"issuer_id", t.issuer_id},
            {"signature", to_hex(t.signature.bytes)}};
  }
  nlohmann::json operator()(const Crl& c) const {
    nlohmann::json serials = nlohmann::json::array();
    for (const auto& s : c.revoked_serials) serials.push_back(s.hex());
    return {{"type", "crl"},
            {"issuer_id", c.issuer_id},
            {"sequence_number", c.sequence_number},
            {"issued_at", c.issued_at},
            {"revoked_serials", serials},
            {"signature", to_hex(c.signature.bytes)}};
  }
  nlohmann::json operator()(const LifetimePolicy& p) const {
    return {{"type", "lifetime-policy"},  {"issuer_id", p.issuer_id},
            {"epoch_origin", p.epoch_origin}, {"slot_duration", p.slot_duration},
            {"period_length", p.period_length}, {"issued_at", p.issued_at},
            {"signature", to_hex(p.signature.bytes)}};
  }
};

}  // namespace

std::string describe(const Credential& c) { return std::visit(Describer{}, c).dump(2); }

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, ByteView data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::io_error, "short write to " + path);
}

}  // namespace vpki
