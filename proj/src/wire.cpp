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

#include "vpki/wire.hpp"

namespace vpki {

namespace {
constexpr std::uint8_t kTokenRequestTag = 0x20;
constexpr std::uint8_t kRequestTag = 0x30;
constexpr std::uint8_t kResponseTag = 0x31;
}  // namespace

Bytes TokenRequest::tbs() const {
  ByteWriter w;
  w.u8(kTokenRequestTag).str(vehicle_id).u64(period_tag).fixed(pca_binding.bytes).i64(sent_at);
  return std::move(w).take();
}

Bytes TokenRequest::encode() const {
  auto b = tbs();
  b.insert(b.end(), signature.bytes.begin(), signature.bytes.end());
  return b;
}

TokenRequest TokenRequest::decode(ByteView data) {
  ByteReader r(data);
  if (r.u8() != kTokenRequestTag) throw Error(ErrorCode::decode_error, "not a token request");
  TokenRequest t;
  t.vehicle_id = r.str();
  t.period_tag = r.u64();
  t.pca_binding.bytes = r.fixed<32>();
  t.sent_at = r.i64();
  t.signature.bytes = r.fixed<64>();
  r.expect_end();
  return t;
}

Bytes PseudonymRequest::encode() const {
  ByteWriter w;
  w.bytes(token.encode()).bytes(salt).u32(static_cast<std::uint32_t>(public_keys.size()));
  for (const auto& k : public_keys) w.fixed(k.bytes);
  w.u8(requested_start ? 1 : 0);
  if (requested_start) w.i64(*requested_start);
  return std::move(w).take();
}

PseudonymRequest PseudonymRequest::decode(ByteView data) {
  ByteReader r(data);
  PseudonymRequest p;
  auto token_bytes = r.bytes();
  ByteReader tr(token_bytes);
  p.token = Token::decode(tr);
  tr.expect_end();
  p.salt = r.bytes();
  auto n = r.u32();
  if (n > r.remaining() / 33) throw Error(ErrorCode::decode_error, "truncated key list");
  for (std::uint32_t i = 0; i < n; ++i) p.public_keys.push_back(PublicKey{r.fixed<33>()});
  if (r.u8() != 0) p.requested_start = r.i64();
  r.expect_end();
  return p;
}

Bytes RegisterRequest::encode() const {
  ByteWriter w;
  w.str(vehicle_id).fixed(public_key.bytes);
  return std::move(w).take();
}

RegisterRequest RegisterRequest::decode(ByteView data) {
  ByteReader r(data);
  RegisterRequest q;
  q.vehicle_id = r.str();
  q.public_key.bytes = r.fixed<33>();
  r.expect_end();
  return q;
}

Bytes AuthorizationOrder::tbs() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(TypeTag::authorization_order))
      .str(order_id)
      .u8(static_cast<std::uint8_t>(action))
      .bytes(target)
      .str(issuer_id)
      .i64(issued_at);
  return std::move(w).take();
}

Bytes AuthorizationOrder::encode() const {
  auto b = tbs();
  b.insert(b.end(), signature.bytes.begin(), signature.bytes.end());
  return b;
}

AuthorizationOrder AuthorizationOrder::decode(ByteView data) {
  ByteReader r(data);
  if (r.u8() != static_cast<std::uint8_t>(TypeTag::authorization_order)) {
    throw Error(ErrorCode::decode_error, "not an authorization order");
  }
  AuthorizationOrder o;
  o.order_id = r.str();
  auto action = r.u8();
  if (action < 1 || action > 5) throw Error(ErrorCode::decode_error, "bad order action");
  o.action = static_cast<OrderAction>(action);
  o.target = r.bytes();
  o.issuer_id = r.str();
  o.issued_at = r.i64();
  o.signature.bytes = r.fixed<64>();
  r.expect_end();
  return o;
}

Serial AuthorizationOrder::target_serial() const {
  if (target.size() != 16) throw Error(ErrorCode::decode_error, "order target is not a serial");
  Serial s;
  std::copy(target.begin(), target.end(), s.bytes.begin());
  return s;
}

std::string AuthorizationOrder::target_vehicle() const {
  return std::string(target.begin(), target.end());
}

std::vector<Serial> AuthorizationOrder::target_serials() const {
  if (target.size() % 16 != 0) throw Error(ErrorCode::decode_error, "bad serial list");
  std::vector<Serial> out(target.size() / 16);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::copy_n(target.begin() + static_cast<std::ptrdiff_t>(16 * i), 16, out[i].bytes.begin());
  }
  return out;
}

Bytes AuthorizationOrder::serial_target(const Serial& s) { return Bytes(s.bytes.begin(), s.bytes.end()); }

Bytes AuthorizationOrder::vehicle_target(const std::string& id) { return Bytes(id.begin(), id.end()); }

Bytes AuthorizationOrder::serials_target(const std::vector<Serial>& serials) {
  Bytes out;
  for (const auto& s : serials) out.insert(out.end(), s.bytes.begin(), s.bytes.end());
  return out;
}

Bytes encode_pseudonym_list(const std::vector<Pseudonym>& ps) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(ps.size()));
  for (const auto& p : ps) w.bytes(p.encode());
  return std::move(w).take();
}

std::vector<Pseudonym> decode_pseudonym_list(ByteView data) {
  ByteReader r(data);
  auto n = r.u32();
  std::vector<Pseudonym> out;
  for (std::uint32_t i = 0; i < n; ++i) {
    auto b = r.bytes();
    ByteReader pr(b);
    out.push_back(Pseudonym::decode(pr));
    pr.expect_end();
  }
  r.expect_end();
  return out;
}

// --- sealed channel ---------------------------------------------------------

const Bytes& Response::value() const {
  if (status != ErrorCode::ok) throw Error(status, detail);
  return body;
}

PendingCall make_request(MessageType type, ByteView body, const PublicKey& authority,
                         RandomSource& rng) {
  auto reply = generate_keypair(rng);
  ByteWriter w;
  w.u8(kRequestTag).u8(static_cast<std::uint8_t>(type)).fixed(reply.public_key.bytes).bytes(body);
  return PendingCall{seal(w.data(), authority, rng).encode(), reply.private_key};
}

OpenedRequest open_request(ByteView frame, const PrivateKey& authority_key) {
  auto plain = open(SealedEnvelope::decode(frame), authority_key);
  ByteReader r(plain);
  if (r.u8() != kRequestTag) throw Error(ErrorCode::decode_error, "not a request");
  OpenedRequest req;
  auto type = r.u8();
  if (type < 1 || type > 6) throw Error(ErrorCode::decode_error, "unknown message type");
  req.type = static_cast<MessageType>(type);
  req.reply_key.bytes = r.fixed<33>();
  req.body = r.bytes();
  r.expect_end();
  return req;
}

Bytes make_response(const Response& response, const PublicKey& reply_key, RandomSource& rng) {
  ByteWriter w;
  w.u8(kResponseTag).u8(static_cast<std::uint8_t>(response.status)).str(response.detail).bytes(response.body);
  return seal(w.data(), reply_key, rng).encode();
}

Response open_response(ByteView frame, const PrivateKey& reply_key) {
  auto plain = open(SealedEnvelope::decode(frame), reply_key);
  ByteReader r(plain);
  if (r.u8() != kResponseTag) throw Error(ErrorCode::decode_error, "not a response");
  Response resp;
  resp.status = static_cast<ErrorCode>(r.u8());
  resp.detail = r.str();
  resp.body = r.bytes();
  r.expect_end();
  return resp;
}

}  // namespace vpki
