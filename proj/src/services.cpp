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


#include "vpki/services.hpp"

namespace vpki {

namespace {

Crl decode_crl(ByteView data) {
  ByteReader r(data);
  auto crl = Crl::decode(r);
  r.expect_end();
  return crl;
}

AuthorizationOrder decode_order(ByteView data) { return AuthorizationOrder::decode(data); }

template <class Fn>
Bytes respond(const OpenedRequest& req, RandomSource& rng, HandleInfo* info, Fn&& fn) {
  Response resp;
  try {
    resp.body = fn();
  } catch (const Error& e) {
    resp.status = e.code();
    resp.detail = e.what();
  }
  if (info) {
    info->type = req.type;
    info->status = resp.status;
    info->detail = resp.detail;
  }
  return make_response(resp, req.reply_key, rng);
}

}  // namespace

LtcaService::LtcaService(Ltca& ltca, std::unique_ptr<RandomSource> rng)
    : ltca_(ltca), rng_(rng ? std::move(rng) : std::make_unique<SystemRandom>()) {}

Bytes LtcaService::handle(ByteView frame, Timestamp now, HandleInfo* info) {
  auto req = open_request(frame, ltca_.private_key());
  return respond(req, *rng_, info, [&]() -> Bytes {
    switch (req.type) {
      case MessageType::register_vehicle: {
        auto r = RegisterRequest::decode(req.body);
        return ltca_.register_vehicle(r.vehicle_id, r.public_key, now).encode();
      }
      case MessageType::token:
        return ltca_.issue_token(TokenRequest::decode(req.body), now).encode();
      case MessageType::fetch_crl:
        return ltca_.publish_crl(now).encode();
      case MessageType::order: {
        auto order = decode_order(req.body);
        if (order.action == OrderAction::resolve_token) {
          auto v = ltca_.resolve_token(order.target_serial(), order, now);
          return Bytes(v.begin(), v.end());
        }
        if (order.action == OrderAction::revoke_vehicle) return ltca_.revoke_vehicle(order, now).encode();
        throw Error(ErrorCode::invalid_request, "order not for an LTCA");
      }
      default:
        throw Error(ErrorCode::invalid_request, "message type not served by an LTCA");
    }
  });
}

PcaService::PcaService(Pca& pca, std::unique_ptr<RandomSource> rng)
    : pca_(pca), rng_(rng ? std::move(rng) : std::make_unique<SystemRandom>()) {}

Bytes PcaService::handle(ByteView frame, Timestamp now, HandleInfo* info) {
  auto req = open_request(frame, pca_.private_key());
  return respond(req, *rng_, info, [&]() -> Bytes {
    switch (req.type) {
      case MessageType::pseudonyms:
        return encode_pseudonym_list(pca_.issue_pseudonyms(PseudonymRequest::decode(req.body), now));
      case MessageType::fetch_crl:
        return pca_.publish_crl(now).encode();
      case MessageType::order: {
        auto order = decode_order(req.body);
        if (order.action == OrderAction::resolve_pseudonym) {
          auto owner = pca_.resolve_pseudonym(order.target_serial(), order, now);
          ByteWriter w;
          w.fixed(owner.token_serial.bytes).str(owner.ltca_id);
          return std::move(w).take();
        }
        if (order.action == OrderAction::revoke_token || order.action == OrderAction::revoke_serials) {
          return pca_.revoke_pseudonyms(order, now).encode();
        }
        throw Error(ErrorCode::invalid_request, "order not for a PCA");
      }
      default:
        throw Error(ErrorCode::invalid_request, "message type not served by a PCA");
    }
  });
}

RaService::RaService(ResolutionAuthority& ra, const PrivateKey& ra_key, std::unique_ptr<RandomSource> rng)
    : ra_(ra), key_(ra_key), rng_(rng ? std::move(rng) : std::make_unique<SystemRandom>()) {}

Bytes RaService::handle(ByteView frame, Timestamp now, HandleInfo* info) {
  auto req = open_request(frame, key_);
  return respond(req, *rng_, info, [&]() -> Bytes {
    if (req.type != MessageType::resolve) throw Error(ErrorCode::invalid_request, "RA only resolves");
    ByteReader r(req.body);
    auto pb = r.bytes();
    ByteReader pr(pb);
    auto p = Pseudonym::decode(pr);
    pr.expect_end();
    auto justification = r.str();
    r.expect_end();
    return encode_order_record(ra_.resolve(p, justification, now));
  });
}

Bytes encode_resolve_request(const Pseudonym& p, const std::string& justification) {
  ByteWriter w;
  w.bytes(p.encode()).str(justification);
  return std::move(w).take();
}

Bytes encode_order_record(const ResolutionOrder& o) {
  ByteWriter w;
  o.write(w);
  return std::move(w).take();
}

ResolutionOrder decode_order_record(ByteView data) {
  ByteReader r(data);
  auto o = ResolutionOrder::read(r);
  r.expect_end();
  return o;
}

Bytes call_authority(const FrameChannel& channel, MessageType type, ByteView body,
                     const PublicKey& authority_key, RandomSource& rng) {
  auto call = make_request(type, body, authority_key, rng);
  auto reply = channel(call.frame);
  return open_response(reply, call.reply_key).value();
}

RemotePcaLink::RemotePcaLink(FrameChannel channel, PublicKey pca_key, std::unique_ptr<RandomSource> rng)
    : channel_(std::move(channel)), key_(pca_key), rng_(rng ? std::move(rng) : std::make_unique<SystemRandom>()) {}

Bytes RemotePcaLink::call(const AuthorizationOrder& order) {
  return call_authority(channel_, MessageType::order, order.encode(), key_, *rng_);
}

PseudonymOwner RemotePcaLink::resolve_pseudonym(const Serial&, const AuthorizationOrder& order) {
  auto body = call(order);
  ByteReader r(body);
  PseudonymOwner owner;
  owner.token_serial.bytes = r.fixed<16>();
  owner.ltca_id = r.str();
  r.expect_end();
  return owner;
}

Crl RemotePcaLink::revoke_pseudonyms(const AuthorizationOrder& order) { return decode_crl(call(order)); }

RemoteLtcaLink::RemoteLtcaLink(FrameChannel channel, PublicKey ltca_key, std::unique_ptr<RandomSource> rng)
    : channel_(std::move(channel)), key_(ltca_key), rng_(rng ? std::move(rng) : std::make_unique<SystemRandom>()) {}

Bytes RemoteLtcaLink::call(const AuthorizationOrder& order) {
  return call_authority(channel_, MessageType::order, order.encode(), key_, *rng_);
}

std::string RemoteLtcaLink::resolve_token(const Serial&, const AuthorizationOrder& order) {
  auto body = call(order);
  return std::string(body.begin(), body.end());
}

Crl RemoteLtcaLink::revoke_vehicle(const AuthorizationOrder& order) { return decode_crl(call(order)); }

}  // namespace vpki
