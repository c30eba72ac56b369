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

// Frame-level front ends for the authorities. A service opens a sealed
// request, dispatches it and seals the reply to the caller's reply key. The
// simulator bus and the TCP server both drive these.

#include <functional>
#include <memory>
#include <string>

#include "vpki/ltca.hpp"
#include "vpki/pca.hpp"
#include "vpki/resolution.hpp"
#include "vpki/wire.hpp"

namespace vpki {

struct HandleInfo {
  MessageType type{};
  ErrorCode status = ErrorCode::ok;
  std::string detail;
};

class Service {
 public:
  virtual ~Service() = default;
  /// Throws only when the frame cannot be opened (no reply is possible);
  /// protocol errors come back as a sealed failure response.
  virtual Bytes handle(ByteView frame, Timestamp now, HandleInfo* info = nullptr) = 0;
};

class LtcaService final : public Service {
 public:
  LtcaService(Ltca& ltca, std::unique_ptr<RandomSource> rng);
  Bytes handle(ByteView frame, Timestamp now, HandleInfo* info = nullptr) override;

 private:
  Ltca& ltca_;
  std::unique_ptr<RandomSource> rng_;
};

class PcaService final : public Service {
 public:
  PcaService(Pca& pca, std::unique_ptr<RandomSource> rng);
  Bytes handle(ByteView frame, Timestamp now, HandleInfo* info = nullptr) override;

 private:
  Pca& pca_;
  std::unique_ptr<RandomSource> rng_;
};

/// Accepts `resolve` requests: body is an encoded Pseudonym followed by a
/// length-prefixed justification. Replies with the encoded order record.
class RaService final : public Service {
 public:
  RaService(ResolutionAuthority& ra, const PrivateKey& ra_key, std::unique_ptr<RandomSource> rng);
  Bytes handle(ByteView frame, Timestamp now, HandleInfo* info = nullptr) override;

 private:
  ResolutionAuthority& ra_;
  PrivateKey key_;
  std::unique_ptr<RandomSource> rng_;
};

Bytes encode_resolve_request(const Pseudonym& p, const std::string& justification);
Bytes encode_order_record(const ResolutionOrder& o);
ResolutionOrder decode_order_record(ByteView data);

/// Sends one frame and returns the reply frame. Throws
/// Error(authority_unreachable) on transport failure.
using FrameChannel = std::function<Bytes(ByteView)>;

/// RA links to authorities behind a FrameChannel.
class RemotePcaLink final : public PcaLink {
 public:
  RemotePcaLink(FrameChannel channel, PublicKey pca_key, std::unique_ptr<RandomSource> rng);
  PseudonymOwner resolve_pseudonym(const Serial& serial, const AuthorizationOrder& order) override;
  Crl revoke_pseudonyms(const AuthorizationOrder& order) override;

 private:
  Bytes call(const AuthorizationOrder& order);
  FrameChannel channel_;
  PublicKey key_;
  std::unique_ptr<RandomSource> rng_;
};

class RemoteLtcaLink final : public LtcaLink {
 public:
  RemoteLtcaLink(FrameChannel channel, PublicKey ltca_key, std::unique_ptr<RandomSource> rng);
  std::string resolve_token(const Serial& token, const AuthorizationOrder& order) override;
  Crl revoke_vehicle(const AuthorizationOrder& order) override;

 private:
  Bytes call(const AuthorizationOrder& order);
  FrameChannel channel_;
  PublicKey key_;
  std::unique_ptr<RandomSource> rng_;
};

/// Round trip over a FrameChannel: seal, send, open, unwrap.
Bytes call_authority(const FrameChannel& channel, MessageType type, ByteView body,
                     const PublicKey& authority_key, RandomSource& rng);

}  // namespace vpki
