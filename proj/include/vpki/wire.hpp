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

// Request/response messages exchanged between vehicles, authorities and the
// resolution authority. Every frame on the wire is a SealedEnvelope: requests
// are sealed to the authority key and carry a fresh reply key, responses are
// sealed to that reply key. Live mode adds a u32 length prefix per frame.

#include <optional>
#include <string>
#include <vector>

#include "vpki/credentials.hpp"

namespace vpki {

enum class MessageType : std::uint8_t {
  register_vehicle = 1,
  token = 2,
  pseudonyms = 3,
  fetch_crl = 4,
  order = 5,
  resolve = 6,
};

/// Signed by the vehicle's long-term key; authenticates it to the LTCA.
struct TokenRequest {
  std::string vehicle_id;
  std::uint64_t period_tag = 0;
  Digest pca_binding;
  Timestamp sent_at = 0;
  Signature signature;

  Bytes tbs() const;
  Bytes encode() const;
  static TokenRequest decode(ByteView data);
};

struct PseudonymRequest {
  Token token;
  Bytes salt;
  std::vector<PublicKey> public_keys;
  /// Only honoured by a PCA in legacy flexible-lifetime mode.
  std::optional<Timestamp> requested_start;

  Bytes encode() const;
  static PseudonymRequest decode(ByteView data);
};

struct RegisterRequest {
  std::string vehicle_id;
  PublicKey public_key;

  Bytes encode() const;
  static RegisterRequest decode(ByteView data);
};

enum class OrderAction : std::uint8_t {
  resolve_pseudonym = 1,
  resolve_token = 2,
  revoke_vehicle = 3,
  revoke_token = 4,
  revoke_serials = 5,
};

/// RA-signed instruction to an LTCA or PCA. `target` holds a serial, a
/// vehicle id or a serial list depending on `action`.
struct AuthorizationOrder {
  std::string order_id;
  OrderAction action = OrderAction::resolve_pseudonym;
  Bytes target;
  std::string issuer_id;
  Timestamp issued_at = 0;
  Signature signature;

  Bytes tbs() const;
  Bytes encode() const;
  static AuthorizationOrder decode(ByteView data);

  Serial target_serial() const;
  std::string target_vehicle() const;
  std::vector<Serial> target_serials() const;

  static Bytes serial_target(const Serial& s);
  static Bytes vehicle_target(const std::string& id);
  static Bytes serials_target(const std::vector<Serial>& s);
};

Bytes encode_pseudonym_list(const std::vector<Pseudonym>& ps);
std::vector<Pseudonym> decode_pseudonym_list(ByteView data);

// --- sealed channel ---------------------------------------------------------

struct OpenedRequest {
  MessageType type{};
  Bytes body;
  PublicKey reply_key;
};

struct Response {
  ErrorCode status = ErrorCode::ok;
  std::string detail;
  Bytes body;

  /// Throws Error(status, detail) for a failure response.
  const Bytes& value() const;
};

struct PendingCall {
  Bytes frame;
  PrivateKey reply_key;
};

PendingCall make_request(MessageType type, ByteView body, const PublicKey& authority,
                         RandomSource& rng);
OpenedRequest open_request(ByteView frame, const PrivateKey& authority_key);
Bytes make_response(const Response& response, const PublicKey& reply_key, RandomSource& rng);
Response open_response(ByteView frame, const PrivateKey& reply_key);

}  // namespace vpki
