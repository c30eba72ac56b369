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

#include "vpki/bytes.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace vpki {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::malformed_key: return "malformed-key";
    case ErrorCode::entropy_failure: return "entropy-failure";
    case ErrorCode::decode_error: return "decode-error";
    case ErrorCode::open_failed: return "open-failed";
    case ErrorCode::duplicate_registration: return "duplicate-registration";
    case ErrorCode::revoked_identity: return "revoked-identity";
    case ErrorCode::invalid_ltc: return "invalid-ltc";
    case ErrorCode::revoked: return "revoked";
    case ErrorCode::duplicate_period_request: return "duplicate-period-request";
    case ErrorCode::unknown_vehicle: return "unknown-vehicle";
    case ErrorCode::unauthorized: return "unauthorized";
    case ErrorCode::unknown_token: return "unknown-token";
    case ErrorCode::invalid_token: return "invalid-token";
    case ErrorCode::wrong_pca_binding: return "wrong-pca-binding";
    case ErrorCode::token_replayed: return "token-replayed";
    case ErrorCode::token_expired: return "token-expired";
    case ErrorCode::too_many_keys: return "too-many-keys";
    case ErrorCode::invalid_request: return "invalid-request";
    case ErrorCode::batch_underflow: return "batch-underflow";
    case ErrorCode::unknown_target: return "unknown-target";
    case ErrorCode::unknown_pseudonym: return "unknown-pseudonym";
    case ErrorCode::pca_unknown_serial: return "pca-unknown-serial";
    case ErrorCode::ltca_unknown_token: return "ltca-unknown-token";
    case ErrorCode::authority_unreachable: return "authority-unreachable";
    case ErrorCode::order_pending: return "order-pending";
    case ErrorCode::pool_conflict: return "pool-conflict";
    case ErrorCode::no_valid_pseudonym: return "no-valid-pseudonym";
    case ErrorCode::bad_signature: return "bad-signature";
    case ErrorCode::stale_sequence: return "stale-sequence";
    case ErrorCode::spec_invalid: return "spec-invalid";
    case ErrorCode::service_unreachable: return "service-unreachable";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail)),
      code_(code) {}

Error::Error(ErrorCode code) : Error(code, "") {}

std::string to_hex(ByteView data) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(ErrorCode::decode_error, "odd-length hex");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::decode_error, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

bool contains_subsequence(ByteView haystack, ByteView needle) {
  if (needle.empty()) return true;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

ByteWriter& ByteWriter::u8(std::uint8_t v) {
  buf_.push_back(v);
  return *this;
}

ByteWriter& ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

ByteWriter& ByteWriter::i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }

ByteWriter& ByteWriter::f64(double v) { return u64(std::bit_cast<std::uint64_t>(v)); }

ByteWriter& ByteWriter::raw(ByteView data) {
  buf_.insert(buf_.end(), data.begin(), data.end());
  return *this;
}

ByteWriter& ByteWriter::bytes(ByteView data) {
  if (data.size() > UINT32_MAX) throw Error(ErrorCode::invalid_request, "field too large");
  u32(static_cast<std::uint32_t>(data.size()));
  return raw(data);
}

ByteWriter& ByteWriter::str(std::string_view s) { return bytes(as_bytes(s)); }

ByteView ByteReader::raw(std::size_t n) {
  if (remaining() < n) throw Error(ErrorCode::decode_error, "truncated input");
  auto v = data_.subspan(pos_, n);
  pos_ += n;
  return v;
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint32_t ByteReader::u32() {
  auto v = raw(4);
  std::uint32_t out = 0;
  for (auto b : v) out = (out << 8) | b;
  return out;
}

std::uint64_t ByteReader::u64() {
  auto v = raw(8);
  std::uint64_t out = 0;
  for (auto b : v) out = (out << 8) | b;
  return out;
}

std::int64_t ByteReader::i64() { return static_cast<std::int64_t>(u64()); }

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

Bytes ByteReader::bytes() {
  auto n = u32();
  auto v = raw(n);
  return Bytes(v.begin(), v.end());
}

std::string ByteReader::str() {
  auto n = u32();
  auto v = raw(n);
  return std::string(v.begin(), v.end());
}

void ByteReader::expect_end() const {
  if (remaining() != 0) throw Error(ErrorCode::decode_error, "trailing bytes");
}

}  // namespace vpki
