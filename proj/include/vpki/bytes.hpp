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

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vpki {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Every failure a protocol participant can report. The names mirror the
/// error vocabulary used on the wire and in event logs (see to_string).
enum class ErrorCode : std::uint8_t {
  ok = 0,
  malformed_key,
  entropy_failure,
  decode_error,
  open_failed,
  duplicate_registration,
  revoked_identity,
  invalid_ltc,
  revoked,
  duplicate_period_request,
  unknown_vehicle,
  unauthorized,
  unknown_token,
  invalid_token,
  wrong_pca_binding,
  token_replayed,
  token_expired,
  too_many_keys,
  invalid_request,
  batch_underflow,
  unknown_target,
  unknown_pseudonym,
  pca_unknown_serial,
  ltca_unknown_token,
  authority_unreachable,
  order_pending,
  pool_conflict,
  no_valid_pseudonym,
  bad_signature,
  stale_sequence,
  spec_invalid,
  service_unreachable,
  io_error,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);
  explicit Error(ErrorCode code);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

template <std::size_t N>
std::string to_hex(const std::array<std::uint8_t, N>& a) {
  return to_hex(ByteView(a.data(), a.size()));
}

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// True if `needle` occurs anywhere inside `haystack`.
bool contains_subsequence(ByteView haystack, ByteView needle);

// Canonical binary encoding primitives. Integers are big-endian and fixed
// width; variable-length fields carry a u32 length prefix.
class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v);
  ByteWriter& u32(std::uint32_t v);
  ByteWriter& u64(std::uint64_t v);
  ByteWriter& i64(std::int64_t v);
  ByteWriter& f64(double v);
  ByteWriter& raw(ByteView data);
  ByteWriter& bytes(ByteView data);
  ByteWriter& str(std::string_view s);

  template <std::size_t N>
  ByteWriter& fixed(const std::array<std::uint8_t, N>& a) {
    return raw(ByteView(a.data(), N));
  }

  const Bytes& data() const& { return buf_; }
  Bytes take() && { return std::move(buf_); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64();
  double f64();
  ByteView raw(std::size_t n);
  Bytes bytes();
  std::string str();

  template <std::size_t N>
  std::array<std::uint8_t, N> fixed() {
    std::array<std::uint8_t, N> out{};
    auto v = raw(N);
    std::copy(v.begin(), v.end(), out.begin());
    return out;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  void expect_end() const;

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace vpki
