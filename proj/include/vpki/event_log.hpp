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

// Simulation output. The event log is newline-delimited JSON, one record per
// line with at least {t_us, type, view}; `view` names the principal whose
// interface produced the record ("air", "wire", "ltca:<id>", "pca:<id>",
// "proxy", "ra", "vehicle:<id>", "adversary"). Taps are projections of the
// log onto view prefixes. The ground-truth sidecar is binary and holds the
// mappings no single principal sees.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "vpki/credentials.hpp"

namespace vpki {

using Json = nlohmann::json;

class EventLog {
 public:
  void append(std::int64_t t_us, std::string_view type, std::string_view view, Json fields = Json::object());

  /// Every later record whose view starts with one of `view_prefixes` is
  /// copied to tap `name`.
  void add_tap(const std::string& name, std::vector<std::string> view_prefixes);

  const std::string& text() const { return text_; }
  std::size_t records() const { return records_; }
  const std::map<std::string, std::string>& taps() const { return taps_; }
  Digest digest() const { return vpki::digest(as_bytes(text_)); }

  /// events.ndjson and taps/<name>.ndjson under `dir`.
  void write(const std::string& dir) const;

  static std::vector<Json> parse(std::string_view ndjson);
  static std::vector<Json> read(const std::string& path);

 private:
  std::string text_;
  std::size_t records_ = 0;
  std::int64_t last_t_ = INT64_MIN;
  std::vector<std::pair<std::string, std::vector<std::string>>> tap_filters_;
  std::map<std::string, std::string> taps_;
};

struct TruthIssuance {
  std::string vehicle_id;
  std::string lane;
  std::uint32_t round = 0;
  std::string ltca_id;
  std::string pca_id;
  std::uint64_t period_tag = 0;
  Serial token_serial;
  std::int64_t sent_us = 0;
  std::int64_t received_us = 0;
  std::vector<Serial> serials;
  std::vector<ValidityInterval> validity;

  bool operator==(const TruthIssuance&) const = default;
};

struct TruthBatch {
  std::uint64_t batch_id = 0;
  bool underflow = false;
  std::vector<std::string> origins;
  std::vector<std::uint64_t> permutation;

  bool operator==(const TruthBatch&) const = default;
};

struct TruthRevocation {
  std::string vehicle_id;
  std::string order_id;
  std::int64_t order_us = 0;
  Serial pseudonym_serial;
  std::vector<Serial> crl_serials;

  bool operator==(const TruthRevocation&) const = default;
};

/// A violation deliberately planted by fault-injection instrumentation.
struct PlantedViolation {
  std::string side;  // "ltca" or "pca"
  std::string kind;  // "pca-id", "pseudonym-serial", "vehicle-id", "ltc-serial"
  std::string value;

  auto operator<=>(const PlantedViolation&) const = default;
};

struct GroundTruth {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<std::string> vehicles;
  std::map<std::string, Serial> ltc_serials;
  std::map<std::string, std::string> vehicle_ltca;
  std::string attacker;
  std::vector<std::string> ltca_ids;
  std::vector<std::string> pca_ids;
  std::vector<TruthIssuance> issuances;
  std::vector<TruthBatch> batches;
  std::vector<TruthRevocation> revocations;
  std::vector<PlantedViolation> planted;

  Bytes encode() const;
  static GroundTruth decode(ByteView data);
  /// pseudonym serial -> vehicle id
  std::map<Serial, std::string> serial_owner() const;
  bool operator==(const GroundTruth&) const = default;
};

}  // namespace vpki
