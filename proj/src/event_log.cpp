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


#include "vpki/event_log.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace vpki {

void EventLog::append(std::int64_t t_us, std::string_view type, std::string_view view, Json fields) {
  if (t_us < last_t_) throw Error(ErrorCode::invalid_request, "event log must be appended in time order");
  last_t_ = t_us;
  fields["t_us"] = t_us;
  fields["type"] = type;
  fields["view"] = view;
  auto line = fields.dump();
  line.push_back('\n');
  text_ += line;
  ++records_;
  for (const auto& [name, prefixes] : tap_filters_) {
    for (const auto& p : prefixes) {
      if (view.starts_with(p)) {
        taps_[name] += line;
        break;
      }
    }
  }
}

void EventLog::add_tap(const std::string& name, std::vector<std::string> view_prefixes) {
  tap_filters_.emplace_back(name, std::move(view_prefixes));
  taps_.emplace(name, std::string());
}

void EventLog::write(const std::string& dir) const {
  fs::create_directories(dir);
  write_file((fs::path(dir) / "events.ndjson").string(), as_bytes(text_));
  if (taps_.empty()) return;
  fs::create_directories(fs::path(dir) / "taps");
  for (const auto& [name, body] : taps_) {
    write_file((fs::path(dir) / "taps" / (name + ".ndjson")).string(), as_bytes(body));
  }
}

std::vector<Json> EventLog::parse(std::string_view ndjson) {
  std::vector<Json> out;
  std::size_t pos = 0;
  while (pos < ndjson.size()) {
    auto end = ndjson.find('\n', pos);
    if (end == std::string_view::npos) end = ndjson.size();
    if (end > pos) out.push_back(Json::parse(ndjson.substr(pos, end - pos)));
    pos = end + 1;
  }
  return out;
}

std::vector<Json> EventLog::read(const std::string& path) {
  auto raw = read_file(path);
  return parse(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
}

namespace {

void write_serials(ByteWriter& w, const std::vector<Serial>& s) {
  w.u32(static_cast<std::uint32_t>(s.size()));
  for (const auto& x : s) w.fixed(x.bytes);
}

std::vector<Serial> read_serials(ByteReader& r) {
  std::vector<Serial> out(r.u32());
  for (auto& s : out) s.bytes = r.fixed<16>();
  return out;
}

void write_strings(ByteWriter& w, const std::vector<std::string>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& s : v) w.str(s);
}

std::vector<std::string> read_strings(ByteReader& r) {
  std::vector<std::string> out(r.u32());
  for (auto& s : out) s = r.str();
  return out;
}

}  // namespace

Bytes GroundTruth::encode() const {
  ByteWriter w;
  w.raw(as_bytes("VPKI")).u8(kFormatVersion).u8(static_cast<std::uint8_t>(TypeTag::ground_truth));
  w.str(scenario).u64(seed);
  write_strings(w, vehicles);
  w.u32(static_cast<std::uint32_t>(ltc_serials.size()));
  for (const auto& [v, s] : ltc_serials) w.str(v).fixed(s.bytes);
  w.u32(static_cast<std::uint32_t>(vehicle_ltca.size()));
  for (const auto& [v, l] : vehicle_ltca) w.str(v).str(l);
  w.str(attacker);
  write_strings(w, ltca_ids);
  write_strings(w, pca_ids);
  w.u32(static_cast<std::uint32_t>(issuances.size()));
  for (const auto& i : issuances) {
    w.str(i.vehicle_id).str(i.lane).u32(i.round).str(i.ltca_id).str(i.pca_id).u64(i.period_tag);
    w.fixed(i.token_serial.bytes).i64(i.sent_us).i64(i.received_us);
    write_serials(w, i.serials);
    w.u32(static_cast<std::uint32_t>(i.validity.size()));
    for (const auto& v : i.validity) w.i64(v.start).i64(v.end);
  }
  w.u32(static_cast<std::uint32_t>(batches.size()));
  for (const auto& b : batches) {
    w.u64(b.batch_id).u8(b.underflow ? 1 : 0);
    write_strings(w, b.origins);
    w.u32(static_cast<std::uint32_t>(b.permutation.size()));
    for (auto p : b.permutation) w.u64(p);
  }
  w.u32(static_cast<std::uint32_t>(revocations.size()));
  for (const auto& r : revocations) {
    w.str(r.vehicle_id).str(r.order_id).i64(r.order_us).fixed(r.pseudonym_serial.bytes);
    write_serials(w, r.crl_serials);
  }
  w.u32(static_cast<std::uint32_t>(planted.size()));
  for (const auto& p : planted) w.str(p.side).str(p.kind).str(p.value);
  return std::move(w).take();
}

GroundTruth GroundTruth::decode(ByteView data) {
  ByteReader r(data);
  auto magic = r.raw(4);
  if (!std::equal(magic.begin(), magic.end(), "VPKI") || r.u8() != kFormatVersion ||
      r.u8() != static_cast<std::uint8_t>(TypeTag::ground_truth)) {
    throw Error(ErrorCode::decode_error, "not a ground-truth file");
  }
  GroundTruth g;
  g.scenario = r.str();
  g.seed = r.u64();
  g.vehicles = read_strings(r);
  for (auto n = r.u32(); n > 0; --n) {
    auto v = r.str();
    g.ltc_serials[v] = Serial{r.fixed<16>()};
  }
  for (auto n = r.u32(); n > 0; --n) {
    auto v = r.str();
    g.vehicle_ltca[v] = r.str();
  }
  g.attacker = r.str();
  g.ltca_ids = read_strings(r);
  g.pca_ids = read_strings(r);
  for (auto n = r.u32(); n > 0; --n) {
    TruthIssuance i;
    i.vehicle_id = r.str();
    i.lane = r.str();
    i.round = r.u32();
    i.ltca_id = r.str();
    i.pca_id = r.str();
    i.period_tag = r.u64();
    i.token_serial.bytes = r.fixed<16>();
    i.sent_us = r.i64();
    i.received_us = r.i64();
    i.serials = read_serials(r);
    for (auto k = r.u32(); k > 0; --k) {
      ValidityInterval v;
      v.start = r.i64();
      v.end = r.i64();
      i.validity.push_back(v);
    }
    g.issuances.push_back(std::move(i));
  }
  for (auto n = r.u32(); n > 0; --n) {
    TruthBatch b;
    b.batch_id = r.u64();
    b.underflow = r.u8() != 0;
    b.origins = read_strings(r);
    for (auto k = r.u32(); k > 0; --k) b.permutation.push_back(r.u64());
    g.batches.push_back(std::move(b));
  }
  for (auto n = r.u32(); n > 0; --n) {
    TruthRevocation v;
    v.vehicle_id = r.str();
    v.order_id = r.str();
    v.order_us = r.i64();
    v.pseudonym_serial.bytes = r.fixed<16>();
    v.crl_serials = read_serials(r);
    g.revocations.push_back(std::move(v));
  }
  for (auto n = r.u32(); n > 0; --n) {
    PlantedViolation p;
    p.side = r.str();
    p.kind = r.str();
    p.value = r.str();
    g.planted.push_back(std::move(p));
  }
  r.expect_end();
  return g;
}

std::map<Serial, std::string> GroundTruth::serial_owner() const {
  std::map<Serial, std::string> out;
  for (const auto& i : issuances) {
    for (const auto& s : i.serials) out.emplace(s, i.vehicle_id);
  }
  return out;
}

}  // namespace vpki
