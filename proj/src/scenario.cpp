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


#include "vpki/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace vpki {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::spec_invalid, what); }

void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) invalid(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      invalid("unknown field " + where + "." + k);
    }
  }
}

Range range_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) invalid(where + " must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json range_json(const Range& r) { return Json::array({r.lo, r.hi}); }

template <class T>
void get(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string ScenarioSpec::vehicle_id(std::uint32_t index) const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "V%03u", index + 1);
  return buf;
}

LifetimePolicy ScenarioSpec::policy_template() const {
  LifetimePolicy p;
  p.epoch_origin = epoch_origin;
  p.slot_duration = slot_duration_s;
  p.period_length = period_length_s;
  return p;
}

std::uint32_t ScenarioSpec::keys_per_refill_effective() const {
  if (keys_per_refill > 0) return keys_per_refill;
  return static_cast<std::uint32_t>(period_length_s / slot_duration_s);
}

void ScenarioSpec::validate() const {
  topology.validate();
  policy_template().validate();
  if (vehicles == 0 || vehicles > 999) invalid("vehicles must be in [1, 999]");
  if (!(beacon_rate_hz >= 1 && beacon_rate_hz <= 10)) invalid("beacon_rate_hz must be in [1, 10]");
  if (!(duration_s > 0)) invalid("duration_s must be positive");
  if (keys_per_refill_effective() > period_length_s / slot_duration_s) {
    invalid("keys_per_refill exceeds the slots in a period");
  }
  if (preload_periods == 0) invalid("preload_periods must be positive");
  auto positive_range = [](const Range& r, const char* what) {
    if (!(r.lo >= 0 && r.hi >= r.lo)) invalid(std::string(what) + " must satisfy 0 <= lo <= hi");
  };
  positive_range(refill_lead_s, "refill_lead_s");
  positive_range(channel.v2a_latency_ms, "channel.v2a_latency_ms");
  positive_range(channel.v2v_latency_ms, "channel.v2v_latency_ms");
  positive_range(speed_mps, "speed_mps");
  if (!(speed_mps.lo > 0)) invalid("speed_mps must be positive");
  if (!(channel.v2v_loss >= 0 && channel.v2v_loss < 1)) invalid("channel.v2v_loss must be in [0, 1)");
  if (!(channel.radio_range_m > 0) || !(area_m > 0)) invalid("radio range and area must be positive");
  if (!(crl.broadcast_latency_s >= 0)) invalid("crl.broadcast_latency_s must be non-negative");
  if (!(tolerance_s >= 0)) invalid("tolerance_s must be non-negative");
  if (!(stagger_s >= 0)) invalid("stagger_s must be non-negative");
  if (proxy_batch_min == 0 || !(proxy_timeout_s > 0)) invalid("proxy batch_min and timeout must be positive");
  if (start_time < epoch_origin) invalid("start_time precedes epoch_origin");
  std::set<std::string> ids;
  for (std::uint32_t i = 0; i < vehicles; ++i) ids.insert(vehicle_id(i));
  for (const auto& r : revocations) {
    if (!ids.contains(r.vehicle_id)) invalid("revocation names unknown vehicle " + r.vehicle_id);
    if (!(r.at_s >= 0 && r.at_s < duration_s)) invalid("revocation time outside the run");
  }
  if (sybil_attacker) {
    if (!ids.contains(sybil_attacker->vehicle_id)) invalid("unknown sybil attacker vehicle");
    if (sybil_attacker->pcas > topology.pca_count) invalid("sybil attacker asks for more PCAs than exist");
  }
}

ScenarioSpec ScenarioSpec::from_json(const Json& j) {
  check_keys(j,
             {"name", "seed", "topology", "vehicles", "beacon_rate_hz", "duration_s", "start_time",
              "epoch_origin", "slot_duration_s", "period_length_s", "lifetime_mode", "acquisition",
              "proxy", "keys_per_refill", "preload_periods", "refill_lead_s", "stagger_s", "guards",
              "channel", "area_m", "speed_mps", "crl", "tolerance_s", "verifiers", "revocations",
              "adversaries", "faults", "description"},
             "scenario");
  ScenarioSpec s;
  try {
    get(j, "name", s.name);
    get(j, "seed", s.seed);
    if (j.contains("topology")) {
      const auto& t = j.at("topology");
      check_keys(t, {"hca", "ltca", "pca", "cross_certifications"}, "topology");
      get(t, "hca", s.topology.hca_count);
      get(t, "ltca", s.topology.ltca_count);
      get(t, "pca", s.topology.pca_count);
      if (t.contains("cross_certifications")) {
        for (const auto& pair : t.at("cross_certifications")) {
          s.topology.cross_certifications.emplace_back(pair.at(0).get<std::string>(),
                                                        pair.at(1).get<std::string>());
        }
      }
    }
    get(j, "vehicles", s.vehicles);
    get(j, "beacon_rate_hz", s.beacon_rate_hz);
    get(j, "duration_s", s.duration_s);
    get(j, "start_time", s.start_time);
    get(j, "epoch_origin", s.epoch_origin);
    get(j, "slot_duration_s", s.slot_duration_s);
    get(j, "period_length_s", s.period_length_s);
    if (j.contains("lifetime_mode")) s.lifetime_mode = lifetime_mode_from_string(j.at("lifetime_mode").get<std::string>());
    if (j.contains("acquisition")) {
      auto a = j.at("acquisition").get<std::string>();
      if (a == "token") {
        s.acquisition = AcquisitionMode::token;
      } else if (a == "proxy") {
        s.acquisition = AcquisitionMode::proxy;
      } else {
        invalid("acquisition must be token or proxy");
      }
    }
    if (j.contains("proxy")) {
      const auto& p = j.at("proxy");
      check_keys(p, {"batch_min", "timeout_s"}, "proxy");
      get(p, "batch_min", s.proxy_batch_min);
      get(p, "timeout_s", s.proxy_timeout_s);
    }
    get(j, "keys_per_refill", s.keys_per_refill);
    get(j, "preload_periods", s.preload_periods);
    if (j.contains("refill_lead_s")) s.refill_lead_s = range_from(j.at("refill_lead_s"), "refill_lead_s");
    get(j, "stagger_s", s.stagger_s);
    get(j, "guards", s.guards);
    if (j.contains("channel")) {
      const auto& c = j.at("channel");
      check_keys(c, {"v2a_latency_ms", "v2v_latency_ms", "v2v_loss", "radio_range_m"}, "channel");
      if (c.contains("v2a_latency_ms")) s.channel.v2a_latency_ms = range_from(c.at("v2a_latency_ms"), "v2a_latency_ms");
      if (c.contains("v2v_latency_ms")) s.channel.v2v_latency_ms = range_from(c.at("v2v_latency_ms"), "v2v_latency_ms");
      get(c, "v2v_loss", s.channel.v2v_loss);
      get(c, "radio_range_m", s.channel.radio_range_m);
    }
    get(j, "area_m", s.area_m);
    if (j.contains("speed_mps")) s.speed_mps = range_from(j.at("speed_mps"), "speed_mps");
    if (j.contains("crl")) {
      const auto& c = j.at("crl");
      check_keys(c, {"dissemination", "broadcast_latency_s"}, "crl");
      get(c, "dissemination", s.crl.dissemination);
      get(c, "broadcast_latency_s", s.crl.broadcast_latency_s);
    }
    get(j, "tolerance_s", s.tolerance_s);
    get(j, "verifiers", s.verifiers);
    if (j.contains("revocations")) {
      for (const auto& r : j.at("revocations")) {
        check_keys(r, {"vehicle", "at_s"}, "revocations[]");
        s.revocations.push_back({r.at("vehicle").get<std::string>(), r.at("at_s").get<double>()});
      }
    }
    if (j.contains("adversaries")) {
      const auto& a = j.at("adversaries");
      check_keys(a, {"sybil_attacker", "curious_ltca", "curious_pca", "eavesdropper"}, "adversaries");
      if (a.contains("sybil_attacker")) {
        const auto& sa = a.at("sybil_attacker");
        check_keys(sa, {"vehicle", "pcas"}, "adversaries.sybil_attacker");
        SybilAttacker att;
        att.vehicle_id = sa.at("vehicle").get<std::string>();
        get(sa, "pcas", att.pcas);
        s.sybil_attacker = att;
      }
      get(a, "curious_ltca", s.curious_ltca);
      get(a, "curious_pca", s.curious_pca);
      get(a, "eavesdropper", s.eavesdropper);
    }
    if (j.contains("faults")) {
      const auto& f = j.at("faults");
      check_keys(f, {"ltca_logs_pca_id", "pca_logs_vehicle_id"}, "faults");
      get(f, "ltca_logs_pca_id", s.faults.ltca_logs_pca_id);
      get(f, "pca_logs_vehicle_id", s.faults.pca_logs_vehicle_id);
    }
  } catch (const Json::exception& e) {
    invalid(std::string("malformed scenario: ") + e.what());
  }
  s.validate();
  return s;
}

ScenarioSpec ScenarioSpec::load(const std::string& path) {
  auto raw = read_file(path);
  Json j;
  try {
    j = Json::parse(raw.begin(), raw.end());
  } catch (const Json::exception& e) {
    invalid(path + ": " + e.what());
  }
  return from_json(j);
}

Json ScenarioSpec::to_json() const {
  Json cross = Json::array();
  for (const auto& [a, b] : topology.cross_certifications) cross.push_back({a, b});
  Json revs = Json::array();
  for (const auto& r : revocations) revs.push_back({{"vehicle", r.vehicle_id}, {"at_s", r.at_s}});
  Json adv = {{"curious_ltca", curious_ltca}, {"curious_pca", curious_pca}, {"eavesdropper", eavesdropper}};
  if (sybil_attacker) adv["sybil_attacker"] = {{"vehicle", sybil_attacker->vehicle_id}, {"pcas", sybil_attacker->pcas}};
  return {
      {"name", name},
      {"seed", seed},
      {"topology", {{"hca", topology.hca_count}, {"ltca", topology.ltca_count}, {"pca", topology.pca_count},
                    {"cross_certifications", cross}}},
      {"vehicles", vehicles},
      {"beacon_rate_hz", beacon_rate_hz},
      {"duration_s", duration_s},
      {"start_time", start_time},
      {"epoch_origin", epoch_origin},
      {"slot_duration_s", slot_duration_s},
      {"period_length_s", period_length_s},
      {"lifetime_mode", std::string(to_string(lifetime_mode))},
      {"acquisition", acquisition == AcquisitionMode::token ? "token" : "proxy"},
      {"proxy", {{"batch_min", proxy_batch_min}, {"timeout_s", proxy_timeout_s}}},
      {"keys_per_refill", keys_per_refill},
      {"preload_periods", preload_periods},
      {"refill_lead_s", range_json(refill_lead_s)},
      {"stagger_s", stagger_s},
      {"guards", guards},
      {"channel", {{"v2a_latency_ms", range_json(channel.v2a_latency_ms)},
                   {"v2v_latency_ms", range_json(channel.v2v_latency_ms)},
                   {"v2v_loss", channel.v2v_loss},
                   {"radio_range_m", channel.radio_range_m}}},
      {"area_m", area_m},
      {"speed_mps", range_json(speed_mps)},
      {"crl", {{"dissemination", crl.dissemination}, {"broadcast_latency_s", crl.broadcast_latency_s}}},
      {"tolerance_s", tolerance_s},
      {"verifiers", verifiers},
      {"revocations", revs},
      {"adversaries", adv},
      {"faults", {{"ltca_logs_pca_id", faults.ltca_logs_pca_id},
                  {"pca_logs_vehicle_id", faults.pca_logs_vehicle_id}}},
  };
}

}  // namespace vpki
