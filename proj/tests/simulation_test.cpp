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


#include <doctest.h>

#include <set>

#include "vpki/analysis.hpp"
#include "vpki/simulator.hpp"

using namespace vpki;

namespace {

ScenarioSpec small(std::uint64_t seed = 21) {
  auto j = Json::parse(R"({
    "name": "small",
    "topology": {"hca": 1, "ltca": 1, "pca": 2},
    "vehicles": 4,
    "beacon_rate_hz": 5,
    "duration_s": 10,
    "start_time": 60,
    "keys_per_refill": 2,
    "channel": {"radio_range_m": 5000},
    "area_m": 500,
    "adversaries": {"curious_ltca": true, "curious_pca": true, "eavesdropper": true}
  })");
  j["seed"] = seed;
  return ScenarioSpec::from_json(j);
}

std::size_t count_type(const std::vector<Json>& events, std::string_view type) {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [&](const Json& e) { return e["type"] == type; }));
}

}  // namespace

TEST_CASE("same spec and seed give the same log") {
  auto a = run_simulation(small());
  auto b = run_simulation(small());
  CHECK(a.digest() == b.digest());
  CHECK(a.truth == b.truth);
  CHECK(a.states == b.states);
  CHECK(run_simulation(small(22)).digest() != a.digest());
}

TEST_CASE("beacon counts follow from rate, duration and range") {
  auto r = run_simulation(small());
  auto events = EventLog::parse(r.log.text());
  CHECK(count_type(events, "beacon-sent") == 4 * 5 * 10);
  CHECK(count_type(events, "beacon-verified") == 4 * 5 * 10 * 3);
  CHECK(r.summary["counters"]["verdict_accept"] == 600);
  CHECK(count_type(events, "setup") == 1);
}

TEST_CASE("log timestamps never go backwards") {
  auto r = run_simulation(small());
  std::int64_t last = INT64_MIN;
  for (const auto& e : EventLog::parse(r.log.text())) {
    CHECK(e["t_us"].get<std::int64_t>() >= last);
    last = e["t_us"];
  }
}

TEST_CASE("taps are projections of the log by view") {
  auto r = run_simulation(small());
  REQUIRE(r.log.taps().contains("eavesdropper"));
  REQUIRE(r.log.taps().contains("ltca"));
  REQUIRE(r.log.taps().contains("pca"));
  auto all = r.log.text();
  for (const auto& [name, text] : r.log.taps()) {
    for (const auto& e : EventLog::parse(text)) {
      std::string view = e["view"];
      if (name == "eavesdropper") CHECK((view == "air" || view == "wire"));
      if (name == "ltca") CHECK(view.rfind("ltca:", 0) == 0);
      if (name == "pca") CHECK(view.rfind("pca:", 0) == 0);
      CHECK(all.find(e.dump()) != std::string::npos);
    }
  }
}

TEST_CASE("wire traffic hides tokens and long-term serials") {
  auto r = run_simulation(small());
  const auto& tap = r.log.taps().at("eavesdropper");
  for (const auto& [vid, serial] : r.truth.ltc_serials) CHECK(tap.find(serial.hex()) == std::string::npos);
  for (const auto& iss : r.truth.issuances) {
    CHECK(tap.find(iss.token_serial.hex()) == std::string::npos);
    CHECK(tap.find(iss.vehicle_id + "\"") == std::string::npos);
  }
}

TEST_CASE("invalid specs are refused") {
  auto s = small();
  s.vehicles = 0;
  CHECK_THROWS_AS(run_simulation(s), Error);
  s = small();
  s.period_length_s = 601;
  CHECK_THROWS_AS(run_simulation(s), Error);
}

TEST_CASE("run directory reloads to the same analysis input") {
  auto r = run_simulation(small());
  auto dir = std::filesystem::temp_directory_path() / "vpki-sim-test";
  std::filesystem::remove_all(dir);
  r.write(dir.string());
  auto loaded = load_run(dir.string());
  auto direct = run_data(r);
  CHECK(loaded.truth == direct.truth);
  CHECK(loaded.events == direct.events);
  CHECK(loaded.states == direct.states);
  CHECK(to_json(role_separation_audit(loaded)) == to_json(role_separation_audit(direct)));
  std::filesystem::remove_all(dir);
}

TEST_CASE("revocation inside a short run stays within the bound") {
  auto j = Json::parse(R"({
    "name": "short-revocation", "seed": 4,
    "topology": {"hca": 1, "ltca": 1, "pca": 1},
    "vehicles": 4, "beacon_rate_hz": 10, "duration_s": 20, "start_time": 60,
    "keys_per_refill": 0, "tolerance_s": 1.0,
    "crl": {"dissemination": true, "broadcast_latency_s": 2.0},
    "area_m": 300, "channel": {"radio_range_m": 2000},
    "revocations": [{"vehicle": "V002", "at_s": 8}]
  })");
  auto r = run_simulation(ScenarioSpec::from_json(j));
  auto rep = revocation_window(run_data(r));
  REQUIRE(rep.vehicles.size() == 1);
  CHECK(rep.vehicles[0].vehicle_id == "V002");
  CHECK(rep.bound_s == doctest::Approx(2.0 + 0.1 + 1.0));
  CHECK(rep.max_window_s > 0);
  CHECK(rep.max_window_s <= rep.bound_s);
}
