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

#include <optional>
#include <string>
#include <vector>

#include "vpki/event_log.hpp"
#include "vpki/pca.hpp"

namespace vpki {

enum class AcquisitionMode : std::uint8_t { token = 0, proxy = 1 };

struct Range {
  double lo = 0;
  double hi = 0;
};

struct ChannelModel {
  Range v2a_latency_ms{20, 100};
  Range v2v_latency_ms{1, 10};
  double v2v_loss = 0.0;
  double radio_range_m = 1000;
};

struct CrlConfig {
  bool dissemination = true;
  double broadcast_latency_s = 5.0;
};

struct Revocation {
  std::string vehicle_id;
  double at_s = 0;
};

struct SybilAttacker {
  std::string vehicle_id;
  /// Distinct PCAs asked for the same period; 0 means all of them.
  std::uint32_t pcas = 0;
};

struct FaultInjection {
  /// Token issuances whose LTCA audit note gets the target PCA id.
  std::uint32_t ltca_logs_pca_id = 0;
  /// Pseudonym issuances whose PCA audit note gets the vehicle id.
  std::uint32_t pca_logs_vehicle_id = 0;
};

struct ScenarioSpec {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  TrustTopology topology;
  std::uint32_t vehicles = 10;
  double beacon_rate_hz = 10;
  double duration_s = 60;
  /// Virtual clock value (seconds) of the first beacon opportunity.
  Timestamp start_time = 0;
  Timestamp epoch_origin = 0;
  std::int64_t slot_duration_s = 600;
  std::int64_t period_length_s = 86400;
  LifetimeMode lifetime_mode = LifetimeMode::grid;
  AcquisitionMode acquisition = AcquisitionMode::token;
  std::size_t proxy_batch_min = 8;
  double proxy_timeout_s = 2.0;
  /// 0 means one key per slot of a period.
  std::uint32_t keys_per_refill = 0;
  std::uint32_t preload_periods = 1;
  /// How long before its coverage runs out a vehicle asks for the next set;
  /// drawn per refill.
  Range refill_lead_s{10, 60};
  /// Flexible mode: initial coverage starts this far (drawn per vehicle)
  /// before start_time.
  double stagger_s = 0;
  bool guards = true;
  ChannelModel channel;
  double area_m = 1000;
  Range speed_mps{10, 30};
  CrlConfig crl;
  double tolerance_s = 2.0;
  /// Vehicles that run beacon verification; -1 means every honest vehicle.
  std::int32_t verifiers = -1;
  std::vector<Revocation> revocations;
  std::optional<SybilAttacker> sybil_attacker;
  bool curious_ltca = false;
  bool curious_pca = false;
  bool eavesdropper = false;
  FaultInjection faults;

  /// Throws Error(spec_invalid).
  void validate() const;
  LifetimePolicy policy_template() const;
  std::uint32_t keys_per_refill_effective() const;
  std::string vehicle_id(std::uint32_t index) const;

  static ScenarioSpec from_json(const Json& j);
  static ScenarioSpec load(const std::string& path);
  Json to_json() const;
};

}  // namespace vpki
