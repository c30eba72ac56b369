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

// Wall-clock measurements. Authorities run in this process behind real
// localhost TCP sockets (issuance) or in memory (beacon load); the clock is
// the system clock, not the simulator's.

#include <string>
#include <vector>

#include "vpki/analysis.hpp"
#include "vpki/scenario.hpp"

namespace vpki {

struct IssuanceBenchConfig {
  std::uint32_t count = 100;
  AcquisitionMode mode = AcquisitionMode::token;
  std::uint32_t reps = 10;
  bool parallel_signing = true;
};

struct IssuanceBenchResult {
  IssuanceBenchConfig config;
  int threads = 1;
  /// End to end per repetition: token leg plus pseudonym leg.
  std::vector<double> total_ms;
  std::vector<double> token_ms;
  Distribution total;
  Distribution token;
};

/// Each repetition registers a fresh vehicle (untimed), then times one
/// token acquisition and one request for `count` pseudonyms. count = 0 times
/// the token leg alone. Proxy mode routes the pseudonym leg through a
/// pass-through shuffle proxy (batch size 1). Throws
/// Error(service_unreachable) if a local service cannot be reached.
IssuanceBenchResult bench_issuance(const IssuanceBenchConfig& config);

struct BeaconLoadConfig {
  std::uint32_t vehicles = 50;
  double rate_hz = 10;
  double duration_s = 60;
  bool parallel = true;
};

struct BeaconLoadResult {
  BeaconLoadConfig config;
  int threads = 1;
  std::uint64_t ticks_planned = 0;
  std::uint64_t ticks_run = 0;
  /// Ticks that finished after the next tick was due, plus ticks never run.
  std::uint64_t missed_deadlines = 0;
  std::uint64_t signatures = 0;
  std::uint64_t verifications = 0;
  std::uint64_t accepted = 0;
  Distribution tick_ms;
  double required_verifies_per_s = 0;
  double achieved_verifies_per_s = 0;
};

/// Every vehicle signs one beacon per tick and every vehicle verifies every
/// other vehicle's beacon within the same tick.
BeaconLoadResult run_beacon_load(const BeaconLoadConfig& config);

Json to_json(const IssuanceBenchResult& r);
Json to_json(const BeaconLoadResult& r);

}  // namespace vpki
