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

// Deterministic discrete-event run of a scenario. Virtual time is kept in
// microseconds; authorities see whole seconds, beacons carry milliseconds.
// Every random draw comes from a HashDrbg stream forked from the scenario
// seed, so the event log is a pure function of the spec.
//
// Output directory layout (SimResult::write):
//   events.ndjson            full event log
//   taps/<name>.ndjson       adversary taps (projections of the log)
//   ground_truth.bin         mappings no principal sees
//   state/<authority>.bin    serialized LTCA / PCA / RA state at the end
//   crl/<issuer>.crl         last CRL of each issuer
//   pki/                     deployment (trust store, policy, keys)
//   scenario.json, summary.json

#include <map>
#include <string>

#include "vpki/deployment.hpp"
#include "vpki/event_log.hpp"
#include "vpki/scenario.hpp"

namespace vpki {

struct SimResult {
  ScenarioSpec spec;
  EventLog log;
  GroundTruth truth;
  Deployment deployment;
  std::map<std::string, Bytes> states;
  std::map<std::string, Crl> crls;
  Json summary;

  Digest digest() const { return log.digest(); }
  void write(const std::string& dir) const;
};

/// Throws Error(spec_invalid) for a spec that does not validate.
SimResult run_simulation(const ScenarioSpec& spec);

}  // namespace vpki
