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

// Offline audits over a finished run. Every report is a pure function of the
// run directory (event log, ground-truth sidecar, authority states), so
// re-running an analysis yields the same JSON.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vpki/event_log.hpp"
#include "vpki/scenario.hpp"

namespace vpki {

struct SimResult;

struct RunData {
  ScenarioSpec spec;
  std::vector<Json> events;
  GroundTruth truth;
  /// state/<name>.bin keyed by <name>, e.g. "ltca-LTCA-1".
  std::map<std::string, Bytes> states;
};

RunData load_run(const std::string& dir);
RunData run_data(const SimResult& result);

// ---- timing linkage ----

/// One pseudonym request as a PCA sees it: arrival time, the token serial it
/// consumed, and the window covered by the issued set.
struct RequestObservation {
  std::string pca_id;
  Serial token_serial;
  std::int64_t arrival_us = 0;
  ValidityInterval coverage;
};

struct LinkEdge {
  std::size_t from = 0;  // earlier request
  std::size_t to = 0;
  double confidence = 0;
};

struct LinkageHypothesis {
  /// Partition of observation indices; covers every request exactly once.
  std::vector<std::vector<std::size_t>> groups;
  std::vector<LinkEdge> edges;
};

struct PairScore {
  std::uint64_t predicted_pairs = 0;
  std::uint64_t true_pairs = 0;
  std::uint64_t correct_pairs = 0;
  /// 1 when there is nothing to predict (resp. recall).
  double precision = 1;
  double recall = 1;
};

struct Distribution {
  std::size_t samples = 0;
  double mean = 0;
  double p2_5 = 0;
  double p50 = 0;
  double p95 = 0;
  double p97_5 = 0;
};

struct LinkageReport {
  std::size_t requests = 0;
  std::size_t groups = 0;
  PairScore attack;
  Distribution baseline_precision;
  Distribution baseline_recall;
  bool precision_above_p95 = false;
  bool recall_above_p95 = false;
  bool precision_within_band = false;
};

/// Union of every PCA view in the log, in arrival order.
std::vector<RequestObservation> pca_observations(const std::vector<Json>& events);

/// Greedy temporal chaining: each request, in arrival order, extends the
/// earlier chain whose coverage ends closest to its own start, provided the
/// gap is within `tolerance_s`. Ties go to the earliest-arriving candidate
/// and the edge confidence is 1 / number of tied candidates.
LinkageHypothesis timing_link_attack(const std::vector<RequestObservation>& view, double tolerance_s = 1.0);

/// Pairwise precision/recall of a partition against per-item labels.
PairScore score_partition(const std::vector<std::vector<std::size_t>>& groups, const std::vector<std::string>& labels);

/// Runs the attack on the PCA views, scores it against ground truth, and
/// builds the null distribution by scoring the same hypothesis against
/// `shuffles` label permutations drawn within each request round.
LinkageReport linkability_report(const RunData& run, std::size_t shuffles = 1000, double tolerance_s = 1.0);

// ---- Sybil audit ----

struct SybilReport {
  /// vehicle id -> largest number of its pseudonyms valid at one instant.
  std::map<std::string, std::size_t> max_simultaneous;
  std::size_t overall_max = 0;
  std::string worst_vehicle;
  /// (vehicle, period_tag) pairs with more than one token.
  std::vector<std::pair<std::string, std::uint64_t>> multi_token_periods;
};

/// Exhaustive interval-overlap scan over every vehicle's issued pseudonyms.
SybilReport sybil_audit(const GroundTruth& truth);

// ---- role separation ----

struct RoleViolation {
  std::string side;      // "ltca" or "pca"
  std::string kind;      // "pca-id", "pseudonym-serial", "vehicle-id", "ltc-serial"
  std::string value;
  std::string artifact;  // first artifact it was found in

  auto operator<=>(const RoleViolation&) const = default;
};

struct RoleReport {
  std::vector<RoleViolation> violations;
  /// Pseudonyms whose owner can be recovered from one authority's artifacts
  /// alone; keyed by artifact.
  std::map<std::string, std::size_t> joins;
  std::size_t artifacts_scanned = 0;
};

RoleReport role_separation_audit(const RunData& run);

/// Planted violations reported by the audit; compared by (side, kind, value).
bool matches_planted(const RoleReport& report, const GroundTruth& truth);

// ---- revocation window ----

struct SerialWindow {
  Serial serial;
  std::string vehicle_id;
  std::int64_t order_us = 0;
  std::optional<std::int64_t> last_accept_us;
  double window_s = 0;
};

struct VehicleWindow {
  std::string vehicle_id;
  std::string order_id;
  std::int64_t order_us = 0;
  std::optional<std::int64_t> last_accept_us;
  double window_s = 0;
  /// Latest validity end over the vehicle's pseudonyms minus the order time.
  double residual_lifetime_s = 0;
};

struct RevocationReport {
  std::vector<SerialWindow> serials;
  std::vector<VehicleWindow> vehicles;
  double max_window_s = 0;
  double mean_window_s = 0;
  /// CRL broadcast latency + beacon interval + freshness tolerance, read
  /// from the run's own setup record.
  double bound_s = 0;
  /// Beacon interval + largest V2V latency.
  double residual_slack_s = 0;
};

RevocationReport revocation_window(const RunData& run);

// ---- JSON ----

Json to_json(const LinkageReport& r);
Json to_json(const SybilReport& r);
Json to_json(const RoleReport& r);
Json to_json(const RevocationReport& r);

Distribution summarize(std::vector<double> samples);
/// Linear interpolation between order statistics; `q` in [0, 1].
double quantile(const std::vector<double>& sorted, double q);

}  // namespace vpki
