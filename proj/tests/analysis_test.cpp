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

#include "vpki/analysis.hpp"

using namespace vpki;

namespace {

RequestObservation obs(std::int64_t arrival_s, Timestamp start, Timestamp end) {
  return {"PCA-1", Serial{}, arrival_s * 1'000'000, {start, end}};
}

TruthIssuance issuance(const std::string& vid, std::vector<ValidityInterval> v) {
  TruthIssuance t;
  t.vehicle_id = vid;
  t.validity = v;
  t.serials.resize(v.size());
  return t;
}

}  // namespace

TEST_CASE("pair scoring by hand") {
  auto s = score_partition({{0, 1, 2}, {3}}, {"a", "a", "b", "b"});
  CHECK(s.predicted_pairs == 3);
  CHECK(s.true_pairs == 2);
  CHECK(s.correct_pairs == 1);
  CHECK(s.precision == doctest::Approx(1.0 / 3));
  CHECK(s.recall == doctest::Approx(0.5));

  auto none = score_partition({{0}, {1}}, {"a", "b"});
  CHECK(none.precision == 1);
  CHECK(none.recall == 1);
}

TEST_CASE("one vehicle refilling back to back is fully linked") {
  std::vector<RequestObservation> view{obs(10, 0, 600), obs(590, 600, 1200), obs(1190, 1200, 1800)};
  auto h = timing_link_attack(view);
  REQUIRE(h.groups.size() == 1);
  CHECK(h.groups[0].size() == 3);
  REQUIRE(h.edges.size() == 2);
  for (const auto& e : h.edges) CHECK(e.confidence == 1);
  auto s = score_partition(h.groups, {"V1", "V1", "V1"});
  CHECK(s.precision == 1);
  CHECK(s.recall == 1);
}

TEST_CASE("equal gaps split confidence and go to the earliest arrival") {
  std::vector<RequestObservation> view{obs(1, 0, 600), obs(2, 0, 600), obs(500, 600, 1200)};
  auto h = timing_link_attack(view);
  REQUIRE(h.edges.size() == 1);
  CHECK(h.edges[0].from == 0);
  CHECK(h.edges[0].to == 2);
  CHECK(h.edges[0].confidence == doctest::Approx(0.5));
}

TEST_CASE("gaps beyond the tolerance are not linked") {
  std::vector<RequestObservation> view{obs(1, 0, 600), obs(500, 602, 1202)};
  CHECK(timing_link_attack(view).groups.size() == 2);
  CHECK(timing_link_attack(view, 2.0).groups.size() == 1);
}

TEST_CASE("sybil audit counts overlap per vehicle") {
  GroundTruth t;
  t.issuances.push_back(issuance("V1", {{0, 10}, {10, 20}}));
  t.issuances.push_back(issuance("V1", {{5, 15}}));
  t.issuances.push_back(issuance("V1", {{14, 30}}));
  t.issuances.push_back(issuance("V2", {{0, 10}, {10, 20}}));
  auto r = sybil_audit(t);
  CHECK(r.max_simultaneous.at("V1") == 3);  // t = 14
  CHECK(r.max_simultaneous.at("V2") == 1);
  CHECK(r.overall_max == 3);
  CHECK(r.worst_vehicle == "V1");
}

TEST_CASE("audits of an empty run") {
  RunData run;
  CHECK(sybil_audit(run.truth).overall_max == 0);
  CHECK(role_separation_audit(run).violations.empty());
  CHECK(revocation_window(run).vehicles.empty());
  CHECK(pca_observations(run.events).empty());
  CHECK(matches_planted(RoleReport{}, run.truth));
}

TEST_CASE("quantiles interpolate") {
  std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(quantile(v, 0) == 1);
  CHECK(quantile(v, 1) == 5);
  CHECK(quantile(v, 0.5) == 3);
  CHECK(quantile(v, 0.125) == doctest::Approx(1.5));
  auto d = summarize({4, 1, 3, 2});
  CHECK(d.samples == 4);
  CHECK(d.mean == doctest::Approx(2.5));
  CHECK(d.p50 == doctest::Approx(2.5));
}
