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


// Runs every acceptance criterion against the bundled fixtures and prints one
// PASS/FAIL line per criterion. Fixture runtimes include the simulation.
// Exit status is the number of failures.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "properties.hpp"
#include "vpki/analysis.hpp"
#include "vpki/live.hpp"
#include "vpki/simulator.hpp"

using namespace vpki;

namespace {

// Pinned thresholds.
constexpr double kIssuanceMedianMs = 1000;
constexpr double kIssuanceRuntimeS = 60;
constexpr double kSybilRuntimeS = 30;
constexpr double kLinkageRuntimeS = 120;
constexpr double kRolesRuntimeS = 10;
constexpr double kRevocationRuntimeS = 60;
constexpr double kCrlBoundS = 5.0 + 0.1 + 2.0;
constexpr double kBoundEpsilon = 1e-9;
constexpr std::size_t kShuffles = 1000;
constexpr std::size_t kPropertyCases = 1000;

const std::vector<std::string> kFixtures{
    "honest_baseline",     "sybil_guards_on",         "sybil_guards_off",
    "linkage_flexible",    "linkage_grid",            "revocation_crl",
    "revocation_preload_year", "roles_fault_injection", "proxy_baseline",
};

using Steady = std::chrono::steady_clock;

double seconds_since(Steady::time_point t0) {
  return std::chrono::duration<double>(Steady::now() - t0).count();
}

struct Fixture {
  SimResult result;
  double run_s = 0;
};

std::map<std::string, Fixture> cache;

const Fixture& fixture(const std::string& name) {
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  auto t0 = Steady::now();
  auto spec = ScenarioSpec::load(std::string(VPKI_SCENARIO_DIR) + "/" + name + ".json");
  Fixture f{run_simulation(spec), 0};
  f.run_s = seconds_since(t0);
  return cache.emplace(name, std::move(f)).first->second;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome issuance_latency() {
  auto t0 = Steady::now();
  auto r = bench_issuance({.count = 100, .mode = AcquisitionMode::token, .reps = 10});
  double took = seconds_since(t0);
  bool ok = r.total.p50 <= kIssuanceMedianMs && took < kIssuanceRuntimeS;
  return {ok, fmt("median %.1f ms for 100 pseudonyms (token leg %.1f ms, %d threads), bench %.1f s", r.total.p50,
                  r.token.p50, r.threads, took)};
}

Outcome sybil_resilience() {
  const auto& on = fixture("sybil_guards_on");
  auto t0 = Steady::now();
  auto on_rep = sybil_audit(on.result.truth);
  double on_s = on.run_s + seconds_since(t0);
  bool on_ok = on_rep.max_simultaneous.size() == on.result.spec.vehicles && on_rep.overall_max == 1;
  for (const auto& [v, n] : on_rep.max_simultaneous) on_ok = on_ok && n == 1;

  const auto& off = fixture("sybil_guards_off");
  t0 = Steady::now();
  auto off_rep = sybil_audit(off.result.truth);
  double off_s = off.run_s + seconds_since(t0);
  const auto& attacker = off.result.truth.attacker;
  bool off_ok = !attacker.empty() && off_rep.max_simultaneous.contains(attacker) &&
                off_rep.max_simultaneous.at(attacker) == 3;

  bool ok = on_ok && off_ok && on_s < kSybilRuntimeS && off_s < kSybilRuntimeS;
  return {ok, fmt("guards on: max %zu over %zu vehicles (%.1f s); guards off: %s max %zu (%.1f s)",
                  on_rep.overall_max, on_rep.max_simultaneous.size(), on_s, attacker.c_str(),
                  off_rep.max_simultaneous.contains(attacker) ? off_rep.max_simultaneous.at(attacker) : 0, off_s)};
}

Outcome timing_linkage() {
  const auto& flex_run = fixture("linkage_flexible");
  auto t0 = Steady::now();
  auto flex = linkability_report(run_data(flex_run.result), kShuffles);
  double flex_s = flex_run.run_s + seconds_since(t0);
  const auto& grid_run = fixture("linkage_grid");
  t0 = Steady::now();
  auto grid = linkability_report(run_data(grid_run.result), kShuffles);
  double grid_s = grid_run.run_s + seconds_since(t0);
  bool ok = flex.attack.precision > flex.baseline_precision.p95 &&
            grid.attack.precision >= grid.baseline_precision.p2_5 &&
            grid.attack.precision <= grid.baseline_precision.p97_5 && flex_s < kLinkageRuntimeS &&
            grid_s < kLinkageRuntimeS;
  return {ok, fmt("flexible precision %.3f vs p95 %.3f (%.1f s); grid precision %.3f in [%.3f, %.3f] (%.1f s)",
                  flex.attack.precision, flex.baseline_precision.p95, flex_s, grid.attack.precision,
                  grid.baseline_precision.p2_5, grid.baseline_precision.p97_5, grid_s)};
}

Outcome role_separation() {
  std::size_t honest_violations = 0;
  std::string dirty;
  double worst_s = 0;
  for (const auto& name : kFixtures) {
    if (name == "roles_fault_injection") continue;
    auto run = run_data(fixture(name).result);
    auto t0 = Steady::now();
    auto rep = role_separation_audit(run);
    worst_s = std::max(worst_s, seconds_since(t0));
    if (!rep.violations.empty()) dirty += (dirty.empty() ? "" : ",") + name;
    honest_violations += rep.violations.size();
  }
  const auto& fault = fixture("roles_fault_injection");
  auto t0 = Steady::now();
  auto rep = role_separation_audit(run_data(fault.result));
  worst_s = std::max(worst_s, fault.run_s + seconds_since(t0));
  bool exact = matches_planted(rep, fault.result.truth) && !fault.result.truth.planted.empty();
  bool ok = honest_violations == 0 && exact && worst_s < kRolesRuntimeS;
  return {ok, fmt("%zu violations on honest fixtures%s%s; fault fixture %zu found / %zu planted%s; slowest %.2f s",
                  honest_violations, dirty.empty() ? "" : " in ", dirty.c_str(), rep.violations.size(),
                  fault.result.truth.planted.size(), exact ? " (exact)" : " (mismatch)", worst_s)};
}

Outcome revocation() {
  const auto& crl_run = fixture("revocation_crl");
  auto t0 = Steady::now();
  auto crl = revocation_window(run_data(crl_run.result));
  double crl_s = crl_run.run_s + seconds_since(t0);
  const auto& pre_run = fixture("revocation_preload_year");
  t0 = Steady::now();
  auto pre = revocation_window(run_data(pre_run.result));
  double pre_s = pre_run.run_s + seconds_since(t0);

  bool crl_ok = !crl.vehicles.empty() && std::abs(crl.bound_s - kCrlBoundS) < kBoundEpsilon &&
                crl.max_window_s <= crl.bound_s;
  bool pre_ok = !pre.vehicles.empty();
  double gap = 0;
  for (const auto& v : pre.vehicles) {
    gap = std::max(gap, std::abs(v.window_s - v.residual_lifetime_s));
    pre_ok = pre_ok && v.last_accept_us.has_value();
  }
  pre_ok = pre_ok && gap <= pre.residual_slack_s;
  bool ok = crl_ok && pre_ok && crl_s < kRevocationRuntimeS && pre_s < kRevocationRuntimeS;
  const double window = pre.vehicles.empty() ? 0 : pre.vehicles[0].window_s;
  const double residual = pre.vehicles.empty() ? 0 : pre.vehicles[0].residual_lifetime_s;
  return {ok, fmt("CRL max window %.3f s <= %.1f s (%.1f s); preload window %.3f s vs residual %.3f s, "
                  "|diff| %.3f <= %.3f (%.1f s)",
                  crl.max_window_s, crl.bound_s, crl_s, window, residual, gap, pre.residual_slack_s, pre_s)};
}

Outcome determinism() {
  std::size_t same = 0;
  std::string differ;
  for (const auto& name : kFixtures) {
    auto first = fixture(name).result.digest();
    auto again = run_simulation(ScenarioSpec::load(std::string(VPKI_SCENARIO_DIR) + "/" + name + ".json"));
    if (again.digest() == first) {
      ++same;
    } else {
      differ += " " + name;
    }
  }
  return {same == kFixtures.size(), fmt("%zu/%zu fixtures reproduce their digest%s", same, kFixtures.size(),
                                        differ.empty() ? "" : (";" + differ).c_str())};
}

Outcome beacon_load() {
  auto r = run_beacon_load({.vehicles = 50, .rate_hz = 10, .duration_s = 60});
  return {r.missed_deadlines == 0,
          fmt("%llu/%llu ticks missed; needs %.0f verifies/s, achieved %.0f on %d threads; tick p50 %.1f ms",
              static_cast<unsigned long long>(r.missed_deadlines), static_cast<unsigned long long>(r.ticks_planned),
              r.required_verifies_per_s, r.achieved_verifies_per_s, r.threads, r.tick_ms.p50)};
}

Outcome property_suites() {
  struct Named {
    const char* name;
    testing::SuiteResult r;
  };
  std::vector<Named> suites{
      {"sign/verify", testing::sign_verify_suite(kPropertyCases, 8)},
      {"seal/open", testing::seal_open_suite(kPropertyCases, 8)},
      {"canonical encoding", testing::canonical_encoding_suite(kPropertyCases, 8)},
      {"chain monotonicity", testing::chain_monotonicity_suite(kPropertyCases, 8)},
  };
  bool ok = true;
  std::string detail;
  for (const auto& s : suites) {
    ok = ok && s.r.ok() && s.r.cases >= kPropertyCases;
    detail += fmt("%s%s %zu/%zu", detail.empty() ? "" : "; ", s.name, s.r.cases - s.r.failures, s.r.cases);
    if (!s.r.ok()) detail += " (" + s.r.first_failure + ")";
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"issuance latency", issuance_latency}, {"sybil resilience", sybil_resilience},
      {"timing linkage", timing_linkage},     {"role separation", role_separation},
      {"revocation window", revocation},      {"determinism", determinism},
      {"beacon load", beacon_load},           {"property suites", property_suites},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
