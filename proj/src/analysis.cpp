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


#include "vpki/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "vpki/random.hpp"
#include "vpki/simulator.hpp"

namespace fs = std::filesystem;

namespace vpki {

RunData load_run(const std::string& dir) {
  RunData run;
  fs::path root(dir);
  if (!fs::exists(root / "events.ndjson")) throw Error(ErrorCode::io_error, "no events.ndjson under " + dir);
  run.spec = ScenarioSpec::load((root / "scenario.json").string());
  run.events = EventLog::read((root / "events.ndjson").string());
  run.truth = GroundTruth::decode(read_file((root / "ground_truth.bin").string()));
  if (fs::exists(root / "state")) {
    for (const auto& entry : fs::directory_iterator(root / "state")) {
      if (entry.path().extension() != ".bin") continue;
      run.states[entry.path().stem().string()] = read_file(entry.path().string());
    }
  }
  return run;
}

RunData run_data(const SimResult& result) {
  RunData run;
  run.spec = result.spec;
  run.events = EventLog::parse(result.log.text());
  run.truth = result.truth;
  run.states = result.states;
  return run;
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0;
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Distribution summarize(std::vector<double> samples) {
  Distribution d;
  d.samples = samples.size();
  if (samples.empty()) return d;
  std::sort(samples.begin(), samples.end());
  d.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  d.p2_5 = quantile(samples, 0.025);
  d.p50 = quantile(samples, 0.5);
  d.p95 = quantile(samples, 0.95);
  d.p97_5 = quantile(samples, 0.975);
  return d;
}

// ---- timing linkage ----

std::vector<RequestObservation> pca_observations(const std::vector<Json>& events) {
  std::vector<RequestObservation> out;
  for (const auto& e : events) {
    if (e.value("type", "") != "pca-issue") continue;
    if (!e.value("view", "").starts_with("pca:")) continue;
    RequestObservation o;
    o.pca_id = e.at("pca").get<std::string>();
    o.token_serial = Serial::from_hex(e.at("token").get<std::string>());
    o.arrival_us = e.at("t_us").get<std::int64_t>();
    const auto& windows = e.at("validity");
    if (windows.empty()) continue;
    o.coverage.start = windows.front().at(0).get<Timestamp>();
    o.coverage.end = o.coverage.start;
    for (const auto& w : windows) {
      o.coverage.start = std::min(o.coverage.start, w.at(0).get<Timestamp>());
      o.coverage.end = std::max(o.coverage.end, w.at(1).get<Timestamp>());
    }
    out.push_back(std::move(o));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.arrival_us < b.arrival_us; });
  return out;
}

LinkageHypothesis timing_link_attack(const std::vector<RequestObservation>& view, double tolerance_s) {
  const std::size_t n = view.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return view[a].arrival_us < view[b].arrival_us; });

  LinkageHypothesis h;
  std::vector<bool> has_successor(n, false);
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (std::size_t bi = 0; bi < n; ++bi) {
    const auto b = order[bi];
    double best = tolerance_s + 1;
    std::vector<std::size_t> tied;
    for (std::size_t ai = 0; ai < bi; ++ai) {
      const auto a = order[ai];
      if (has_successor[a] || view[a].arrival_us == view[b].arrival_us) continue;
      double gap = std::abs(static_cast<double>(view[b].coverage.start - view[a].coverage.end));
      if (gap > tolerance_s) continue;
      if (gap < best) {
        best = gap;
        tied.assign(1, a);
      } else if (gap == best) {
        tied.push_back(a);
      }
    }
    if (tied.empty()) continue;
    const auto a = tied.front();
    has_successor[a] = true;
    parent[find(b)] = find(a);
    h.edges.push_back({a, b, 1.0 / static_cast<double>(tied.size())});
  }

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  for (auto& [root, members] : groups) h.groups.push_back(std::move(members));
  return h;
}

namespace {

std::uint64_t choose2(std::uint64_t k) { return k * (k - std::min<std::uint64_t>(k, 1)) / 2; }

PairScore score_with(const std::vector<std::vector<std::size_t>>& groups, const std::vector<std::uint32_t>& labels,
                     std::uint64_t true_pairs, std::vector<std::uint32_t>& scratch) {
  PairScore s;
  s.true_pairs = true_pairs;
  for (const auto& g : groups) {
    s.predicted_pairs += choose2(g.size());
    for (auto i : g) ++scratch[labels[i]];
    for (auto i : g) {
      s.correct_pairs += choose2(scratch[labels[i]]);
      scratch[labels[i]] = 0;
    }
  }
  if (s.predicted_pairs > 0) s.precision = static_cast<double>(s.correct_pairs) / static_cast<double>(s.predicted_pairs);
  if (s.true_pairs > 0) s.recall = static_cast<double>(s.correct_pairs) / static_cast<double>(s.true_pairs);
  return s;
}

std::uint64_t label_pairs(const std::vector<std::uint32_t>& labels, std::size_t distinct) {
  std::vector<std::uint64_t> count(distinct, 0);
  for (auto l : labels) ++count[l];
  std::uint64_t total = 0;
  for (auto c : count) total += choose2(c);
  return total;
}

}  // namespace

PairScore score_partition(const std::vector<std::vector<std::size_t>>& groups, const std::vector<std::string>& labels) {
  std::map<std::string, std::uint32_t> ids;
  std::vector<std::uint32_t> encoded;
  for (const auto& l : labels) encoded.push_back(ids.emplace(l, static_cast<std::uint32_t>(ids.size())).first->second);
  std::vector<std::uint32_t> scratch(ids.size(), 0);
  return score_with(groups, encoded, label_pairs(encoded, ids.size()), scratch);
}

LinkageReport linkability_report(const RunData& run, std::size_t shuffles, double tolerance_s) {
  LinkageReport report;
  const auto view = pca_observations(run.events);
  const auto h = timing_link_attack(view, tolerance_s);
  report.requests = view.size();
  report.groups = h.groups.size();

  // Scoring only from here on.
  std::map<Serial, const TruthIssuance*> by_token;
  for (const auto& ti : run.truth.issuances) by_token[ti.token_serial] = &ti;
  std::map<std::string, std::uint32_t> vehicle_ids;
  std::vector<std::uint32_t> labels;
  std::map<std::uint32_t, std::vector<std::size_t>> rounds;
  for (std::size_t i = 0; i < view.size(); ++i) {
    auto it = by_token.find(view[i].token_serial);
    std::string who = it == by_token.end() ? "?" + std::to_string(i) : it->second->vehicle_id;
    std::uint32_t round = it == by_token.end() ? 0 : it->second->round;
    labels.push_back(vehicle_ids.emplace(who, static_cast<std::uint32_t>(vehicle_ids.size())).first->second);
    rounds[round].push_back(i);
  }
  std::vector<std::uint32_t> scratch(vehicle_ids.size(), 0);
  const auto true_pairs = label_pairs(labels, vehicle_ids.size());
  report.attack = score_with(h.groups, labels, true_pairs, scratch);

  HashDrbg rng(run.truth.seed, "linkage-baseline");
  std::vector<double> precision, recall;
  auto shuffled = labels;
  for (std::size_t s = 0; s < shuffles; ++s) {
    for (const auto& [round, members] : rounds) {
      for (std::size_t i = members.size(); i > 1; --i) {
        auto j = rng.uniform_below(i);
        std::swap(shuffled[members[i - 1]], shuffled[members[j]]);
      }
    }
    auto score = score_with(h.groups, shuffled, true_pairs, scratch);
    precision.push_back(score.precision);
    recall.push_back(score.recall);
  }
  report.baseline_precision = summarize(precision);
  report.baseline_recall = summarize(recall);
  report.precision_above_p95 = report.attack.precision > report.baseline_precision.p95;
  report.recall_above_p95 = report.attack.recall > report.baseline_recall.p95;
  report.precision_within_band = report.attack.precision >= report.baseline_precision.p2_5 &&
                                 report.attack.precision <= report.baseline_precision.p97_5;
  return report;
}

// ---- Sybil audit ----

SybilReport sybil_audit(const GroundTruth& truth) {
  SybilReport r;
  std::map<std::string, std::vector<ValidityInterval>> held;
  std::map<std::pair<std::string, std::uint64_t>, std::set<Serial>> tokens;
  for (const auto& ti : truth.issuances) {
    auto& v = held[ti.vehicle_id];
    v.insert(v.end(), ti.validity.begin(), ti.validity.end());
    tokens[{ti.vehicle_id, ti.period_tag}].insert(ti.token_serial);
  }
  for (const auto& [vehicle, intervals] : held) {
    std::size_t best = 0;
    for (const auto& probe : intervals) {
      std::size_t live = 0;
      for (const auto& other : intervals) live += other.contains(probe.start) ? 1 : 0;
      best = std::max(best, live);
    }
    r.max_simultaneous[vehicle] = best;
    if (best > r.overall_max) {
      r.overall_max = best;
      r.worst_vehicle = vehicle;
    }
  }
  for (const auto& [key, set] : tokens) {
    if (set.size() > 1) r.multi_token_periods.push_back(key);
  }
  return r;
}

// ---- role separation ----

namespace {

struct Needles {
  std::unordered_map<std::string, std::string> ids;        // id -> kind
  std::map<std::array<std::uint8_t, 16>, std::string> serials;  // raw -> kind
  std::unordered_map<std::string, std::string> hex_serials;  // hex -> kind
};

/// Everything an artifact mentions: string ids and serials, as found by a
/// binary or JSON scan.
struct Mentions {
  std::set<std::string> ids;
  std::set<Serial> serials;
};

Mentions scan_binary(ByteView data, const Needles& n) {
  Mentions m;
  for (std::size_t i = 0; i + 4 <= data.size(); ++i) {
    std::uint32_t len = (std::uint32_t{data[i]} << 24) | (std::uint32_t{data[i + 1]} << 16) |
                        (std::uint32_t{data[i + 2]} << 8) | data[i + 3];
    if (len == 0 || len > 64 || i + 4 + len > data.size()) continue;
    std::string s(reinterpret_cast<const char*>(data.data() + i + 4), len);
    if (n.ids.contains(s)) m.ids.insert(s);
  }
  std::array<std::uint8_t, 16> window{};
  for (std::size_t i = 0; i + 16 <= data.size(); ++i) {
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(i), 16, window.begin());
    if (n.serials.contains(window)) m.serials.insert(Serial{window});
  }
  return m;
}

void scan_json(const Json& j, const Needles& n, Mentions& m) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (n.ids.contains(s)) m.ids.insert(s);
    if (n.hex_serials.contains(s)) m.serials.insert(Serial::from_hex(s));
  } else if (j.is_structured()) {
    for (const auto& child : j) scan_json(child, n, m);
  }
}

}  // namespace

RoleReport role_separation_audit(const RunData& run) {
  const auto& truth = run.truth;
  Needles needles;
  for (const auto& v : truth.vehicles) needles.ids[v] = "vehicle-id";
  for (const auto& p : truth.pca_ids) needles.ids[p] = "pca-id";
  for (const auto& [v, s] : truth.ltc_serials) {
    needles.serials[s.bytes] = "ltc-serial";
    needles.hex_serials[s.hex()] = "ltc-serial";
  }
  const auto owners = truth.serial_owner();
  for (const auto& [s, v] : owners) {
    needles.serials[s.bytes] = "pseudonym-serial";
    needles.hex_serials[s.hex()] = "pseudonym-serial";
  }

  std::vector<std::pair<std::string, std::pair<std::string, Mentions>>> artifacts;  // side, (name, mentions)
  for (const auto& [name, bytes] : run.states) {
    std::string side = name.starts_with("ltca-") ? "ltca" : name.starts_with("pca-") ? "pca" : "";
    if (side.empty()) continue;
    artifacts.push_back({side, {"state/" + name + ".bin", scan_binary(bytes, needles)}});
  }
  std::map<std::string, Mentions> views;
  for (const auto& e : run.events) {
    auto view = e.value("view", "");
    if (!view.starts_with("ltca:") && !view.starts_with("pca:")) continue;
    scan_json(e, needles, views[view]);
  }
  for (auto& [view, m] : views) {
    artifacts.push_back({view.starts_with("ltca:") ? "ltca" : "pca", {"events[" + view + "]", std::move(m)}});
  }

  const std::set<std::string> ltca_forbidden = {"pca-id", "pseudonym-serial"};
  const std::set<std::string> pca_forbidden = {"vehicle-id", "ltc-serial"};
  std::map<std::tuple<std::string, std::string, std::string>, std::string> found;
  RoleReport report;
  for (const auto& [side, named] : artifacts) {
    const auto& [name, m] = named;
    ++report.artifacts_scanned;
    const auto& forbidden = side == "ltca" ? ltca_forbidden : pca_forbidden;
    for (const auto& id : m.ids) {
      const auto& kind = needles.ids.at(id);
      if (forbidden.contains(kind)) found.emplace(std::make_tuple(side, kind, id), name);
    }
    for (const auto& s : m.serials) {
      const auto& kind = needles.serials.at(s.bytes);
      if (forbidden.contains(kind)) found.emplace(std::make_tuple(side, kind, s.hex()), name);
    }
    std::size_t joins = 0;
    for (const auto& s : m.serials) {
      auto o = owners.find(s);
      if (o == owners.end()) continue;
      auto ltc = truth.ltc_serials.find(o->second);
      bool identity = m.ids.contains(o->second) || (ltc != truth.ltc_serials.end() && m.serials.contains(ltc->second));
      if (identity) ++joins;
    }
    report.joins[name] = joins;
  }
  for (const auto& [key, artifact] : found) {
    report.violations.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), artifact});
  }
  return report;
}

bool matches_planted(const RoleReport& report, const GroundTruth& truth) {
  std::set<PlantedViolation> seen;
  for (const auto& v : report.violations) seen.insert({v.side, v.kind, v.value});
  std::set<PlantedViolation> planted(truth.planted.begin(), truth.planted.end());
  return seen == planted;
}

// ---- revocation window ----

RevocationReport revocation_window(const RunData& run) {
  RevocationReport r;
  const Json* setup = nullptr;
  for (const auto& e : run.events) {
    if (e.value("type", "") == "setup") {
      setup = &e;
      break;
    }
  }
  if (setup) {
    double interval = 1.0 / setup->at("beacon_rate_hz").get<double>();
    double tolerance = setup->at("tolerance_ms").get<double>() / 1000.0;
    double v2v_max = setup->at("v2v_latency_ms").at(1).get<double>() / 1000.0;
    r.bound_s = setup->at("crl_latency_s").get<double>() + interval + tolerance;
    r.residual_slack_s = interval + v2v_max;
  }
  if (run.truth.revocations.empty()) return r;

  std::unordered_map<std::string, std::int64_t> last_accept;  // serial hex -> t_us
  for (const auto& e : run.events) {
    if (e.value("type", "") != "beacon-verified" || e.value("verdict", "") != "accept") continue;
    last_accept[e.at("serial").get<std::string>()] = e.at("t_us").get<std::int64_t>();
  }
  auto window = [](std::int64_t order, std::optional<std::int64_t> last) {
    if (!last || *last <= order) return 0.0;
    return static_cast<double>(*last - order) / 1e6;
  };

  for (const auto& rev : run.truth.revocations) {
    for (const auto& s : rev.crl_serials) {
      SerialWindow w;
      w.serial = s;
      w.vehicle_id = rev.vehicle_id;
      w.order_us = rev.order_us;
      if (auto it = last_accept.find(s.hex()); it != last_accept.end()) w.last_accept_us = it->second;
      w.window_s = window(w.order_us, w.last_accept_us);
      r.serials.push_back(w);
    }
    VehicleWindow vw;
    vw.vehicle_id = rev.vehicle_id;
    vw.order_id = rev.order_id;
    vw.order_us = rev.order_us;
    Timestamp latest_end = 0;
    for (const auto& ti : run.truth.issuances) {
      if (ti.vehicle_id != rev.vehicle_id) continue;
      for (std::size_t i = 0; i < ti.serials.size(); ++i) {
        latest_end = std::max(latest_end, ti.validity[i].end);
        auto it = last_accept.find(ti.serials[i].hex());
        if (it != last_accept.end() && (!vw.last_accept_us || it->second > *vw.last_accept_us)) {
          vw.last_accept_us = it->second;
        }
      }
    }
    vw.window_s = window(vw.order_us, vw.last_accept_us);
    vw.residual_lifetime_s = std::max(0.0, static_cast<double>(latest_end) - static_cast<double>(vw.order_us) / 1e6);
    r.vehicles.push_back(vw);
  }
  double sum = 0;
  for (const auto& w : r.serials) {
    r.max_window_s = std::max(r.max_window_s, w.window_s);
    sum += w.window_s;
  }
  if (!r.serials.empty()) r.mean_window_s = sum / static_cast<double>(r.serials.size());
  return r;
}

// ---- JSON ----

namespace {

Json to_json(const Distribution& d) {
  return {{"samples", d.samples}, {"mean", d.mean}, {"p2_5", d.p2_5}, {"p50", d.p50}, {"p95", d.p95}, {"p97_5", d.p97_5}};
}

Json to_json(const PairScore& s) {
  return {{"precision", s.precision},
          {"recall", s.recall},
          {"predicted_pairs", s.predicted_pairs},
          {"true_pairs", s.true_pairs},
          {"correct_pairs", s.correct_pairs}};
}

}  // namespace

Json to_json(const LinkageReport& r) {
  return {{"requests", r.requests},
          {"groups", r.groups},
          {"attack", to_json(r.attack)},
          {"baseline_precision", to_json(r.baseline_precision)},
          {"baseline_recall", to_json(r.baseline_recall)},
          {"precision_above_p95", r.precision_above_p95},
          {"recall_above_p95", r.recall_above_p95},
          {"precision_within_band", r.precision_within_band}};
}

Json to_json(const SybilReport& r) {
  Json multi = Json::array();
  for (const auto& [v, tag] : r.multi_token_periods) multi.push_back({{"vehicle", v}, {"period_tag", tag}});
  return {{"max_simultaneous", r.max_simultaneous},
          {"overall_max", r.overall_max},
          {"worst_vehicle", r.worst_vehicle},
          {"multi_token_periods", multi}};
}

Json to_json(const RoleReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations) {
    v.push_back({{"side", x.side}, {"kind", x.kind}, {"value", x.value}, {"artifact", x.artifact}});
  }
  return {{"violations", v}, {"violation_count", r.violations.size()}, {"joins", r.joins},
          {"artifacts_scanned", r.artifacts_scanned}};
}

Json to_json(const RevocationReport& r) {
  auto opt = [](const std::optional<std::int64_t>& t) { return t ? Json(*t) : Json(nullptr); };
  Json serials = Json::array();
  for (const auto& w : r.serials) {
    serials.push_back({{"serial", w.serial.hex()},
                       {"vehicle", w.vehicle_id},
                       {"order_us", w.order_us},
                       {"last_accept_us", opt(w.last_accept_us)},
                       {"window_s", w.window_s}});
  }
  Json vehicles = Json::array();
  for (const auto& w : r.vehicles) {
    vehicles.push_back({{"vehicle", w.vehicle_id},
                        {"order_id", w.order_id},
                        {"order_us", w.order_us},
                        {"last_accept_us", opt(w.last_accept_us)},
                        {"window_s", w.window_s},
                        {"residual_lifetime_s", w.residual_lifetime_s}});
  }
  return {{"serials", serials},
          {"vehicles", vehicles},
          {"max_window_s", r.max_window_s},
          {"mean_window_s", r.mean_window_s},
          {"bound_s", r.bound_s},
          {"residual_slack_s", r.residual_slack_s}};
}

}  // namespace vpki
