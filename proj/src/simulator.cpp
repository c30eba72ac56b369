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


#include "vpki/simulator.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <queue>
#include <set>

#include "vpki/ltca.hpp"
#include "vpki/pca.hpp"
#include "vpki/resolution.hpp"
#include "vpki/services.hpp"
#include "vpki/shuffle_proxy.hpp"
#include "vpki/vehicle.hpp"

namespace fs = std::filesystem;

namespace vpki {

namespace {

using Micros = std::int64_t;
constexpr Micros kSecond = 1'000'000;

Timestamp sec(Micros t) { return t >= 0 ? t / kSecond : -((-t + kSecond - 1) / kSecond); }
Millis msec(Micros t) { return t >= 0 ? t / 1000 : -((-t + 999) / 1000); }
Micros micros(double seconds) { return static_cast<Micros>(std::llround(seconds * 1e6)); }

class Mobility {
 public:
  Mobility(HashDrbg rng, double area, Range speed, Micros t0)
      : rng_(std::move(rng)), area_(area), speed_(speed) {
    x1_ = rng_.uniform(0, area_);
    y1_ = rng_.uniform(0, area_);
    t1_ = t0;
    next();
  }

  Position at(Micros t) {
    while (t >= t1_) next();
    if (t <= t0_) return {x0_, y0_};
    double f = static_cast<double>(t - t0_) / static_cast<double>(t1_ - t0_);
    return {x0_ + f * (x1_ - x0_), y0_ + f * (y1_ - y0_)};
  }

 private:
  void next() {
    x0_ = x1_;
    y0_ = y1_;
    t0_ = t1_;
    x1_ = rng_.uniform(0, area_);
    y1_ = rng_.uniform(0, area_);
    double v = rng_.uniform(speed_.lo, speed_.hi);
    double d = std::hypot(x1_ - x0_, y1_ - y0_);
    t1_ = t0_ + std::max<Micros>(1, micros(d / v));
  }

  HashDrbg rng_;
  double area_;
  Range speed_;
  double x0_ = 0, y0_ = 0, x1_ = 0, y1_ = 0;
  Micros t0_ = 0, t1_ = 0;
};

struct VehicleCtx {
  std::unique_ptr<Vehicle> vehicle;
  std::string ltca_id;
  std::unique_ptr<Mobility> mobility;
  std::unique_ptr<HashDrbg> decisions;
  Micros phase = 0;
  bool verifier = false;
  bool attacker = false;
  std::uint32_t next_round = 0;
  std::uint64_t last_period = 0;
  Timestamp chain_end = 0;
};

struct SessionCtx {
  std::size_t vehicle = 0;
  std::unique_ptr<RefillSession> session;
  std::uint32_t round = 0;
  Micros sent = 0;
  bool attack = false;
};

std::string serial_list_hex(const std::vector<Serial>& v, Json& out) {
  out = Json::array();
  for (const auto& s : v) out.push_back(s.hex());
  return {};
}

class Simulation {
 public:
  explicit Simulation(const ScenarioSpec& spec) : spec_(spec), root_(spec.seed, "scenario") {}

  SimResult run();

 private:
  struct Event {
    Micros t;
    std::uint64_t seq;
    std::function<void()> fn;
    bool operator>(const Event& o) const { return std::tie(t, seq) > std::tie(o.t, o.seq); }
  };

  void at(Micros t, std::function<void()> fn) { queue_.push({t, seq_++, std::move(fn)}); }
  HashDrbg stream(const std::string& label) const { return root_.fork(label); }
  Micros v2a_latency() { return draw_ms(spec_.channel.v2a_latency_ms); }
  Micros draw_ms(const Range& r) { return static_cast<Micros>(std::llround(channel_rng_->uniform(r.lo, r.hi) * 1000)); }

  void log(std::string_view type, std::string_view view, Json fields = Json::object()) {
    result_.log.append(now_, type, view, std::move(fields));
  }
  void log_frame(std::string_view dir, const std::string& peer, ByteView frame);

  void setup();
  void register_vehicles();
  void acquire(std::size_t vi);
  void schedule_next_refill(std::size_t vi);
  void start_session(std::size_t vi, RefillPlan plan, bool attack);
  void deliver_token_request(std::uint64_t sid, Bytes frame);
  void deliver_token_response(std::uint64_t sid, Bytes frame);
  void deliver_pseudonym_request(std::uint64_t sid, Bytes frame);
  Bytes pca_handle(std::size_t pi, std::uint64_t sid, ByteView frame);
  void deliver_pseudonym_response(std::uint64_t sid, Bytes frame);
  void forward_batch(std::size_t pi, ForwardedBatch batch);
  void refill_failed(std::uint64_t sid, std::string_view stage, const Error& e);
  void log_ltca_audit(std::size_t li);
  void log_pca_audit(std::size_t pi);
  void beacon(std::size_t vi, Micros t);
  void revoke(const Revocation& r);
  void finish();

  std::size_t pca_index(const std::string& id) const;
  std::size_t ltca_index(const std::string& id) const;
  Json crl_json(const Crl& crl) const;

  const ScenarioSpec& spec_;
  HashDrbg root_;
  SimResult result_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  Micros now_ = 0;
  Micros t_begin_ = 0;
  Micros t_start_ = 0;
  Micros t_end_ = 0;
  std::unique_ptr<HashDrbg> channel_rng_;

  LifetimePolicy policy_;
  std::vector<std::unique_ptr<Ltca>> ltcas_;
  std::vector<std::unique_ptr<LtcaService>> ltca_services_;
  std::vector<std::size_t> ltca_audit_seen_;
  std::vector<std::unique_ptr<Pca>> pcas_;
  std::vector<std::unique_ptr<PcaService>> pca_services_;
  std::vector<std::size_t> pca_audit_seen_;
  std::vector<std::unique_ptr<ShuffleProxy>> proxies_;
  std::unique_ptr<ResolutionAuthority> ra_;
  std::vector<VehicleCtx> vehicles_;
  std::map<std::uint64_t, SessionCtx> sessions_;
  std::uint64_t next_session_ = 1;

  // fault-injection context for the audit hooks
  std::string hook_target_pca_;
  std::string hook_vehicle_;
  std::uint32_t ltca_faults_left_ = 0;
  std::uint32_t pca_faults_left_ = 0;

  std::uint32_t keys_ = 0;
  Millis tolerance_ms_ = 0;
  std::map<std::string, std::uint64_t> counters_;
  std::set<Serial> seen_pseudonyms_;
};

std::size_t Simulation::pca_index(const std::string& id) const {
  for (std::size_t i = 0; i < pcas_.size(); ++i) {
    if (pcas_[i]->id() == id) return i;
  }
  throw Error(ErrorCode::unknown_target, id);
}

std::size_t Simulation::ltca_index(const std::string& id) const {
  for (std::size_t i = 0; i < ltcas_.size(); ++i) {
    if (ltcas_[i]->id() == id) return i;
  }
  throw Error(ErrorCode::unknown_target, id);
}

Json Simulation::crl_json(const Crl& crl) const {
  Json serials;
  serial_list_hex(crl.revoked_serials, serials);
  return {{"issuer", crl.issuer_id}, {"sequence", crl.sequence_number}, {"serials", serials}};
}

void Simulation::log_frame(std::string_view dir, const std::string& peer, ByteView frame) {
  Json j = {{"dir", dir}, {"peer", peer}, {"size", frame.size()}};
  if (spec_.eavesdropper) j["frame"] = to_hex(frame);
  log("frame", "wire", std::move(j));
}

void Simulation::setup() {
  keys_ = spec_.keys_per_refill_effective();
  tolerance_ms_ = static_cast<Millis>(std::llround(spec_.tolerance_s * 1000));
  t_start_ = spec_.start_time * kSecond;
  t_end_ = t_start_ + micros(spec_.duration_s);
  Micros warmup = 3 * kSecond;
  if (spec_.acquisition == AcquisitionMode::proxy) warmup += micros(spec_.proxy_timeout_s);
  t_begin_ = t_start_ - warmup;
  if (sec(t_begin_) < spec_.epoch_origin) {
    throw Error(ErrorCode::spec_invalid, "start_time must leave room for initial acquisition after epoch_origin");
  }
  now_ = t_begin_;
  channel_rng_ = std::make_unique<HashDrbg>(stream("channel"));

  auto pki_rng = stream("pki");
  const Timestamp not_before = spec_.epoch_origin - 86400;
  const Timestamp not_after = sec(t_end_) + 10 * 365 * 86400;
  result_.deployment = Deployment::build(spec_.topology, spec_.policy_template(), not_before, not_after, pki_rng);
  const auto& dep = result_.deployment;
  policy_ = dep.policy;

  for (const auto& id : dep.ltca_ids) {
    LtcaConfig cfg;
    cfg.period_ledger = spec_.guards;
    cfg.policy = policy_;
    auto ltca = std::make_unique<Ltca>(dep.certificate(id), dep.key(id), cfg, dep.trust_store,
                                       std::make_unique<HashDrbg>(stream("ltca/" + id)));
    ltca->set_audit_hook([this](LtcaAuditEntry& e) {
      if (e.kind == "token" && ltca_faults_left_ > 0 && !hook_target_pca_.empty()) {
        --ltca_faults_left_;
        e.note = hook_target_pca_;
        PlantedViolation p{"ltca", "pca-id", hook_target_pca_};
        if (std::find(result_.truth.planted.begin(), result_.truth.planted.end(), p) == result_.truth.planted.end()) {
          result_.truth.planted.push_back(p);
        }
      }
    });
    ltca_services_.push_back(std::make_unique<LtcaService>(*ltca, std::make_unique<HashDrbg>(stream("ltca-svc/" + id))));
    ltcas_.push_back(std::move(ltca));
    ltca_audit_seen_.push_back(0);
  }
  for (const auto& id : dep.pca_ids) {
    PcaConfig cfg;
    cfg.policy = policy_;
    cfg.mode = spec_.lifetime_mode;
    cfg.enforce_binding = spec_.guards;
    auto pca = std::make_unique<Pca>(dep.certificate(id), dep.key(id), cfg, dep.trust_store,
                                     std::make_unique<HashDrbg>(stream("pca/" + id)));
    pca->set_audit_hook([this](PcaAuditEntry& e) {
      if (e.kind == "issue" && pca_faults_left_ > 0 && !hook_vehicle_.empty()) {
        --pca_faults_left_;
        e.note = hook_vehicle_;
        PlantedViolation p{"pca", "vehicle-id", hook_vehicle_};
        if (std::find(result_.truth.planted.begin(), result_.truth.planted.end(), p) == result_.truth.planted.end()) {
          result_.truth.planted.push_back(p);
        }
      }
    });
    pca_services_.push_back(std::make_unique<PcaService>(*pca, std::make_unique<HashDrbg>(stream("pca-svc/" + id))));
    if (spec_.acquisition == AcquisitionMode::proxy) {
      proxies_.push_back(std::make_unique<ShuffleProxy>(spec_.proxy_batch_min, micros(spec_.proxy_timeout_s),
                                                        std::make_unique<HashDrbg>(stream("proxy/" + id))));
    }
    pcas_.push_back(std::move(pca));
    pca_audit_seen_.push_back(0);
  }
  ltca_faults_left_ = spec_.faults.ltca_logs_pca_id;
  pca_faults_left_ = spec_.faults.pca_logs_vehicle_id;

  ra_ = std::make_unique<ResolutionAuthority>(dep.certificate(dep.ra_id), dep.key(dep.ra_id), dep.trust_store);
  auto clock = [this] { return sec(now_); };
  for (auto& p : pcas_) ra_->add_pca(p->id(), std::make_shared<LocalPcaLink>(*p, clock));
  for (auto& l : ltcas_) ra_->add_ltca(l->id(), std::make_shared<LocalLtcaLink>(*l, clock));

  if (spec_.curious_ltca) result_.log.add_tap("ltca", {"ltca:"});
  if (spec_.curious_pca) result_.log.add_tap("pca", {"pca:"});
  if (spec_.eavesdropper) result_.log.add_tap("eavesdropper", {"air", "wire"});

  auto& truth = result_.truth;
  truth.scenario = spec_.name;
  truth.seed = spec_.seed;
  truth.ltca_ids = dep.ltca_ids;
  truth.pca_ids = dep.pca_ids;
  if (spec_.sybil_attacker) truth.attacker = spec_.sybil_attacker->vehicle_id;

  log("setup", "public",
      {{"scenario", spec_.name},
       {"seed", spec_.seed},
       {"vehicles", spec_.vehicles},
       {"beacon_rate_hz", spec_.beacon_rate_hz},
       {"tolerance_ms", tolerance_ms_},
       {"v2v_latency_ms", {spec_.channel.v2v_latency_ms.lo, spec_.channel.v2v_latency_ms.hi}},
       {"crl_dissemination", spec_.crl.dissemination},
       {"crl_latency_s", spec_.crl.broadcast_latency_s},
       {"slot_duration_s", policy_.slot_duration},
       {"period_length_s", policy_.period_length},
       {"epoch_origin", policy_.epoch_origin},
       {"lifetime_mode", std::string(to_string(spec_.lifetime_mode))},
       {"start_us", t_start_},
       {"end_us", t_end_},
       {"ltcas", dep.ltca_ids},
       {"pcas", dep.pca_ids}});
}

void Simulation::register_vehicles() {
  const auto& dep = result_.deployment;
  std::uint32_t verifiers = 0;
  const Micros interval = micros(1.0 / spec_.beacon_rate_hz);
  for (std::uint32_t i = 0; i < spec_.vehicles; ++i) {
    auto id = spec_.vehicle_id(i);
    VehicleCtx ctx;
    auto vrng = std::make_unique<HashDrbg>(stream("vehicle/" + id));
    auto ltk = generate_keypair(*vrng);
    ctx.vehicle = std::make_unique<Vehicle>(id, ltk, dep.trust_store, policy_, std::move(vrng), tolerance_ms_);
    ctx.ltca_id = dep.ltca_ids[i % dep.ltca_ids.size()];
    ctx.mobility = std::make_unique<Mobility>(stream("mobility/" + id), spec_.area_m, spec_.speed_mps, t_begin_);
    ctx.decisions = std::make_unique<HashDrbg>(stream("decisions/" + id));
    ctx.phase = static_cast<Micros>(ctx.decisions->uniform_below(static_cast<std::uint64_t>(interval)));
    ctx.attacker = spec_.sybil_attacker && spec_.sybil_attacker->vehicle_id == id;
    ctx.verifier = !ctx.attacker && (spec_.verifiers < 0 || verifiers < static_cast<std::uint32_t>(spec_.verifiers));
    if (ctx.verifier) ++verifiers;

    auto& ltca = *ltcas_[ltca_index(ctx.ltca_id)];
    auto ltc = ltca.register_vehicle(id, ltk.public_key, sec(now_));
    ctx.vehicle->set_ltc(ltc);
    result_.truth.vehicles.push_back(id);
    result_.truth.ltc_serials[id] = ltc.serial;
    result_.truth.vehicle_ltca[id] = ctx.ltca_id;
    log_ltca_audit(ltca_index(ctx.ltca_id));

    const auto start_period = policy_.period_of(spec_.start_time);
    ctx.last_period = start_period - 1;
    if (spec_.lifetime_mode == LifetimeMode::flexible) {
      auto offset = static_cast<Timestamp>(std::floor(ctx.decisions->uniform(0, spec_.stagger_s)));
      auto floor_start = policy_.period(policy_.period_of(sec(t_begin_))).start;
      ctx.chain_end = std::max(spec_.start_time - offset, floor_start);
    }
    vehicles_.push_back(std::move(ctx));
  }
}

void Simulation::acquire(std::size_t vi) {
  auto& ctx = vehicles_[vi];
  RefillPlan plan;
  plan.key_count = keys_;
  if (spec_.lifetime_mode == LifetimeMode::grid) {
    plan.period_tag = ++ctx.last_period;
    ctx.chain_end = policy_.period(plan.period_tag).start + static_cast<Timestamp>(keys_) * policy_.slot_duration;
  } else {
    plan.requested_start = ctx.chain_end;
    plan.period_tag = policy_.period_of(ctx.chain_end);
    ctx.last_period = plan.period_tag;
    ctx.chain_end += static_cast<Timestamp>(keys_) * policy_.slot_duration;
  }
  if (ctx.attacker) {
    auto n = spec_.sybil_attacker->pcas == 0 ? pcas_.size() : spec_.sybil_attacker->pcas;
    for (std::size_t p = 0; p < n; ++p) {
      auto lane_plan = plan;
      lane_plan.pca_id = pcas_[p]->id();
      lane_plan.lane = pcas_[p]->id();
      start_session(vi, lane_plan, true);
    }
  } else {
    plan.pca_id = pcas_[ctx.decisions->uniform_below(pcas_.size())]->id();
    start_session(vi, plan, false);
  }
}

void Simulation::schedule_next_refill(std::size_t vi) {
  auto& ctx = vehicles_[vi];
  auto lead = micros(ctx.decisions->uniform(spec_.refill_lead_s.lo, spec_.refill_lead_s.hi));
  auto due = std::max(now_, ctx.chain_end * kSecond - lead);
  if (due >= t_end_) return;
  at(due, [this, vi] {
    acquire(vi);
    schedule_next_refill(vi);
  });
}

void Simulation::start_session(std::size_t vi, RefillPlan plan, bool attack) {
  auto& ctx = vehicles_[vi];
  SessionCtx s;
  s.vehicle = vi;
  s.round = ctx.next_round;
  s.sent = now_;
  s.attack = attack;
  auto pca_id = plan.pca_id;
  auto tag = plan.period_tag;
  try {
    s.session = ctx.vehicle->begin_refill(std::move(plan), sec(now_));
  } catch (const Error& e) {
    log("refill-failed", "vehicle:" + ctx.vehicle->id(),
        {{"vehicle", ctx.vehicle->id()}, {"stage", "begin"}, {"error", to_string(e.code())}});
    return;
  }
  if (!attack || pca_id == pcas_.front()->id()) ++ctx.next_round;
  if (attack) {
    log("attack", "adversary",
        {{"action", "token-request"}, {"vehicle", ctx.vehicle->id()}, {"pca", pca_id}, {"period_tag", tag}});
  }
  auto sid = next_session_++;
  Bytes frame = s.session->token_request();
  sessions_.emplace(sid, std::move(s));
  log_frame("up", vehicles_[vi].ltca_id, frame);
  at(now_ + v2a_latency(), [this, sid, frame = std::move(frame)]() mutable {
    deliver_token_request(sid, std::move(frame));
  });
}

void Simulation::deliver_token_request(std::uint64_t sid, Bytes frame) {
  auto& s = sessions_.at(sid);
  auto& ctx = vehicles_[s.vehicle];
  auto li = ltca_index(ctx.ltca_id);
  hook_target_pca_ = s.session->plan().pca_id;
  HandleInfo info;
  auto reply = ltca_services_[li]->handle(frame, sec(now_), &info);
  hook_target_pca_.clear();
  log_ltca_audit(li);
  if (info.status != ErrorCode::ok) {
    log("request-rejected", "ltca:" + ltcas_[li]->id(),
        {{"ltca", ltcas_[li]->id()}, {"error", to_string(info.status)}});
  }
  log_frame("down", ctx.ltca_id, reply);
  at(now_ + v2a_latency(), [this, sid, reply = std::move(reply)]() mutable {
    deliver_token_response(sid, std::move(reply));
  });
}

void Simulation::refill_failed(std::uint64_t sid, std::string_view stage, const Error& e) {
  auto& s = sessions_.at(sid);
  const auto& id = vehicles_[s.vehicle].vehicle->id();
  ++counters_["refills_failed"];
  log("refill-failed", "vehicle:" + id,
      {{"vehicle", id},
       {"stage", stage},
       {"error", to_string(e.code())},
       {"period_tag", s.session->plan().period_tag}});
  if (s.attack) {
    log("attack", "adversary",
        {{"action", "refill"}, {"vehicle", id}, {"pca", s.session->plan().pca_id}, {"outcome", to_string(e.code())}});
  }
  sessions_.erase(sid);
}

void Simulation::deliver_token_response(std::uint64_t sid, Bytes frame) {
  auto& s = sessions_.at(sid);
  Bytes request;
  try {
    request = s.session->on_token_response(frame, sec(now_));
  } catch (const Error& e) {
    refill_failed(sid, "token", e);
    return;
  }
  const auto& pca_id = s.session->plan().pca_id;
  if (spec_.acquisition == AcquisitionMode::proxy) {
    log_frame("up", "proxy:" + pca_id, request);
    at(now_ + v2a_latency(), [this, sid, request = std::move(request)]() mutable {
      auto pi = pca_index(sessions_.at(sid).session->plan().pca_id);
      auto& proxy = *proxies_[pi];
      bool was_empty = proxy.pending() == 0;
      auto batch = proxy.submit(std::move(request), std::to_string(sid), now_);
      if (batch) {
        forward_batch(pi, std::move(*batch));
      } else if (was_empty) {
        auto deadline = *proxy.deadline();
        at(deadline, [this, pi] {
          if (auto b = proxies_[pi]->poll(now_)) forward_batch(pi, std::move(*b));
        });
      }
    });
  } else {
    log_frame("up", pca_id, request);
    at(now_ + v2a_latency(), [this, sid, request = std::move(request)]() mutable {
      deliver_pseudonym_request(sid, std::move(request));
    });
  }
}

void Simulation::forward_batch(std::size_t pi, ForwardedBatch batch) {
  TruthBatch tb;
  tb.batch_id = batch.batch_id;
  tb.underflow = batch.underflow;
  for (auto p : batch.permutation) tb.permutation.push_back(p);
  std::vector<std::uint64_t> sids;
  for (const auto& o : batch.origins) {
    sids.push_back(std::stoull(o));
    tb.origins.push_back(vehicles_[sessions_.at(sids.back()).vehicle].vehicle->id());
  }
  result_.truth.batches.push_back(std::move(tb));
  ++counters_["proxy_batches"];
  if (batch.underflow) ++counters_["proxy_underflows"];
  log("proxy-batch", "proxy",
      {{"pca", pcas_[pi]->id()}, {"batch", batch.batch_id}, {"size", batch.frames.size()}, {"underflow", batch.underflow}});
  auto lat = v2a_latency();
  auto frames = std::make_shared<std::vector<Bytes>>(std::move(batch.frames));
  at(now_ + lat, [this, pi, sids, frames] {
    for (std::size_t i = 0; i < sids.size(); ++i) {
      auto reply = pca_handle(pi, sids[i], (*frames)[i]);
      auto sid = sids[i];
      at(now_ + v2a_latency(), [this, sid, reply = std::move(reply)]() mutable {
        log_frame("down", "proxy:" + sessions_.at(sid).session->plan().pca_id, reply);
        deliver_pseudonym_response(sid, std::move(reply));
      });
    }
  });
}

void Simulation::deliver_pseudonym_request(std::uint64_t sid, Bytes frame) {
  auto pi = pca_index(sessions_.at(sid).session->plan().pca_id);
  auto reply = pca_handle(pi, sid, frame);
  log_frame("down", pcas_[pi]->id(), reply);
  at(now_ + v2a_latency(), [this, sid, reply = std::move(reply)]() mutable {
    deliver_pseudonym_response(sid, std::move(reply));
  });
}

Bytes Simulation::pca_handle(std::size_t pi, std::uint64_t sid, ByteView frame) {
  hook_vehicle_ = vehicles_[sessions_.at(sid).vehicle].vehicle->id();
  HandleInfo info;
  auto reply = pca_services_[pi]->handle(frame, sec(now_), &info);
  hook_vehicle_.clear();
  log_pca_audit(pi);
  if (info.status != ErrorCode::ok) {
    log("request-rejected", "pca:" + pcas_[pi]->id(), {{"pca", pcas_[pi]->id()}, {"error", to_string(info.status)}});
  }
  return reply;
}

void Simulation::deliver_pseudonym_response(std::uint64_t sid, Bytes frame) {
  auto& s = sessions_.at(sid);
  auto& ctx = vehicles_[s.vehicle];
  std::vector<Pseudonym> ps;
  try {
    ps = s.session->on_pseudonym_response(frame, sec(now_));
  } catch (const Error& e) {
    refill_failed(sid, "pseudonyms", e);
    return;
  }
  const auto& plan = s.session->plan();
  TruthIssuance ti;
  ti.vehicle_id = ctx.vehicle->id();
  ti.lane = plan.lane;
  ti.round = s.round;
  ti.ltca_id = ctx.ltca_id;
  ti.pca_id = plan.pca_id;
  ti.period_tag = plan.period_tag;
  ti.token_serial = s.session->token()->serial;
  ti.sent_us = s.sent;
  ti.received_us = now_;
  for (const auto& p : ps) {
    ti.serials.push_back(p.serial);
    ti.validity.push_back(p.validity);
  }
  result_.truth.issuances.push_back(std::move(ti));
  ++counters_["refills_ok"];
  log("refill-complete", "vehicle:" + ctx.vehicle->id(),
      {{"vehicle", ctx.vehicle->id()}, {"period_tag", plan.period_tag}, {"count", ps.size()}});
  if (s.attack) {
    log("attack", "adversary",
        {{"action", "refill"}, {"vehicle", ctx.vehicle->id()}, {"pca", plan.pca_id}, {"outcome", "issued"}});
  }
  sessions_.erase(sid);
}

void Simulation::log_ltca_audit(std::size_t li) {
  auto& ltca = *ltcas_[li];
  auto entries = ltca.audit_since(ltca_audit_seen_[li]);
  ltca_audit_seen_[li] += entries.size();
  for (const auto& e : entries) {
    Json j = {{"ltca", ltca.id()}, {"kind", e.kind}, {"vehicle", e.vehicle_id}};
    if (e.period_tag) j["period_tag"] = *e.period_tag;
    if (e.token_serial) j["token"] = e.token_serial->hex();
    if (!e.order_id.empty()) j["order_id"] = e.order_id;
    if (!e.note.empty()) j["note"] = e.note;
    if (e.kind == "register") {
      if (auto ltc = ltca.ltc(e.vehicle_id)) j["ltc_serial"] = ltc->serial.hex();
    }
    log("ltca-" + e.kind, "ltca:" + ltca.id(), std::move(j));
  }
}

void Simulation::log_pca_audit(std::size_t pi) {
  auto& pca = *pcas_[pi];
  auto entries = pca.audit_since(pca_audit_seen_[pi]);
  pca_audit_seen_[pi] += entries.size();
  for (const auto& e : entries) {
    Json j = {{"pca", pca.id()}, {"kind", e.kind}};
    if (e.token_serial) j["token"] = e.token_serial->hex();
    if (e.pseudonym_serial) j["pseudonym"] = e.pseudonym_serial->hex();
    if (!e.order_id.empty()) j["order_id"] = e.order_id;
    if (!e.note.empty()) j["note"] = e.note;
    j["count"] = e.count;
    if (e.kind == "issue" && e.token_serial) {
      auto rec = pca.record(*e.token_serial);
      j["ltca"] = rec->ltca_id;
      j["period_tag"] = rec->period_tag;
      Json serials;
      serial_list_hex(rec->pseudonyms, serials);
      j["serials"] = serials;
      Json windows = Json::array();
      for (const auto& v : rec->validity) windows.push_back({v.start, v.end});
      j["validity"] = windows;
    }
    log("pca-" + e.kind, "pca:" + pca.id(), std::move(j));
  }
}

void Simulation::beacon(std::size_t vi, Micros t) {
  auto& ctx = vehicles_[vi];
  auto pos = ctx.mobility->at(t);
  std::vector<std::string> lanes;
  if (ctx.attacker) {
    for (const auto& [lane, pool] : ctx.vehicle->pools()) {
      if (ctx.vehicle->current_pseudonym(sec(t), lane)) lanes.push_back(lane);
    }
  }
  if (lanes.empty()) lanes.push_back("");
  for (const auto& lane : lanes) {
    auto payload = ctx.decisions->bytes(8);
    std::shared_ptr<const Beacon> b;
    try {
      b = std::make_shared<const Beacon>(ctx.vehicle->sign_beacon(payload, pos, msec(t), lane));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::no_valid_pseudonym) throw;
      ++counters_["no_valid_pseudonym"];
      log("no-valid-pseudonym", "vehicle:" + ctx.vehicle->id(), {{"vehicle", ctx.vehicle->id()}});
      continue;
    }
    ++counters_["beacons_sent"];
    if (seen_pseudonyms_.insert(b->pseudonym.serial).second) {
      log("pseudonym-seen", "air",
          {{"serial", b->pseudonym.serial.hex()}, {"pseudonym", to_hex(encode_file(b->pseudonym))}});
    }
    Json j = {{"serial", b->pseudonym.serial.hex()},
              {"pca", b->pseudonym.issuer_id},
              {"ts_ms", b->timestamp},
              {"x", std::round(pos.x * 100) / 100},
              {"y", std::round(pos.y * 100) / 100}};
    if (spec_.eavesdropper) j["beacon"] = to_hex(b->encode());
    log("beacon-sent", "air", std::move(j));

    for (std::size_t ri = 0; ri < vehicles_.size(); ++ri) {
      if (ri == vi || !vehicles_[ri].verifier) continue;
      auto rp = vehicles_[ri].mobility->at(t);
      if (std::hypot(rp.x - pos.x, rp.y - pos.y) > spec_.channel.radio_range_m) continue;
      if (spec_.channel.v2v_loss > 0 && channel_rng_->uniform_unit() < spec_.channel.v2v_loss) {
        ++counters_["beacons_lost"];
        continue;
      }
      at(t + draw_ms(spec_.channel.v2v_latency_ms), [this, ri, b] {
        auto& r = vehicles_[ri];
        auto verdict = r.vehicle->verifier().verify(*b, msec(now_));
        ++counters_[std::string("verdict_") + std::string(to_string(verdict))];
        log("beacon-verified", "vehicle:" + r.vehicle->id(),
            {{"receiver", r.vehicle->id()},
             {"serial", b->pseudonym.serial.hex()},
             {"ts_ms", b->timestamp},
             {"verdict", to_string(verdict)}});
      });
    }
    ctx.vehicle->verifier().prune(sec(t) - 60);
  }
  auto next = t + micros(1.0 / spec_.beacon_rate_hz);
  if (next < t_end_) at(next, [this, vi, next] { beacon(vi, next); });
}

void Simulation::revoke(const Revocation& r) {
  std::size_t vi = 0;
  while (vehicles_[vi].vehicle->id() != r.vehicle_id) ++vi;
  auto& ctx = vehicles_[vi];
  const PoolEntry* entry = nullptr;
  for (const auto& [lane, pool] : ctx.vehicle->pools()) {
    if (!pool.entries().empty() && pool.entries().front().pseudonym.validity.contains(sec(now_))) {
      entry = &pool.entries().front();
      break;
    }
  }
  if (!entry) {
    log("revocation-skipped", "ra", {{"reason", "no pseudonym in use"}});
    return;
  }
  auto pseudonym = entry->pseudonym;
  ResolutionOrder order;
  RevocationEffects fx;
  try {
    order = ra_->resolve(pseudonym, "scenario revocation", sec(now_));
    for (std::size_t i = 0; i < pcas_.size(); ++i) log_pca_audit(i);
    for (std::size_t i = 0; i < ltcas_.size(); ++i) log_ltca_audit(i);
    log("resolution", "ra",
        {{"order_id", order.order_id}, {"pseudonym", order.pseudonym_serial.hex()}, {"vehicle", order.vehicle_id},
         {"token", order.token_serial->hex()}, {"state", to_string(order.state)}});
    fx = ra_->trigger_revocation(order.order_id, sec(now_));
  } catch (const Error& e) {
    log("revocation-failed", "ra", {{"error", to_string(e.code())}, {"detail", e.what()}});
    return;
  }
  for (std::size_t i = 0; i < pcas_.size(); ++i) log_pca_audit(i);
  for (std::size_t i = 0; i < ltcas_.size(); ++i) log_ltca_audit(i);

  TruthRevocation tr;
  tr.vehicle_id = order.vehicle_id;
  tr.order_id = order.order_id;
  tr.order_us = now_;
  tr.pseudonym_serial = pseudonym.serial;
  auto rec = pcas_[pca_index(order.pca_id)]->record(*order.token_serial);
  for (const auto& s : rec->pseudonyms) {
    if (fx.pca_crl.contains(s)) tr.crl_serials.push_back(s);
  }
  Json revoked;
  serial_list_hex(tr.crl_serials, revoked);
  log("revocation-order", "ra", {{"order_id", order.order_id}, {"vehicle", order.vehicle_id}, {"serials", revoked}});
  result_.truth.revocations.push_back(std::move(tr));
  log("crl-published", "pca:" + fx.pca_crl.issuer_id, crl_json(fx.pca_crl));
  log("crl-published", "ltca:" + fx.ltca_crl.issuer_id, crl_json(fx.ltca_crl));
  result_.crls[fx.pca_crl.issuer_id] = fx.pca_crl;
  result_.crls[fx.ltca_crl.issuer_id] = fx.ltca_crl;

  if (!spec_.crl.dissemination) return;
  at(now_ + micros(spec_.crl.broadcast_latency_s), [this, fx] {
    for (auto& v : vehicles_) {
      if (!v.verifier) continue;
      for (const auto* crl : {&fx.pca_crl, &fx.ltca_crl}) {
        auto u = v.vehicle->verifier().process_crl(*crl, sec(now_));
        log("crl-received", "vehicle:" + v.vehicle->id(),
            {{"receiver", v.vehicle->id()},
             {"issuer", crl->issuer_id},
             {"sequence", crl->sequence_number},
             {"update", u == CrlCache::Update::updated ? "updated" : "stale"}});
      }
    }
  });
}

void Simulation::finish() {
  now_ = t_end_;
  for (auto& l : ltcas_) {
    result_.states["ltca-" + l->id()] = l->serialize_state();
    result_.crls[l->id()] = l->publish_crl(sec(now_));
  }
  for (auto& p : pcas_) {
    result_.states["pca-" + p->id()] = p->serialize_state();
    result_.crls[p->id()] = p->publish_crl(sec(now_));
  }
  result_.states["ra-" + ra_->id()] = ra_->serialize_state();

  std::map<std::string, std::uint64_t> stats;
  for (auto& v : vehicles_) {
    const auto& s = v.vehicle->verifier().stats();
    stats["verified_accept"] += s.accepted;
    stats["rejected_bad_chain"] += s.bad_chain;
    stats["rejected_bad_signature"] += s.bad_signature;
    stats["rejected_stale"] += s.stale;
    stats["rejected_revoked"] += s.revoked;
    stats["signed"] += v.vehicle->signed_count();
  }
  Json counters(counters_);
  result_.summary = {{"scenario", spec_.name},
                     {"seed", spec_.seed},
                     {"records", result_.log.records()},
                     {"digest", result_.log.digest().hex()},
                     {"counters", counters},
                     {"vehicle_stats", Json(stats)}};
}

SimResult Simulation::run() {
  spec_.validate();
  result_.spec = spec_;
  setup();
  register_vehicles();

  for (std::size_t vi = 0; vi < vehicles_.size(); ++vi) {
    auto jitter = static_cast<Micros>(vehicles_[vi].decisions->uniform_below(100'000));
    at(t_begin_ + jitter, [this, vi] {
      for (std::uint32_t p = 0; p < spec_.preload_periods; ++p) acquire(vi);
      schedule_next_refill(vi);
    });
    auto first = t_start_ + vehicles_[vi].phase;
    if (first < t_end_) at(first, [this, vi, first] { beacon(vi, first); });
  }
  for (const auto& r : spec_.revocations) {
    at(t_start_ + micros(r.at_s), [this, r] { revoke(r); });
  }

  while (!queue_.empty()) {
    auto ev = queue_.top();
    queue_.pop();
    if (ev.t >= t_end_ + 10 * kSecond) break;
    now_ = ev.t;
    ev.fn();
  }
  finish();
  return std::move(result_);
}

}  // namespace

SimResult run_simulation(const ScenarioSpec& spec) {
  Simulation sim(spec);
  return sim.run();
}

void SimResult::write(const std::string& dir) const {
  fs::create_directories(dir);
  log.write(dir);
  write_file((fs::path(dir) / "ground_truth.bin").string(), truth.encode());
  fs::create_directories(fs::path(dir) / "state");
  for (const auto& [name, bytes] : states) write_file((fs::path(dir) / "state" / (name + ".bin")).string(), bytes);
  fs::create_directories(fs::path(dir) / "crl");
  for (const auto& [issuer, crl] : crls) write_file((fs::path(dir) / "crl" / (issuer + ".crl")).string(), encode_file(crl));
  deployment.save((fs::path(dir) / "pki").string());
  auto s = spec.to_json().dump(2) + "\n";
  write_file((fs::path(dir) / "scenario.json").string(), as_bytes(s));
  auto m = summary.dump(2) + "\n";
  write_file((fs::path(dir) / "summary.json").string(), as_bytes(m));
}

}  // namespace vpki
