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


#include "vpki/live.hpp"

#include <chrono>
#include <mutex>
#include <thread>

#include "vpki/deployment.hpp"
#include "vpki/kernels.hpp"
#include "vpki/ltca.hpp"
#include "vpki/net.hpp"
#include "vpki/pca.hpp"
#include "vpki/services.hpp"
#include "vpki/shuffle_proxy.hpp"
#include "vpki/vehicle.hpp"

namespace vpki {

namespace {

using Steady = std::chrono::steady_clock;

Timestamp wall_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

Millis wall_millis() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

double ms_since(Steady::time_point t0) {
  return std::chrono::duration<double, std::milli>(Steady::now() - t0).count();
}

/// One LTCA and one PCA with their services.
struct Authorities {
  Deployment dep;
  std::unique_ptr<Ltca> ltca;
  std::unique_ptr<Pca> pca;
  std::unique_ptr<LtcaService> ltca_service;
  std::unique_ptr<PcaService> pca_service;
  std::mutex ltca_mu;
  std::mutex pca_mu;

  Authorities(std::int64_t slot, std::int64_t period, bool parallel_signing) {
    SystemRandom rng;
    LifetimePolicy tmpl;
    tmpl.slot_duration = slot;
    tmpl.period_length = period;
    const auto now = wall_seconds();
    dep = Deployment::build(TrustTopology{}, tmpl, now - 86400, now + 10 * 365 * 86400LL, rng);
    const auto& lid = dep.ltca_ids.front();
    const auto& pid = dep.pca_ids.front();
    ltca = std::make_unique<Ltca>(dep.certificate(lid), dep.key(lid), LtcaConfig{.policy = dep.policy},
                                  dep.trust_store, std::make_unique<SystemRandom>());
    PcaConfig pc;
    pc.policy = dep.policy;
    pc.parallel_signing = parallel_signing;
    pca = std::make_unique<Pca>(dep.certificate(pid), dep.key(pid), pc, dep.trust_store,
                                std::make_unique<SystemRandom>());
    ltca_service = std::make_unique<LtcaService>(*ltca, std::make_unique<SystemRandom>());
    pca_service = std::make_unique<PcaService>(*pca, std::make_unique<SystemRandom>());
  }

  // The services own an rng each; the authorities themselves are locked
  // internally.
  Bytes ltca_handle(ByteView frame) {
    std::lock_guard lock(ltca_mu);
    return ltca_service->handle(frame, wall_seconds());
  }
  Bytes pca_handle(ByteView frame) {
    std::lock_guard lock(pca_mu);
    return pca_service->handle(frame, wall_seconds());
  }
};

class ChannelTransport final : public Transport {
 public:
  std::map<std::string, FrameChannel> routes;
  Bytes call(const std::string& authority_id, ByteView frame) override {
    auto it = routes.find(authority_id);
    if (it == routes.end()) throw Error(ErrorCode::service_unreachable, authority_id);
    return it->second(frame);
  }
};

std::unique_ptr<Vehicle> enroll(Authorities& a, const std::string& id, const FrameChannel& ltca) {
  SystemRandom rng;
  auto v = std::make_unique<Vehicle>(id, generate_keypair(rng), a.dep.trust_store, a.dep.policy,
                                     std::make_unique<SystemRandom>());
  auto call = v->registration_request(a.ltca->id());
  auto reply = open_response(ltca(call.frame), call.reply_key);
  ByteReader r(reply.value());
  v->set_ltc(LongTermCertificate::decode(r));
  return v;
}

}  // namespace

IssuanceBenchResult bench_issuance(const IssuanceBenchConfig& config) {
  IssuanceBenchResult result;
  result.config = config;
  result.threads = kernel_threads();
  // One-minute slots in a day-long period leave room for up to 1440 keys.
  if (config.count > 1440) throw Error(ErrorCode::invalid_request, "count above 1440");
  Authorities a(60, 86400, config.parallel_signing);

  TcpServer ltca_server([&](ByteView f) { return a.ltca_handle(f); });
  TcpServer pca_server([&](ByteView f) { return a.pca_handle(f); });
  ltca_server.start();
  pca_server.start();
  TcpClient ltca_client("127.0.0.1", ltca_server.port());
  TcpClient pca_client("127.0.0.1", pca_server.port());

  std::unique_ptr<TcpServer> proxy_server;
  std::unique_ptr<TcpClient> proxy_client;
  std::mutex proxy_mu;
  SystemRandom proxy_rng;
  if (config.mode == AcquisitionMode::proxy) {
    proxy_server = std::make_unique<TcpServer>([&](ByteView f) {
      ForwardedBatch batch;
      {
        std::lock_guard lock(proxy_mu);
        batch = shuffle_batch({Bytes(f.begin(), f.end())}, {"client"}, 1, proxy_rng, false);
      }
      return pca_client.call(batch.frames.front());
    });
    proxy_server->start();
    proxy_client = std::make_unique<TcpClient>("127.0.0.1", proxy_server->port());
  }

  ChannelTransport transport;
  transport.routes[a.ltca->id()] = ltca_client.channel();
  transport.routes[a.pca->id()] = proxy_client ? proxy_client->channel() : pca_client.channel();

  for (std::uint32_t rep = 0; rep < config.reps; ++rep) {
    char id[32];
    std::snprintf(id, sizeof id, "BENCH-%05u", rep);
    auto vehicle = enroll(a, id, ltca_client.channel());
    const auto now = wall_seconds();
    RefillPlan plan;
    plan.period_tag = a.dep.policy.period_of(now);
    plan.pca_id = a.pca->id();
    plan.key_count = config.count;

    auto t0 = Steady::now();
    auto session = vehicle->begin_refill(plan, now);
    auto token_reply = transport.call(session->ltca_id(), session->token_request());
    auto pca_request = session->on_token_response(token_reply, now);
    result.token_ms.push_back(ms_since(t0));
    if (config.count > 0) {
      auto pca_reply = transport.call(plan.pca_id, pca_request);
      auto issued = session->on_pseudonym_response(pca_reply, now);
      if (issued.size() != config.count) throw Error(ErrorCode::invalid_request, "short pseudonym set");
    }
    result.total_ms.push_back(ms_since(t0));
  }
  result.total = summarize(result.total_ms);
  result.token = summarize(result.token_ms);
  if (proxy_server) proxy_server->stop();
  pca_server.stop();
  ltca_server.stop();
  return result;
}

BeaconLoadResult run_beacon_load(const BeaconLoadConfig& config) {
  BeaconLoadResult result;
  result.config = config;
  result.threads = config.parallel ? kernel_threads() : 1;
  const std::size_t n = config.vehicles;

  // Hour-long slots, and the next period too, so pools never run dry
  // mid-run.
  Authorities a(3600, 86400, true);
  FrameChannel ltca = [&](ByteView f) { return a.ltca_handle(f); };
  ChannelTransport transport;
  transport.routes[a.ltca->id()] = ltca;
  transport.routes[a.pca->id()] = [&](ByteView f) { return a.pca_handle(f); };
  std::vector<std::unique_ptr<Vehicle>> vehicles;
  const auto now = wall_seconds();
  const auto period = a.dep.policy.period_of(now);
  for (std::size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "V%03zu", i);
    vehicles.push_back(enroll(a, id, ltca));
    for (auto tag : {period, period + 1}) {
      vehicles.back()->refill({.period_tag = tag, .pca_id = a.pca->id(), .key_count = 24}, transport,
                              wall_seconds());
    }
  }

  const auto interval = std::chrono::duration<double>(1.0 / config.rate_hz);
  const auto span = std::chrono::duration<double>(config.duration_s);
  result.ticks_planned = static_cast<std::uint64_t>(std::llround(config.duration_s * config.rate_hz));
  std::vector<Beacon> beacons(n);
  std::vector<std::uint64_t> accepted(n, 0);
  std::vector<double> ticks;
  const Bytes payload(32, 0x5a);

  const auto start = Steady::now();
  for (std::uint64_t k = 0; k < result.ticks_planned; ++k) {
    auto due = start + std::chrono::duration_cast<Steady::duration>(interval * static_cast<double>(k));
    if (Steady::now() - start >= span) break;
    std::this_thread::sleep_until(due);
    auto t0 = Steady::now();
    const auto ms = wall_millis();
    for_each_index(n, config.parallel, [&](std::size_t i) {
      beacons[i] = vehicles[i]->sign_beacon(payload, {static_cast<double>(i), 0}, ms);
    });
    for_each_index(n, config.parallel, [&](std::size_t r) {
      auto& verifier = vehicles[r]->verifier();
      for (std::size_t s = 0; s < n; ++s) {
        if (s != r && verifier.verify(beacons[s], ms) == BeaconVerdict::accept) ++accepted[r];
      }
    });
    ticks.push_back(ms_since(t0));
    ++result.ticks_run;
    if (Steady::now() > due + interval) ++result.missed_deadlines;
  }
  const double elapsed = std::chrono::duration<double>(Steady::now() - start).count();
  result.missed_deadlines += result.ticks_planned - result.ticks_run;
  result.signatures = result.ticks_run * n;
  result.verifications = result.ticks_run * n * (n - 1);
  for (auto c : accepted) result.accepted += c;
  result.tick_ms = summarize(ticks);
  result.required_verifies_per_s = config.rate_hz * static_cast<double>(n * (n - 1));
  result.achieved_verifies_per_s = elapsed > 0 ? static_cast<double>(result.verifications) / elapsed : 0;
  return result;
}

namespace {

Json dist_json(const Distribution& d) {
  return {{"samples", d.samples}, {"mean", d.mean}, {"p50", d.p50}, {"p95", d.p95}};
}

}  // namespace

Json to_json(const IssuanceBenchResult& r) {
  return {{"count", r.config.count},
          {"mode", r.config.mode == AcquisitionMode::proxy ? "proxy" : "token"},
          {"reps", r.config.reps},
          {"threads", r.threads},
          {"median_ms", r.total.p50},
          {"p95_ms", r.total.p95},
          {"token_median_ms", r.token.p50},
          {"total_ms", r.total_ms},
          {"token_ms", r.token_ms},
          {"reference_ms", {{"VeSPA", 817}, {"SEROSA", 650}, {"PUCA", 1000}, {"SR-VPKI", 260}}}};
}

Json to_json(const BeaconLoadResult& r) {
  return {{"vehicles", r.config.vehicles},
          {"rate_hz", r.config.rate_hz},
          {"duration_s", r.config.duration_s},
          {"threads", r.threads},
          {"ticks_planned", r.ticks_planned},
          {"ticks_run", r.ticks_run},
          {"missed_deadlines", r.missed_deadlines},
          {"signatures", r.signatures},
          {"verifications", r.verifications},
          {"accepted", r.accepted},
          {"tick_ms", dist_json(r.tick_ms)},
          {"required_verifies_per_s", r.required_verifies_per_s},
          {"achieved_verifies_per_s", r.achieved_verifies_per_s}};
}

}  // namespace vpki
