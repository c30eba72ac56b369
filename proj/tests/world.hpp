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

// In-process deployment with one LTCA/PCA object per authority and a
// transport that hands frames straight to the services.

#include <map>
#include <memory>
#include <string>

#include "properties.hpp"
#include "vpki/ltca.hpp"
#include "vpki/pca.hpp"
#include "vpki/resolution.hpp"
#include "vpki/services.hpp"
#include "vpki/vehicle.hpp"

namespace vpki::testing {

struct World : Transport {
  Deployment dep;
  std::map<std::string, std::unique_ptr<Ltca>> ltcas;
  std::map<std::string, std::unique_ptr<Pca>> pcas;
  std::map<std::string, std::unique_ptr<Service>> services;
  Timestamp now = 1000;

  explicit World(std::uint64_t seed = 1, TrustTopology topo = {}, LifetimeMode mode = LifetimeMode::grid,
                 std::int64_t slot = 600, std::int64_t period = 86400, bool guards = true)
      : dep(make_deployment(seed, topo, slot, period)) {
    HashDrbg root(seed, "world");
    for (const auto& id : dep.ltca_ids) {
      LtcaConfig cfg;
      cfg.policy = dep.policy;
      cfg.period_ledger = guards;
      ltcas[id] = std::make_unique<Ltca>(dep.certificate(id), dep.key(id), cfg, dep.trust_store,
                                         std::make_unique<HashDrbg>(root.fork(id)));
      services[id] = std::make_unique<LtcaService>(*ltcas[id], std::make_unique<HashDrbg>(root.fork(id + "/svc")));
    }
    for (const auto& id : dep.pca_ids) {
      PcaConfig cfg;
      cfg.policy = dep.policy;
      cfg.mode = mode;
      cfg.enforce_binding = guards;
      pcas[id] = std::make_unique<Pca>(dep.certificate(id), dep.key(id), cfg, dep.trust_store,
                                       std::make_unique<HashDrbg>(root.fork(id)));
      services[id] = std::make_unique<PcaService>(*pcas[id], std::make_unique<HashDrbg>(root.fork(id + "/svc")));
    }
  }

  Bytes call(const std::string& authority_id, ByteView frame) override {
    return services.at(authority_id)->handle(frame, now);
  }

  Ltca& ltca() { return *ltcas.begin()->second; }
  Pca& pca() { return *pcas.begin()->second; }

  std::unique_ptr<Vehicle> vehicle(const std::string& id, std::uint64_t seed = 7) {
    HashDrbg rng(seed, id);
    auto v = std::make_unique<Vehicle>(id, generate_keypair(rng), dep.trust_store, dep.policy,
                                       std::make_unique<HashDrbg>(rng.fork("vehicle")));
    auto& ltca_obj = ltca();
    v->set_ltc(ltca_obj.register_vehicle(id, v->long_term_key().public_key, now));
    return v;
  }

  AuthorizationOrder order(const std::string& order_id, OrderAction action, Bytes target) const {
    AuthorizationOrder o;
    o.order_id = order_id;
    o.action = action;
    o.target = std::move(target);
    o.issuer_id = dep.ra_id;
    o.issued_at = now;
    sign_credential(o, dep.key(dep.ra_id).private_key);
    return o;
  }

  std::uint64_t period() const { return dep.policy.period_of(now); }
};

}  // namespace vpki::testing
