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

// Builds a complete authority hierarchy for a topology: one root, K
// intermediate CAs, L LTCAs, M PCAs and one RA, plus the signed lifetime
// policy. LTCAs and PCAs are spread round-robin over the intermediates.
//
// On disk:
//   <dir>/trust_store/<id>__<issuer>.cert
//   <dir>/policy.bin
//   <dir>/keys/<id>.key        32-byte private scalar

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vpki/chain.hpp"
#include "vpki/credentials.hpp"

namespace vpki {

struct Deployment {
  std::shared_ptr<const TrustStore> trust_store;
  LifetimePolicy policy;
  std::map<std::string, KeyPair> keys;
  /// Primary certificate per authority (cross-certificates only live in the
  /// trust store).
  std::map<std::string, AuthorityCertificate> certificates;

  std::string rca_id;
  std::string ra_id;
  std::vector<std::string> hca_ids;
  std::vector<std::string> ltca_ids;
  std::vector<std::string> pca_ids;

  /// `policy_template` supplies epoch, slot and period; it is re-signed by
  /// the root. Authority certificates are valid over [not_before, not_after).
  static Deployment build(const TrustTopology& topology, const LifetimePolicy& policy_template,
                          Timestamp not_before, Timestamp not_after, RandomSource& rng);

  const KeyPair& key(const std::string& authority_id) const;
  const AuthorityCertificate& certificate(const std::string& authority_id) const;

  void save(const std::string& dir) const;
  static Deployment load(const std::string& dir);
};

}  // namespace vpki
