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


#include "vpki/deployment.hpp"

#include <algorithm>
#include <filesystem>

namespace fs = std::filesystem;

namespace vpki {

namespace {

AuthorityCertificate make_cert(const std::string& id, Role role, const PublicKey& pub,
                               const std::string& issuer, const PrivateKey& issuer_key,
                               ValidityInterval validity) {
  AuthorityCertificate c;
  c.authority_id = id;
  c.role = role;
  c.public_key = pub;
  c.validity = validity;
  c.issuer_id = issuer;
  sign_credential(c, issuer_key);
  return c;
}

std::string numbered(const char* prefix, std::uint32_t i) { return std::string(prefix) + "-" + std::to_string(i); }

}  // namespace

Deployment Deployment::build(const TrustTopology& topology, const LifetimePolicy& policy_template,
                             Timestamp not_before, Timestamp not_after, RandomSource& rng) {
  topology.validate();
  policy_template.validate();
  Deployment d;
  const ValidityInterval validity{not_before, not_after};
  std::vector<AuthorityCertificate> certs;

  auto add = [&](const std::string& id, Role role, const std::string& issuer) {
    d.keys.emplace(id, generate_keypair(rng));
    const auto& signer = issuer == id ? d.keys.at(id) : d.keys.at(issuer);
    auto cert = make_cert(id, role, d.keys.at(id).public_key, issuer, signer.private_key, validity);
    d.certificates.emplace(id, cert);
    certs.push_back(cert);
  };

  d.rca_id = "RCA-1";
  add(d.rca_id, Role::rca, d.rca_id);
  for (std::uint32_t i = 1; i <= topology.hca_count; ++i) {
    d.hca_ids.push_back(numbered("HCA", i));
    add(d.hca_ids.back(), Role::hca, d.rca_id);
  }
  for (std::uint32_t i = 1; i <= topology.ltca_count; ++i) {
    d.ltca_ids.push_back(numbered("LTCA", i));
    add(d.ltca_ids.back(), Role::ltca, d.hca_ids[(i - 1) % d.hca_ids.size()]);
  }
  for (std::uint32_t i = 1; i <= topology.pca_count; ++i) {
    d.pca_ids.push_back(numbered("PCA", i));
    add(d.pca_ids.back(), Role::pca, d.hca_ids[(i - 1) % d.hca_ids.size()]);
  }
  d.ra_id = "RA-1";
  add(d.ra_id, Role::ra, d.rca_id);

  for (const auto& [issuer, subject] : topology.cross_certifications) {
    if (!d.certificates.contains(issuer) || !d.certificates.contains(subject)) {
      throw Error(ErrorCode::spec_invalid, "cross-certification names unknown authority");
    }
    const auto& ic = d.certificates.at(issuer);
    const auto& sc = d.certificates.at(subject);
    if (!role_may_sign_authority(ic.role, sc.role)) {
      throw Error(ErrorCode::spec_invalid, issuer + " may not certify " + subject);
    }
    certs.push_back(make_cert(subject, sc.role, sc.public_key, issuer, d.keys.at(issuer).private_key, validity));
  }

  d.policy = policy_template;
  d.policy.issuer_id = d.rca_id;
  d.policy.issued_at = not_before;
  sign_credential(d.policy, d.keys.at(d.rca_id).private_key);
  d.trust_store = std::make_shared<const TrustStore>(std::move(certs));
  return d;
}

const KeyPair& Deployment::key(const std::string& authority_id) const {
  auto it = keys.find(authority_id);
  if (it == keys.end()) throw Error(ErrorCode::unknown_target, "no key for " + authority_id);
  return it->second;
}

const AuthorityCertificate& Deployment::certificate(const std::string& authority_id) const {
  auto it = certificates.find(authority_id);
  if (it == certificates.end()) throw Error(ErrorCode::unknown_target, "no certificate for " + authority_id);
  return it->second;
}

void Deployment::save(const std::string& dir) const {
  trust_store->save_directory((fs::path(dir) / "trust_store").string());
  write_file((fs::path(dir) / "policy.bin").string(), encode_file(policy));
  fs::create_directories(fs::path(dir) / "keys");
  for (const auto& [id, kp] : keys) {
    const auto& s = kp.private_key.scalar();
    write_file((fs::path(dir) / "keys" / (id + ".key")).string(), ByteView(s.data(), s.size()));
  }
}

Deployment Deployment::load(const std::string& dir) {
  Deployment d;
  d.trust_store = std::make_shared<const TrustStore>(
      TrustStore::load_directory((fs::path(dir) / "trust_store").string()));
  auto pol = decode_file(read_file((fs::path(dir) / "policy.bin").string()));
  if (!std::holds_alternative<LifetimePolicy>(pol)) throw Error(ErrorCode::decode_error, "policy.bin");
  d.policy = std::get<LifetimePolicy>(pol);

  // Files load in name order; the first certificate seen for an id is
  // treated as its primary one. Cross-certificates carry the same key.
  for (const auto& c : d.trust_store->certificates()) {
    d.certificates.emplace(c.authority_id, c);
    if (c.role == Role::rca && c.self_signed()) d.rca_id = c.authority_id;
  }
  for (const auto& [id, c] : d.certificates) {
    switch (c.role) {
      case Role::hca: d.hca_ids.push_back(id); break;
      case Role::ltca: d.ltca_ids.push_back(id); break;
      case Role::pca: d.pca_ids.push_back(id); break;
      case Role::ra: d.ra_id = id; break;
      case Role::rca: break;
    }
  }
  auto by_number = [](const std::string& a, const std::string& b) {
    auto na = std::stoul(a.substr(a.rfind('-') + 1));
    auto nb = std::stoul(b.substr(b.rfind('-') + 1));
    return na < nb;
  };
  std::sort(d.hca_ids.begin(), d.hca_ids.end(), by_number);
  std::sort(d.ltca_ids.begin(), d.ltca_ids.end(), by_number);
  std::sort(d.pca_ids.begin(), d.pca_ids.end(), by_number);

  auto key_dir = fs::path(dir) / "keys";
  if (fs::is_directory(key_dir)) {
    for (const auto& entry : fs::directory_iterator(key_dir)) {
      if (entry.path().extension() != ".key") continue;
      auto raw = read_file(entry.path().string());
      if (raw.size() != 32) throw Error(ErrorCode::malformed_key, entry.path().string());
      std::array<std::uint8_t, 32> s{};
      std::copy(raw.begin(), raw.end(), s.begin());
      auto priv = PrivateKey::from_scalar(s);
      d.keys.emplace(entry.path().stem().string(), KeyPair{priv, priv.public_key()});
    }
  }
  return d;
}

}  // namespace vpki
