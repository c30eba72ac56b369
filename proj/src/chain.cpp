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

#include "vpki/chain.hpp"

#include <algorithm>
#include <filesystem>

namespace vpki {

namespace fs = std::filesystem;

std::string_view to_string(ChainStatus s) {
  switch (s) {
    case ChainStatus::accept: return "accept";
    case ChainStatus::bad_signature: return "bad-signature";
    case ChainStatus::expired: return "expired";
    case ChainStatus::not_yet_valid: return "not-yet-valid";
    case ChainStatus::revoked: return "revoked";
    case ChainStatus::role_violation: return "role-violation";
    case ChainStatus::no_path_to_root: return "no-path-to-root";
  }
  return "?";
}

bool role_may_sign_authority(Role issuer, Role subject) {
  switch (issuer) {
    case Role::rca: return true;
    case Role::hca: return subject != Role::rca;
    default: return false;
  }
}

namespace {

std::optional<ChainStatus> time_check(const ValidityInterval& v, Timestamp now) {
  if (now < v.start) return ChainStatus::not_yet_valid;
  if (now >= v.end) return ChainStatus::expired;
  return std::nullopt;
}

// Keeps the first failure seen; a path that merely does not exist is the
// least informative outcome and is overridden by any concrete failure.
void note_failure(std::optional<ChainStatus>& worst, ChainStatus s) {
  if (!worst || *worst == ChainStatus::no_path_to_root) worst = s;
}

}  // namespace

TrustStore::TrustStore(std::vector<AuthorityCertificate> certs) : certs_(std::move(certs)) {
  for (std::size_t i = 0; i < certs_.size(); ++i) by_id_.emplace(certs_[i].authority_id, i);
  edges_.resize(certs_.size());
  root_.assign(certs_.size(), false);
  for (std::size_t i = 0; i < certs_.size(); ++i) {
    const auto& c = certs_[i];
    auto tbs = c.tbs();
    if (c.self_signed()) {
      root_[i] = c.role == Role::rca && verify(tbs, c.signature, c.public_key);
      continue;
    }
    auto [lo, hi] = by_id_.equal_range(c.issuer_id);
    for (auto it = lo; it != hi; ++it) {
      const auto& issuer = certs_[it->second];
      edges_[i].push_back(Edge{it->second, verify(tbs, c.signature, issuer.public_key)});
    }
  }
}

std::vector<std::size_t> TrustStore::find(const std::string& authority_id) const {
  std::vector<std::size_t> out;
  auto [lo, hi] = by_id_.equal_range(authority_id);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  return out;
}

const AuthorityCertificate* TrustStore::first(const std::string& authority_id) const {
  auto it = by_id_.find(authority_id);
  return it == by_id_.end() ? nullptr : &certs_[it->second];
}

bool TrustStore::has_root() const { return std::find(root_.begin(), root_.end(), true) != root_.end(); }

TrustStore TrustStore::without(std::size_t index) const {
  auto copy = certs_;
  copy.erase(copy.begin() + static_cast<std::ptrdiff_t>(index));
  return TrustStore(std::move(copy));
}

TrustStore TrustStore::with(const AuthorityCertificate& cert) const {
  auto copy = certs_;
  copy.push_back(cert);
  return TrustStore(std::move(copy));
}

TrustStore TrustStore::load_directory(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::io_error, "trust store not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".cert") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<AuthorityCertificate> certs;
  for (const auto& f : files) {
    auto cred = decode_file(read_file(f.string()));
    auto* cert = std::get_if<AuthorityCertificate>(&cred);
    if (cert == nullptr) throw Error(ErrorCode::decode_error, f.string() + " is not an authority certificate");
    certs.push_back(*cert);
  }
  return TrustStore(std::move(certs));
}

void TrustStore::save_directory(const std::string& dir) const {
  fs::create_directories(dir);
  for (const auto& c : certs_) {
    write_file((fs::path(dir) / (c.authority_id + "__" + c.issuer_id + ".cert")).string(),
               encode_file(c));
  }
}

ChainVerdict TrustStore::path_to_root(std::size_t index, Timestamp now,
                                      std::vector<bool>& visiting) const {
  const auto& c = certs_[index];
  if (auto t = time_check(c.validity, now)) return {*t};
  if (root_[index]) return {ChainStatus::accept};
  if (visiting[index]) return {ChainStatus::no_path_to_root};
  visiting[index] = true;
  std::optional<ChainStatus> failure;
  for (const auto& e : edges_[index]) {
    const auto& issuer = certs_[e.issuer];
    if (!role_may_sign_authority(issuer.role, c.role)) {
      note_failure(failure, ChainStatus::role_violation);
      continue;
    }
    if (!e.signature_ok) {
      note_failure(failure, ChainStatus::bad_signature);
      continue;
    }
    auto v = path_to_root(e.issuer, now, visiting);
    if (v.ok()) {
      visiting[index] = false;
      return v;
    }
    note_failure(failure, v.status);
  }
  visiting[index] = false;
  return {failure.value_or(ChainStatus::no_path_to_root)};
}

ChainVerdict verify_signed(const std::string& issuer_id, ByteView tbs, const Signature& sig,
                           std::initializer_list<Role> issuer_roles,
                           const std::optional<ValidityInterval>& validity,
                           const std::optional<Serial>& serial, const TrustStore& store,
                           Timestamp now, const CrlCache* crls) {
  if (validity) {
    if (auto t = time_check(*validity, now)) return {*t};
  }
  if (serial && crls && crls->is_revoked(issuer_id, *serial)) return {ChainStatus::revoked};

  std::optional<ChainStatus> failure;
  std::vector<bool> visiting(store.certificates().size(), false);
  for (auto idx : store.find(issuer_id)) {
    const auto& issuer = store.certificates()[idx];
    if (std::find(issuer_roles.begin(), issuer_roles.end(), issuer.role) == issuer_roles.end()) {
      note_failure(failure, ChainStatus::role_violation);
      continue;
    }
    if (!verify(tbs, sig, issuer.public_key)) {
      note_failure(failure, ChainStatus::bad_signature);
      continue;
    }
    auto v = store.path_to_root(idx, now, visiting);
    if (v.ok()) return v;
    note_failure(failure, v.status);
  }
  return {failure.value_or(ChainStatus::no_path_to_root)};
}

ChainVerdict verify_chain(const Pseudonym& p, const TrustStore& store, Timestamp now,
                          const CrlCache* crls) {
  return verify_signed(p.issuer_id, p.tbs(), p.signature, {Role::pca}, p.validity, p.serial, store,
                       now, crls);
}

ChainVerdict verify_chain(const LongTermCertificate& c, const TrustStore& store, Timestamp now,
                          const CrlCache* crls) {
  return verify_signed(c.issuer_id, c.tbs(), c.signature, {Role::ltca}, c.validity, c.serial, store,
                       now, crls);
}

ChainVerdict verify_chain(const Token& t, const TrustStore& store, Timestamp now) {
  return verify_signed(t.issuer_id, t.tbs(), t.signature, {Role::ltca}, t.validity, std::nullopt,
                       store, now, nullptr);
}

ChainVerdict verify_chain(const Crl& c, const TrustStore& store, Timestamp now) {
  return verify_signed(c.issuer_id, c.tbs(), c.signature, {Role::ltca, Role::pca}, std::nullopt,
                       std::nullopt, store, now, nullptr);
}

ChainVerdict verify_chain(const LifetimePolicy& p, const TrustStore& store, Timestamp now) {
  return verify_signed(p.issuer_id, p.tbs(), p.signature, {Role::rca}, std::nullopt, std::nullopt,
                       store, now, nullptr);
}

ChainVerdict verify_chain(const AuthorityCertificate& c, const TrustStore& store, Timestamp now) {
  if (auto t = time_check(c.validity, now)) return {*t};
  if (c.self_signed()) {
    if (c.role != Role::rca) return {ChainStatus::role_violation};
    if (!verify(c.tbs(), c.signature, c.public_key)) return {ChainStatus::bad_signature};
    for (auto idx : store.find(c.authority_id)) {
      if (store.certificates()[idx] == c) return {ChainStatus::accept};
    }
    return {ChainStatus::no_path_to_root};
  }
  std::optional<ChainStatus> failure;
  std::vector<bool> visiting(store.certificates().size(), false);
  auto tbs = c.tbs();
  for (auto idx : store.find(c.issuer_id)) {
    const auto& issuer = store.certificates()[idx];
    if (!role_may_sign_authority(issuer.role, c.role)) {
      note_failure(failure, ChainStatus::role_violation);
      continue;
    }
    if (!verify(tbs, c.signature, issuer.public_key)) {
      note_failure(failure, ChainStatus::bad_signature);
      continue;
    }
    auto v = store.path_to_root(idx, now, visiting);
    if (v.ok()) return v;
    note_failure(failure, v.status);
  }
  return {failure.value_or(ChainStatus::no_path_to_root)};
}

// --- CrlCache -------------------------------------------------------------

CrlCache::Update CrlCache::process(const Crl& crl, const TrustStore& store, Timestamp now) {
  if (!verify_chain(crl, store, now).ok()) throw Error(ErrorCode::bad_signature, "CRL from " + crl.issuer_id);
  auto it = entries_.find(crl.issuer_id);
  if (it != entries_.end() && crl.sequence_number < it->second.crl.sequence_number) {
    return Update::stale;
  }
  Entry e{crl, std::unordered_set<Serial>(crl.revoked_serials.begin(), crl.revoked_serials.end())};
  entries_.insert_or_assign(crl.issuer_id, std::move(e));
  return Update::updated;
}

bool CrlCache::is_revoked(const std::string& issuer_id, const Serial& serial) const {
  auto it = entries_.find(issuer_id);
  return it != entries_.end() && it->second.serials.contains(serial);
}

std::optional<std::uint64_t> CrlCache::sequence(const std::string& issuer_id) const {
  auto it = entries_.find(issuer_id);
  if (it == entries_.end()) return std::nullopt;
  return it->second.crl.sequence_number;
}

const Crl* CrlCache::get(const std::string& issuer_id) const {
  auto it = entries_.find(issuer_id);
  return it == entries_.end() ? nullptr : &it->second.crl;
}

}  // namespace vpki
