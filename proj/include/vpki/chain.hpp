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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "vpki/credentials.hpp"

namespace vpki {

enum class ChainStatus : std::uint8_t {
  accept,
  bad_signature,
  expired,
  not_yet_valid,
  revoked,
  role_violation,
  no_path_to_root,
};

std::string_view to_string(ChainStatus s);

struct ChainVerdict {
  ChainStatus status = ChainStatus::accept;
  bool ok() const { return status == ChainStatus::accept; }
};

/// Immutable set of authority certificates. Signature checks between
/// authority certificates are time-independent, so they are done once at
/// construction; verify_chain then only evaluates validity windows, roles and
/// the leaf signature. Updates build a new store (replace-on-update).
class TrustStore {
 public:
  TrustStore() = default;
  explicit TrustStore(std::vector<AuthorityCertificate> certs);

  const std::vector<AuthorityCertificate>& certificates() const { return certs_; }
  std::vector<std::size_t> find(const std::string& authority_id) const;
  const AuthorityCertificate* first(const std::string& authority_id) const;
  bool has_root() const;

  TrustStore without(std::size_t index) const;
  TrustStore with(const AuthorityCertificate& cert) const;

  /// One "<id>[.<issuer>].cert" file per certificate.
  static TrustStore load_directory(const std::string& dir);
  void save_directory(const std::string& dir) const;

  struct Edge {
    std::size_t issuer;
    bool signature_ok;
  };

  // Used by verify_chain.
  ChainVerdict path_to_root(std::size_t index, Timestamp now, std::vector<bool>& visiting) const;

 private:
  std::vector<AuthorityCertificate> certs_;
  std::vector<std::vector<Edge>> edges_;
  std::vector<bool> root_;
  std::multimap<std::string, std::size_t> by_id_;
};

/// Latest verified CRL per issuer. Only a CRL whose signature chains to the
/// trust store and whose sequence is not older than the cached one replaces
/// the entry.
class CrlCache {
 public:
  enum class Update { updated, stale };

  /// Throws Error(bad_signature) if the CRL does not verify.
  Update process(const Crl& crl, const TrustStore& store, Timestamp now);

  bool is_revoked(const std::string& issuer_id, const Serial& serial) const;
  std::optional<std::uint64_t> sequence(const std::string& issuer_id) const;
  const Crl* get(const std::string& issuer_id) const;

 private:
  struct Entry {
    Crl crl;
    std::unordered_set<Serial> serials;
  };
  std::map<std::string, Entry> entries_;
};

/// Which roles may sign each kind of object.
bool role_may_sign_authority(Role issuer, Role subject);

/// Generic leaf check for any signed object. Revocation is looked up in
/// `crls` under issuer_id when both `serial` and `crls` are given.
ChainVerdict verify_signed(const std::string& issuer_id, ByteView tbs, const Signature& sig,
                           std::initializer_list<Role> issuer_roles,
                           const std::optional<ValidityInterval>& validity,
                           const std::optional<Serial>& serial, const TrustStore& store,
                           Timestamp now, const CrlCache* crls);

ChainVerdict verify_chain(const Pseudonym& p, const TrustStore& store, Timestamp now,
                          const CrlCache* crls = nullptr);
ChainVerdict verify_chain(const LongTermCertificate& c, const TrustStore& store, Timestamp now,
                          const CrlCache* crls = nullptr);
ChainVerdict verify_chain(const Token& t, const TrustStore& store, Timestamp now);
ChainVerdict verify_chain(const Crl& c, const TrustStore& store, Timestamp now);
ChainVerdict verify_chain(const LifetimePolicy& p, const TrustStore& store, Timestamp now);
ChainVerdict verify_chain(const AuthorityCertificate& c, const TrustStore& store, Timestamp now);

}  // namespace vpki
