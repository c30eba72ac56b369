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


#include "vpki/kernels.hpp"

#include <omp.h>

namespace vpki {

std::vector<Signature> sign_batch(std::span<const Bytes> messages, const PrivateKey& key) {
  std::vector<Signature> out(messages.size());
  const auto n = static_cast<std::int64_t>(messages.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = sign(messages[i], key);
  return out;
}

std::vector<Signature> sign_batch_serial(std::span<const Bytes> messages, const PrivateKey& key) {
  std::vector<Signature> out;
  out.reserve(messages.size());
  for (const auto& m : messages) out.push_back(sign(m, key));
  return out;
}

std::vector<std::uint8_t> verify_batch(std::span<const VerifyJob> jobs) {
  std::vector<std::uint8_t> out(jobs.size());
  const auto n = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = jobs[i].key->verify(jobs[i].message, *jobs[i].signature) ? 1 : 0;
  }
  return out;
}

std::vector<std::uint8_t> verify_batch_serial(std::span<const VerifyJob> jobs) {
  std::vector<std::uint8_t> out;
  out.reserve(jobs.size());
  for (const auto& j : jobs) out.push_back(j.key->verify(j.message, *j.signature) ? 1 : 0);
  return out;
}

void for_each_index(std::size_t n, bool parallel, const std::function<void(std::size_t)>& fn) {
  if (!parallel) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const auto m = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < m; ++i) fn(static_cast<std::size_t>(i));
}

int kernel_threads() { return omp_get_max_threads(); }

}  // namespace vpki
