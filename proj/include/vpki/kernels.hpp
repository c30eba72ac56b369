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

// Batch signing and verification. Each parallel kernel has a serial twin
// with identical output; tests compare the two and bench/ times them.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "vpki/crypto.hpp"

namespace vpki {

struct VerifyJob {
  ByteView message;
  const Signature* signature = nullptr;
  const VerifyingKey* key = nullptr;
};

std::vector<Signature> sign_batch(std::span<const Bytes> messages, const PrivateKey& key);
std::vector<Signature> sign_batch_serial(std::span<const Bytes> messages, const PrivateKey& key);

/// One byte per job: 1 accepted, 0 rejected.
std::vector<std::uint8_t> verify_batch(std::span<const VerifyJob> jobs);
std::vector<std::uint8_t> verify_batch_serial(std::span<const VerifyJob> jobs);

/// Runs fn(i) for i in [0, n), spread across OpenMP threads when `parallel`.
/// fn must only touch state owned by index i.
void for_each_index(std::size_t n, bool parallel, const std::function<void(std::size_t)>& fn);

int kernel_threads();

}  // namespace vpki
