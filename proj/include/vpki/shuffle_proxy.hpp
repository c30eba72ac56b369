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

// Batching relay that sits between vehicles and a PCA. It holds sealed
// pseudonym requests until `batch_min` have arrived (or a timeout fires),
// then forwards them in a uniformly random order with origin metadata
// removed. Origins and permutations are only exposed through the
// ground-truth fields of ForwardedBatch.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vpki/bytes.hpp"
#include "vpki/random.hpp"

namespace vpki {

struct ForwardedBatch {
  std::uint64_t batch_id = 0;
  std::vector<Bytes> frames;
  bool underflow = false;
  // ground truth only
  std::vector<std::size_t> permutation;  // frames[i] = submitted[permutation[i]]
  std::vector<std::string> origins;      // origins[i] belongs to frames[i]
};

/// Shuffles one complete batch. Throws batch_underflow when fewer than
/// batch_min frames are given unless `allow_short` is set.
ForwardedBatch shuffle_batch(std::vector<Bytes> frames, std::vector<std::string> origins,
                             std::size_t batch_min, RandomSource& rng, bool allow_short = false);

class ShuffleProxy {
 public:
  /// `now` and `timeout` share whatever unit the caller uses.
  ShuffleProxy(std::size_t batch_min, std::int64_t timeout, std::unique_ptr<RandomSource> rng);

  /// Returns a batch once batch_min requests are pending.
  std::optional<ForwardedBatch> submit(Bytes frame, std::string origin, std::int64_t now);
  /// Flushes a short batch if the oldest pending request has waited for
  /// `timeout`. Returns nothing otherwise.
  std::optional<ForwardedBatch> poll(std::int64_t now);
  /// Time at which poll() will flush, if anything is pending.
  std::optional<std::int64_t> deadline() const;

  std::size_t pending() const { return frames_.size(); }
  std::size_t batch_min() const { return batch_min_; }
  std::uint64_t underflows() const { return underflows_; }

 private:
  ForwardedBatch flush(bool short_batch);

  std::size_t batch_min_;
  std::int64_t timeout_;
  std::unique_ptr<RandomSource> rng_;
  std::vector<Bytes> frames_;
  std::vector<std::string> origins_;
  std::optional<std::int64_t> oldest_;
  std::uint64_t next_batch_ = 0;
  std::uint64_t underflows_ = 0;
};

}  // namespace vpki
