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


#include "vpki/shuffle_proxy.hpp"

namespace vpki {

ForwardedBatch shuffle_batch(std::vector<Bytes> frames, std::vector<std::string> origins,
                             std::size_t batch_min, RandomSource& rng, bool allow_short) {
  if (frames.size() != origins.size()) throw Error(ErrorCode::invalid_request, "origin count");
  if (frames.size() < batch_min && !allow_short) {
    throw Error(ErrorCode::batch_underflow,
                std::to_string(frames.size()) + " < " + std::to_string(batch_min));
  }
  ForwardedBatch out;
  out.underflow = frames.size() < batch_min;
  out.permutation = random_permutation(frames.size(), rng);
  for (auto i : out.permutation) {
    out.frames.push_back(std::move(frames[i]));
    out.origins.push_back(std::move(origins[i]));
  }
  return out;
}

ShuffleProxy::ShuffleProxy(std::size_t batch_min, std::int64_t timeout,
                           std::unique_ptr<RandomSource> rng)
    : batch_min_(batch_min), timeout_(timeout), rng_(std::move(rng)) {
  if (batch_min_ == 0) throw Error(ErrorCode::spec_invalid, "batch_min must be positive");
  if (!rng_) rng_ = std::make_unique<SystemRandom>();
}

std::optional<ForwardedBatch> ShuffleProxy::submit(Bytes frame, std::string origin,
                                                   std::int64_t now) {
  if (frames_.empty()) oldest_ = now;
  frames_.push_back(std::move(frame));
  origins_.push_back(std::move(origin));
  if (frames_.size() >= batch_min_) return flush(false);
  return std::nullopt;
}

std::optional<ForwardedBatch> ShuffleProxy::poll(std::int64_t now) {
  if (frames_.empty() || now < *oldest_ + timeout_) return std::nullopt;
  return flush(true);
}

std::optional<std::int64_t> ShuffleProxy::deadline() const {
  if (frames_.empty()) return std::nullopt;
  return *oldest_ + timeout_;
}

ForwardedBatch ShuffleProxy::flush(bool short_batch) {
  auto batch = shuffle_batch(std::move(frames_), std::move(origins_), batch_min_, *rng_, short_batch);
  batch.batch_id = next_batch_++;
  if (batch.underflow) ++underflows_;
  frames_.clear();
  origins_.clear();
  oldest_.reset();
  return batch;
}

}  // namespace vpki
