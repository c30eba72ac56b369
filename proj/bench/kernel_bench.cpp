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


// Times the parallel sign/verify kernels against their serial twins and
// checks that both produce the same output.
//
//   vpki_kernel_bench [batch] [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "vpki/analysis.hpp"
#include "vpki/kernels.hpp"
#include "vpki/random.hpp"

using namespace vpki;

namespace {

template <class F>
Distribution time_ms(std::size_t reps, F&& fn) {
  std::vector<double> ms;
  for (std::size_t i = 0; i < reps; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return summarize(ms);
}

void row(const char* name, std::size_t batch, const Distribution& serial, const Distribution& parallel) {
  std::printf("%-8s %6zu %12.2f %12.2f %8.2fx %10.0f/s\n", name, batch, serial.p50, parallel.p50,
              serial.p50 / parallel.p50, 1000.0 * static_cast<double>(batch) / parallel.p50);
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t batch = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 500;
  std::size_t reps = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 5;

  HashDrbg rng(1, "kernel-bench");
  auto key = generate_keypair(rng);
  VerifyingKey vk(key.public_key);
  std::vector<Bytes> msgs;
  for (std::size_t i = 0; i < batch; ++i) msgs.push_back(rng.bytes(120));

  std::vector<Signature> s_ser, s_par;
  auto sign_ser = time_ms(reps, [&] { s_ser = sign_batch_serial(msgs, key.private_key); });
  auto sign_par = time_ms(reps, [&] { s_par = sign_batch(msgs, key.private_key); });

  std::vector<VerifyJob> jobs;
  for (std::size_t i = 0; i < batch; ++i) jobs.push_back({msgs[i], &s_ser[i], &vk});
  std::vector<std::uint8_t> v_ser, v_par;
  auto ver_ser = time_ms(reps, [&] { v_ser = verify_batch_serial(jobs); });
  auto ver_par = time_ms(reps, [&] { v_par = verify_batch(jobs); });

  std::printf("threads %d, batch %zu, reps %zu (median ms)\n", kernel_threads(), batch, reps);
  std::printf("%-8s %6s %12s %12s %9s %12s\n", "kernel", "batch", "serial", "parallel", "speedup", "throughput");
  row("sign", batch, sign_ser, sign_par);
  row("verify", batch, ver_ser, ver_par);

  bool same = s_ser == s_par && v_ser == v_par;
  std::printf("outputs %s\n", same ? "identical" : "DIFFER");
  return same ? 0 : 1;
}
