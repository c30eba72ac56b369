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


#include <doctest.h>

#include "world.hpp"
#include "vpki/net.hpp"

using namespace vpki;

TEST_CASE("frames round trip over tcp") {
  TcpServer server([](ByteView in) {
    Bytes out(in.rbegin(), in.rend());
    return out;
  });
  server.start();
  TcpClient client("127.0.0.1", server.port());
  CHECK(client.call(as_bytes("abc")) == Bytes{'c', 'b', 'a'});
  Bytes big(1 << 20, 7);
  big[0] = 1;
  auto back = client.call(big);
  CHECK(back.size() == big.size());
  CHECK(back.back() == 1);
  CHECK(client.call({}).empty());
  server.stop();
}

TEST_CASE("sealed refill over tcp") {
  testing::World w;
  std::map<std::string, std::unique_ptr<TcpServer>> servers;
  for (auto& [id, svc] : w.services) {
    auto* s = svc.get();
    servers[id] = std::make_unique<TcpServer>([s, &w](ByteView f) { return s->handle(f, w.now); });
    servers[id]->start();
  }
  struct Tcp : Transport {
    std::map<std::string, std::unique_ptr<TcpClient>> clients;
    Bytes call(const std::string& id, ByteView frame) override { return clients.at(id)->call(frame); }
  } tcp;
  for (auto& [id, s] : servers) tcp.clients[id] = std::make_unique<TcpClient>("127.0.0.1", s->port());
  auto v = w.vehicle("V001");
  auto ps = v->refill({.period_tag = w.period(), .pca_id = "PCA-1", .key_count = 3}, tcp, w.now);
  CHECK(ps.size() == 3);
  for (auto& [id, s] : servers) s->stop();
}

TEST_CASE("unreachable server") {
  TcpServer server([](ByteView in) { return Bytes(in.begin(), in.end()); });
  auto port = server.port();
  server.stop();
  TcpClient client("127.0.0.1", port, std::chrono::milliseconds(200));
  CHECK_THROWS_AS(client.call(as_bytes("x")), Error);
}
