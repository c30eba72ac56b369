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

// Localhost TCP transport for live mode. A frame on the wire is a u32
// big-endian length followed by that many bytes; one reply frame per
// request frame, connections stay open.

#include <atomic>
#include <chrono>
#include <functional>
#include <list>
#include <mutex>
#include <string>
#include <thread>

#include "vpki/services.hpp"

namespace vpki {

class TcpServer {
 public:
  using Handler = std::function<Bytes(ByteView)>;

  /// Binds immediately; port 0 picks an ephemeral port. The handler may run
  /// on several connection threads at once.
  TcpServer(Handler handler, std::uint16_t port = 0, const std::string& host = "127.0.0.1");
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const { return port_; }
  /// Accepts on a background thread.
  void start();
  /// Accepts on the calling thread until stop().
  void serve_forever();
  void stop();

 private:
  void accept_loop();
  void serve_connection(int fd);

  Handler handler_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::list<std::thread> workers_;
  std::list<int> connections_;
};

/// Persistent client connection. Reconnects once if the request cannot be written;
/// throws Error(service_unreachable) when the server cannot be reached.
class TcpClient {
 public:
  TcpClient(std::string host, std::uint16_t port,
            std::chrono::milliseconds timeout = std::chrono::seconds(10));
  ~TcpClient();
  TcpClient(const TcpClient&) = delete;
  TcpClient& operator=(const TcpClient&) = delete;

  Bytes call(ByteView frame);
  FrameChannel channel();

 private:
  void connect();
  void close();

  std::string host_;
  std::uint16_t port_;
  std::chrono::milliseconds timeout_;
  int fd_ = -1;
  std::mutex mu_;
};

/// Writes one length-prefixed frame; false on a broken socket.
bool write_frame(int fd, ByteView frame);
/// Reads one frame; false on EOF or error. Frames above 64 MiB are refused.
bool read_frame(int fd, Bytes& out);

}  // namespace vpki
