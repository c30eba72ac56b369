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


#include "vpki/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace vpki {

namespace {

constexpr std::uint32_t kMaxFrame = 64u << 20;

bool write_all(int fd, const std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    auto w = ::send(fd, p, n, MSG_NOSIGNAL);
    if (w < 0 && errno == EINTR) continue;
    if (w <= 0) return false;
    p += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

bool read_all(int fd, std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    auto r = ::recv(fd, p, n, 0);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) return false;
    p += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

bool write_frame(int fd, ByteView frame) {
  std::uint8_t len[4];
  auto n = static_cast<std::uint32_t>(frame.size());
  len[0] = static_cast<std::uint8_t>(n >> 24);
  len[1] = static_cast<std::uint8_t>(n >> 16);
  len[2] = static_cast<std::uint8_t>(n >> 8);
  len[3] = static_cast<std::uint8_t>(n);
  return write_all(fd, len, 4) && write_all(fd, frame.data(), frame.size());
}

bool read_frame(int fd, Bytes& out) {
  std::uint8_t len[4];
  if (!read_all(fd, len, 4)) return false;
  std::uint32_t n = (std::uint32_t{len[0]} << 24) | (std::uint32_t{len[1]} << 16) |
                    (std::uint32_t{len[2]} << 8) | len[3];
  if (n > kMaxFrame) return false;
  out.resize(n);
  return read_all(fd, out.data(), n);
}

TcpServer::TcpServer(Handler handler, std::uint16_t port, const std::string& host)
    : handler_(std::move(handler)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(ErrorCode::io_error, std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw Error(ErrorCode::io_error, "bad listen address " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 64) != 0) {
    auto msg = std::string(std::strerror(errno));
    ::close(listen_fd_);
    throw Error(ErrorCode::io_error, "bind " + host + ":" + std::to_string(port) + ": " + msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start() {
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void TcpServer::serve_forever() {
  running_ = true;
  accept_loop();
}

void TcpServer::stop() {
  if (listen_fd_ < 0) return;
  running_ = false;
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(mu_);
    for (int fd : connections_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
  ::close(listen_fd_);
  listen_fd_ = -1;
}

void TcpServer::accept_loop() {
  while (running_) {
    pollfd p{listen_fd_, POLLIN, 0};
    int r = ::poll(&p, 1, 100);
    if (r <= 0) continue;
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    set_nodelay(fd);
    std::lock_guard lock(mu_);
    connections_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void TcpServer::serve_connection(int fd) {
  Bytes frame;
  while (running_ && read_frame(fd, frame)) {
    Bytes reply;
    try {
      reply = handler_(frame);
    } catch (const std::exception&) {
      break;  // unopenable frame: no reply is possible
    }
    if (!write_frame(fd, reply)) break;
  }
  std::lock_guard lock(mu_);
  connections_.remove(fd);
  ::close(fd);
}

TcpClient::TcpClient(std::string host, std::uint16_t port, std::chrono::milliseconds timeout)
    : host_(std::move(host)), port_(port), timeout_(timeout) {}

TcpClient::~TcpClient() { close(); }

void TcpClient::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void TcpClient::connect() {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host_.c_str(), std::to_string(port_).c_str(), &hints, &res) != 0 || !res) {
    throw Error(ErrorCode::service_unreachable, "cannot resolve " + host_);
  }
  int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  int rc = fd < 0 ? -1 : ::connect(fd, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0) {
    if (fd >= 0) ::close(fd);
    throw Error(ErrorCode::service_unreachable, host_ + ":" + std::to_string(port_));
  }
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout_.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout_.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  set_nodelay(fd);
  fd_ = fd;
}

Bytes TcpClient::call(ByteView frame) {
  std::lock_guard lock(mu_);
  Bytes reply;
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (fd_ < 0) connect();
    if (!write_frame(fd_, frame)) {
      close();
      continue;
    }
    // Once the request went out it is not resent: it may have been consumed.
    if (read_frame(fd_, reply)) return reply;
    close();
    break;
  }
  throw Error(ErrorCode::service_unreachable, host_ + ":" + std::to_string(port_) + " dropped the connection");
}

FrameChannel TcpClient::channel() {
  return [this](ByteView frame) { return call(frame); };
}

}  // namespace vpki
