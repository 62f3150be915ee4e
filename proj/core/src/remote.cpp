/*
 * Copyright 2026 The ptest Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ptest/remote.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

#include "ptest/error.hpp"
#include "ptest/protocol.hpp"

namespace ptest {
namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

LineChannel::LineChannel(int read_fd, int write_fd, bool owns_fds)
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns_fds) {
  ignore_sigpipe();
}

LineChannel::LineChannel(LineChannel&& other) noexcept
    : read_fd_(other.read_fd_), write_fd_(other.write_fd_), owns_(other.owns_), buffer_(std::move(other.buffer_)) {
  other.read_fd_ = -1;
  other.write_fd_ = -1;
}

LineChannel::~LineChannel() {
  if (!owns_) return;
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
}

void LineChannel::close_write() {
  if (write_fd_ < 0) return;
  if (write_fd_ == read_fd_) {
    ::shutdown(write_fd_, SHUT_WR);
  } else if (owns_) {
    ::close(write_fd_);
  }
  write_fd_ = -1;
}

void LineChannel::write_line(std::string_view line) {
  if (write_fd_ < 0) throw Error(ErrorCode::kRemoteUnavailable, "channel closed for writing");
  std::string out(line);
  out.push_back('\n');
  std::size_t written = 0;
  while (written < out.size()) {
    const ssize_t n = ::write(write_fd_, out.data() + written, out.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kRemoteUnavailable, "write failed: " + errno_text());
    }
    written += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> LineChannel::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const std::size_t newline = buffer_.find('\n');
    if (newline != std::string::npos) {
      std::string line = buffer_.substr(0, newline);
      buffer_.erase(0, newline + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (read_fd_ < 0) return std::nullopt;
    if (timeout.count() > 0) {
      const auto remaining =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (remaining.count() <= 0) throw Error(ErrorCode::kTimeout, "no response within timeout");
      pollfd pfd{read_fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kRemoteUnavailable, "poll failed: " + errno_text());
      }
      if (ready == 0) throw Error(ErrorCode::kTimeout, "no response within timeout");
    }
    char chunk[65536];
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kRemoteUnavailable, "read failed: " + errno_text());
    }
    if (n == 0) {
      if (buffer_.empty()) return std::nullopt;
      std::string line = std::move(buffer_);
      buffer_.clear();
      return line;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

namespace {

class RemoteOracle final : public OracleFamily {
 public:
  RemoteOracle(LineChannel channel, int max_dim, RemoteOptions options, std::string description, pid_t child)
      : OracleFamily(max_dim),
        channel_(std::move(channel)),
        options_(options),
        description_(std::move(description)),
        child_(child) {}

  ~RemoteOracle() override {
    channel_.close_write();
    if (child_ <= 0) return;
    // The server exits on end of stream; give it a moment before forcing it.
    for (int attempt = 0; attempt < 200; ++attempt) {
      if (::waitpid(child_, nullptr, WNOHANG) == child_) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(child_, SIGKILL);
    ::waitpid(child_, nullptr, 0);
  }

  std::string describe() const override { return description_; }

 protected:
  Complex evaluate(int k, const ComplexMatrix& m) override {
    std::lock_guard lock(mutex_);
    const std::uint64_t id = next_id_++;
    channel_.write_line(protocol::encode(protocol::Query{id, k, m}));
    auto line = channel_.read_line(options_.timeout);
    if (!line) throw Error(ErrorCode::kProtocolError, "oracle closed the stream mid-query");
    const protocol::Frame frame = protocol::decode(*line);
    if (const auto* err = std::get_if<protocol::ErrorFrame>(&frame)) {
      throw Error(ErrorCode::kProtocolError, "oracle error for id " + std::to_string(err->id) + ": " + err->message);
    }
    const auto* result = std::get_if<protocol::Result>(&frame);
    if (result == nullptr) throw Error(ErrorCode::kProtocolError, "expected a result frame");
    if (result->id != id) {
      throw Error(ErrorCode::kProtocolError,
                  "id mismatch: sent " + std::to_string(id) + ", got " + std::to_string(result->id));
    }
    return result->value;
  }

 private:
  std::mutex mutex_;
  LineChannel channel_;
  RemoteOptions options_;
  std::string description_;
  pid_t child_;
  std::uint64_t next_id_ = 1;
};

int handshake(LineChannel& channel, std::chrono::milliseconds timeout) {
  try {
    channel.write_line(protocol::encode(protocol::Hello{}));
    auto line = channel.read_line(timeout);
    if (!line) throw Error(ErrorCode::kRemoteUnavailable, "oracle closed the stream during handshake");
    const protocol::Frame frame = protocol::decode(*line);
    const auto* ready = std::get_if<protocol::Ready>(&frame);
    if (ready == nullptr) throw Error(ErrorCode::kRemoteUnavailable, "expected a ready frame");
    return ready->max_dim;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kRemoteUnavailable) throw;
    throw Error(ErrorCode::kRemoteUnavailable, std::string("handshake failed: ") + e.what());
  }
}

LineChannel connect_tcp(const std::string& address) {
  const std::size_t colon = address.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::kInvalidSpec, "tcp endpoint must be tcp:HOST:PORT");
  const std::string host = address.substr(0, colon);
  const std::string port = address.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &found) != 0 || found == nullptr) {
    throw Error(ErrorCode::kRemoteUnavailable, "cannot resolve " + address);
  }
  int fd = -1;
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw Error(ErrorCode::kRemoteUnavailable, "cannot connect to " + address);
  return LineChannel(fd, fd);
}

}  // namespace

std::unique_ptr<OracleFamily> connect_remote(LineChannel channel, RemoteOptions options, std::string description) {
  const int max_dim = handshake(channel, options.timeout);
  return std::make_unique<RemoteOracle>(std::move(channel), max_dim, options, std::move(description), -1);
}

std::unique_ptr<OracleFamily> connect_remote(const std::string& endpoint, RemoteOptions options) {
  ignore_sigpipe();
  const std::string description = "remote:" + endpoint;
  if (endpoint.rfind("tcp:", 0) == 0) {
    return connect_remote(connect_tcp(endpoint.substr(4)), options, description);
  }

  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw Error(ErrorCode::kRemoteUnavailable, "pipe failed: " + errno_text());
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw Error(ErrorCode::kRemoteUnavailable, "pipe failed: " + errno_text());
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::kRemoteUnavailable, "fork failed: " + errno_text());
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", endpoint.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);

  LineChannel channel(from_child[0], to_child[1]);
  int max_dim = 0;
  try {
    max_dim = handshake(channel, options.timeout);
  } catch (...) {
    channel.close_write();
    ::kill(pid, SIGKILL);
    ::waitpid(pid, nullptr, 0);
    throw;
  }
  return std::make_unique<RemoteOracle>(std::move(channel), max_dim, options, description, pid);
}

std::uint64_t serve_oracle(OracleFamily& oracle, LineChannel& channel) {
  std::uint64_t answered = 0;
  while (auto line = channel.read_line()) {
    if (line->empty()) continue;
    std::string reply;
    try {
      const protocol::Frame frame = protocol::decode(*line);
      if (const auto* hello = std::get_if<protocol::Hello>(&frame)) {
        if (hello->protocol != protocol::kVersion) {
          reply = protocol::encode(protocol::ErrorFrame{0, "unsupported protocol version"});
        } else {
          reply = protocol::encode(protocol::Ready{oracle.max_dim()});
        }
      } else if (const auto* query = std::get_if<protocol::Query>(&frame)) {
        if (query->k > oracle.max_dim()) {
          reply = protocol::encode(protocol::ErrorFrame{
              query->id, "k = " + std::to_string(query->k) + " exceeds max_dim " + std::to_string(oracle.max_dim())});
        } else {
          try {
            reply = protocol::encode(protocol::Result{query->id, oracle.query(query->k, query->matrix)});
            ++answered;
          } catch (const std::exception& e) {
            reply = protocol::encode(protocol::ErrorFrame{query->id, e.what()});
          }
        }
      } else {
        reply = protocol::encode(protocol::ErrorFrame{0, "unexpected frame type from client"});
      }
    } catch (const Error& e) {
      reply = protocol::encode(protocol::ErrorFrame{protocol::salvage_id(*line), e.what()});
    }
    try {
      channel.write_line(reply);
    } catch (const Error&) {
      break;
    }
  }
  return answered;
}

void serve_tcp(OracleFamily& oracle, std::uint16_t port, void (*on_listening)(std::uint16_t)) {
  ignore_sigpipe();
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw Error(ErrorCode::kRemoteUnavailable, "socket failed: " + errno_text());
  const int yes = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listener, 8) != 0) {
    ::close(listener);
    throw Error(ErrorCode::kRemoteUnavailable, "cannot listen on port " + std::to_string(port) + ": " + errno_text());
  }
  socklen_t len = sizeof addr;
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  if (on_listening != nullptr) on_listening(ntohs(addr.sin_port));
  while (true) {
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) continue;
    LineChannel channel(fd, fd);
    serve_oracle(oracle, channel);
  }
}

}  // namespace ptest
