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

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "ptest/oracle.hpp"

namespace ptest {

// Line-oriented byte stream over a pair of POSIX file descriptors (pipe ends
// or a socket used for both directions). Closes the descriptors it owns.
class LineChannel {
 public:
  LineChannel(int read_fd, int write_fd, bool owns_fds = true);
  ~LineChannel();

  LineChannel(LineChannel&& other) noexcept;
  LineChannel& operator=(LineChannel&&) = delete;
  LineChannel(const LineChannel&) = delete;
  LineChannel& operator=(const LineChannel&) = delete;

  // Appends '\n'. Throws Error(kRemoteUnavailable) if the peer is gone.
  void write_line(std::string_view line);

  // Next line without its '\n'; nullopt at end of stream. A non-positive
  // timeout waits forever; otherwise throws Error(kTimeout).
  std::optional<std::string> read_line(std::chrono::milliseconds timeout = std::chrono::milliseconds{0});

  void close_write();

 private:
  int read_fd_ = -1;
  int write_fd_ = -1;
  bool owns_ = true;
  std::string buffer_;
};

struct RemoteOptions {
  std::chrono::milliseconds timeout{10000};
};

// Endpoint forms:
//   tcp:HOST:PORT   connect to a running `ptest serve --port PORT`
//   anything else   run as `/bin/sh -c ENDPOINT`, speaking over its stdio
// Performs the hello/ready handshake; throws Error(kRemoteUnavailable) on
// connection or handshake failure.
//
// The returned family serializes queries over one connection: each call
// holds a lock for one request/response pair, correlated by a strictly
// increasing id. Parallel callers therefore see the same values a serial run
// would, provided the remote oracle is itself a function of its input.
std::unique_ptr<OracleFamily> connect_remote(const std::string& endpoint, RemoteOptions options = {});

// Same, over an already-open channel (used by tests with socketpairs).
std::unique_ptr<OracleFamily> connect_remote(LineChannel channel, RemoteOptions options = {},
                                             std::string description = "remote");

// Answers frames from `channel` using `oracle` until end of stream. Malformed
// frames and out-of-range queries get an error frame; the loop continues.
// Returns the number of queries answered.
std::uint64_t serve_oracle(OracleFamily& oracle, LineChannel& channel);

// Listens on 127.0.0.1:port and serves connections one at a time, forever.
// `on_listening` receives the bound port (useful when port == 0).
[[noreturn]] void serve_tcp(OracleFamily& oracle, std::uint16_t port, void (*on_listening)(std::uint16_t) = nullptr);

}  // namespace ptest
