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

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "ptest/matrix.hpp"

// Newline-delimited JSON frames spoken between the tester and an external
// oracle. One frame per line; matrices are row-major with 0-based indexing.
//
//   tester -> oracle   {"type":"hello","protocol":1}
//   oracle -> tester   {"type":"ready","max_dim":N}
//   tester -> oracle   {"type":"query","id":ID,"k":K,"matrix":[[re,im],...]}
//   oracle -> tester   {"type":"result","id":ID,"value":[re,im]}
//                      {"type":"error","id":ID,"message":"..."}
//
// Doubles are printed in shortest round-trip form, so values survive the
// wire bit-for-bit.
namespace ptest::protocol {

inline constexpr int kVersion = 1;

struct Hello {
  int protocol = kVersion;
};

struct Ready {
  int max_dim = 0;
};

struct Query {
  std::uint64_t id = 0;
  int k = 0;
  ComplexMatrix matrix;
};

struct Result {
  std::uint64_t id = 0;
  Complex value;
};

struct ErrorFrame {
  std::uint64_t id = 0;
  std::string message;
};

using Frame = std::variant<Hello, Ready, Query, Result, ErrorFrame>;

// Single line, without the trailing newline.
std::string encode(const Frame& frame);

// Throws Error(kProtocolError) on malformed JSON, unknown type, missing or
// mistyped fields, wrong entry count, or non-finite numbers.
Frame decode(std::string_view line);

// Best-effort id extraction from a frame that failed to decode; 0 if absent.
std::uint64_t salvage_id(std::string_view line) noexcept;

}  // namespace ptest::protocol
