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

#include "ptest/protocol.hpp"

#include <cmath>
#include <vector>

#include "json.hpp"
#include "ptest/error.hpp"

namespace ptest::protocol {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorCode::kProtocolError, message); }

using ordered_json = nlohmann::ordered_json;

ordered_json complex_to_json(Complex z) { return ordered_json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 2) fail(std::string(field) + ": expected [re, im]");
  for (const json& part : j) {
    if (part.is_null()) fail(std::string(field) + ": NonFinite value");
    if (!part.is_number()) fail(std::string(field) + ": expected numbers");
  }
  const Complex z{j[0].get<double>(), j[1].get<double>()};
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) fail(std::string(field) + ": NonFinite value");
  return z;
}

std::uint64_t get_id(const json& j) {
  auto it = j.find("id");
  if (it == j.end() || !it->is_number_unsigned()) {
    if (it != j.end() && it->is_number_integer() && it->get<std::int64_t>() >= 0) return it->get<std::uint64_t>();
    fail("missing or invalid 'id'");
  }
  return it->get<std::uint64_t>();
}

int get_int(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) fail(std::string("missing or invalid '") + key + "'");
  const auto value = it->get<std::int64_t>();
  if (value < 0 || value > 1'000'000) fail(std::string("out-of-range '") + key + "'");
  return static_cast<int>(value);
}

bool mentions_non_finite_literal(std::string_view line) {
  for (std::string_view token : {"NaN", "nan", "Infinity", "inf"}) {
    if (line.find(token) != std::string_view::npos) return true;
  }
  return false;
}

}  // namespace

// ordered_json keeps keys in the documented order on the wire.
std::string encode(const Frame& frame) {
  ordered_json j;
  std::visit(
      [&j](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Hello>) {
          j = {{"type", "hello"}, {"protocol", f.protocol}};
        } else if constexpr (std::is_same_v<T, Ready>) {
          j = {{"type", "ready"}, {"max_dim", f.max_dim}};
        } else if constexpr (std::is_same_v<T, Query>) {
          ordered_json entries = ordered_json::array();
          for (const Complex& z : f.matrix.entries()) entries.push_back(complex_to_json(z));
          j = {{"type", "query"}, {"id", f.id}, {"k", f.k}, {"matrix", std::move(entries)}};
        } else if constexpr (std::is_same_v<T, Result>) {
          j = {{"type", "result"}, {"id", f.id}, {"value", complex_to_json(f.value)}};
        } else {
          j = {{"type", "error"}, {"id", f.id}, {"message", f.message}};
        }
      },
      frame);
  return j.dump();
}

Frame decode(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    if (mentions_non_finite_literal(line)) fail("NonFinite value in frame");
    fail("malformed frame");
  }
  if (!j.is_object()) fail("frame is not a JSON object");
  auto type_it = j.find("type");
  if (type_it == j.end() || !type_it->is_string()) fail("missing 'type'");
  const std::string type = type_it->get<std::string>();

  if (type == "hello") return Hello{get_int(j, "protocol")};
  if (type == "ready") {
    Ready r{get_int(j, "max_dim")};
    if (r.max_dim < 1) fail("ready: max_dim must be positive");
    return r;
  }
  if (type == "query") {
    Query q;
    q.id = get_id(j);
    q.k = get_int(j, "k");
    if (q.k < 1) fail("query: k must be positive");
    auto m_it = j.find("matrix");
    if (m_it == j.end() || !m_it->is_array()) fail("query: missing 'matrix'");
    const std::size_t expected = static_cast<std::size_t>(q.k) * static_cast<std::size_t>(q.k);
    if (m_it->size() != expected) fail("query: expected k*k matrix entries");
    std::vector<Complex> entries;
    entries.reserve(expected);
    for (const json& e : *m_it) entries.push_back(complex_from_json(e, "matrix"));
    q.matrix = ComplexMatrix(q.k, std::move(entries));
    return q;
  }
  if (type == "result") {
    Result r;
    r.id = get_id(j);
    auto v_it = j.find("value");
    if (v_it == j.end()) fail("result: missing 'value'");
    r.value = complex_from_json(*v_it, "value");
    return r;
  }
  if (type == "error") {
    ErrorFrame e;
    e.id = get_id(j);
    auto msg_it = j.find("message");
    if (msg_it == j.end() || !msg_it->is_string()) fail("error: missing 'message'");
    e.message = msg_it->get<std::string>();
    return e;
  }
  fail("unknown frame type '" + type + "'");
}

std::uint64_t salvage_id(std::string_view line) noexcept {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return 0;
  auto it = j.find("id");
  if (it == j.end() || !it->is_number_integer()) return 0;
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  const auto v = it->get<std::int64_t>();
  return v < 0 ? 0 : static_cast<std::uint64_t>(v);
}

}  // namespace ptest::protocol
