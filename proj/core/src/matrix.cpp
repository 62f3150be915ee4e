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

#include "ptest/matrix.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "ptest/error.hpp"

namespace ptest {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::kDimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kRemoteUnavailable: return "RemoteUnavailable";
    case ErrorCode::kProtocolError: return "ProtocolError";
    case ErrorCode::kTimeout: return "Timeout";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ComplexMatrix::ComplexMatrix(int dim) : dim_(dim) {
  if (dim < 1) throw Error(ErrorCode::kDimensionTooSmall, "matrix dimension must be positive");
  entries_.assign(static_cast<std::size_t>(dim) * dim, Complex{});
}

ComplexMatrix::ComplexMatrix(int dim, std::vector<Complex> entries) : dim_(dim), entries_(std::move(entries)) {
  if (dim < 1) throw Error(ErrorCode::kDimensionTooSmall, "matrix dimension must be positive");
  if (entries_.size() != static_cast<std::size_t>(dim) * dim) {
    throw Error(ErrorCode::kInvalidParams, "expected " + std::to_string(dim * dim) + " entries, got " +
                                               std::to_string(entries_.size()));
  }
}

ComplexMatrix ComplexMatrix::identity(int dim) {
  ComplexMatrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

bool ComplexMatrix::all_finite() const noexcept {
  for (const Complex& z : entries_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

}  // namespace ptest
