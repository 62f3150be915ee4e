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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ptest {

using Complex = std::complex<double>;

// Dense square complex matrix, row-major. Indices are 0-based.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(int dim);  // zero-filled
  ComplexMatrix(int dim, std::vector<Complex> entries);

  static ComplexMatrix identity(int dim);

  int dim() const noexcept { return dim_; }

  Complex& operator()(int row, int col) noexcept { return entries_[static_cast<std::size_t>(row) * dim_ + col]; }
  Complex operator()(int row, int col) const noexcept {
    return entries_[static_cast<std::size_t>(row) * dim_ + col];
  }

  std::span<const Complex> entries() const noexcept { return entries_; }
  std::span<Complex> entries() noexcept { return entries_; }

  bool all_finite() const noexcept;

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  int dim_ = 0;
  std::vector<Complex> entries_;
};

// The (k-1)x(k-1) matrix obtained by deleting the first row and column
// `removed_column` (0-based) of a k x k parent.
struct Minor {
  int parent_dim = 0;
  int removed_column = 0;
  ComplexMatrix matrix;
};

}  // namespace ptest
