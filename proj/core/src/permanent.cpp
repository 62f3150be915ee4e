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

#include "ptest/permanent.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <numeric>
#include <string>

#include "ptest/error.hpp"

namespace ptest {
namespace {

void check_input(const ComplexMatrix& m, int max_dim, const char* who) {
  if (m.dim() < 1) throw Error(ErrorCode::kDimensionTooSmall, std::string(who) + ": empty matrix");
  if (m.dim() > max_dim) {
    throw Error(ErrorCode::kDimensionTooLarge,
                std::string(who) + ": dim " + std::to_string(m.dim()) + " exceeds " + std::to_string(max_dim));
  }
  if (!m.all_finite()) throw Error(ErrorCode::kNonFinite, std::string(who) + ": matrix has NaN/Inf entries");
}

constexpr std::array<double, kMaxDim + 1> make_factorials() {
  std::array<double, kMaxDim + 1> f{};
  f[0] = 1.0;
  for (int k = 1; k <= kMaxDim; ++k) f[k] = f[k - 1] * k;
  return f;
}

constexpr auto kFactorials = make_factorials();

}  // namespace

double factorial(int k) {
  if (k < 0) throw Error(ErrorCode::kInvalidParams, "factorial of negative number");
  if (k > kMaxDim) throw Error(ErrorCode::kDimensionTooLarge, "factorial argument exceeds 24");
  return kFactorials[static_cast<std::size_t>(k)];
}

Complex permanent_naive(const ComplexMatrix& m) {
  check_input(m, kMaxNaiveDim, "permanent_naive");
  const int k = m.dim();
  std::array<int, kMaxNaiveDim> perm{};
  std::iota(perm.begin(), perm.begin() + k, 0);
  Complex total{};
  do {
    Complex term = 1.0;
    for (int i = 0; i < k; ++i) term *= m(i, perm[i]);
    total += term;
  } while (std::next_permutation(perm.begin(), perm.begin() + k));
  return total;
}

// Per(A) = (-1)^k sum_{S subset of cols} (-1)^{|S|} prod_i sum_{j in S} a_ij.
// Subsets are visited in Gray-code order so each step adds or removes one
// column from the running row sums.
Complex permanent_ryser(const ComplexMatrix& m) {
  check_input(m, kMaxDim, "permanent_ryser");
  const int k = m.dim();
  std::array<Complex, kMaxDim> row_sums{};
  Complex total{};
  const std::uint64_t subsets = std::uint64_t{1} << k;
  for (std::uint64_t step = 1; step < subsets; ++step) {
    const int col = std::countr_zero(step);
    const std::uint64_t gray = step ^ (step >> 1);
    if ((gray >> col) & 1U) {
      for (int i = 0; i < k; ++i) row_sums[i] += m(i, col);
    } else {
      for (int i = 0; i < k; ++i) row_sums[i] -= m(i, col);
    }
    Complex prod = row_sums[0];
    for (int i = 1; i < k; ++i) prod *= row_sums[i];
    if (std::popcount(gray) & 1) {
      total -= prod;
    } else {
      total += prod;
    }
  }
  return (k & 1) ? -total : total;
}

std::vector<Minor> first_row_minors(const ComplexMatrix& m) {
  const int k = m.dim();
  if (k < 2) throw Error(ErrorCode::kDimensionTooSmall, "first_row_minors needs dim >= 2");
  std::vector<Minor> minors;
  minors.reserve(static_cast<std::size_t>(k));
  for (int removed = 0; removed < k; ++removed) {
    ComplexMatrix sub(k - 1);
    for (int row = 1; row < k; ++row) {
      int out_col = 0;
      for (int col = 0; col < k; ++col) {
        if (col == removed) continue;
        sub(row - 1, out_col++) = m(row, col);
      }
    }
    minors.push_back(Minor{k, removed, std::move(sub)});
  }
  return minors;
}

}  // namespace ptest
