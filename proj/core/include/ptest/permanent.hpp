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

#include <vector>

#include "ptest/matrix.hpp"

namespace ptest {

inline constexpr int kMaxNaiveDim = 10;
inline constexpr int kMaxDim = 24;

// Explicit sum over all k! permutations. Reference implementation; dim <= 10.
Complex permanent_naive(const ComplexMatrix& m);

// Ryser inclusion-exclusion with Gray-code column updates, O(k 2^k); dim <= 24.
Complex permanent_ryser(const ComplexMatrix& m);

// Minors X_1..X_k of the first-row expansion, in column order.
std::vector<Minor> first_row_minors(const ComplexMatrix& m);

// k! in double precision for 0 <= k <= 24.
double factorial(int k);

}  // namespace ptest
