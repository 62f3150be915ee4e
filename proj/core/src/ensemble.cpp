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

#include "ptest/ensemble.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ptest/error.hpp"
#include "ptest/permanent.hpp"

namespace ptest {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53U;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57U;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9U;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85U;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

EnsembleSampler EnsembleSampler::derive(std::uint64_t label) const noexcept {
  // Two rounds so that (stream, label) pairs differing in either argument diverge.
  const std::uint64_t child = mix64(mix64(stream_id_ ^ 0x6A09E667F3BCC909ULL) + mix64(label));
  return EnsembleSampler(seed_, child);
}

std::uint64_t EnsembleSampler::next_u64() noexcept {
  if (buffered_ < 2) {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                              static_cast<std::uint32_t>(seed_ >> 32)};
    buffer_ = philox4x32(ctr, key);
    ++block_;
    buffered_ = 4;
  }
  const int lo_index = 4 - buffered_;
  buffered_ -= 2;
  return static_cast<std::uint64_t>(buffer_[lo_index]) | (static_cast<std::uint64_t>(buffer_[lo_index + 1]) << 32);
}

double EnsembleSampler::next_uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

Complex EnsembleSampler::next_complex_gaussian() noexcept {
  const double u1 = 1.0 - next_uniform();  // (0, 1]
  const double u2 = next_uniform();
  const double radius = std::sqrt(-std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

ComplexMatrix sample_matrix(EnsembleSampler& sampler, int k) {
  if (k < 1) throw Error(ErrorCode::kDimensionTooSmall, "sample_matrix: k must be positive");
  if (k > kMaxDim) throw Error(ErrorCode::kDimensionTooLarge, "sample_matrix: k = " + std::to_string(k) + " > 24");
  ComplexMatrix m(k);
  for (Complex& z : m.entries()) z = sampler.next_complex_gaussian();
  return m;
}

}  // namespace ptest
