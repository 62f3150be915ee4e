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

#include <array>
#include <cstdint>

#include "ptest/matrix.hpp"

namespace ptest {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3"). Maps a 128-bit counter under a 64-bit key to 128
// pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

// SplitMix64 finalizer; used for key derivation and hashing.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Counter-based sampler for the complex Gaussian ensemble. The output
// sequence is a pure function of (seed, stream_id): block i of the stream is
// philox(counter = {i, stream_id}, key = seed).
//
// Complex entries use the unit-variance convention E|x|^2 = 1, i.e. real and
// imaginary parts are independent N(0, 1/2). The moment identities
// E|Per_k|^2 = k! and E|Per_k|^4 = (k+1)(k!)^2 hold under this convention only.
class EnsembleSampler {
 public:
  EnsembleSampler() = default;
  explicit EnsembleSampler(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Child sampler with a fresh counter; distinct labels give distinct streams.
  EnsembleSampler derive(std::uint64_t label) const noexcept;

  std::uint64_t next_u64() noexcept;
  // Uniform on [0, 1) with 53 random bits.
  double next_uniform() noexcept;
  // x = sqrt(-ln u1) * exp(2 pi i u2): Box-Muller with the 1/sqrt(2) folded in.
  Complex next_complex_gaussian() noexcept;

  friend bool operator==(const EnsembleSampler&, const EnsembleSampler&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;  // 32-bit words remaining in buffer_
};

// k x k matrix with i.i.d. standard complex Gaussian entries, row-major draw order.
ComplexMatrix sample_matrix(EnsembleSampler& sampler, int k);

inline EnsembleSampler derive_substream(const EnsembleSampler& s, std::uint64_t label) { return s.derive(label); }

}  // namespace ptest
