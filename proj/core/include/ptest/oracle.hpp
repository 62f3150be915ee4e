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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ptest/ensemble.hpp"
#include "ptest/matrix.hpp"

namespace ptest {

// A family {O_k}, 1 <= k <= max_dim, of functions from k x k complex matrices
// to complex numbers. `query` validates the dimension and tallies the call;
// subclasses implement `evaluate`.
class OracleFamily {
 public:
  explicit OracleFamily(int max_dim);
  virtual ~OracleFamily() = default;

  OracleFamily(const OracleFamily&) = delete;
  OracleFamily& operator=(const OracleFamily&) = delete;

  int max_dim() const noexcept { return max_dim_; }

  // Thread-safe for every built-in family.
  Complex query(int k, const ComplexMatrix& m);

  std::uint64_t query_count(int k) const;
  std::uint64_t total_queries() const;
  void reset_counts();

  virtual std::string describe() const = 0;

 protected:
  virtual Complex evaluate(int k, const ComplexMatrix& m) = 0;

 private:
  int max_dim_;
  std::vector<std::atomic<std::uint64_t>> counts_;
};

enum class OracleKind {
  kExact,
  kAdditiveNoise,
  kZero,
  kScaled,
  kCorruptedFraction,
  kHeavyTail,
  kAffineShift,
  kRemote,
};

struct OracleSpec {
  OracleKind kind = OracleKind::kExact;
  double noise_delta = 0.0;  // additive_noise: error radius in units of sqrt(k!)
  bool worst_case = false;   // additive_noise: put every error on the boundary
  double alpha = 1.0;        // scaled
  double eta = 0.0;          // corrupted_fraction: corrupted mass
  double magnitude = 0.0;    // corrupted_fraction / heavy_tail: M
  double probability = 0.0;  // heavy_tail: p
  double tail_T = 0.0;       // heavy_tail: threshold T the spikes are scaled by
  double beta = 0.0;         // affine_shift
  std::string endpoint;      // remote: "tcp:HOST:PORT" or a shell command
  int max_dim = 24;
  std::chrono::milliseconds timeout{10000};  // remote, per query

  void validate() const;
};

// Textual form used by the CLI:
//   exact | zero | noise:DELTA | noise-worst:DELTA | scaled:ALPHA
//   corrupt:ETA:M | heavy:P:M[:T] | shift:BETA | remote:ENDPOINT
OracleSpec parse_oracle_spec(std::string_view text);
std::string to_string(const OracleSpec& spec);
std::string_view to_string(OracleKind kind);

// Built-in families are deterministic functions of (k, X, spec, sampler
// seed/stream): any pseudo-randomness is drawn from a hash of the bits of X.
std::unique_ptr<OracleFamily> make_oracle(const OracleSpec& spec, const EnsembleSampler& sampler);

// 64-bit hash of (k, entries of X) under a construction seed.
std::uint64_t hash_matrix(std::uint64_t seed, const ComplexMatrix& m) noexcept;

// Uniform [0,1) value attached to a matrix hash; distinct salts are independent.
double hash_uniform(std::uint64_t hash, std::uint64_t salt) noexcept;

}  // namespace ptest
