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
#include <span>
#include <vector>

#include "ptest/ensemble.hpp"
#include "ptest/oracle.hpp"
#include "ptest/tester.hpp"

namespace ptest {

inline constexpr int kMaxDiagnosticDim = 10;
inline constexpr std::uint64_t kBatchCount = 100;

// Mean and batch-means standard error of a sample, using kBatchCount
// contiguous batches. Needs at least kBatchCount values.
struct BatchMeans {
  double mean = 0.0;
  double std_error = 0.0;
};
BatchMeans batch_means(std::span<const double> values);

// Empirical moments of Per_k(X) over the Gaussian ensemble. Sample i uses
// sampler.derive(i), so results do not depend on the worker count.
struct MomentEstimate {
  int k = 0;
  std::uint64_t samples = 0;
  Complex mean;
  double second_moment = 0.0;  // E|Per|^2
  double fourth_moment = 0.0;  // E|Per|^4
  double std_error_mean_re = 0.0;
  double std_error_mean_im = 0.0;
  double std_error_second = 0.0;
  double std_error_fourth = 0.0;

  // Ratios to k! and (k+1)(k!)^2, with matching standard errors.
  double second_ratio() const;
  double fourth_ratio() const;
  double second_ratio_std_error() const;
  double fourth_ratio_std_error() const;
};

MomentEstimate estimate_moments(int k, std::uint64_t num_samples, const EnsembleSampler& sampler, int workers = 1);

// Fraction of samples with |Per_k(X)| > T sqrt(k!), next to the fourth-moment
// bound (k+1)/T^4.
struct TailEstimate {
  int k = 0;
  double T = 0.0;
  std::uint64_t samples = 0;
  double probability = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
};

TailEstimate tail_probability(int k, double T, std::uint64_t num_samples, const EnsembleSampler& sampler,
                              int workers = 1);

struct IndicatorFlags {
  bool lin = false;   // stage-k linearity predicate holds on X
  bool tail = false;  // |O_k(X)|^2 <= T^2 k!
  bool perm = false;  // |Per_k(X)|^2 <= T^2 k!
  bool combined = false;
};

IndicatorFlags indicator_flags(OracleFamily& oracles, int k, const ComplexMatrix& x, const TesterParams& params);

// Monte Carlo estimate of E[1_k(X) |O_k(X) - Per_k(X)|^2] / k!, reported
// against the ceiling (2 n k delta)^2, plus the rates of each indicator
// against the floor 1 - delta^4 c / (64 n).
struct SoundnessEstimate {
  int k = 0;
  std::uint64_t samples = 0;
  double lin_rate = 0.0;
  double tail_rate = 0.0;
  double perm_rate = 0.0;
  double indicator_rate = 0.0;
  double indicator_std_error = 0.0;
  double indicator_floor = 0.0;
  double conditional_sq_error = 0.0;
  double std_error = 0.0;
  double ceiling = 0.0;
};

SoundnessEstimate conditional_sq_error(OracleFamily& oracles, int k, std::uint64_t num_samples,
                                       const TesterParams& params, const EnsembleSampler& sampler, int workers = 1);

// sqrt of the mean of `normalized_sq_errors` after dropping the largest
// floor(eta * size) values. For an empirical measure this attains the
// infimum over sets of mass >= 1 - eta.
double trimmed_rms(std::vector<double> normalized_sq_errors, double eta);

// Empirical err_{2,eta}(O_k) / sqrt(k!).
double trimmed_rms_error(OracleFamily& oracles, int k, double eta, std::uint64_t num_samples,
                         const EnsembleSampler& sampler, int workers = 1);

}  // namespace ptest
