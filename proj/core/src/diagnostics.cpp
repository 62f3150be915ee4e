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

#include "ptest/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "parallel.hpp"
#include "ptest/error.hpp"
#include "ptest/permanent.hpp"

namespace ptest {
namespace {

void check_dim(int k) {
  if (k < 1) throw Error(ErrorCode::kDimensionTooSmall, "k must be positive");
  if (k > kMaxDiagnosticDim) {
    throw Error(ErrorCode::kDimensionTooLarge, "diagnostics need exact permanents; k = " + std::to_string(k) + " > 10");
  }
}

void check_samples(std::uint64_t n) {
  if (n < kBatchCount) throw Error(ErrorCode::kInvalidParams, "need at least 100 samples for batch means");
}

// Fills out[i] = fn(sampler.derive(i)) for i in [0, size).
template <typename T, typename Fn>
void map_samples(std::vector<T>& out, const EnsembleSampler& sampler, int workers, Fn&& fn) {
  detail::parallel_for(out.size(), workers, [&](std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t i = lo; i < hi; ++i) {
      EnsembleSampler s = sampler.derive(i);
      out[i] = fn(s);
    }
  });
}

}  // namespace

BatchMeans batch_means(std::span<const double> values) {
  const std::uint64_t n = values.size();
  check_samples(n);
  std::vector<double> means(kBatchCount);
  double total = 0.0;
  for (std::uint64_t b = 0; b < kBatchCount; ++b) {
    const std::uint64_t lo = n * b / kBatchCount;
    const std::uint64_t hi = n * (b + 1) / kBatchCount;
    double sum = 0.0;
    for (std::uint64_t i = lo; i < hi; ++i) sum += values[i];
    total += sum;
    means[b] = sum / static_cast<double>(hi - lo);
  }
  BatchMeans out;
  out.mean = total / static_cast<double>(n);
  double ss = 0.0;
  for (double m : means) ss += (m - out.mean) * (m - out.mean);
  out.std_error = std::sqrt(ss / static_cast<double>(kBatchCount * (kBatchCount - 1)));
  return out;
}

double MomentEstimate::second_ratio() const { return second_moment / factorial(k); }
double MomentEstimate::second_ratio_std_error() const { return std_error_second / factorial(k); }
double MomentEstimate::fourth_ratio() const {
  const double f = factorial(k);
  return fourth_moment / ((k + 1) * f * f);
}
double MomentEstimate::fourth_ratio_std_error() const {
  const double f = factorial(k);
  return std_error_fourth / ((k + 1) * f * f);
}

MomentEstimate estimate_moments(int k, std::uint64_t num_samples, const EnsembleSampler& sampler, int workers) {
  check_dim(k);
  check_samples(num_samples);
  std::vector<Complex> perms(num_samples);
  map_samples(perms, sampler, workers, [k](EnsembleSampler& s) { return permanent_ryser(sample_matrix(s, k)); });

  std::vector<double> re(num_samples), im(num_samples), second(num_samples), fourth(num_samples);
  for (std::uint64_t i = 0; i < num_samples; ++i) {
    re[i] = perms[i].real();
    im[i] = perms[i].imag();
    second[i] = std::norm(perms[i]);
    fourth[i] = second[i] * second[i];
  }
  const BatchMeans re_bm = batch_means(re), im_bm = batch_means(im);
  const BatchMeans second_bm = batch_means(second), fourth_bm = batch_means(fourth);

  MomentEstimate est;
  est.k = k;
  est.samples = num_samples;
  est.mean = {re_bm.mean, im_bm.mean};
  est.std_error_mean_re = re_bm.std_error;
  est.std_error_mean_im = im_bm.std_error;
  est.second_moment = second_bm.mean;
  est.std_error_second = second_bm.std_error;
  est.fourth_moment = fourth_bm.mean;
  est.std_error_fourth = fourth_bm.std_error;
  return est;
}

TailEstimate tail_probability(int k, double T, std::uint64_t num_samples, const EnsembleSampler& sampler,
                              int workers) {
  check_dim(k);
  check_samples(num_samples);
  if (!(T >= 0.0) || !std::isfinite(T)) throw Error(ErrorCode::kInvalidParams, "T must be finite and >= 0");
  const double threshold = T * T * factorial(k);
  std::vector<double> exceed(num_samples);
  map_samples(exceed, sampler, workers, [k, threshold](EnsembleSampler& s) {
    return std::norm(permanent_ryser(sample_matrix(s, k))) > threshold ? 1.0 : 0.0;
  });
  const BatchMeans bm = batch_means(exceed);
  TailEstimate est;
  est.k = k;
  est.T = T;
  est.samples = num_samples;
  est.probability = bm.mean;
  est.std_error = bm.std_error;
  est.bound = T > 0.0 ? (k + 1) / (T * T * T * T) : 1.0;
  return est;
}

IndicatorFlags indicator_flags(OracleFamily& oracles, int k, const ComplexMatrix& x, const TesterParams& params) {
  params.validate();
  if (k < 1 || k > params.n) throw Error(ErrorCode::kInvalidParams, "indicator_flags needs 1 <= k <= n");
  if (x.dim() != k) throw Error(ErrorCode::kInvalidParams, "matrix dimension does not match k");
  const double n = params.n;
  const double kfact = factorial(k);
  const double T = params.T();
  const double tail_threshold = T * T * kfact;

  const Complex top = oracles.query(k, x);
  Complex reference;
  double lin_threshold = n * n * params.delta * params.delta;
  if (k == 1) {
    reference = x(0, 0);
  } else {
    lin_threshold *= kfact;
    for (const Minor& minor : first_row_minors(x)) {
      reference += x(0, minor.removed_column) * oracles.query(k - 1, minor.matrix);
    }
  }
  IndicatorFlags flags;
  flags.lin = std::norm(top - reference) <= lin_threshold;
  flags.tail = std::norm(top) <= tail_threshold;
  flags.perm = std::norm(permanent_ryser(x)) <= tail_threshold;
  flags.combined = flags.lin && flags.tail && flags.perm;
  return flags;
}

SoundnessEstimate conditional_sq_error(OracleFamily& oracles, int k, std::uint64_t num_samples,
                                       const TesterParams& params, const EnsembleSampler& sampler, int workers) {
  check_dim(k);
  check_samples(num_samples);
  params.validate();
  struct Sample {
    IndicatorFlags flags;
    double error = 0.0;
  };
  const double kfact = factorial(k);
  std::vector<Sample> samples(num_samples);
  map_samples(samples, sampler, workers, [&](EnsembleSampler& s) {
    const ComplexMatrix x = sample_matrix(s, k);
    Sample out;
    out.flags = indicator_flags(oracles, k, x, params);
    if (out.flags.combined) {
      const double err = std::norm(oracles.query(k, x) - permanent_ryser(x)) / kfact;
      out.error = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
    }
    return out;
  });

  std::vector<double> combined(num_samples), errors(num_samples);
  double lin = 0.0, tail = 0.0, perm = 0.0;
  for (std::uint64_t i = 0; i < num_samples; ++i) {
    const Sample& s = samples[i];
    lin += s.flags.lin;
    tail += s.flags.tail;
    perm += s.flags.perm;
    combined[i] = s.flags.combined ? 1.0 : 0.0;
    errors[i] = s.error;
  }
  const double n = static_cast<double>(num_samples);
  const BatchMeans ind = batch_means(combined);
  const BatchMeans err = batch_means(errors);
  SoundnessEstimate est;
  est.k = k;
  est.samples = num_samples;
  est.lin_rate = lin / n;
  est.tail_rate = tail / n;
  est.perm_rate = perm / n;
  est.indicator_rate = ind.mean;
  est.indicator_std_error = ind.std_error;
  const double d4 = params.delta * params.delta * params.delta * params.delta;
  est.indicator_floor = 1.0 - d4 * params.c / (64.0 * params.n);
  est.conditional_sq_error = err.mean;
  est.std_error = err.std_error;
  const double root = 2.0 * params.n * k * params.delta;
  est.ceiling = root * root;
  return est;
}

double trimmed_rms(std::vector<double> values, double eta) {
  if (!(eta >= 0.0 && eta < 1.0)) throw Error(ErrorCode::kInvalidParams, "eta must lie in [0, 1)");
  if (values.empty()) throw Error(ErrorCode::kInvalidParams, "trimmed_rms needs at least one value");
  const auto drop = static_cast<std::size_t>(std::floor(eta * static_cast<double>(values.size())));
  const std::size_t keep = values.size() - drop;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(keep - 1), values.end());
  std::sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(keep));
  double sum = 0.0;
  for (std::size_t i = 0; i < keep; ++i) sum += values[i];
  return std::sqrt(sum / static_cast<double>(keep));
}

double trimmed_rms_error(OracleFamily& oracles, int k, double eta, std::uint64_t num_samples,
                         const EnsembleSampler& sampler, int workers) {
  check_dim(k);
  if (!(eta >= 0.0 && eta < 1.0)) throw Error(ErrorCode::kInvalidParams, "eta must lie in [0, 1)");
  if (num_samples == 0) throw Error(ErrorCode::kInvalidParams, "need at least one sample");
  const double kfact = factorial(k);
  std::vector<double> errors(num_samples);
  map_samples(errors, sampler, workers, [&](EnsembleSampler& s) {
    const ComplexMatrix x = sample_matrix(s, k);
    const double err = std::norm(oracles.query(k, x) - permanent_ryser(x)) / kfact;
    return std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
  });
  return trimmed_rms(std::move(errors), eta);
}

}  // namespace ptest
