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

#include "ptest/tester.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>

#include "parallel.hpp"
#include "ptest/error.hpp"
#include "ptest/permanent.hpp"

#ifndef PTEST_VERSION_STRING
#define PTEST_VERSION_STRING "unknown"
#endif

namespace ptest {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_unit_interval(double x) { return x > 0.0 && x <= 1.0; }

// ceil() that ignores rounding noise just above an integer.
std::uint64_t ceil_count(double x) {
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<std::uint64_t>(nearest);
  return static_cast<std::uint64_t>(std::ceil(x));
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

SubtestOutcome judge(Complex diff, double threshold) {
  const double raw = std::norm(diff);
  if (!std::isfinite(raw)) return {false, kInf};
  return {raw <= threshold, raw / threshold};
}

}  // namespace

DerivedParameters compute_parameters(int n, double delta, double c) {
  if (n < 1) throw Error(ErrorCode::kInvalidParams, "n must be >= 1");
  if (!in_unit_interval(delta)) throw Error(ErrorCode::kInvalidParams, "delta must lie in (0, 1]");
  if (!in_unit_interval(c)) throw Error(ErrorCode::kInvalidParams, "c must lie in (0, 1]");
  const double nn = static_cast<double>(n);
  DerivedParameters out;
  out.T = 4.0 * nn / (delta * std::sqrt(c));
  const double d = 192.0 * nn * nn / (delta * delta * delta * delta * c);
  if (!(d < 1.8e19)) throw Error(ErrorCode::kInvalidParams, "repetition count d overflows 64 bits");
  out.d = ceil_count(d);
  return out;
}

TesterParams TesterParams::make(int n, double delta, double c, std::optional<std::uint64_t> override_d,
                                std::optional<double> override_T) {
  TesterParams p{n, delta, c, override_d, override_T};
  p.validate();
  return p;
}

void TesterParams::validate() const {
  (void)compute_parameters(n, delta, c);
  if (n > kMaxDim) throw Error(ErrorCode::kInvalidParams, "n must be <= 24");
  if (override_d && *override_d == 0) throw Error(ErrorCode::kInvalidParams, "override_d must be positive");
  if (override_T && !(std::isfinite(*override_T) && *override_T > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "override_T must be finite and positive");
  }
}

double TesterParams::T() const { return override_T ? *override_T : compute_parameters(n, delta, c).T; }

std::uint64_t TesterParams::d() const { return override_d ? *override_d : compute_parameters(n, delta, c).d; }

bool TesterParams::precondition_warning() const {
  const double log_term = std::log(1.0 / (c * delta));
  return log_term > 0.0 && static_cast<double>(n) < std::sqrt(log_term);
}

std::string_view to_string(SubtestKind kind) { return kind == SubtestKind::kLinearity ? "linearity" : "tail"; }

std::string_view to_string(Verdict verdict) { return verdict == Verdict::kAccept ? "Accept" : "Reject"; }

SubtestOutcome linearity_test(OracleFamily& oracles, int n, int k, double delta, EnsembleSampler& sampler) {
  if (k < 1 || k > n) throw Error(ErrorCode::kInvalidParams, "linearity_test needs 1 <= k <= n");
  const ComplexMatrix x = sample_matrix(sampler, k);
  const double scale = static_cast<double>(n) * n * delta * delta;
  if (k == 1) return judge(oracles.query(1, x) - x(0, 0), scale);

  const Complex top = oracles.query(k, x);
  Complex expansion{};
  for (const Minor& minor : first_row_minors(x)) {
    expansion += x(0, minor.removed_column) * oracles.query(k - 1, minor.matrix);
  }
  return judge(top - expansion, scale * factorial(k));
}

SubtestOutcome tail_test(OracleFamily& oracles, int k, double T, EnsembleSampler& sampler) {
  if (k < 1) throw Error(ErrorCode::kInvalidParams, "tail_test needs k >= 1");
  if (!(T > 0.0)) throw Error(ErrorCode::kInvalidParams, "tail_test needs T > 0");
  const ComplexMatrix x = sample_matrix(sampler, k);
  return judge(oracles.query(k, x), T * T * factorial(k));
}

EnsembleSampler subtest_sampler(const EnsembleSampler& root, int k, SubtestKind kind, std::uint64_t iteration) {
  return root.derive(static_cast<std::uint64_t>(k)).derive(static_cast<std::uint64_t>(kind)).derive(iteration);
}

std::uint64_t query_budget(int n, std::uint64_t d) {
  std::uint64_t total = 0;
  for (int k = 1; k <= n; ++k) total += d * (k == 1 ? 1U : static_cast<std::uint64_t>(k) + 1U) + d;
  return total;
}

TestReport run_ptest(OracleFamily& oracles, const TesterParams& params, const EnsembleSampler& root,
                     const RunOptions& options) {
  params.validate();
  if (oracles.max_dim() < params.n) {
    throw Error(ErrorCode::kInvalidParams, "oracle family max_dim " + std::to_string(oracles.max_dim()) +
                                               " is below n = " + std::to_string(params.n));
  }
  if (options.block_size == 0) throw Error(ErrorCode::kInvalidParams, "block_size must be positive");

  const auto started = std::chrono::steady_clock::now();
  TestReport report;
  report.params = params;
  report.T = params.T();
  report.d = params.d();
  report.theorem_parameters = params.theorem_parameters();
  report.precondition_warning = params.precondition_warning();
  report.oracle = oracles.describe();
  report.mode = options.mode == RunMode::kShortCircuit ? "short-circuit" : "run-to-completion";
  report.query_budget = query_budget(params.n, report.d);
  report.seed = root.seed();
  report.version = PTEST_VERSION_STRING;
  report.timestamp = utc_timestamp();

  const std::uint64_t block = options.block_size;
  std::vector<SubtestOutcome> outcomes(static_cast<std::size_t>(std::min(block, report.d)));
  std::vector<std::string> errors(outcomes.size());
  const std::uint64_t queries_before = oracles.total_queries();
  bool stop = false;

  for (int k = 1; k <= params.n && !stop; ++k) {
    StageSummary stage;
    stage.k = k;
    const std::uint64_t stage_queries_before = oracles.total_queries();
    for (SubtestKind kind : {SubtestKind::kLinearity, SubtestKind::kTail}) {
      if (stop) break;
      ResidualSummary& summary = kind == SubtestKind::kLinearity ? stage.linearity : stage.tail;
      std::uint64_t& failures = kind == SubtestKind::kLinearity ? stage.linearity_failures : stage.tail_failures;
      double sum = 0.0;
      for (std::uint64_t block_start = 0; block_start < report.d && !stop; block_start += block) {
        const std::uint64_t count = std::min(block, report.d - block_start);
        detail::parallel_for(count, options.workers, [&](std::uint64_t lo, std::uint64_t hi) {
          for (std::uint64_t i = lo; i < hi; ++i) {
            EnsembleSampler sampler = subtest_sampler(root, k, kind, block_start + i);
            errors[i].clear();
            try {
              outcomes[i] = kind == SubtestKind::kLinearity
                                ? linearity_test(oracles, params.n, k, params.delta, sampler)
                                : tail_test(oracles, k, report.T, sampler);
            } catch (const std::exception& e) {
              outcomes[i] = {false, kInf};
              errors[i] = e.what();
            }
          }
        });

        bool block_failed = false;
        for (std::uint64_t i = 0; i < count; ++i) {
          const SubtestOutcome& outcome = outcomes[i];
          ++summary.count;
          sum += outcome.residual;
          summary.max = std::max(summary.max, outcome.residual);
          if (outcome.pass) continue;
          block_failed = true;
          ++failures;
          SubtestFailure failure;
          failure.k = k;
          failure.kind = kind;
          failure.iteration = block_start + i;
          failure.sample_stream = subtest_sampler(root, k, kind, block_start + i).stream_id();
          failure.residual = outcome.residual;
          failure.reason = !errors[i].empty()                 ? errors[i]
                           : std::isinf(outcome.residual) ? "non-finite"
                                                              : "threshold";
          if (!report.reject_cause) report.reject_cause = failure;
          if (options.mode == RunMode::kRunToCompletion && report.failures.size() < kMaxRecordedFailures) {
            report.failures.push_back(std::move(failure));
          }
        }
        report.subtests_executed += count;
        if (block_failed && options.mode == RunMode::kShortCircuit) stop = true;
      }
      summary.mean = summary.count > 0 ? sum / static_cast<double>(summary.count) : 0.0;
    }
    stage.queries = oracles.total_queries() - stage_queries_before;
    report.stages.push_back(stage);
  }

  report.verdict = report.reject_cause ? Verdict::kReject : Verdict::kAccept;
  report.total_queries = oracles.total_queries() - queries_before;
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace ptest
