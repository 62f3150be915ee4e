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
#include <optional>
#include <string>
#include <vector>

#include "ptest/ensemble.hpp"
#include "ptest/oracle.hpp"

namespace ptest {

struct DerivedParameters {
  double T = 0.0;
  std::uint64_t d = 0;
};

// T = 4n / (delta sqrt(c)),  d = ceil(192 n^2 / (delta^4 c)).
// Throws Error(kInvalidParams) unless n >= 1 and delta, c in (0, 1].
DerivedParameters compute_parameters(int n, double delta, double c);

struct TesterParams {
  int n = 1;
  double delta = 1.0;
  double c = 1.0;
  std::optional<std::uint64_t> override_d;
  std::optional<double> override_T;

  // Validates and returns the parameters; throws Error(kInvalidParams).
  static TesterParams make(int n, double delta, double c, std::optional<std::uint64_t> override_d = std::nullopt,
                           std::optional<double> override_T = std::nullopt);

  void validate() const;

  double T() const;
  std::uint64_t d() const;
  DerivedParameters theorem_values() const { return compute_parameters(n, delta, c); }

  // False whenever an override replaces a derived value.
  bool theorem_parameters() const { return !override_d && !override_T; }

  // Set when n < sqrt(log(1 / (c delta))), i.e. the size condition of the
  // completeness/soundness guarantees is not met.
  bool precondition_warning() const;
};

enum class SubtestKind : std::uint8_t { kLinearity = 0, kTail = 1 };
std::string_view to_string(SubtestKind kind);

struct SubtestOutcome {
  bool pass = false;
  // Linearity: |O_k(X) - sum_i x_1i O_{k-1}(X_i)|^2 / (n^2 delta^2 k!)   (k >= 2)
  //            |O_1(X) - X|^2 / (n^2 delta^2)                            (k == 1)
  // Tail:      |O_k(X)|^2 / (T^2 k!)
  // +inf when the oracle returned NaN/Inf.
  double residual = 0.0;
};

// One LinearityTest: draws X ~ N(0,1)_C^{k x k} from `sampler`, queries O_k
// once and (for k >= 2) O_{k-1} on each first-row minor. Pass iff the raw
// squared residual is <= its threshold. Oracle exceptions propagate.
SubtestOutcome linearity_test(OracleFamily& oracles, int n, int k, double delta, EnsembleSampler& sampler);

// One TailTest: pass iff |O_k(X)|^2 <= T^2 k!.
SubtestOutcome tail_test(OracleFamily& oracles, int k, double T, EnsembleSampler& sampler);

// Stream used for sub-test (k, kind, iteration): root.derive(k).derive(kind).derive(iteration).
EnsembleSampler subtest_sampler(const EnsembleSampler& root, int k, SubtestKind kind, std::uint64_t iteration);

// Worst-case number of oracle queries:
//   sum_{k=1..n} d * (k == 1 ? 1 : k + 1) + d.
std::uint64_t query_budget(int n, std::uint64_t d);
inline std::uint64_t query_budget(const TesterParams& p) { return query_budget(p.n, p.d()); }

enum class Verdict { kAccept, kReject };
std::string_view to_string(Verdict verdict);

struct SubtestFailure {
  int k = 0;
  SubtestKind kind = SubtestKind::kLinearity;
  std::uint64_t iteration = 0;
  std::uint64_t sample_stream = 0;  // stream_id of the sampler that drew X
  double residual = 0.0;
  std::string reason;  // "threshold", "non-finite", or an oracle error message

  friend bool operator==(const SubtestFailure&, const SubtestFailure&) = default;
};

struct ResidualSummary {
  std::uint64_t count = 0;
  double mean = 0.0;
  double max = 0.0;

  friend bool operator==(const ResidualSummary&, const ResidualSummary&) = default;
};

struct StageSummary {
  int k = 0;
  ResidualSummary linearity;
  ResidualSummary tail;
  std::uint64_t linearity_failures = 0;
  std::uint64_t tail_failures = 0;
  std::uint64_t queries = 0;

  friend bool operator==(const StageSummary&, const StageSummary&) = default;
};

struct TestReport {
  Verdict verdict = Verdict::kAccept;
  std::optional<SubtestFailure> reject_cause;
  // Run-to-completion mode: failures in key order, capped at kMaxRecordedFailures.
  std::vector<SubtestFailure> failures;
  std::vector<StageSummary> stages;

  TesterParams params;
  double T = 0.0;
  std::uint64_t d = 0;
  bool theorem_parameters = true;
  bool precondition_warning = false;
  std::string oracle;
  std::string mode;
  std::uint64_t total_queries = 0;
  std::uint64_t query_budget = 0;
  std::uint64_t subtests_executed = 0;
  std::uint64_t seed = 0;
  std::string version;

  // Not part of the deterministic content.
  double wall_time_seconds = 0.0;
  std::string timestamp;
};

inline constexpr std::size_t kMaxRecordedFailures = 1000;

enum class RunMode { kShortCircuit, kRunToCompletion };

struct RunOptions {
  RunMode mode = RunMode::kShortCircuit;
  int workers = 1;
  // Sub-tests are executed in fixed blocks of this many iterations; results
  // are folded in key order, so reports do not depend on `workers`.
  std::uint64_t block_size = 4096;
};

// PTest: for k = 1..n run d LinearityTests then d TailTests. Short-circuit
// mode stops after the block containing the first failure; the recorded
// cause is always the failure with the smallest (k, kind, iteration) key.
// Oracle errors and non-finite answers are recorded as failures.
TestReport run_ptest(OracleFamily& oracles, const TesterParams& params, const EnsembleSampler& root,
                     const RunOptions& options = {});

}  // namespace ptest
