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

#include "ptest/oracle.hpp"
#include "ptest/tester.hpp"

namespace ptest::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;   // Reject, or a diagnostic ceiling exceeded
inline constexpr int kExitUsage = 2;  // bad flags, protocol or connection errors

enum class Format { kJson, kCsv };

struct RunConfig {
  std::string command;
  int n = 0;
  double delta = 0.0;
  double c = 0.0;
  std::optional<std::uint64_t> override_d;
  std::optional<double> override_T;
  std::string oracle;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  std::vector<int> ks;
  std::vector<double> Ts;
  double eta = 0.0;
  int workers = 1;
  bool run_to_completion = false;
  int max_dim = 24;
  std::optional<std::uint16_t> port;
  int timeout_ms = 10000;
  std::optional<std::string> output_path;
  Format format = Format::kJson;
};

int cmd_test(const RunConfig& config);
int cmd_serve(const RunConfig& config);
int cmd_moments(const RunConfig& config);
int cmd_tails(const RunConfig& config);
int cmd_diagnose(const RunConfig& config);
int cmd_budget(const RunConfig& config);

// Parses argv, dispatches, and maps every error onto the exit-code contract.
int run(int argc, char** argv);

}  // namespace ptest::cli
