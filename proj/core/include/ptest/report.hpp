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

#include <string>
#include <string_view>

#include "ptest/tester.hpp"

namespace ptest {

// JSON form of a TestReport. Non-finite residuals are written as the strings
// "inf", "-inf", "nan". With include_timing = false the "timing" object
// (timestamp, wall time) is omitted, leaving only content that is a pure
// function of (params, oracle, seed).
std::string report_to_json(const TestReport& report, bool include_timing = true);

// Inverse of report_to_json; throws Error(kInvalidParams) on malformed input.
TestReport report_from_json(std::string_view text);

// One row per stage k, header first, 17 significant digits.
std::string report_to_csv(const TestReport& report);

// Shortest round-trip decimal form, as used in CSV cells.
std::string format_double(double x);

}  // namespace ptest
