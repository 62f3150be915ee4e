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

#include "ptest/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "ptest/error.hpp"

namespace ptest {
namespace {

using nlohmann::json;

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw Error(ErrorCode::kInvalidParams, "report: expected a number, got " + j.dump());
}

json summary_json(const ResidualSummary& s) {
  return {{"count", s.count}, {"mean", number(s.mean)}, {"max", number(s.max)}};
}

ResidualSummary summary_from(const json& j) {
  return {j.at("count").get<std::uint64_t>(), read_number(j.at("mean")), read_number(j.at("max"))};
}

json failure_json(const SubtestFailure& f) {
  return {{"k", f.k},
          {"test", std::string(to_string(f.kind))},
          {"iteration", f.iteration},
          {"sample_stream", f.sample_stream},
          {"residual", number(f.residual)},
          {"reason", f.reason}};
}

SubtestFailure failure_from(const json& j) {
  SubtestFailure f;
  f.k = j.at("k").get<int>();
  const auto test = j.at("test").get<std::string>();
  if (test != "linearity" && test != "tail") throw Error(ErrorCode::kInvalidParams, "report: bad test kind " + test);
  f.kind = test == "linearity" ? SubtestKind::kLinearity : SubtestKind::kTail;
  f.iteration = j.at("iteration").get<std::uint64_t>();
  f.sample_stream = j.at("sample_stream").get<std::uint64_t>();
  f.residual = read_number(j.at("residual"));
  f.reason = j.at("reason").get<std::string>();
  return f;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string report_to_json(const TestReport& r, bool include_timing) {
  json params = {{"n", r.params.n}, {"delta", r.params.delta}, {"c", r.params.c}, {"T", number(r.T)}, {"d", r.d}};
  params["override_d"] = r.params.override_d ? json(*r.params.override_d) : json(nullptr);
  params["override_T"] = r.params.override_T ? json(*r.params.override_T) : json(nullptr);

  json stages = json::array();
  for (const StageSummary& s : r.stages) {
    stages.push_back({{"k", s.k},
                      {"linearity", summary_json(s.linearity)},
                      {"tail", summary_json(s.tail)},
                      {"linearity_failures", s.linearity_failures},
                      {"tail_failures", s.tail_failures},
                      {"queries", s.queries}});
  }
  json failures = json::array();
  for (const SubtestFailure& f : r.failures) failures.push_back(failure_json(f));

  json j = {{"verdict", std::string(to_string(r.verdict))},
            {"reject_cause", r.reject_cause ? failure_json(*r.reject_cause) : json(nullptr)},
            {"params", std::move(params)},
            {"theorem_parameters", r.theorem_parameters},
            {"precondition_warning", r.precondition_warning},
            {"oracle", r.oracle},
            {"mode", r.mode},
            {"seed", r.seed},
            {"total_queries", r.total_queries},
            {"query_budget", r.query_budget},
            {"subtests_executed", r.subtests_executed},
            {"stages", std::move(stages)},
            {"failures", std::move(failures)},
            {"version", r.version}};
  if (include_timing) j["timing"] = {{"timestamp", r.timestamp}, {"wall_time_seconds", r.wall_time_seconds}};
  return j.dump(2);
}

TestReport report_from_json(std::string_view text) {
  const json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kInvalidParams, "report: not a JSON object");
  try {
    TestReport r;
    const auto verdict = j.at("verdict").get<std::string>();
    if (verdict != "Accept" && verdict != "Reject") throw Error(ErrorCode::kInvalidParams, "report: bad verdict");
    r.verdict = verdict == "Accept" ? Verdict::kAccept : Verdict::kReject;
    if (!j.at("reject_cause").is_null()) r.reject_cause = failure_from(j.at("reject_cause"));

    const json& p = j.at("params");
    r.params.n = p.at("n").get<int>();
    r.params.delta = p.at("delta").get<double>();
    r.params.c = p.at("c").get<double>();
    if (!p.at("override_d").is_null()) r.params.override_d = p.at("override_d").get<std::uint64_t>();
    if (!p.at("override_T").is_null()) r.params.override_T = p.at("override_T").get<double>();
    r.T = read_number(p.at("T"));
    r.d = p.at("d").get<std::uint64_t>();

    r.theorem_parameters = j.at("theorem_parameters").get<bool>();
    r.precondition_warning = j.at("precondition_warning").get<bool>();
    r.oracle = j.at("oracle").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.total_queries = j.at("total_queries").get<std::uint64_t>();
    r.query_budget = j.at("query_budget").get<std::uint64_t>();
    r.subtests_executed = j.at("subtests_executed").get<std::uint64_t>();
    r.version = j.at("version").get<std::string>();
    for (const json& s : j.at("stages")) {
      StageSummary stage;
      stage.k = s.at("k").get<int>();
      stage.linearity = summary_from(s.at("linearity"));
      stage.tail = summary_from(s.at("tail"));
      stage.linearity_failures = s.at("linearity_failures").get<std::uint64_t>();
      stage.tail_failures = s.at("tail_failures").get<std::uint64_t>();
      stage.queries = s.at("queries").get<std::uint64_t>();
      r.stages.push_back(stage);
    }
    for (const json& f : j.at("failures")) r.failures.push_back(failure_from(f));
    if (auto t = j.find("timing"); t != j.end()) {
      r.timestamp = t->at("timestamp").get<std::string>();
      r.wall_time_seconds = t->at("wall_time_seconds").get<double>();
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidParams, std::string("report: ") + e.what());
  }
}

std::string report_to_csv(const TestReport& r) {
  std::ostringstream out;
  out << "verdict,seed,k,linearity_count,linearity_mean,linearity_max,linearity_failures,"
         "tail_count,tail_mean,tail_max,tail_failures,queries\n";
  for (const StageSummary& s : r.stages) {
    out << to_string(r.verdict) << ',' << r.seed << ',' << s.k << ',' << s.linearity.count << ','
        << format_double(s.linearity.mean) << ',' << format_double(s.linearity.max) << ',' << s.linearity_failures
        << ',' << s.tail.count << ',' << format_double(s.tail.mean) << ',' << format_double(s.tail.max) << ','
        << s.tail_failures << ',' << s.queries << '\n';
  }
  return out.str();
}

}  // namespace ptest
