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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Criterion 11 reruns 1-10 with a different worker count.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ptest/diagnostics.hpp"
#include "ptest/ensemble.hpp"
#include "ptest/oracle.hpp"
#include "ptest/permanent.hpp"
#include "ptest/report.hpp"
#include "ptest/tester.hpp"

namespace {

using namespace ptest;

struct Outcome {
  bool pass = true;
  std::string detail;
  // Verdict bits and residual summaries; compared across worker counts.
  std::vector<double> fingerprint;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

void add_report(Outcome& out, const TestReport& r) {
  out.fingerprint.push_back(r.verdict == Verdict::kAccept ? 1.0 : 0.0);
  out.fingerprint.push_back(static_cast<double>(r.total_queries));
  for (const StageSummary& s : r.stages) {
    out.fingerprint.insert(out.fingerprint.end(), {s.linearity.mean, s.linearity.max, s.tail.mean, s.tail.max,
                                                   static_cast<double>(s.linearity_failures),
                                                   static_cast<double>(s.tail_failures)});
  }
}

TestReport run(const OracleSpec& spec, const TesterParams& params, std::uint64_t seed, int workers) {
  const EnsembleSampler root(seed);
  auto oracles = make_oracle(spec, root.derive(0x0AC1E));
  RunOptions options;
  options.workers = workers;
  return run_ptest(*oracles, params, root, options);
}

Outcome kernel_equivalence(int) {
  Outcome out;
  double worst = 0.0;
  for (int k = 1; k <= 8; ++k) {
    for (std::uint64_t i = 0; i < 1000; ++i) {
      EnsembleSampler s = EnsembleSampler(101).derive(static_cast<std::uint64_t>(k)).derive(i);
      const ComplexMatrix m = sample_matrix(s, k);
      const Complex a = permanent_ryser(m);
      const Complex b = permanent_naive(m);
      const double rel = std::abs(a - b) / std::max(std::abs(b), 1e-300);
      worst = std::max(worst, rel);
    }
  }
  out.pass = worst <= 1e-9;
  out.detail = fmt("8000 matrices, worst relative difference %.3g", worst);
  out.fingerprint = {worst};
  return out;
}

Outcome self_reducibility(int) {
  Outcome out;
  double worst = 0.0;  // in units of sqrt(k!)
  for (int k = 2; k <= 8; ++k) {
    for (std::uint64_t i = 0; i < 1000; ++i) {
      EnsembleSampler s = EnsembleSampler(102).derive(static_cast<std::uint64_t>(k)).derive(i);
      const ComplexMatrix m = sample_matrix(s, k);
      Complex expansion;
      for (const Minor& minor : first_row_minors(m)) {
        expansion += m(0, minor.removed_column) * permanent_ryser(minor.matrix);
      }
      worst = std::max(worst, std::abs(permanent_ryser(m) - expansion) / std::sqrt(factorial(k)));
    }
  }
  out.pass = worst <= 1e-8;
  out.detail = fmt("7000 matrices, worst |Per - expansion|/sqrt(k!) = %.3g", worst);
  out.fingerprint = {worst};
  return out;
}

Outcome moments(int workers) {
  Outcome out;
  std::string detail;
  for (int k = 1; k <= 5; ++k) {
    const MomentEstimate m =
        estimate_moments(k, 100000, EnsembleSampler(103).derive(static_cast<std::uint64_t>(k)), workers);
    const double r2 = m.second_ratio(), r4 = m.fourth_ratio();
    const bool ok = r2 >= 0.9 && r2 <= 1.1 && r4 >= 0.8 && r4 <= 1.2 &&
                    std::abs(r2 - 1) <= 5 * m.second_ratio_std_error() &&
                    std::abs(r4 - 1) <= 5 * m.fourth_ratio_std_error();
    out.pass = out.pass && ok;
    detail += fmt(" k=%g:%.3f/%.3f", k, r2, r4);
    out.fingerprint.insert(out.fingerprint.end(), {r2, r4, m.second_ratio_std_error(), m.fourth_ratio_std_error()});
  }
  out.detail = "second/fourth ratios" + detail;
  return out;
}

Outcome tails(int workers) {
  Outcome out;
  double worst_margin = -1.0;
  for (int k = 1; k <= 5; ++k) {
    for (double T : {1.5, 2.0, 3.0, 5.0}) {
      const TailEstimate t = tail_probability(k, T, 100000, EnsembleSampler(104).derive(static_cast<std::uint64_t>(k)),
                                              workers);
      const double margin = t.probability - (t.bound + 3 * t.std_error);
      worst_margin = std::max(worst_margin, margin);
      out.pass = out.pass && margin <= 0.0;
      out.fingerprint.insert(out.fingerprint.end(), {t.probability, t.std_error});
    }
  }
  out.detail = fmt("20 grid points, max (estimate - bound - 3se) = %.4g", worst_margin);
  return out;
}

Outcome completeness_exact(int workers) {
  Outcome out;
  const TesterParams params = TesterParams::make(6, 0.5, 0.5);
  int accepted = 0;
  double worst = 0.0;
  bool budget_ok = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const TestReport r = run(OracleSpec{}, params, seed, workers);
    accepted += r.verdict == Verdict::kAccept;
    budget_ok = budget_ok && r.d == 221184 && r.total_queries == query_budget(params);
    for (const StageSummary& s : r.stages) worst = std::max(worst, s.linearity.max);
    add_report(out, r);
  }
  out.pass = params.d() == 221184 && accepted == 10 && worst <= 1e-15 && budget_ok;
  out.detail = fmt("d = %g, accepted %g/10, worst linearity residual %.3g", static_cast<double>(params.d()), accepted,
                   worst);
  return out;
}

Outcome completeness_noisy(int workers) {
  Outcome out;
  const TesterParams params = TesterParams::make(4, 0.6, 0.5, 2000);
  OracleSpec spec;
  spec.kind = OracleKind::kAdditiveNoise;
  spec.noise_delta = 0.6;
  int accepted = 0;
  bool budget_ok = true;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const TestReport r = run(spec, params, seed, workers);
    if (r.verdict == Verdict::kAccept) {
      ++accepted;
      budget_ok = budget_ok && r.total_queries == query_budget(params);
    }
    add_report(out, r);
  }
  out.pass = accepted >= 25 && budget_ok;
  out.detail = fmt("accepted %g/50 (observed rate %.2f, required >= 0.5)", accepted, accepted / 50.0);
  return out;
}

Outcome soundness_gross(int workers) {
  Outcome out;
  const TesterParams params = TesterParams::make(4, 0.3, 0.5, 500);
  std::vector<std::pair<std::string, OracleSpec>> oracles;
  OracleSpec zero;
  zero.kind = OracleKind::kZero;
  OracleSpec scaled;
  scaled.kind = OracleKind::kScaled;
  scaled.alpha = 2.0;
  OracleSpec heavy;
  heavy.kind = OracleKind::kHeavyTail;
  heavy.probability = 0.1;
  heavy.magnitude = 2.0;
  heavy.tail_T = params.T();
  OracleSpec shift;
  shift.kind = OracleKind::kAffineShift;
  shift.beta = 40.0;
  oracles = {{"zero", zero}, {"scaled", scaled}, {"heavy_tail", heavy}, {"affine_shift", shift}};
  std::string detail;
  for (const auto& [name, spec] : oracles) {
    int rejected = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const TestReport r = run(spec, params, seed, workers);
      rejected += r.verdict == Verdict::kReject;
      add_report(out, r);
    }
    out.pass = out.pass && rejected == 20;
    detail += " " + name + " " + std::to_string(rejected) + "/20";
  }
  out.detail = "rejected:" + detail;
  return out;
}

Outcome soundness_diagnostics(int workers) {
  Outcome out;
  const double delta = 0.5;
  const TesterParams params = TesterParams::make(5, delta, 0.5);
  OracleSpec spec;
  spec.kind = OracleKind::kAdditiveNoise;
  spec.noise_delta = delta;
  auto oracles = make_oracle(spec, EnsembleSampler(108));
  double min_rate = 1.0, max_ratio = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const SoundnessEstimate e = conditional_sq_error(*oracles, k, 10000, params,
                                                     EnsembleSampler(108).derive(static_cast<std::uint64_t>(k)), workers);
    const bool ok = e.indicator_rate >= e.indicator_floor - 3 * e.indicator_std_error &&
                    e.conditional_sq_error <= e.ceiling + 3 * e.std_error;
    out.pass = out.pass && ok;
    min_rate = std::min(min_rate, e.indicator_rate);
    max_ratio = std::max(max_ratio, e.conditional_sq_error / e.ceiling);
    out.fingerprint.insert(out.fingerprint.end(), {e.indicator_rate, e.conditional_sq_error, e.std_error});
  }
  out.detail = fmt("n=5 delta=0.5 c=0.5: min indicator rate %.5f, max error/ceiling %.4f", min_rate, max_ratio);
  return out;
}

Outcome query_complexity(int workers) {
  Outcome out;
  std::string detail;
  for (int n = 1; n <= 6; ++n) {
    const TesterParams params = n == 6 ? TesterParams::make(6, 0.5, 0.5, 20000) : TesterParams::make(n, 0.5, 0.5);
    for (const char* kind : {"exact", "noise"}) {
      OracleSpec spec;
      if (kind[0] == 'n') {
        spec.kind = OracleKind::kAdditiveNoise;
        spec.noise_delta = 0.5;
      }
      const TestReport r = run(spec, params, 109, workers);
      if (r.verdict == Verdict::kAccept) out.pass = out.pass && r.total_queries == query_budget(params);
      else out.pass = out.pass && r.total_queries < query_budget(params);
      add_report(out, r);
    }
    detail += " n=" + std::to_string(n) + ":" + std::to_string(query_budget(params));
  }
  out.detail = "total_queries == budget on accepted runs;" + detail;
  return out;
}

std::string run_cli(const std::string& args, int& status) {
  const std::string command = std::string(PTEST_CLI_PATH) + " " + args + " 2>/dev/null";
  std::string text;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) {
    status = -1;
    return text;
  }
  std::array<char, 8192> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) text.append(buf.data(), got);
  const int raw = pclose(pipe);
  status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return text;
}

Outcome protocol_loopback(int workers) {
  Outcome out;
  const std::string common =
      "test --n 4 --delta 0.5 --c 0.5 --seed 110 --workers " + std::to_string(workers) + " --oracle ";
  int local_status = 0, remote_status = 0;
  const std::string local = run_cli(common + "exact", local_status);
  const std::string remote = run_cli(common + "'remote:" + PTEST_CLI_PATH + " serve --oracle exact'", remote_status);
  nlohmann::json a = nlohmann::json::parse(local, nullptr, false);
  nlohmann::json b = nlohmann::json::parse(remote, nullptr, false);
  if (a.is_discarded() || b.is_discarded()) {
    out.pass = false;
    out.detail = "could not parse CLI output";
    return out;
  }
  for (auto* j : {&a, &b}) {
    j->erase("timing");
    j->erase("oracle");
  }
  out.pass = local_status == 0 && remote_status == 0 && a == b && a["verdict"] == "Accept";
  out.detail = std::string("n=4 theorem parameters, verdict ") + a["verdict"].get<std::string>() +
               (a == b ? ", reports identical" : ", reports differ");
  add_report(out, report_from_json(remote));
  return out;
}

bool close(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(std::abs(a[i] - b[i]) <= 1e-12 * std::max(1.0, std::abs(a[i])))) return false;
  }
  return true;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome(int)> fn;
  };
  const std::vector<Criterion> criteria = {
      {"kernel equivalence", kernel_equivalence},
      {"self-reducibility", self_reducibility},
      {"moments", moments},
      {"tail bound", tails},
      {"completeness, exact oracle", completeness_exact},
      {"completeness, noisy oracle", completeness_noisy},
      {"soundness, gross violators", soundness_gross},
      {"soundness diagnostics", soundness_diagnostics},
      {"query complexity", query_complexity},
      {"protocol loopback", protocol_loopback},
  };
  bool all = true;
  std::vector<Outcome> first;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].fn(1);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
    first.push_back(std::move(o));
  }

  const auto start = std::chrono::steady_clock::now();
  bool same = true;
  std::string mismatched;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].fn(2);
    } catch (const std::exception& e) {
      o.pass = !first[i].pass;
    }
    if (o.pass != first[i].pass || !close(o.fingerprint, first[i].fingerprint)) {
      same = false;
      mismatched += " " + std::to_string(i + 1);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s 11 determinism: criteria 1-10 rerun with 2 workers, %s (%.1fs)\n", same ? "PASS" : "FAIL",
              same ? "all verdicts and summaries match" : ("mismatch in" + mismatched).c_str(), secs);
  all = all && same;
  return all ? 0 : 1;
}
