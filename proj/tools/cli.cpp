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

#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ptest/diagnostics.hpp"
#include "ptest/error.hpp"
#include "ptest/remote.hpp"
#include "ptest/report.hpp"

namespace ptest::cli {
namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const RunConfig& config, const std::string& text) {
  if (!config.output_path) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(*config.output_path, std::ios::binary);
  if (!out) throw UsageError("cannot open output file " + *config.output_path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

TesterParams tester_params(const RunConfig& config) {
  return TesterParams::make(config.n, config.delta, config.c, config.override_d, config.override_T);
}

OracleSpec oracle_spec(const RunConfig& config, const TesterParams* params) {
  OracleSpec spec = parse_oracle_spec(config.oracle);
  spec.timeout = std::chrono::milliseconds(config.timeout_ms);
  spec.max_dim = config.max_dim;
  if (spec.kind == OracleKind::kHeavyTail && spec.tail_T == 0.0 && params != nullptr) spec.tail_T = params->T();
  spec.validate();
  return spec;
}

// Table emitted by the diagnostics commands: CSV with a header row, or a JSON
// array of records with the same keys.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<json> row) { rows_.push_back(std::move(row)); }

  std::string render(Format format) const {
    if (format == Format::kJson) {
      json out = json::array();
      for (const auto& row : rows_) {
        json record = json::object();
        for (std::size_t i = 0; i < columns_.size(); ++i) record[columns_[i]] = row[i];
        out.push_back(std::move(record));
      }
      return out.dump(2);
    }
    std::ostringstream out;
    for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
    out << '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        out << (i ? "," : "");
        const json& cell = row[i];
        if (cell.is_number_float()) {
          out << format_double(cell.get<double>());
        } else if (cell.is_string()) {
          out << cell.get<std::string>();
        } else {
          out << cell.dump();
        }
      }
      out << '\n';
    }
    return out.str();
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<json>> rows_;
};

std::vector<int> default_ks(const RunConfig& config, int hi) {
  if (!config.ks.empty()) return config.ks;
  std::vector<int> ks;
  for (int k = 1; k <= hi; ++k) ks.push_back(k);
  return ks;
}

bool is_oracle_error(const SubtestFailure& failure) {
  return failure.reason != "threshold" && failure.reason != "non-finite";
}

}  // namespace

int cmd_test(const RunConfig& config) {
  const TesterParams params = tester_params(config);
  const OracleSpec spec = oracle_spec(config, &params);
  const EnsembleSampler root(config.seed);
  auto oracles = make_oracle(spec, root.derive(0x0AC1E));
  if (oracles->max_dim() < params.n) {
    throw UsageError("oracle declares max_dim " + std::to_string(oracles->max_dim()) + " < n = " +
                     std::to_string(params.n));
  }
  RunOptions options;
  options.workers = config.workers;
  options.mode = config.run_to_completion ? RunMode::kRunToCompletion : RunMode::kShortCircuit;
  const TestReport report = run_ptest(*oracles, params, root, options);

  if (!report.theorem_parameters) {
    std::cerr << "theorem-parameters: false (T = " << format_double(report.T) << ", d = " << report.d
              << "; theorem values T = " << format_double(params.theorem_values().T)
              << ", d = " << params.theorem_values().d << ")\n";
  }
  if (report.precondition_warning) std::cerr << "warning: n < sqrt(log(1/(c*delta))); size condition unmet\n";
  std::cerr << "verdict: " << to_string(report.verdict) << "  queries: " << report.total_queries << "/"
            << report.query_budget << "  seed: " << report.seed << '\n';
  if (report.reject_cause) {
    const SubtestFailure& cause = *report.reject_cause;
    std::cerr << "reject_cause: k=" << cause.k << " test=" << to_string(cause.kind) << " iteration=" << cause.iteration
              << " residual=" << format_double(cause.residual) << " reason=" << cause.reason << '\n';
  }
  emit(config, config.format == Format::kJson ? report_to_json(report) : report_to_csv(report));

  if (report.reject_cause && is_oracle_error(*report.reject_cause)) return kExitUsage;
  return report.verdict == Verdict::kAccept ? kExitOk : kExitFail;
}

int cmd_serve(const RunConfig& config) {
  OracleSpec spec = oracle_spec(config, nullptr);
  if (spec.kind == OracleKind::kRemote) throw UsageError("serve needs a locally realizable oracle");
  if (spec.kind == OracleKind::kHeavyTail && spec.tail_T == 0.0) {
    throw UsageError("serve: heavy oracle needs an explicit T (heavy:P:M:T)");
  }
  auto oracle = make_oracle(spec, EnsembleSampler(config.seed).derive(0x0AC1E));
  if (config.port) {
    serve_tcp(*oracle, *config.port, [](std::uint16_t port) { std::cerr << "listening on 127.0.0.1:" << port << std::endl; });
  }
  LineChannel channel(0, 1, /*owns_fds=*/false);
  serve_oracle(*oracle, channel);
  return kExitOk;
}

int cmd_moments(const RunConfig& config) {
  Table table({"k", "samples", "mean_re", "mean_im", "second_moment", "second_ratio", "second_ratio_se",
               "fourth_moment", "fourth_ratio", "fourth_ratio_se", "within_5se"});
  bool ok = true;
  const EnsembleSampler root(config.seed);
  for (int k : default_ks(config, 5)) {
    const MomentEstimate m = estimate_moments(k, config.samples, root.derive(static_cast<std::uint64_t>(k)), config.workers);
    const bool within = std::abs(m.second_ratio() - 1.0) <= 5.0 * m.second_ratio_std_error() &&
                        std::abs(m.fourth_ratio() - 1.0) <= 5.0 * m.fourth_ratio_std_error();
    ok = ok && within;
    table.add({k, m.samples, m.mean.real(), m.mean.imag(), m.second_moment, m.second_ratio(),
               m.second_ratio_std_error(), m.fourth_moment, m.fourth_ratio(), m.fourth_ratio_std_error(), within});
  }
  emit(config, table.render(config.format));
  return ok ? kExitOk : kExitFail;
}

int cmd_tails(const RunConfig& config) {
  if (config.Ts.empty()) throw UsageError("tails requires --T");
  Table table({"k", "T", "samples", "probability", "std_error", "bound", "within_bound"});
  bool ok = true;
  const EnsembleSampler root(config.seed);
  for (int k : default_ks(config, 5)) {
    for (std::size_t t = 0; t < config.Ts.size(); ++t) {
      const EnsembleSampler s = root.derive(static_cast<std::uint64_t>(k)).derive(t);
      const TailEstimate e = tail_probability(k, config.Ts[t], config.samples, s, config.workers);
      const bool within = e.probability <= e.bound + 3.0 * e.std_error;
      ok = ok && within;
      table.add({k, e.T, e.samples, e.probability, e.std_error, e.bound, within});
    }
  }
  emit(config, table.render(config.format));
  return ok ? kExitOk : kExitFail;
}

int cmd_diagnose(const RunConfig& config) {
  const TesterParams params = tester_params(config);
  const OracleSpec spec = oracle_spec(config, &params);
  const EnsembleSampler root(config.seed);
  auto oracles = make_oracle(spec, root.derive(0x0AC1E));
  Table table({"k", "samples", "lin_rate", "tail_rate", "perm_rate", "indicator_rate", "indicator_se",
               "indicator_floor", "conditional_sq_error", "std_error", "ceiling", "eta", "trimmed_rms",
               "within_bounds"});
  bool ok = true;
  for (int k : default_ks(config, std::min(params.n, 5))) {
    const EnsembleSampler s = root.derive(static_cast<std::uint64_t>(k));
    const SoundnessEstimate e = conditional_sq_error(*oracles, k, config.samples, params, s.derive(0), config.workers);
    const double rms = trimmed_rms_error(*oracles, k, config.eta, config.samples, s.derive(1), config.workers);
    const bool within = e.indicator_rate >= e.indicator_floor - 3.0 * e.indicator_std_error &&
                        e.conditional_sq_error <= e.ceiling + 3.0 * e.std_error;
    ok = ok && within;
    table.add({k, e.samples, e.lin_rate, e.tail_rate, e.perm_rate, e.indicator_rate, e.indicator_std_error,
               e.indicator_floor, e.conditional_sq_error, e.std_error, e.ceiling, config.eta, rms, within});
  }
  emit(config, table.render(config.format));
  return ok ? kExitOk : kExitFail;
}

int cmd_budget(const RunConfig& config) {
  if (config.n < 1) throw UsageError("budget requires --n >= 1");
  std::uint64_t d = 0;
  if (config.override_d) {
    d = *config.override_d;
  } else if (config.delta > 0.0 && config.c > 0.0) {
    d = compute_parameters(config.n, config.delta, config.c).d;
  } else {
    throw UsageError("budget requires --d, or --delta and --c");
  }
  emit(config, std::to_string(query_budget(config.n, d)));
  return kExitOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Tester for approximate permanent oracles over complex Gaussian matrices"};
  app.require_subcommand(1);

  RunConfig config;
  if (const char* env = std::getenv("PTEST_SEED")) {
    try {
      config.seed = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "error: PTEST_SEED is not an unsigned integer\n";
      return kExitUsage;
    }
  }
  std::string format = "json";
  std::string mode = "short";
  std::optional<std::string> output;
  std::optional<int> port;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", config.seed, "RNG seed (default: $PTEST_SEED or 0)");
  };
  auto add_output = [&](CLI::App* cmd, const std::string& default_format) {
    format = default_format;
    cmd->add_option("--output,-o", output, "Write the report here instead of stdout");
    cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };
  auto add_workers = [&](CLI::App* cmd) {
    cmd->add_option("--workers", config.workers, "Worker threads; results do not depend on it")
        ->check(CLI::Range(1, 1024));
  };
  auto add_params = [&](CLI::App* cmd, bool required) {
    auto* n = cmd->add_option("--n", config.n, "Largest matrix dimension tested");
    auto* delta = cmd->add_option("--delta", config.delta, "Error parameter in (0, 1]");
    auto* c = cmd->add_option("--c", config.c, "Completeness parameter in (0, 1]");
    if (required) {
      n->required();
      delta->required();
      c->required();
    }
    cmd->add_option("--d", config.override_d, "Override the repetition count d");
    cmd->add_option("--T", config.override_T, "Override the tail threshold T");
  };

  auto* test = app.add_subcommand("test", "Run PTest against an oracle family");
  add_params(test, true);
  test->add_option("--oracle", config.oracle, "Oracle spec, e.g. exact, noise:0.5, remote:CMD")->required();
  test->add_option("--mode", mode, "short (stop at first failure) or full")->check(CLI::IsMember({"short", "full"}));
  test->add_option("--timeout-ms", config.timeout_ms, "Per-query timeout for remote oracles");
  add_seed(test);
  add_workers(test);
  add_output(test, "json");

  auto* serve = app.add_subcommand("serve", "Serve an oracle over the line protocol (stdio or TCP)");
  serve->add_option("--oracle", config.oracle, "Oracle spec (not remote)")->required();
  serve->add_option("--max-dim", config.max_dim, "Largest k answered")->check(CLI::Range(1, 24));
  serve->add_option("--port", port, "Listen on 127.0.0.1:PORT instead of stdio (0 = any)")->check(CLI::Range(0, 65535));
  add_seed(serve);

  auto* moments = app.add_subcommand("moments", "Estimate E|Per_k|^2 and E|Per_k|^4");
  moments->add_option("--k", config.ks, "Dimensions (default 1..5)")->delimiter(',')->check(CLI::Range(1, 10));
  moments->add_option("--samples", config.samples, "Samples per k")->default_val(100000);
  add_seed(moments);
  add_workers(moments);
  add_output(moments, "csv");

  auto* tails = app.add_subcommand("tails", "Estimate Pr[|Per_k| > T sqrt(k!)]");
  tails->add_option("--k", config.ks, "Dimensions (default 1..5)")->delimiter(',')->check(CLI::Range(1, 10));
  tails->add_option("--T", config.Ts, "Thresholds")->delimiter(',')->required();
  tails->add_option("--samples", config.samples, "Samples per grid point")->default_val(100000);
  add_seed(tails);
  add_workers(tails);
  add_output(tails, "csv");

  auto* diagnose = app.add_subcommand("diagnose", "Indicator rates, conditional error, trimmed RMS error");
  add_params(diagnose, true);
  diagnose->add_option("--oracle", config.oracle, "Oracle spec")->required();
  diagnose->add_option("--k", config.ks, "Dimensions (default 1..min(n,5))")->delimiter(',')->check(CLI::Range(1, 10));
  diagnose->add_option("--samples", config.samples, "Samples per k")->default_val(10000);
  diagnose->add_option("--eta", config.eta, "Trim fraction for the RMS error")->check(CLI::Range(0.0, 0.999999));
  diagnose->add_option("--timeout-ms", config.timeout_ms, "Per-query timeout for remote oracles");
  add_seed(diagnose);
  add_workers(diagnose);
  add_output(diagnose, "csv");

  auto* budget = app.add_subcommand("budget", "Worst-case query count of PTest");
  add_params(budget, false);
  add_output(budget, "csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  config.command = chosen->get_name();
  config.run_to_completion = mode == "full";
  config.output_path = output;
  if (port) config.port = static_cast<std::uint16_t>(*port);
  const auto* format_opt = chosen->get_option_no_throw("--format");
  const std::string chosen_format =
      format_opt != nullptr && format_opt->count() > 0 ? format : (config.command == "test" ? "json" : "csv");
  config.format = chosen_format == "csv" ? Format::kCsv : Format::kJson;

  try {
    if (config.command == "test") return cmd_test(config);
    if (config.command == "serve") return cmd_serve(config);
    if (config.command == "moments") return cmd_moments(config);
    if (config.command == "tails") return cmd_tails(config);
    if (config.command == "diagnose") return cmd_diagnose(config);
    if (config.command == "budget") return cmd_budget(config);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace ptest::cli
