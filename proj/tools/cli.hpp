// Copyright 2026 The varagg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Command-line front end. Kept in a header so tests can drive it in-process.

#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "varagg/varagg.hpp"

namespace varagg::cli {

enum ExitCode : int {
  kOk = 0,
  kModelError = 1,
  kTransformError = 2,
  kCheckFailed = 3,
};

struct CliConfig {
  std::string input_path;
  std::string method = "none";
  std::string output_path;
  std::string report_format = "table";
  bool inline_defs = false;
  bool dump_incidence = false;
  std::size_t equivalence_trials = 0;
  std::uint64_t seed = 0;
};

struct GenConfig {
  std::string shape = "ladder";
  std::size_t size = 20;
  double nonlinear_fraction = 0.3;
  std::uint64_t seed = 0;
  std::string output_path;
};

namespace detail {

inline void print_diagnostics(const std::vector<Diagnostic>& diags,
                              std::ostream& err, const char* prefix = "") {
  for (const auto& d : diags)
    err << (d.severity == Diagnostic::Severity::kError ? "error: " : "warning: ")
        << prefix << d.code << ": " << d.message << "\n";
}

inline bool write_file(const std::string& path, const std::string& text,
                       std::ostream& err) {
  std::ofstream out(path, std::ios::binary);
  if (out) out << text;
  if (!out) {
    err << "error: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

/// Reads and validates the input; nullopt after printing diagnostics.
inline std::optional<Model> load(const std::string& path, std::ostream& err) {
  Model m;
  try {
    m = read_model_file(path);
  } catch (const ParseError& e) {
    err << "error: " << path;
    if (e.line() > 0) err << ":" << e.line() << ":" << e.column();
    err << ": " << e.what() << "\n";
    return std::nullopt;
  } catch (const Error& e) {
    err << "error: " << path << ": " << e.what() << "\n";
    return std::nullopt;
  }
  const auto diags = validate(m);
  print_diagnostics(diags, err);
  if (has_errors(diags)) return std::nullopt;
  return m;
}

inline int reduce(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto format = parse_report_format(cfg.report_format);
  std::optional<StrategyKind> kind;
  if (cfg.method != "none") {
    kind = parse_strategy(cfg.method);
    if (!kind) {
      err << "error: unknown method '" << cfg.method << "'\n";
      return kModelError;
    }
  }
  const auto model = load(cfg.input_path, err);
  if (!model) return kModelError;

  ReducedModel reduced;
  std::optional<BoundsReport> bounds;
  try {
    if (kind) {
      StrategyResult run = run_strategy(*model, *kind);
      if (run.lm) bounds = bounds_report(*run.lm);
      reduced = std::move(run.reduced);
    } else {
      reduced = identity_reduction(*model);
    }
  } catch (const TransformError& e) {
    err << "error: transformation failed: " << e.what() << "\n";
    return kTransformError;
  }

  for (const auto& d : validate(reduced.model))
    if (d.severity == Diagnostic::Severity::kError)
      err << "warning: reduced model: " << d.code << ": " << d.message << "\n";

  if (cfg.equivalence_trials > 0) {
    const auto verdict =
        check_equivalence(*model, reduced, cfg.equivalence_trials, cfg.seed);
    if (!verdict.ok) {
      for (const auto& v : verdict.violations) err << "check: " << v << "\n";
      return kCheckFailed;
    }
    err << "check: " << verdict.trials << " samples agree\n";
  }

  if (cfg.dump_incidence) err << incidence_coordinates(reduced.model);
  if (!cfg.output_path.empty() &&
      !write_file(cfg.output_path, write_model(reduced, cfg.inline_defs), err))
    return kModelError;

  const std::string label = kind ? std::string(strategy_label(*kind)) : "none";
  out << render_report(structural_metrics(*model), structural_metrics(reduced),
                       bounds, *format, label);
  return kOk;
}

inline int analyze(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto model = load(cfg.input_path, err);
  if (!model) return kModelError;
  if (cfg.dump_incidence) err << incidence_coordinates(*model);
  const StructuralMetrics s = structural_metrics(*model);
  out << render_report(s, s, std::nullopt, *parse_report_format(cfg.report_format),
                       "none");
  return kOk;
}

inline int generate(const GenConfig& cfg, std::ostream& out, std::ostream& err) {
  GeneratorOptions opt;
  opt.shape = *parse_generator_shape(cfg.shape);
  opt.size = cfg.size;
  opt.nonlinear_fraction = cfg.nonlinear_fraction;
  opt.seed = cfg.seed;
  const std::string text = write_model(generate_model(opt));
  if (cfg.output_path.empty()) {
    out << text;
    return kOk;
  }
  return write_file(cfg.output_path, text, err) ? kOk : kModelError;
}

}  // namespace detail

/// Entry point; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Variable aggregation presolve for nonlinear optimization models",
               "varagg"};
  app.require_subcommand(1);

  CliConfig cfg;
  GenConfig gen;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("input", cfg.input_path, "Model file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--report", cfg.report_format, "Report format")
        ->check(CLI::IsMember({"json", "table"}));
    sub->add_flag("--dump-incidence", cfg.dump_incidence,
                  "Write the incidence coordinate list to standard error");
  };

  CLI::App* reduce = app.add_subcommand("reduce", "Eliminate variables and write the reduced model");
  add_common(reduce);
  reduce->add_option("--method", cfg.method, "none, ld1, ecd2, ld2, d2, gr or lm")
      ->check(CLI::IsMember({"none", "ld1", "ecd2", "ld2", "d2", "gr", "lm"}));
  reduce->add_option("--output,-o", cfg.output_path, "Reduced model destination");
  reduce->add_flag("--inline", cfg.inline_defs,
                   "Expand defined entries instead of writing a defined section");
  reduce->add_option("--check", cfg.equivalence_trials,
                     "Verify the reduction numerically at N random points");
  reduce->add_option("--seed", cfg.seed, "Seed for equivalence sampling");

  CLI::App* analyze = app.add_subcommand("analyze", "Print structural metrics only");
  add_common(analyze);

  CLI::App* gen_cmd = app.add_subcommand("gen", "Write a synthetic model");
  gen_cmd->add_option("--shape", gen.shape, "ladder or cycle")
      ->check(CLI::IsMember({"ladder", "cycle"}));
  gen_cmd->add_option("--size", gen.size, "Number of chain equalities")
      ->check(CLI::Range(1, 100000));
  gen_cmd->add_option("--nonlinear", gen.nonlinear_fraction,
                      "Fraction of nonlinear couplings")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--output,-o", gen.output_path, "Destination (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kModelError;
  }

  try {
    if (*reduce) return detail::reduce(cfg, out, err);
    if (*analyze) return detail::analyze(cfg, out, err);
    return detail::generate(gen, out, err);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kTransformError;
  }
}

}  // namespace varagg::cli
