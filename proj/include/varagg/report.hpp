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

#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

#include "varagg/expr_ops.hpp"
#include "varagg/model.hpp"
#include "varagg/strategies.hpp"

namespace varagg {

struct StructuralMetrics {
  std::size_t n_var = 0;
  std::size_t n_con = 0;  // equalities + inequalities
  std::size_t n_elim = 0;
  double nnz_per_con = 0.0;
  double lin_nnz_per_con = 0.0;
  std::size_t max_con_degree = 0;
  std::size_t n_lin_con = 0;  // constraints in which every variable is linear

  friend bool operator==(const StructuralMetrics&, const StructuralMetrics&) = default;
};

/// True iff every variable of `e` participates linearly. Constant rows count
/// as linear.
inline bool is_linear_constraint(const Expression& e, const DefinitionTable& defs) {
  const LinearForm f = linear_form(e, defs);
  return f.nonlinear.empty();
}

/// Jacobian-structure counts over all constraints, with definitions
/// expanded. Averages are 0 when there are no constraints.
inline StructuralMetrics structural_metrics(const Model& m, std::size_t n_elim = 0) {
  StructuralMetrics s;
  s.n_var = m.variables.size();
  s.n_con = m.constraint_count();
  s.n_elim = n_elim;
  std::size_t nnz = 0;
  std::size_t lin = 0;
  for (const auto* list : {&m.equalities, &m.inequalities})
    for (const auto& c : *list) {
      // A variable whose linear coefficients cancel is still a structural
      // nonzero, and a linear one.
      const std::size_t deg = all_vars(c.expr, m.defs).size();
      const LinearForm f = linear_form(c.expr, m.defs);
      nnz += deg;
      lin += deg - f.nonlinear.size();
      s.max_con_degree = std::max(s.max_con_degree, deg);
      if (f.nonlinear.empty()) ++s.n_lin_con;
    }
  if (s.n_con > 0) {
    s.nnz_per_con = static_cast<double>(nnz) / static_cast<double>(s.n_con);
    s.lin_nnz_per_con = static_cast<double>(lin) / static_cast<double>(s.n_con);
  }
  return s;
}

inline StructuralMetrics structural_metrics(const ReducedModel& r) {
  return structural_metrics(r.model, r.eliminated_count());
}

struct BoundsReport {
  std::size_t n_block = 0;
  std::size_t n_agg = 0;
  std::size_t n_match = 0;
};

/// Counts of a linear-matching run. Throws std::logic_error if they violate
/// n_block <= n_agg <= n_match, which would be a bug in the strategy.
inline BoundsReport bounds_report(const LinearMatchingResult& lm) {
  BoundsReport b{lm.n_block(), lm.n_agg(), lm.n_match()};
  if (!(b.n_block <= b.n_agg && b.n_agg <= b.n_match))
    throw std::logic_error("internal error: aggregation bounds violated (" +
                           std::to_string(b.n_block) + ", " +
                           std::to_string(b.n_agg) + ", " +
                           std::to_string(b.n_match) + ")");
  return b;
}

enum class ReportFormat { kJson, kTable };

inline std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::kJson;
  if (s == "table") return ReportFormat::kTable;
  return std::nullopt;
}

inline nlohmann::ordered_json metrics_json(const StructuralMetrics& s) {
  nlohmann::ordered_json j;
  j["n_var"] = s.n_var;
  j["n_con"] = s.n_con;
  j["n_elim"] = s.n_elim;
  j["nnz_per_con"] = s.nnz_per_con;
  j["lin_nnz_per_con"] = s.lin_nnz_per_con;
  j["max_con_degree"] = s.max_con_degree;
  j["n_lin_con"] = s.n_lin_con;
  return j;
}

/// Renders before/after metrics. `method` labels the "after" row ("none"
/// for an identity run). The json document always carries the "bounds"
/// key, null unless the run was LM.
inline std::string render_report(const StructuralMetrics& before,
                                 const StructuralMetrics& after,
                                 const std::optional<BoundsReport>& bounds,
                                 ReportFormat format, std::string_view method) {
  if (format == ReportFormat::kJson) {
    nlohmann::ordered_json j;
    j["method"] = method;
    j["before"] = metrics_json(before);
    j["after"] = metrics_json(after);
    if (bounds) {
      j["bounds"] = {{"n_block", bounds->n_block},
                     {"n_agg", bounds->n_agg},
                     {"n_match", bounds->n_match}};
    } else {
      j["bounds"] = nullptr;
    }
    return j.dump(2) + "\n";
  }

  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %8s %8s %8s %9s %14s\n", "Method",
                "Var.", "Con.", "Elim.", "NNZ/Con.", "Lin. NNZ/Con.");
  out += line;
  auto row = [&](std::string_view label, const StructuralMetrics& s) {
    std::snprintf(line, sizeof line, "%-8.*s %8zu %8zu %8zu %9.2f %14.2f\n",
                  static_cast<int>(label.size()), label.data(), s.n_var,
                  s.n_con, s.n_elim, s.nnz_per_con, s.lin_nnz_per_con);
    out += line;
  };
  row("before", before);
  row(method, after);
  if (bounds) {
    std::snprintf(line, sizeof line, "bounds   n_block %zu <= n_agg %zu <= n_match %zu\n",
                  bounds->n_block, bounds->n_agg, bounds->n_match);
    out += line;
  }
  return out;
}

}  // namespace varagg
