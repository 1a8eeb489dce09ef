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

// Builds a small model in code, runs every strategy on it and prints the
// structural metrics of each reduced model.

#include <iostream>

#include "varagg/varagg.hpp"

int main() {
  using namespace varagg;

  Model m;
  const VariableId x = m.add_variable("x", -10, 10);
  const VariableId y = m.add_variable("y", 0, 50);
  const VariableId w = m.add_variable("w");
  const VariableId z = m.add_variable("z");
  const VariableId t = m.add_variable("t", 0);

  m.add_equality("fix_t", var(t) - 1.5);                        // t = 1.5
  m.add_equality("curve", var(y) - pow(var(x), 2.0) - 2.0);     // y = x^2 + 2
  m.add_equality("sum", var(w) - var(x) - var(y));              // w = x + y
  m.add_equality("scale", var(z) - 100.0 * var(x) - var(t));    // z = 100x + t
  m.add_inequality("cap", var(w) + var(z) - 20.0);
  m.objective = pow(var(w) - 3.0, 2.0) + var(z) * var(t);

  const StructuralMetrics before = structural_metrics(m);
  std::cout << render_report(before, before, std::nullopt, ReportFormat::kTable, "none");
  for (StrategyKind k : kAllStrategies) {
    const StrategyResult run = run_strategy(m, k);
    const Verdict lower = verify_lower_triangular(run.order, m);
    const EquivalenceVerdict same = check_equivalence(m, run.reduced, 100);
    std::optional<BoundsReport> bounds;
    if (run.lm) bounds = bounds_report(*run.lm);
    std::cout << "\n"
              << render_report(before, structural_metrics(run.reduced), bounds,
                               ReportFormat::kTable, strategy_label(k));
    for (const auto& e : run.order.entries)
      std::cout << "  " << m.variable_name(e.var) << " := "
                << to_string(run.order.defs.expression(e.def),
                             [&](VariableId v) { return m.variable_name(v); },
                             [&](DefinedId d) { return run.order.defs.at(d).name; })
                << "\n";
    if (!lower.ok || !same.ok) {
      std::cerr << strategy_token(k) << ": reduction check failed\n";
      return 1;
    }
  }
  return 0;
}
