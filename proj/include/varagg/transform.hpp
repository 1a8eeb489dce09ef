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

// Turning a matching into explicit defining expressions, building the
// reduced-space model, and two independent checks of the result.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "varagg/error.hpp"
#include "varagg/expr_ops.hpp"
#include "varagg/incidence.hpp"
#include "varagg/model.hpp"

namespace varagg {

namespace detail {

inline std::string pair_name(const Model& m, VariableId v, ConstraintId c) {
  const Constraint* con = m.find_constraint(c);
  return "(" + m.variable_name(v) + ", " +
         (con ? con->name : "#" + std::to_string(c.value)) + ")";
}

inline std::string unique_name(const std::string& base,
                               std::unordered_set<std::string>& taken) {
  std::string name = base;
  for (int k = 2; !taken.insert(name).second; ++k)
    name = base + "_" + std::to_string(k);
  return name;
}

}  // namespace detail

/// Orders the pairs of `m` lower triangularly and solves each defining
/// constraint a*x + r == 0 for x = -r/a, where r is the constraint with x
/// set to zero and earlier eliminated variables replaced by references to
/// their definitions. The returned table is model.defs plus one entry per
/// pair.
///
/// Throws ZeroPivotError when x is not linear in its constraint with a
/// coefficient above kCoefficientTolerance, and NotTriangularError when the
/// pairs contain a cycle.
inline EliminationOrder order_and_solve(const Matching& m, const Model& model) {
  EliminationOrder out;
  out.defs = model.defs;
  if (m.empty()) return out;

  const ModelIndex index(model);
  std::vector<VariableId> vars;
  std::vector<ConstraintId> cons;
  std::unordered_map<VariableId, double> pivot;
  for (const auto& e : m) {
    if (!index.has_variable(e.var))
      throw TransformError("variable #" + std::to_string(e.var.value) +
                           " is not in the model");
    if (!index.is_equality(e.con))
      throw TransformError("pair " + detail::pair_name(model, e.var, e.con) +
                           " does not use an equality constraint");
    const LinClass cls =
        classify_linear(index.find_constraint(e.con)->expr, e.var, model.defs);
    if (!cls.is_linear() || std::abs(cls.coefficient) <= kCoefficientTolerance)
      throw ZeroPivotError("zero pivot for pair " +
                           detail::pair_name(model, e.var, e.con));
    pivot.emplace(e.var, cls.coefficient);
    vars.push_back(e.var);
    cons.push_back(e.con);
  }

  const IncidenceGraph g = bipartite_graph(vars, cons, model);
  BlockPartition blocks;
  try {
    blocks = block_triangularize(g, m);
  } catch (const ContractError& err) {
    throw TransformError(std::string("invalid elimination matching: ") +
                         err.what());
  }
  for (const auto& block : blocks) {
    if (block.size() == 1) continue;
    std::string names;
    for (const auto& e : block)
      names += (names.empty() ? "" : ", ") +
               detail::pair_name(model, e.var, e.con);
    throw NotTriangularError("pairs form a cyclic block: {" + names + "}");
  }

  std::unordered_set<std::string> taken;
  for (const auto& d : out.defs.entries()) taken.insert(d.name);
  std::unordered_set<VariableId> matched(vars.begin(), vars.end());

  Substitution earlier;
  for (const auto& block : blocks) {
    const MatchedEdge& e = block.front();
    const Expression& row = index.find_constraint(e.con)->expr;
    Substitution zero;
    zero.bind(e.var, Expression::constant(0.0));
    const Expression rest = zero(earlier(row));

    Expression solved;
    try {
      solved = fold_constants(-rest / pivot.at(e.var));
    } catch (const FoldError& err) {
      throw TransformError("cannot solve pair " +
                           detail::pair_name(model, e.var, e.con) + ": " +
                           err.what());
    }
    const DefinedId id = out.defs.add(
        detail::unique_name(index.variable(e.var).name, taken), solved);
    for (VariableId v : all_vars(Expression::defined(id), out.defs))
      if (matched.count(v))
        throw NotTriangularError("definition of " +
                                 index.variable(e.var).name +
                                 " still references eliminated variable " +
                                 model.variable_name(v));
    earlier.bind(e.var, Expression::defined(id));
    out.entries.push_back(Elimination{e.var, e.con, id});
  }
  return out;
}

/// Builds the reduced-space model: drops eliminated variables and their
/// defining equalities, replaces every remaining reference by the defined
/// entry, and turns each finite bound of an eliminated variable into an
/// inequality (lb - v <= 0, v - ub <= 0). Surviving constraints keep their
/// order; bound inequalities follow in elimination order, lower first.
inline ReducedModel apply_elimination(const Model& model,
                                      const EliminationOrder& order) {
  const ModelIndex index(model);
  std::unordered_set<VariableId> gone_vars;
  std::unordered_set<ConstraintId> gone_cons;
  Substitution subst;
  for (const auto& e : order.entries) {
    if (!index.has_variable(e.var))
      throw TransformError("eliminated variable #" +
                           std::to_string(e.var.value) + " is not in the model");
    if (!index.is_equality(e.con))
      throw TransformError("defining constraint #" +
                           std::to_string(e.con.value) +
                           " is not an equality of the model");
    if (!order.defs.contains(e.def))
      throw TransformError("missing definition for " +
                           index.variable(e.var).name);
    if (!gone_vars.insert(e.var).second || !gone_cons.insert(e.con).second)
      throw TransformError("pair " + detail::pair_name(model, e.var, e.con) +
                           " reuses a variable or constraint");
    subst.bind(e.var, Expression::defined(e.def));
  }

  ReducedModel out;
  out.order = order;
  Model& r = out.model;
  r.defs = order.defs;
  for (const auto& v : model.variables)
    if (!gone_vars.count(v.id)) r.variables.push_back(v);
  for (const auto& c : model.equalities)
    if (!gone_cons.count(c.id))
      r.equalities.push_back(Constraint{c.id, c.name, subst(c.expr)});
  for (const auto& c : model.inequalities)
    r.inequalities.push_back(Constraint{c.id, c.name, subst(c.expr)});
  r.objective = subst(model.objective);

  std::unordered_set<std::string> taken;
  for (const auto& c : model.equalities) taken.insert(c.name);
  for (const auto& c : model.inequalities) taken.insert(c.name);
  std::uint32_t next = model.next_constraint_id().value;
  for (const auto& e : order.entries) {
    const Variable& v = index.variable(e.var);
    const Expression def = Expression::defined(e.def);
    auto emit = [&](BoundSide side, Expression expr) {
      const ConstraintId id{next++};
      const std::string suffix = side == BoundSide::kLower ? "_lb" : "_ub";
      r.inequalities.push_back(Constraint{
          id, detail::unique_name(v.name + suffix, taken), fold_constants(expr)});
      out.origin.push_back(BoundOrigin{id, v.id, side});
    };
    if (v.has_lower()) emit(BoundSide::kLower, Expression::constant(v.lb) - def);
    if (v.has_upper()) emit(BoundSide::kUpper, def - Expression::constant(v.ub));
    out.eliminated_variables.push_back(v);
    out.eliminated_constraints.push_back(*index.find_constraint(e.con));
  }
  return out;
}

/// Reduced model with nothing eliminated.
inline ReducedModel identity_reduction(const Model& model) {
  EliminationOrder empty;
  empty.defs = model.defs;
  return apply_elimination(model, empty);
}

struct Verdict {
  bool ok = true;
  std::vector<std::string> violations;

  void fail(std::string what) {
    ok = false;
    violations.push_back(std::move(what));
  }
};

/// Checks an elimination order against the original model, independently
/// of how it was built. For every entry i with variable v_i and equality
/// c_i of `model`:
///   - c_i contains no variable eliminated at a later position;
///   - v_i participates linearly in c_i with a coefficient above the pivot
///     tolerance once earlier eliminated variables are replaced by their
///     definitions;
///   - the definition of v_i references no variable eliminated at i or later.
inline Verdict verify_lower_triangular(const EliminationOrder& order,
                                       const Model& model) {
  Verdict verdict;
  const ModelIndex index(model);
  std::unordered_map<VariableId, std::size_t> position;
  std::unordered_set<ConstraintId> used;
  for (std::size_t i = 0; i < order.entries.size(); ++i) {
    const auto& e = order.entries[i];
    if (!position.emplace(e.var, i).second)
      verdict.fail("variable #" + std::to_string(e.var.value) +
                   " eliminated twice");
    if (!used.insert(e.con).second)
      verdict.fail("constraint #" + std::to_string(e.con.value) +
                   " used twice");
  }

  Substitution earlier;
  for (std::size_t i = 0; i < order.entries.size(); ++i) {
    const auto& e = order.entries[i];
    const std::string tag =
        "entry " + std::to_string(i) + " " + detail::pair_name(model, e.var, e.con);
    if (!index.has_variable(e.var) || !index.is_equality(e.con)) {
      verdict.fail(tag + ": not a variable/equality of the model");
      continue;
    }
    const Expression& row = index.find_constraint(e.con)->expr;
    const std::vector<VariableId> vars = all_vars(row, model.defs);
    if (std::find(vars.begin(), vars.end(), e.var) == vars.end())
      verdict.fail(tag + ": variable does not participate in its constraint");
    for (VariableId v : vars) {
      auto it = position.find(v);
      if (it != position.end() && it->second > i)
        verdict.fail(tag + ": constraint contains " + model.variable_name(v) +
                     " which is eliminated later (entry " +
                     std::to_string(it->second) + "); cycle");
    }

    const LinClass cls = classify_linear(earlier(row), e.var, order.defs);
    if (!cls.is_linear() || std::abs(cls.coefficient) <= kCoefficientTolerance)
      verdict.fail(tag + ": variable is not linear with a nonzero coefficient");

    if (!order.defs.contains(e.def)) {
      verdict.fail(tag + ": definition missing");
    } else {
      try {
        for (VariableId v : all_vars(Expression::defined(e.def), order.defs)) {
          auto it = position.find(v);
          if (it != position.end() && it->second >= i)
            verdict.fail(tag + ": definition references " +
                         model.variable_name(v));
        }
      } catch (const StructuralError& err) {
        verdict.fail(tag + ": " + err.what());
      }
    }
    earlier.bind(e.var, Expression::defined(e.def));
  }
  if (!order.defs.is_topological())
    verdict.fail("definition table is not in topological order");
  return verdict;
}

struct EquivalenceVerdict : Verdict {
  std::size_t trials = 0;    // samples that were fully evaluated
  std::size_t attempts = 0;  // including samples skipped on domain errors
};

inline constexpr double kEquivalenceTolerance = 1e-9;

namespace detail {

inline bool close_relative(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Uniform sampling box for a variable: [-2, 2] clipped to its bounds, or a
/// width-4 interval at the nearest bound when the two do not overlap.
inline std::pair<double, double> sampling_box(const Variable& v) {
  double lo = std::max(-2.0, v.lb);
  double hi = std::min(2.0, v.ub);
  if (lo <= hi) return {lo, hi};
  if (v.lb > 2.0) return {v.lb, std::min(v.ub, v.lb + 4.0)};
  return {std::max(v.lb, v.ub - 4.0), v.ub};
}

}  // namespace detail

/// Numerical check that `reduced` is the reduced-space form of `original`.
/// At random points of the retained variables, the eliminated values are
/// computed from their definitions, and then:
///   1. every defining equality of `original` has residual <= 1e-9;
///   2. every surviving constraint and the objective agree between the two
///      models to 1e-9 relative;
///   3. every bound inequality agrees with the original bound test.
/// Samples hitting a domain error are skipped; at most 10 * trials
/// attempts are made.
inline EquivalenceVerdict check_equivalence(const Model& original,
                                            const ReducedModel& reduced,
                                            std::size_t trials,
                                            std::uint64_t seed = 0) {
  EquivalenceVerdict verdict;
  constexpr std::size_t kMaxViolations = 10;
  const double tol = kEquivalenceTolerance;
  std::mt19937_64 rng(seed);

  const ModelIndex orig_index(original);
  std::unordered_map<ConstraintId, const Constraint*> reduced_rows;
  for (const auto& c : reduced.model.equalities) reduced_rows.emplace(c.id, &c);
  for (const auto& c : reduced.model.inequalities) reduced_rows.emplace(c.id, &c);
  std::unordered_set<VariableId> eliminated;
  for (const auto& e : reduced.order.entries) eliminated.insert(e.var);

  auto report = [&](std::string what) {
    if (verdict.violations.size() < kMaxViolations) verdict.fail(std::move(what));
    else verdict.ok = false;
  };

  for (const auto* list : {&original.equalities, &original.inequalities})
    for (const auto& c : *list) {
      const bool defining =
          std::any_of(reduced.order.entries.begin(), reduced.order.entries.end(),
                      [&](const auto& e) { return e.con == c.id; });
      if (!defining && !reduced_rows.count(c.id))
        report("constraint '" + c.name + "' is missing from the reduced model");
    }
  if (!verdict.ok) return verdict;

  while (verdict.trials < trials && verdict.attempts < 10 * trials) {
    ++verdict.attempts;
    Assignment sigma;
    for (const auto& v : original.variables) {
      if (eliminated.count(v.id)) continue;
      const auto [lo, hi] = detail::sampling_box(v);
      sigma.set(v.id, lo == hi ? lo
                               : std::uniform_real_distribution<double>(lo, hi)(rng));
    }
    try {
      Evaluator red(reduced.model.defs, sigma);
      Assignment full = sigma;
      std::unordered_map<VariableId, double> value;
      for (const auto& e : reduced.order.entries) {
        const double x = red.defined(e.def);
        full.set(e.var, x);
        value.emplace(e.var, x);
      }
      Evaluator orig(original.defs, full);

      std::vector<std::string> found;
      for (const auto& e : reduced.order.entries) {
        const Constraint* c = orig_index.find_constraint(e.con);
        const double residual = orig(c->expr);
        if (std::abs(residual) > tol)
          found.push_back("defining constraint '" + c->name + "' residual " +
                          std::to_string(residual));
      }
      for (const auto* list : {&original.equalities, &original.inequalities})
        for (const auto& c : *list) {
          auto it = reduced_rows.find(c.id);
          if (it == reduced_rows.end()) continue;
          const double a = orig(c.expr);
          const double b = red(it->second->expr);
          if (!detail::close_relative(a, b, tol))
            found.push_back("constraint '" + c.name + "' differs: " +
                            std::to_string(a) + " vs " + std::to_string(b));
        }
      {
        const double a = orig(original.objective);
        const double b = red(reduced.model.objective);
        if (!detail::close_relative(a, b, tol))
          found.push_back("objective differs: " + std::to_string(a) + " vs " +
                          std::to_string(b));
      }
      for (const auto& o : reduced.origin) {
        const Constraint* row = reduced_rows.at(o.inequality);
        const double g = red(row->expr);
        if (std::abs(g) <= tol) continue;
        const Variable& v = orig_index.variable(o.var);
        const double x = value.at(o.var);
        const bool original_ok = o.side == BoundSide::kLower ? x >= v.lb : x <= v.ub;
        if (original_ok != (g <= 0.0))
          found.push_back("bound inequality '" + row->name +
                          "' disagrees with the bound on " + v.name);
      }
      ++verdict.trials;
      for (auto& f : found) report(std::move(f));
    } catch (const EvalError& err) {
      if (err.kind() != EvalError::Kind::kDomain) {
        report(std::string("evaluation failed: ") + err.what());
        return verdict;
      }
    }
  }
  if (verdict.trials < trials)
    report("only " + std::to_string(verdict.trials) + " of " +
           std::to_string(trials) + " samples were in the evaluation domain");
  return verdict;
}

}  // namespace varagg
