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

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "varagg/error.hpp"
#include "varagg/expr.hpp"
#include "varagg/expr_ops.hpp"

namespace varagg {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Variable {
  VariableId id;
  std::string name;
  double lb = -kInfinity;
  double ub = kInfinity;

  bool has_lower() const { return std::isfinite(lb); }
  bool has_upper() const { return std::isfinite(ub); }
};

/// A scalar constraint row. Equalities mean expr == 0, inequalities
/// expr <= 0.
struct Constraint {
  ConstraintId id;
  std::string name;
  Expression expr;
};

/// min objective  s.t.  equalities == 0, inequalities <= 0, lb <= x <= ub.
/// Declaration order of variables and constraints is significant: every
/// tie-break downstream follows it.
struct Model {
  std::vector<Variable> variables;
  std::vector<Constraint> equalities;
  std::vector<Constraint> inequalities;
  Expression objective = Expression::constant(0.0);
  DefinitionTable defs;

  std::size_t constraint_count() const {
    return equalities.size() + inequalities.size();
  }

  std::vector<VariableId> variable_ids() const {
    std::vector<VariableId> out;
    out.reserve(variables.size());
    for (const auto& v : variables) out.push_back(v.id);
    return out;
  }

  std::vector<ConstraintId> equality_ids() const {
    std::vector<ConstraintId> out;
    out.reserve(equalities.size());
    for (const auto& c : equalities) out.push_back(c.id);
    return out;
  }

  const Variable* find_variable(VariableId id) const {
    for (const auto& v : variables)
      if (v.id == id) return &v;
    return nullptr;
  }

  const Constraint* find_constraint(ConstraintId id) const {
    for (const auto& c : equalities)
      if (c.id == id) return &c;
    for (const auto& c : inequalities)
      if (c.id == id) return &c;
    return nullptr;
  }

  std::string variable_name(VariableId id) const {
    const Variable* v = find_variable(id);
    return v ? v->name : "x#" + std::to_string(id.value);
  }

  ConstraintId next_constraint_id() const {
    std::uint32_t next = 0;
    for (const auto& c : equalities) next = std::max(next, c.id.value + 1);
    for (const auto& c : inequalities) next = std::max(next, c.id.value + 1);
    return ConstraintId{next};
  }

  VariableId next_variable_id() const {
    std::uint32_t next = 0;
    for (const auto& v : variables) next = std::max(next, v.id.value + 1);
    return VariableId{next};
  }

  /// Appends a variable with the next free id.
  VariableId add_variable(std::string name, double lb = -kInfinity,
                          double ub = kInfinity) {
    const VariableId id = next_variable_id();
    variables.push_back(Variable{id, std::move(name), lb, ub});
    return id;
  }

  ConstraintId add_equality(std::string name, Expression expr) {
    const ConstraintId id = next_constraint_id();
    equalities.push_back(Constraint{id, std::move(name), std::move(expr)});
    return id;
  }

  ConstraintId add_inequality(std::string name, Expression expr) {
    const ConstraintId id = next_constraint_id();
    inequalities.push_back(Constraint{id, std::move(name), std::move(expr)});
    return id;
  }
};

/// Id lookups for a model, built once.
class ModelIndex {
 public:
  explicit ModelIndex(const Model& m) : model_(&m) {
    for (std::size_t i = 0; i < m.variables.size(); ++i)
      vars_.emplace(m.variables[i].id, i);
    for (const auto& c : m.equalities) cons_.emplace(c.id, &c);
    for (const auto& c : m.inequalities) cons_.emplace(c.id, &c);
    for (const auto& c : m.equalities) equalities_.insert(c.id);
  }

  bool has_variable(VariableId id) const { return vars_.count(id) != 0; }
  std::size_t variable_position(VariableId id) const { return vars_.at(id); }
  const Variable& variable(VariableId id) const {
    return model_->variables[vars_.at(id)];
  }

  const Constraint* find_constraint(ConstraintId id) const {
    auto it = cons_.find(id);
    return it == cons_.end() ? nullptr : it->second;
  }
  bool is_equality(ConstraintId id) const { return equalities_.count(id) != 0; }

 private:
  const Model* model_;
  std::unordered_map<VariableId, std::size_t> vars_;
  std::unordered_map<ConstraintId, const Constraint*> cons_;
  std::unordered_set<ConstraintId> equalities_;
};

// ---------------------------------------------------------------------------
// Elimination results

struct Elimination {
  VariableId var;
  ConstraintId con;
  DefinedId def;

  friend bool operator==(const Elimination&, const Elimination&) = default;
};

/// Ordered (variable, constraint, definition) triples. `defs` holds every
/// definition the entries refer to, plus any definitions of the source model.
/// Definition i references eliminated variables only through entries that
/// precede it.
struct EliminationOrder {
  std::vector<Elimination> entries;
  DefinitionTable defs;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

enum class BoundSide { kLower, kUpper };

/// Provenance of an inequality created from a bound of an eliminated variable.
struct BoundOrigin {
  ConstraintId inequality;
  VariableId var;
  BoundSide side;
};

struct ReducedModel {
  Model model;
  EliminationOrder order;
  std::vector<BoundOrigin> origin;
  /// Eliminated variables and their defining constraints as they were in
  /// the source model, in elimination order.
  std::vector<Variable> eliminated_variables;
  std::vector<Constraint> eliminated_constraints;

  std::size_t eliminated_count() const { return order.size(); }
};

// ---------------------------------------------------------------------------
// Validation

struct Diagnostic {
  enum class Severity { kWarning, kError };

  Severity severity = Severity::kWarning;
  std::string code;
  std::string message;
};

inline constexpr double kConstantFeasibilityTolerance = 1e-9;

/// Structural lint of a model. Never throws; unresolved definitions are
/// reported as diagnostics.
inline std::vector<Diagnostic> validate(const Model& m) {
  using Sev = Diagnostic::Severity;
  std::vector<Diagnostic> out;
  std::unordered_set<VariableId> declared;
  std::unordered_set<std::string> names;
  for (const auto& v : m.variables) {
    declared.insert(v.id);
    if (!names.insert(v.name).second)
      out.push_back({Sev::kError, "duplicate-name",
                     "variable name '" + v.name + "' declared twice"});
    if (v.lb > v.ub || std::isnan(v.lb) || std::isnan(v.ub))
      out.push_back({Sev::kError, "invalid-bounds",
                     "variable '" + v.name + "' has lb > ub"});
  }

  std::unordered_set<VariableId> used;
  auto scan = [&](const Expression& e, const std::string& where) -> bool {
    std::vector<VariableId> vars;
    try {
      vars = all_vars(e, m.defs);
    } catch (const StructuralError& err) {
      out.push_back({Sev::kError, "unresolved-definition",
                     where + ": " + err.what()});
      return false;
    }
    for (VariableId v : vars) {
      used.insert(v);
      if (!declared.count(v))
        out.push_back({Sev::kError, "undeclared-variable",
                       where + " references undeclared variable #" +
                           std::to_string(v.value)});
    }
    return true;
  };

  auto check_constraint = [&](const Constraint& c, bool equality) {
    const std::string where =
        (equality ? "equality '" : "inequality '") + c.name + "'";
    if (!scan(c.expr, where)) return;
    if (!all_vars(c.expr, m.defs).empty()) return;
    out.push_back({Sev::kWarning, "empty-constraint",
                   where + " has no variables"});
    const auto value = constant_value(c.expr, m.defs);
    if (!value) {
      out.push_back({Sev::kError, "constant-domain-error",
                     where + " does not fold to a finite constant"});
    } else if (equality && std::abs(*value) > kConstantFeasibilityTolerance) {
      out.push_back({Sev::kError, "constant-infeasible-equality",
                     where + " folds to nonzero constant " +
                         std::to_string(*value)});
    } else if (!equality && *value > kConstantFeasibilityTolerance) {
      out.push_back({Sev::kError, "constant-infeasible-inequality",
                     where + " folds to positive constant " +
                         std::to_string(*value)});
    }
  };
  for (const auto& c : m.equalities) check_constraint(c, true);
  for (const auto& c : m.inequalities) check_constraint(c, false);
  scan(m.objective, "objective");
  for (const auto& d : m.defs.entries()) scan(d.expr, "definition '" + d.name + "'");

  for (const auto& v : m.variables)
    if (!used.count(v.id))
      out.push_back({Sev::kWarning, "unused-variable",
                     "variable '" + v.name + "' is not referenced"});
  return out;
}

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Diagnostic::Severity::kError) return true;
  return false;
}

/// Throws ModelError on the hard invariants a model must satisfy before any
/// transformation: unique names and ids, lb <= ub, declared variables and
/// resolvable definitions.
inline void check_model(const Model& m) {
  std::unordered_set<std::string> names;
  std::unordered_set<VariableId> ids;
  for (const auto& v : m.variables) {
    if (!names.insert(v.name).second)
      throw ModelError("duplicate variable name '" + v.name + "'");
    if (!ids.insert(v.id).second)
      throw ModelError("duplicate variable id for '" + v.name + "'");
    if (std::isnan(v.lb) || std::isnan(v.ub) || v.lb > v.ub)
      throw ModelError("variable '" + v.name + "' has lb > ub");
  }
  std::unordered_set<ConstraintId> cids;
  std::unordered_set<std::string> cnames;
  auto check = [&](const Expression& e, const std::string& where) {
    if (!e) throw ModelError(where + " has no expression");
    std::vector<VariableId> vars;
    try {
      vars = all_vars(e, m.defs);
    } catch (const StructuralError& err) {
      throw ModelError(where + ": " + err.what());
    }
    for (VariableId v : vars)
      if (!ids.count(v))
        throw ModelError(where + " references undeclared variable #" +
                         std::to_string(v.value));
  };
  for (const auto* list : {&m.equalities, &m.inequalities})
    for (const auto& c : *list) {
      if (!cids.insert(c.id).second)
        throw ModelError("duplicate constraint id for '" + c.name + "'");
      if (!cnames.insert(c.name).second)
        throw ModelError("duplicate constraint name '" + c.name + "'");
      check(c.expr, "constraint '" + c.name + "'");
    }
  check(m.objective, "objective");
  if (!m.defs.is_topological())
    throw ModelError("defined entries are not in topological order");
  for (const auto& d : m.defs.entries())
    check(d.expr, "definition '" + d.name + "'");
}

}  // namespace varagg
