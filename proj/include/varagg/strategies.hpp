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

// Aggregation-set strategies: which (variable, equality) pairs to eliminate.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "varagg/expr_ops.hpp"
#include "varagg/incidence.hpp"
#include "varagg/model.hpp"
#include "varagg/transform.hpp"

namespace varagg {

enum class StrategyKind { kLD1, kECD2, kLD2, kD2, kGR, kLM };

inline constexpr std::array<StrategyKind, 6> kAllStrategies = {
    StrategyKind::kLD1, StrategyKind::kECD2, StrategyKind::kLD2,
    StrategyKind::kD2,  StrategyKind::kGR,   StrategyKind::kLM};

inline std::string_view strategy_token(StrategyKind k) {
  switch (k) {
    case StrategyKind::kLD1: return "ld1";
    case StrategyKind::kECD2: return "ecd2";
    case StrategyKind::kLD2: return "ld2";
    case StrategyKind::kD2: return "d2";
    case StrategyKind::kGR: return "gr";
    case StrategyKind::kLM: return "lm";
  }
  return "?";
}

inline std::string_view strategy_label(StrategyKind k) {
  switch (k) {
    case StrategyKind::kLD1: return "LD1";
    case StrategyKind::kECD2: return "ECD2";
    case StrategyKind::kLD2: return "LD2";
    case StrategyKind::kD2: return "D2";
    case StrategyKind::kGR: return "GR";
    case StrategyKind::kLM: return "LM";
  }
  return "?";
}

/// Parses a lowercase strategy token. "none" is not a strategy and yields
/// nullopt like any other unknown token; callers handle it.
inline std::optional<StrategyKind> parse_strategy(std::string_view token) {
  for (StrategyKind k : kAllStrategies)
    if (strategy_token(k) == token) return k;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Filters

/// Ordered from most to least permissive.
enum class FilterKind { kDegree2, kLinearDegree2, kEqualCoefficient, kFixedVariable };

inline bool passes_filter(FilterKind kind, const Expression& e,
                          const DefinitionTable& defs) {
  std::vector<VariableId> vars;
  LinearForm form;
  try {
    vars = all_vars(e, defs);
    form = linear_form(e, defs);
  } catch (const StructuralError&) {
    return false;
  }
  std::vector<double> coef;
  for (VariableId v : vars) {
    const LinClass c = form.classify(v);
    if (c.is_linear() && std::abs(c.coefficient) > kCoefficientTolerance)
      coef.push_back(c.coefficient);
  }
  const bool all_linear = coef.size() == vars.size();
  switch (kind) {
    case FilterKind::kDegree2:
      return vars.size() <= 2 && !coef.empty();
    case FilterKind::kLinearDegree2:
      return vars.size() <= 2 && !vars.empty() && all_linear;
    case FilterKind::kEqualCoefficient: {
      if (vars.empty() || vars.size() > 2 || !all_linear) return false;
      if (coef.size() == 1) return true;
      const double a = std::abs(coef[0]);
      const double b = std::abs(coef[1]);
      return std::abs(a - b) <= kCoefficientTolerance * std::max(a, b);
    }
    case FilterKind::kFixedVariable:
      return vars.size() == 1 && all_linear;
  }
  return false;
}

/// Subset of `cons` accepted by the filter, in the given order.
inline std::vector<ConstraintId> filter_constraints(FilterKind kind,
                                                    std::span<const ConstraintId> cons,
                                                    const Model& model) {
  const ModelIndex index(model);
  std::vector<ConstraintId> out;
  for (ConstraintId c : cons) {
    const Constraint* row = index.find_constraint(c);
    if (row && passes_filter(kind, row->expr, model.defs)) out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation sets

/// Greedy lower triangular set: walk constraints in order and take the first
/// linear variable of each that appears in none of the constraints taken so
/// far; a constraint that yields a pair marks all its variables as used.
/// Only variables listed in `vars` are candidates.
inline Matching greedy_aggregation_set(std::span<const VariableId> vars,
                                       std::span<const ConstraintId> cons,
                                       const Model& model) {
  const ModelIndex index(model);
  const std::unordered_set<VariableId> candidate(vars.begin(), vars.end());
  std::unordered_set<VariableId> seen;
  Matching out;
  for (ConstraintId c : cons) {
    const Constraint* row = index.find_constraint(c);
    if (!row) continue;
    for (VariableId x : linear_vars(row->expr, model.defs)) {
      if (!candidate.count(x) || seen.count(x)) continue;
      out.push_back(MatchedEdge{x, c});
      for (VariableId v : all_vars(row->expr, model.defs)) seen.insert(v);
      break;
    }
  }
  return out;
}

/// Intermediate results of the linear-matching algorithm, kept for the
/// bounds report.
struct LinearMatchingResult {
  Matching linear_matching;  // maximum matching on linear edges
  BlockPartition blocks;     // of linear_matching in the full incidence graph
  Matching aggregation;      // final lower triangular set

  std::size_t n_match() const { return linear_matching.size(); }
  std::size_t n_block() const { return blocks.size(); }
  std::size_t n_agg() const { return aggregation.size(); }
};

/// Maximum matching on linear edges, block triangularized in the full
/// incidence graph; singleton blocks are kept and each larger block
/// contributes the greedy set over its own variables and constraints.
inline LinearMatchingResult linear_matching_aggregation_set(
    std::span<const VariableId> vars, std::span<const ConstraintId> cons,
    const Model& model) {
  LinearMatchingResult out;
  const IncidenceGraph g = bipartite_graph(vars, cons, model);
  IncidenceGraph gl(std::vector<VariableId>(vars.begin(), vars.end()),
                    std::vector<ConstraintId>(cons.begin(), cons.end()));
  for (const auto& e : g.edges())
    if (e.linear) gl.add_edge_at(e.var, e.con, true);

  out.linear_matching = maximum_matching(gl);
  if (out.linear_matching.empty()) return out;
  const IncidenceGraph gm = induced_subgraph(g, out.linear_matching);
  out.blocks = block_triangularize(gm, out.linear_matching);

  std::unordered_map<ConstraintId, std::size_t> con_order;
  for (std::size_t i = 0; i < cons.size(); ++i) con_order.emplace(cons[i], i);
  for (const auto& block : out.blocks) {
    if (block.size() == 1) {
      out.aggregation.push_back(block.front());
      continue;
    }
    std::vector<VariableId> bv;
    std::vector<ConstraintId> bc;
    for (const auto& e : block) {
      bv.push_back(e.var);
      bc.push_back(e.con);
    }
    std::sort(bc.begin(), bc.end(), [&](ConstraintId a, ConstraintId b) {
      return con_order.at(a) < con_order.at(b);
    });
    const Matching part = greedy_aggregation_set(bv, bc, model);
    if (part.empty())
      throw std::logic_error("greedy selection found no pair in a block");
    out.aggregation.insert(out.aggregation.end(), part.begin(), part.end());
  }
  if (!(out.n_block() <= out.n_agg() && out.n_agg() <= out.n_match()))
    throw std::logic_error("aggregation count outside [n_block, n_match]");
  return out;
}

namespace detail {

inline Matching filtered_matching(FilterKind kind, std::span<const VariableId> vars,
                                  std::span<const ConstraintId> cons,
                                  const Model& model) {
  const std::vector<ConstraintId> kept = filter_constraints(kind, cons, model);
  if (kept.empty()) return {};
  return linear_matching_aggregation_set(vars, kept, model).aggregation;
}

}  // namespace detail

inline Matching degree_1_aggregation_set(std::span<const VariableId> vars,
                                         std::span<const ConstraintId> cons,
                                         const Model& model) {
  return detail::filtered_matching(FilterKind::kFixedVariable, vars, cons, model);
}

inline Matching degree_two_aggregation_set(std::span<const VariableId> vars,
                                           std::span<const ConstraintId> cons,
                                           const Model& model) {
  return detail::filtered_matching(FilterKind::kDegree2, vars, cons, model);
}

inline Matching linear_degree_two_aggregation_set(std::span<const VariableId> vars,
                                                  std::span<const ConstraintId> cons,
                                                  const Model& model) {
  return detail::filtered_matching(FilterKind::kLinearDegree2, vars, cons, model);
}

inline Matching equal_coefficient_aggregation_set(std::span<const VariableId> vars,
                                                  std::span<const ConstraintId> cons,
                                                  const Model& model) {
  return detail::filtered_matching(FilterKind::kEqualCoefficient, vars, cons, model);
}

// ---------------------------------------------------------------------------
// Driver

struct StrategyResult {
  StrategyKind kind;
  EliminationOrder order;  // over all rounds, against the input model
  ReducedModel reduced;
  std::size_t rounds = 0;  // rounds that eliminated at least one pair
  std::optional<LinearMatchingResult> lm;  // set for LM
};

/// Runs a strategy on `model`. GR and LM make one pass over all equalities.
/// LD1 repeats the fixed-variable pass, substituting after each round, until
/// nothing is left to eliminate. D2, LD2 and ECD2 first run LD1 to its
/// fixpoint and then alternate one round of their own filter with another
/// LD1 fixpoint until neither finds a pair.
///
/// Variables that occur in an existing definition are not eliminated in a
/// later round, so every definition stays expressed in retained variables.
inline StrategyResult run_strategy(const Model& model, StrategyKind kind) {
  StrategyResult result{kind, {}, identity_reduction(model), 0, std::nullopt};
  result.order.defs = model.defs;
  std::unordered_set<VariableId> locked;

  auto round = [&](auto&& select) -> bool {
    const Model& work = result.reduced.model;
    std::vector<VariableId> vars;
    for (const auto& v : work.variables)
      if (!locked.count(v.id)) vars.push_back(v.id);
    const std::vector<ConstraintId> cons = work.equality_ids();
    if (vars.empty() || cons.empty()) return false;
    const Matching m = select(vars, cons, work);
    if (m.empty()) return false;

    EliminationOrder step = order_and_solve(m, work);
    for (const auto& e : step.entries) {
      for (VariableId v : all_vars(Expression::defined(e.def), step.defs))
        locked.insert(v);
      result.order.entries.push_back(e);
    }
    result.order.defs = std::move(step.defs);
    result.reduced = apply_elimination(model, result.order);
    ++result.rounds;
    return true;
  };

  auto ld1 = [&] { while (round(degree_1_aggregation_set)) {} };
  auto two_phase = [&](auto&& select) {
    ld1();
    while (round(select)) ld1();
  };

  switch (kind) {
    case StrategyKind::kGR:
      round(greedy_aggregation_set);
      break;
    case StrategyKind::kLM:
      round([&](auto vars, auto cons, const Model& work) {
        result.lm = linear_matching_aggregation_set(vars, cons, work);
        return result.lm->aggregation;
      });
      if (!result.lm) {
        result.lm.emplace();
      }
      break;
    case StrategyKind::kLD1:
      ld1();
      break;
    case StrategyKind::kD2:
      two_phase(degree_two_aggregation_set);
      break;
    case StrategyKind::kLD2:
      two_phase(linear_degree_two_aggregation_set);
      break;
    case StrategyKind::kECD2:
      two_phase(equal_coefficient_aggregation_set);
      break;
  }
  return result;
}

}  // namespace varagg
