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

// Structural queries and rewrites on expression DAGs: participating and
// linear variables, constant folding, evaluation and substitution.

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "varagg/error.hpp"
#include "varagg/expr.hpp"

namespace varagg {

/// Coefficients at or below this magnitude are treated as zero: such a
/// variable is not reported as linear and cannot be pivoted on.
inline constexpr double kCoefficientTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Participating variables

/// Variables reachable from `e`, expanding defined references, in order of
/// first appearance (left-to-right preorder). Linear in the number of nodes.
inline std::vector<VariableId> all_vars(const Expression& e,
                                        const DefinitionTable& defs) {
  std::vector<VariableId> out;
  std::unordered_set<VariableId> found;
  std::unordered_set<const void*> visited;
  std::unordered_set<DefinedId> expanded;

  std::function<void(const Expression&)> walk = [&](const Expression& n) {
    if (!visited.insert(n.identity()).second) return;
    switch (n.op()) {
      case Op::kConstant:
        return;
      case Op::kVariable:
        if (found.insert(n.variable_id()).second) out.push_back(n.variable_id());
        return;
      case Op::kDefined:
        if (expanded.insert(n.defined_id()).second)
          walk(defs.expression(n.defined_id()));
        return;
      default:
        for (int i = 0; i < n.arity(); ++i) walk(n.child(i));
    }
  };
  walk(e);
  return out;
}

/// True if `e` references a defined entry that is missing from `defs`.
inline bool has_unresolved_reference(const Expression& e,
                                     const DefinitionTable& defs) {
  try {
    (void)all_vars(e, defs);
  } catch (const StructuralError&) {
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Linearity

/// How a single variable participates in an expression.
struct LinClass {
  enum class Kind { kAbsent, kLinear, kNonlinear };

  Kind kind = Kind::kAbsent;
  double coefficient = 0.0;  // meaningful only for kLinear

  static LinClass absent() { return {}; }
  static LinClass linear(double a) { return {Kind::kLinear, a}; }
  static LinClass nonlinear() { return {Kind::kNonlinear, 0.0}; }

  bool is_absent() const { return kind == Kind::kAbsent; }
  bool is_linear() const { return kind == Kind::kLinear; }
  bool is_nonlinear() const { return kind == Kind::kNonlinear; }

  friend bool operator==(const LinClass&, const LinClass&) = default;
};

/// Per-variable classification of a whole expression, computed in one pass.
/// A variable listed in `linear` satisfies e = a*x + r with r free of x and
/// a the recorded coefficient. The rules are structural and conservative.
struct LinearForm {
  /// Set iff the expression has no variables and folds to a finite value.
  std::optional<double> constant;
  std::vector<std::pair<VariableId, double>> linear;
  std::vector<VariableId> nonlinear;

  bool has_variables() const { return !linear.empty() || !nonlinear.empty(); }

  LinClass classify(VariableId x) const {
    if (std::find(nonlinear.begin(), nonlinear.end(), x) != nonlinear.end())
      return LinClass::nonlinear();
    for (const auto& [v, a] : linear)
      if (v == x) return LinClass::linear(a);
    return LinClass::absent();
  }
};

namespace detail {

inline std::optional<double> finite_or_none(double v) {
  if (std::isfinite(v)) return v;
  return std::nullopt;
}

inline std::optional<double> apply_unary(Op op, double a) {
  switch (op) {
    case Op::kNeg: return -a;
    case Op::kExp: return finite_or_none(std::exp(a));
    case Op::kLog:
      if (a <= 0.0) return std::nullopt;
      return finite_or_none(std::log(a));
    case Op::kSin: return finite_or_none(std::sin(a));
    case Op::kCos: return finite_or_none(std::cos(a));
    default: return std::nullopt;
  }
}

inline std::optional<double> apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::kAdd: return finite_or_none(a + b);
    case Op::kSub: return finite_or_none(a - b);
    case Op::kMul: return finite_or_none(a * b);
    case Op::kDiv:
      if (b == 0.0) return std::nullopt;
      return finite_or_none(a / b);
    case Op::kPow: return finite_or_none(std::pow(a, b));
    default: return std::nullopt;
  }
}

inline void mark_all_nonlinear(const LinearForm& f, LinearForm& out) {
  for (const auto& [v, a] : f.linear) {
    (void)a;
    if (std::find(out.nonlinear.begin(), out.nonlinear.end(), v) ==
        out.nonlinear.end())
      out.nonlinear.push_back(v);
  }
  for (VariableId v : f.nonlinear)
    if (std::find(out.nonlinear.begin(), out.nonlinear.end(), v) ==
        out.nonlinear.end())
      out.nonlinear.push_back(v);
}

inline void scale(LinearForm& f, double s) {
  for (auto& [v, a] : f.linear) {
    (void)v;
    a *= s;
  }
}

inline LinearForm combine_sum(const LinearForm& l, const LinearForm& r,
                              double sign) {
  LinearForm out;
  if (!l.has_variables() && !r.has_variables()) {
    if (l.constant && r.constant)
      out.constant = finite_or_none(*l.constant + sign * *r.constant);
    return out;
  }
  out.nonlinear = l.nonlinear;
  for (VariableId v : r.nonlinear)
    if (std::find(out.nonlinear.begin(), out.nonlinear.end(), v) ==
        out.nonlinear.end())
      out.nonlinear.push_back(v);
  auto add_term = [&](VariableId v, double a) {
    if (std::find(out.nonlinear.begin(), out.nonlinear.end(), v) !=
        out.nonlinear.end())
      return;
    for (auto& [w, b] : out.linear)
      if (w == v) {
        b += a;
        return;
      }
    out.linear.emplace_back(v, a);
  };
  for (const auto& [v, a] : l.linear) add_term(v, a);
  for (const auto& [v, a] : r.linear) add_term(v, sign * a);
  return out;
}

class LinearAnalyzer {
 public:
  explicit LinearAnalyzer(const DefinitionTable& defs) : defs_(defs) {}

  const LinearForm& form(const Expression& e) {
    if (auto it = memo_.find(e.identity()); it != memo_.end()) return it->second;
    LinearForm f = compute(e);
    return memo_.emplace(e.identity(), std::move(f)).first->second;
  }

 private:
  LinearForm compute(const Expression& e) {
    LinearForm out;
    const Op op = e.op();
    switch (op) {
      case Op::kConstant:
        out.constant = finite_or_none(e.value());
        return out;
      case Op::kVariable:
        out.linear.emplace_back(e.variable_id(), 1.0);
        return out;
      case Op::kDefined: {
        auto it = def_memo_.find(e.defined_id());
        if (it == def_memo_.end())
          it = def_memo_
                   .emplace(e.defined_id(),
                            form(defs_.expression(e.defined_id())))
                   .first;
        return it->second;
      }
      case Op::kNeg: {
        out = form(e.lhs());
        scale(out, -1.0);
        if (out.constant) out.constant = -*out.constant;
        return out;
      }
      case Op::kExp:
      case Op::kLog:
      case Op::kSin:
      case Op::kCos: {
        const LinearForm& c = form(e.lhs());
        if (!c.has_variables()) {
          if (c.constant) out.constant = apply_unary(op, *c.constant);
          return out;
        }
        mark_all_nonlinear(c, out);
        return out;
      }
      case Op::kAdd:
        return combine_sum(form(e.lhs()), form(e.rhs()), 1.0);
      case Op::kSub:
        return combine_sum(form(e.lhs()), form(e.rhs()), -1.0);
      case Op::kMul: {
        const LinearForm l = form(e.lhs());
        const LinearForm& r = form(e.rhs());
        if (!l.has_variables() && !r.has_variables()) {
          if (l.constant && r.constant)
            out.constant = apply_binary(op, *l.constant, *r.constant);
          return out;
        }
        if (!l.has_variables() && l.constant) {
          out = r;
          scale(out, *l.constant);
          out.constant.reset();
          return out;
        }
        if (!r.has_variables() && r.constant) {
          out = l;
          scale(out, *r.constant);
          out.constant.reset();
          return out;
        }
        mark_all_nonlinear(l, out);
        mark_all_nonlinear(r, out);
        return out;
      }
      case Op::kDiv: {
        const LinearForm l = form(e.lhs());
        const LinearForm& r = form(e.rhs());
        if (!l.has_variables() && !r.has_variables()) {
          if (l.constant && r.constant)
            out.constant = apply_binary(op, *l.constant, *r.constant);
          return out;
        }
        if (!r.has_variables() && r.constant && *r.constant != 0.0) {
          out = l;
          scale(out, 1.0 / *r.constant);
          out.constant.reset();
          return out;
        }
        mark_all_nonlinear(l, out);
        mark_all_nonlinear(r, out);
        return out;
      }
      case Op::kPow: {
        const LinearForm l = form(e.lhs());
        const LinearForm& r = form(e.rhs());
        if (!l.has_variables() && !r.has_variables()) {
          if (l.constant && r.constant)
            out.constant = apply_binary(op, *l.constant, *r.constant);
          return out;
        }
        mark_all_nonlinear(l, out);
        mark_all_nonlinear(r, out);
        return out;
      }
    }
    return out;
  }

  const DefinitionTable& defs_;
  std::unordered_map<const void*, LinearForm> memo_;
  std::unordered_map<DefinedId, LinearForm> def_memo_;
};

}  // namespace detail

/// Linear/nonlinear classification of every variable of `e` at once.
inline LinearForm linear_form(const Expression& e, const DefinitionTable& defs) {
  detail::LinearAnalyzer analyzer(defs);
  return analyzer.form(e);
}

/// Classifies how `x` participates in `e`. Linear(a) is returned only when
/// e is structurally a*x + r with a a foldable constant and r free of x.
inline LinClass classify_linear(const Expression& e, VariableId x,
                                const DefinitionTable& defs) {
  try {
    return linear_form(e, defs).classify(x);
  } catch (const StructuralError&) {
    // Unresolvable structure gives no guarantee of linearity.
    return LinClass::nonlinear();
  }
}

/// Variables of `e` that participate linearly with a coefficient larger
/// than kCoefficientTolerance, in first-appearance order.
inline std::vector<VariableId> linear_vars(const Expression& e,
                                           const DefinitionTable& defs) {
  const LinearForm f = linear_form(e, defs);
  std::vector<VariableId> out;
  for (VariableId v : all_vars(e, defs)) {
    const LinClass c = f.classify(v);
    if (c.is_linear() && std::abs(c.coefficient) > kCoefficientTolerance)
      out.push_back(v);
  }
  return out;
}

/// Constant value of `e` if it contains no variables and folds cleanly.
inline std::optional<double> constant_value(const Expression& e,
                                            const DefinitionTable& defs) {
  const LinearForm f = linear_form(e, defs);
  if (f.has_variables()) return std::nullopt;
  return f.constant;
}

// ---------------------------------------------------------------------------
// Error paths

namespace detail {

/// Carries an error up the recursion while the node path is assembled.
struct PathedFailure {
  bool domain = true;
  std::string message;
  std::vector<std::string> reversed_path;
};

inline std::string format_path(const std::vector<std::string>& reversed) {
  std::string out = "$";
  for (auto it = reversed.rbegin(); it != reversed.rend(); ++it) out += *it;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Constant folding

namespace detail {

inline bool is_const(const Expression& e, double v) {
  return e.op() == Op::kConstant && e.value() == v;
}

inline Expression make_unary(Op op, Expression c) {
  if (op == Op::kNeg && c.op() == Op::kNeg) return c.lhs();
  return Expression::unary(op, std::move(c));
}

/// Builds a binary node, dropping neutral constants (x+0, x-0, 0-x, x*1,
/// x/1, x^1). Evaluation is unchanged up to the sign of zero.
inline Expression make_binary(Op op, Expression l, Expression r) {
  switch (op) {
    case Op::kAdd:
      if (is_const(l, 0.0)) return r;
      if (is_const(r, 0.0)) return l;
      break;
    case Op::kSub:
      if (is_const(r, 0.0)) return l;
      if (is_const(l, 0.0)) return make_unary(Op::kNeg, std::move(r));
      break;
    case Op::kMul:
      if (is_const(l, 1.0)) return r;
      if (is_const(r, 1.0)) return l;
      break;
    case Op::kDiv:
    case Op::kPow:
      if (is_const(r, 1.0)) return l;
      break;
    default:
      break;
  }
  return Expression::binary(op, std::move(l), std::move(r));
}

class Folder {
 public:
  Expression fold(const Expression& e) {
    if (auto it = memo_.find(e.identity()); it != memo_.end()) return it->second;
    Expression out = compute(e);
    memo_.emplace(e.identity(), out);
    return out;
  }

 private:
  Expression child(const Expression& e, int i) {
    try {
      return fold(e.child(i));
    } catch (PathedFailure& f) {
      f.reversed_path.push_back("." + std::to_string(i));
      throw;
    }
  }

  static std::string describe(Op op, double a, double b) {
    std::ostringstream os;
    os.precision(17);
    os << "cannot fold " << op_token(op) << "(" << a;
    if (is_binary(op)) os << ", " << b;
    os << ")";
    return os.str();
  }

  Expression compute(const Expression& e) {
    const Op op = e.op();
    if (is_leaf(op)) return e;
    if (is_unary(op)) {
      Expression c = child(e, 0);
      if (c.is_constant()) {
        if (auto v = apply_unary(op, c.value()))
          return Expression::constant(*v);
        throw PathedFailure{true, describe(op, c.value(), 0.0), {}};
      }
      Expression out = make_unary(op, std::move(c));
      if (out.op() == op && out.lhs().same_node(e.lhs())) return e;
      return out;
    }
    Expression l = child(e, 0);
    Expression r = child(e, 1);
    if (l.is_constant() && r.is_constant()) {
      if (auto v = apply_binary(op, l.value(), r.value()))
        return Expression::constant(*v);
      throw PathedFailure{true, describe(op, l.value(), r.value()), {}};
    }
    Expression out = make_binary(op, l, r);
    // Keep the original node when nothing changed so sharing survives.
    if (out.op() == op && out.arity() == 2 && out.lhs().same_node(e.lhs()) &&
        out.rhs().same_node(e.rhs()))
      return e;
    return out;
  }

  std::unordered_map<const void*, Expression> memo_;
};

}  // namespace detail

/// Collapses operator nodes whose children are all constants and drops
/// neutral constants. Defined references are left untouched. Throws
/// FoldError (with node path) on a folded domain error such as 1/0.
inline Expression fold_constants(const Expression& e) {
  detail::Folder folder;
  try {
    return folder.fold(e);
  } catch (const detail::PathedFailure& f) {
    throw FoldError(f.message, detail::format_path(f.reversed_path));
  }
}

// ---------------------------------------------------------------------------
// Evaluation

/// Dense variable assignment keyed by VariableId.
class Assignment {
 public:
  Assignment() = default;
  Assignment(std::initializer_list<std::pair<VariableId, double>> values) {
    for (const auto& [v, x] : values) set(v, x);
  }

  void set(VariableId v, double x) {
    if (v.value >= values_.size()) {
      values_.resize(v.value + 1, 0.0);
      present_.resize(v.value + 1, 0);
    }
    values_[v.value] = x;
    present_[v.value] = 1;
  }

  bool contains(VariableId v) const {
    return v.value < present_.size() && present_[v.value] != 0;
  }

  double get(VariableId v) const { return values_.at(v.value); }

 private:
  std::vector<double> values_;
  std::vector<char> present_;
};

/// Evaluates several expressions against one assignment, computing each
/// defined entry at most once.
class Evaluator {
 public:
  Evaluator(const DefinitionTable& defs, const Assignment& assignment)
      : defs_(defs), assignment_(assignment), cache_(defs.size()),
        state_(defs.size(), 0) {}

  double operator()(const Expression& e) {
    try {
      return eval(e);
    } catch (const detail::PathedFailure& f) {
      throw EvalError(f.domain ? EvalError::Kind::kDomain
                               : EvalError::Kind::kMissingAssignment,
                      f.message, detail::format_path(f.reversed_path));
    }
  }

  /// Value of a defined entry under the current assignment.
  double defined(DefinedId id) { return (*this)(Expression::defined(id)); }

 private:
  static double checked(double v, Op op) {
    if (!std::isfinite(v))
      throw detail::PathedFailure{
          true, std::string("non-finite result of ") + std::string(op_token(op)),
          {}};
    return v;
  }

  double child(const Expression& e, int i) {
    try {
      return eval(e.child(i));
    } catch (detail::PathedFailure& f) {
      f.reversed_path.push_back("." + std::to_string(i));
      throw;
    }
  }

  double eval(const Expression& e) {
    const Op op = e.op();
    switch (op) {
      case Op::kConstant:
        return e.value();
      case Op::kVariable: {
        const VariableId v = e.variable_id();
        if (!assignment_.contains(v))
          throw detail::PathedFailure{
              false, "no value for variable #" + std::to_string(v.value), {}};
        return assignment_.get(v);
      }
      case Op::kDefined: {
        const DefinedId id = e.defined_id();
        const Definition& d = defs_.at(id);
        if (state_[id.value] == 1) return cache_[id.value];
        try {
          cache_[id.value] = eval(d.expr);
        } catch (detail::PathedFailure& f) {
          f.reversed_path.push_back("@" + d.name);
          throw;
        }
        state_[id.value] = 1;
        return cache_[id.value];
      }
      case Op::kNeg:
        return -child(e, 0);
      case Op::kExp:
        return checked(std::exp(child(e, 0)), op);
      case Op::kLog: {
        const double a = child(e, 0);
        if (a <= 0.0)
          throw detail::PathedFailure{true, "log of non-positive value", {}};
        return std::log(a);
      }
      case Op::kSin:
        return checked(std::sin(child(e, 0)), op);
      case Op::kCos:
        return checked(std::cos(child(e, 0)), op);
      case Op::kAdd:
        return checked(child(e, 0) + child(e, 1), op);
      case Op::kSub:
        return checked(child(e, 0) - child(e, 1), op);
      case Op::kMul:
        return checked(child(e, 0) * child(e, 1), op);
      case Op::kDiv: {
        const double a = child(e, 0);
        const double b = child(e, 1);
        if (b == 0.0) throw detail::PathedFailure{true, "division by zero", {}};
        return checked(a / b, op);
      }
      case Op::kPow:
        return checked(std::pow(child(e, 0), child(e, 1)), op);
    }
    return 0.0;
  }

  const DefinitionTable& defs_;
  const Assignment& assignment_;
  std::vector<double> cache_;
  std::vector<char> state_;
};

/// Evaluates `e` with real arithmetic. Throws EvalError on a missing
/// assignment or a domain error (division by zero, log of a non-positive
/// value, non-finite intermediate).
inline double evaluate(const Expression& e, const Assignment& assignment,
                       const DefinitionTable& defs) {
  Evaluator eval(defs, assignment);
  return eval(e);
}

// ---------------------------------------------------------------------------
// Substitution

/// Replaces variable references by arbitrary expressions. One instance may
/// be applied to many expressions; nodes shared between them stay shared.
class Substitution {
 public:
  Substitution() = default;
  explicit Substitution(std::unordered_map<VariableId, Expression> replacements)
      : replacements_(std::move(replacements)) {}

  void bind(VariableId x, Expression replacement) {
    replacements_[x] = std::move(replacement);
    memo_.clear();
  }

  bool empty() const { return replacements_.empty(); }

  Expression operator()(const Expression& e) {
    if (replacements_.empty()) return e;
    if (auto it = memo_.find(e.identity()); it != memo_.end())
      return it->second.second;
    Expression out = compute(e);
    // The key node is kept alive so its address cannot be reused.
    memo_.emplace(e.identity(), std::make_pair(e, out));
    return out;
  }

 private:
  Expression compute(const Expression& e) {
    const Op op = e.op();
    if (op == Op::kVariable) {
      auto it = replacements_.find(e.variable_id());
      return it == replacements_.end() ? e : it->second;
    }
    if (is_leaf(op)) return e;
    if (is_unary(op)) {
      Expression c = (*this)(e.lhs());
      return c.same_node(e.lhs()) ? e : Expression::unary(op, std::move(c));
    }
    Expression l = (*this)(e.lhs());
    Expression r = (*this)(e.rhs());
    if (l.same_node(e.lhs()) && r.same_node(e.rhs())) return e;
    return Expression::binary(op, std::move(l), std::move(r));
  }

  std::unordered_map<VariableId, Expression> replacements_;
  std::unordered_map<const void*, std::pair<Expression, Expression>> memo_;
};

/// Replaces every reference to `x` by a reference to the defined entry
/// `replacement`. Untouched subtrees are returned as the same nodes.
inline Expression substitute(const Expression& e, VariableId x,
                             DefinedId replacement) {
  Substitution s;
  s.bind(x, Expression::defined(replacement));
  return s(e);
}

// ---------------------------------------------------------------------------
// Structural comparison and printing

/// Node-by-node equality; defined references compare by id.
inline bool structurally_equal(const Expression& a, const Expression& b) {
  if (a.same_node(b)) return true;
  if (!a || !b) return false;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::kConstant:
      return a.value() == b.value() ||
             (std::isnan(a.value()) && std::isnan(b.value()));
    case Op::kVariable:
      return a.variable_id() == b.variable_id();
    case Op::kDefined:
      return a.defined_id() == b.defined_id();
    default:
      for (int i = 0; i < a.arity(); ++i)
        if (!structurally_equal(a.child(i), b.child(i))) return false;
      return true;
  }
}

/// Infix rendering for diagnostics. Names default to "x#<id>" / "d#<id>".
inline std::string to_string(
    const Expression& e,
    const std::function<std::string(VariableId)>& var_name = {},
    const std::function<std::string(DefinedId)>& def_name = {}) {
  std::ostringstream os;
  os.precision(17);
  std::function<void(const Expression&)> rec = [&](const Expression& n) {
    switch (n.op()) {
      case Op::kConstant:
        os << n.value();
        return;
      case Op::kVariable:
        if (var_name) os << var_name(n.variable_id());
        else os << "x#" << n.variable_id().value;
        return;
      case Op::kDefined:
        if (def_name) os << def_name(n.defined_id());
        else os << "d#" << n.defined_id().value;
        return;
      case Op::kNeg:
        os << "-(";
        rec(n.lhs());
        os << ")";
        return;
      case Op::kExp:
      case Op::kLog:
      case Op::kSin:
      case Op::kCos:
        os << op_token(n.op()) << "(";
        rec(n.lhs());
        os << ")";
        return;
      default:
        os << "(";
        rec(n.lhs());
        os << " " << op_token(n.op()) << " ";
        rec(n.rhs());
        os << ")";
    }
  };
  rec(e);
  return os.str();
}

}  // namespace varagg
