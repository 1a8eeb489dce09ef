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

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "varagg/error.hpp"
#include "varagg/ids.hpp"

namespace varagg {

enum class Op : std::uint8_t {
  kConstant,
  kVariable,
  kDefined,
  kNeg,
  kExp,
  kLog,
  kSin,
  kCos,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
};

constexpr bool is_leaf(Op op) {
  return op == Op::kConstant || op == Op::kVariable || op == Op::kDefined;
}
constexpr bool is_unary(Op op) { return op >= Op::kNeg && op <= Op::kCos; }
constexpr bool is_binary(Op op) { return op >= Op::kAdd; }

/// Token used for an operator in the model file format.
constexpr std::string_view op_token(Op op) {
  switch (op) {
    case Op::kConstant: return "const";
    case Op::kVariable: return "var";
    case Op::kDefined: return "def";
    case Op::kNeg: return "neg";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kAdd: return "+";
    case Op::kSub: return "-";
    case Op::kMul: return "*";
    case Op::kDiv: return "/";
    case Op::kPow: return "^";
  }
  return "?";
}

namespace detail {
struct Node;
}

/// Handle to an immutable node of an expression DAG. Copies are cheap and
/// share the node; structurally identical subtrees may or may not be shared.
class Expression {
 public:
  Expression() = default;

  static Expression constant(double value);
  static Expression variable(VariableId id);
  static Expression defined(DefinedId id);
  static Expression unary(Op op, Expression child);
  static Expression binary(Op op, Expression lhs, Expression rhs);

  explicit operator bool() const noexcept { return node_ != nullptr; }

  Op op() const;
  double value() const;
  VariableId variable_id() const;
  DefinedId defined_id() const;
  const Expression& lhs() const;
  const Expression& rhs() const;

  /// Number of children (0, 1 or 2).
  int arity() const;
  const Expression& child(int i) const { return i == 0 ? lhs() : rhs(); }

  bool is_constant() const { return op() == Op::kConstant; }

  /// Node identity; equal for handles sharing the same node.
  const void* identity() const noexcept { return node_.get(); }
  bool same_node(const Expression& other) const noexcept {
    return node_ == other.node_;
  }

 private:
  explicit Expression(std::shared_ptr<const detail::Node> n)
      : node_(std::move(n)) {}

  const detail::Node& node() const;

  std::shared_ptr<const detail::Node> node_;
};

namespace detail {
struct Node {
  Op op = Op::kConstant;
  double value = 0.0;
  std::uint32_t ref = 0;
  Expression lhs;
  Expression rhs;
};
}  // namespace detail

inline const detail::Node& Expression::node() const {
  if (!node_) throw StructuralError("use of an empty expression handle");
  return *node_;
}

inline Expression Expression::constant(double value) {
  auto n = std::make_shared<detail::Node>();
  n->op = Op::kConstant;
  n->value = value;
  return Expression(std::move(n));
}

inline Expression Expression::variable(VariableId id) {
  auto n = std::make_shared<detail::Node>();
  n->op = Op::kVariable;
  n->ref = id.value;
  return Expression(std::move(n));
}

inline Expression Expression::defined(DefinedId id) {
  auto n = std::make_shared<detail::Node>();
  n->op = Op::kDefined;
  n->ref = id.value;
  return Expression(std::move(n));
}

inline Expression Expression::unary(Op op, Expression child) {
  if (!is_unary(op)) throw ContractError("not a unary operator");
  if (!child) throw ContractError("unary operator with empty operand");
  auto n = std::make_shared<detail::Node>();
  n->op = op;
  n->lhs = std::move(child);
  return Expression(std::move(n));
}

inline Expression Expression::binary(Op op, Expression lhs, Expression rhs) {
  if (!is_binary(op)) throw ContractError("not a binary operator");
  if (!lhs || !rhs) throw ContractError("binary operator with empty operand");
  auto n = std::make_shared<detail::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return Expression(std::move(n));
}

inline Op Expression::op() const { return node().op; }
inline double Expression::value() const { return node().value; }
inline VariableId Expression::variable_id() const {
  return VariableId{node().ref};
}
inline DefinedId Expression::defined_id() const { return DefinedId{node().ref}; }
inline const Expression& Expression::lhs() const { return node().lhs; }
inline const Expression& Expression::rhs() const { return node().rhs; }

inline int Expression::arity() const {
  const Op o = op();
  if (is_leaf(o)) return 0;
  return is_unary(o) ? 1 : 2;
}

// Convenience builders.

inline Expression constant(double v) { return Expression::constant(v); }
inline Expression var(VariableId id) { return Expression::variable(id); }
inline Expression ref(DefinedId id) { return Expression::defined(id); }

inline Expression operator+(Expression a, Expression b) {
  return Expression::binary(Op::kAdd, std::move(a), std::move(b));
}
inline Expression operator-(Expression a, Expression b) {
  return Expression::binary(Op::kSub, std::move(a), std::move(b));
}
inline Expression operator*(Expression a, Expression b) {
  return Expression::binary(Op::kMul, std::move(a), std::move(b));
}
inline Expression operator/(Expression a, Expression b) {
  return Expression::binary(Op::kDiv, std::move(a), std::move(b));
}
inline Expression operator-(Expression a) {
  return Expression::unary(Op::kNeg, std::move(a));
}
inline Expression operator+(Expression a, double b) { return std::move(a) + constant(b); }
inline Expression operator+(double a, Expression b) { return constant(a) + std::move(b); }
inline Expression operator-(Expression a, double b) { return std::move(a) - constant(b); }
inline Expression operator-(double a, Expression b) { return constant(a) - std::move(b); }
inline Expression operator*(Expression a, double b) { return std::move(a) * constant(b); }
inline Expression operator*(double a, Expression b) { return constant(a) * std::move(b); }
inline Expression operator/(Expression a, double b) { return std::move(a) / constant(b); }
inline Expression operator/(double a, Expression b) { return constant(a) / std::move(b); }

inline Expression pow(Expression a, Expression b) {
  return Expression::binary(Op::kPow, std::move(a), std::move(b));
}
inline Expression pow(Expression a, double b) { return pow(std::move(a), constant(b)); }
inline Expression exp(Expression a) { return Expression::unary(Op::kExp, std::move(a)); }
inline Expression log(Expression a) { return Expression::unary(Op::kLog, std::move(a)); }
inline Expression sin(Expression a) { return Expression::unary(Op::kSin, std::move(a)); }
inline Expression cos(Expression a) { return Expression::unary(Op::kCos, std::move(a)); }

struct Definition {
  DefinedId id;
  std::string name;
  Expression expr;
};

/// Ordered table of named defining expressions. Entry i may reference only
/// entries with a smaller index, so the table is always in topological
/// order. Ids are dense: the id of entry i is i.
class DefinitionTable {
 public:
  /// Appends an entry. Throws StructuralError if `expr` references an id
  /// that is not already in the table.
  DefinedId add(std::string name, Expression expr) {
    if (!expr) throw StructuralError("definition '" + name + "' is empty");
    check_references(expr, entries_.size(), name);
    const DefinedId id{static_cast<std::uint32_t>(entries_.size())};
    entries_.push_back(Definition{id, std::move(name), std::move(expr)});
    return id;
  }

  bool contains(DefinedId id) const { return id.value < entries_.size(); }

  const Definition& at(DefinedId id) const {
    if (!contains(id))
      throw StructuralError("unresolved defined reference #" +
                            std::to_string(id.value));
    return entries_[id.value];
  }

  const Expression& expression(DefinedId id) const { return at(id).expr; }

  std::span<const Definition> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Single pass over the table confirming strict topological order.
  bool is_topological() const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      try {
        check_references(entries_[i].expr, i, entries_[i].name);
      } catch (const StructuralError&) {
        return false;
      }
    }
    return true;
  }

 private:
  static void check_references(const Expression& root, std::size_t limit,
                               const std::string& name) {
    std::unordered_set<const void*> seen;
    std::vector<const Expression*> stack{&root};
    while (!stack.empty()) {
      const Expression& e = *stack.back();
      stack.pop_back();
      if (!seen.insert(e.identity()).second) continue;
      if (e.op() == Op::kDefined && e.defined_id().value >= limit)
        throw StructuralError("definition '" + name +
                              "' references entry #" +
                              std::to_string(e.defined_id().value) +
                              " which does not precede it");
      for (int i = 0; i < e.arity(); ++i) stack.push_back(&e.child(i));
    }
  }

  std::vector<Definition> entries_;
};

}  // namespace varagg
