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

// JSON model format. See docs/model-format.md for the grammar.

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "varagg/error.hpp"
#include "varagg/expr.hpp"
#include "varagg/model.hpp"

namespace varagg {

namespace detail {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text,
                                                       std::size_t byte) {
  std::size_t line = 1, column = 1;
  const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

class ModelReader {
 public:
  Model read(const Json& doc) {
    if (!doc.is_object()) fail("$", "document must be an object");
    static const std::unordered_set<std::string> known = {
        "variables", "objective", "equalities", "inequalities", "defined",
        "eliminated"};
    for (const auto& [key, value] : doc.items()) {
      (void)value;
      if (!known.count(key)) fail("$", "unknown key '" + key + "'");
    }
    if (!doc.contains("variables") || !doc["variables"].is_array())
      fail("$.variables", "required array is missing");

    Model m;
    read_variables(doc["variables"], m);
    if (doc.contains("defined")) read_defined(doc["defined"], m);
    m.objective = doc.contains("objective")
                      ? expression(doc["objective"], "$.objective")
                      : Expression::constant(0.0);
    if (doc.contains("equalities"))
      read_constraints(doc["equalities"], "$.equalities", true, m);
    if (doc.contains("inequalities"))
      read_constraints(doc["inequalities"], "$.inequalities", false, m);
    check_model(m);
    return m;
  }

 private:
  [[noreturn]] static void fail(const std::string& where,
                                const std::string& what) {
    throw ParseError(where + ": " + what, 0, 0);
  }

  static double number(const Json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(where, "number is not finite");
    return v;
  }

  void read_variables(const Json& list, Model& m) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = "$.variables[" + std::to_string(i) + "]";
      const Json& v = list[i];
      if (!v.is_object()) fail(where, "variable must be an object");
      for (const auto& [key, value] : v.items()) {
        (void)value;
        if (key != "name" && key != "lb" && key != "ub")
          fail(where, "unknown key '" + key + "'");
      }
      if (!v.contains("name") || !v["name"].is_string())
        fail(where, "variable needs a string name");
      Variable var;
      var.id = VariableId{static_cast<std::uint32_t>(m.variables.size())};
      var.name = v["name"].get<std::string>();
      if (v.contains("lb")) var.lb = number(v["lb"], where + ".lb");
      if (v.contains("ub")) var.ub = number(v["ub"], where + ".ub");
      if (var.lb > var.ub)
        throw ModelError("variable '" + var.name + "' has lb > ub");
      if (!vars_.emplace(var.name, var.id).second)
        throw ModelError("duplicate variable name '" + var.name + "'");
      m.variables.push_back(std::move(var));
    }
  }

  void read_defined(const Json& list, Model& m) {
    if (!list.is_array()) fail("$.defined", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = "$.defined[" + std::to_string(i) + "]";
      const Json& d = list[i];
      if (!d.is_object() || !d.contains("name") || !d["name"].is_string() ||
          !d.contains("expr"))
        fail(where, "definition must be {\"name\": string, \"expr\": expr}");
      const std::string name = d["name"].get<std::string>();
      if (defs_.count(name))
        throw ModelError("duplicate defined name '" + name + "'");
      Expression e = expression(d["expr"], where + ".expr");
      defs_.emplace(name, m.defs.add(name, std::move(e)));
    }
  }

  void read_constraints(const Json& list, const std::string& base,
                        bool equality, Model& m) {
    if (!list.is_array()) fail(base, "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = base + "[" + std::to_string(i) + "]";
      const Json& c = list[i];
      std::string name = (equality ? "e" : "i") + std::to_string(i + 1);
      const Json* body = &c;
      if (c.is_object()) {
        for (const auto& [key, value] : c.items()) {
          (void)value;
          if (key != "name" && key != "expr" && key != "origin")
            fail(where, "unknown key '" + key + "'");
        }
        if (!c.contains("expr")) fail(where, "constraint needs \"expr\"");
        if (c.contains("name")) {
          if (!c["name"].is_string()) fail(where + ".name", "expected a string");
          name = c["name"].get<std::string>();
        }
        body = &c["expr"];
      }
      Expression e = relation(*body, where, equality);
      if (!cons_.insert(name).second)
        throw ModelError("duplicate constraint name '" + name + "'");
      if (equality)
        m.add_equality(std::move(name), std::move(e));
      else
        m.add_inequality(std::move(name), std::move(e));
    }
  }

  // Root of a constraint may use ["==", lhs, rhs] / ["<=", lhs, rhs] /
  // [">=", lhs, rhs]; all are normalized to "expr relop 0".
  Expression relation(const Json& j, const std::string& where, bool equality) {
    if (j.is_array() && !j.empty() && j[0].is_string()) {
      const std::string op = j[0].get<std::string>();
      if (op == "==" || op == "<=" || op == ">=") {
        if (j.size() != 3) fail(where, "'" + op + "' takes two operands");
        if (equality != (op == "=="))
          fail(where, "'" + op + "' is not allowed in this constraint list");
        Expression lhs = expression(j[1], where + "[1]");
        Expression rhs = expression(j[2], where + "[2]");
        if (op == ">=") return std::move(rhs) - std::move(lhs);
        return std::move(lhs) - std::move(rhs);
      }
    }
    return expression(j, where);
  }

  Expression expression(const Json& j, const std::string& where) {
    if (j.is_number()) return Expression::constant(number(j, where));
    if (!j.is_array() || j.empty() || !j[0].is_string())
      fail(where, "expression must be a number or [\"op\", ...]");
    const std::string op = j[0].get<std::string>();
    const std::size_t n = j.size() - 1;
    auto arg = [&](std::size_t k) {
      return expression(j[k], where + "[" + std::to_string(k) + "]");
    };
    auto want = [&](std::size_t count) {
      if (n != count)
        fail(where, "'" + op + "' takes " + std::to_string(count) +
                        " operand(s), got " + std::to_string(n));
    };
    if (op == "var" || op == "def") {
      want(1);
      if (!j[1].is_string()) fail(where, "'" + op + "' needs a name");
      const std::string name = j[1].get<std::string>();
      if (op == "var") {
        auto it = vars_.find(name);
        if (it == vars_.end())
          throw ModelError("unknown variable '" + name + "' at " + where);
        return Expression::variable(it->second);
      }
      auto it = defs_.find(name);
      if (it == defs_.end())
        throw ModelError("unknown defined name '" + name + "' at " + where);
      return Expression::defined(it->second);
    }
    static const std::unordered_map<std::string, Op> unary = {
        {"neg", Op::kNeg}, {"exp", Op::kExp}, {"log", Op::kLog},
        {"sin", Op::kSin}, {"cos", Op::kCos}};
    static const std::unordered_map<std::string, Op> binary = {
        {"+", Op::kAdd}, {"-", Op::kSub}, {"*", Op::kMul},
        {"/", Op::kDiv}, {"^", Op::kPow}};
    if (auto it = unary.find(op); it != unary.end()) {
      want(1);
      return Expression::unary(it->second, arg(1));
    }
    if (op == "-" && n == 1) return Expression::unary(Op::kNeg, arg(1));
    if (auto it = binary.find(op); it != binary.end()) {
      const bool variadic = op == "+" || op == "*";
      if (variadic ? n < 2 : n != 2)
        fail(where, "'" + op + "' takes " + (variadic ? "at least " : "") +
                        "two operands, got " + std::to_string(n));
      Expression acc = arg(1);
      for (std::size_t k = 2; k <= n; ++k)
        acc = Expression::binary(it->second, std::move(acc), arg(k));
      return acc;
    }
    fail(where, "unknown operator '" + op + "'");
  }

  std::unordered_map<std::string, VariableId> vars_;
  std::unordered_map<std::string, DefinedId> defs_;
  std::unordered_set<std::string> cons_;
};

class ExpressionWriter {
 public:
  ExpressionWriter(const DefinitionTable& defs,
                   std::unordered_map<VariableId, std::string> names,
                   bool inline_defs)
      : defs_(defs), names_(std::move(names)), inline_(inline_defs) {}

  OrderedJson operator()(const Expression& e) const {
    switch (e.op()) {
      case Op::kConstant:
        if (!std::isfinite(e.value()))
          throw StructuralError("cannot serialize a non-finite constant");
        return e.value();
      case Op::kVariable: {
        auto it = names_.find(e.variable_id());
        if (it == names_.end())
          throw StructuralError("expression references undeclared variable #" +
                                std::to_string(e.variable_id().value));
        return OrderedJson::array({"var", it->second});
      }
      case Op::kDefined:
        if (inline_) return (*this)(defs_.expression(e.defined_id()));
        return OrderedJson::array({"def", defs_.at(e.defined_id()).name});
      default: {
        OrderedJson out = OrderedJson::array({std::string(op_token(e.op()))});
        for (int i = 0; i < e.arity(); ++i) out.push_back((*this)(e.child(i)));
        return out;
      }
    }
  }

 private:
  const DefinitionTable& defs_;
  std::unordered_map<VariableId, std::string> names_;
  bool inline_;
};

/// One JSON value per line inside a top-level object; items are compact.
class DocumentBuilder {
 public:
  void list(const std::string& key, const std::vector<OrderedJson>& items) {
    begin(key);
    if (items.empty()) {
      out_ << "[]";
      return;
    }
    out_ << "[\n";
    for (std::size_t i = 0; i < items.size(); ++i) {
      out_ << "    " << items[i].dump();
      out_ << (i + 1 < items.size() ? ",\n" : "\n");
    }
    out_ << "  ]";
  }

  void value(const std::string& key, const OrderedJson& v) {
    begin(key);
    out_ << v.dump();
  }

  std::string finish() {
    out_ << (first_ ? "{}" : "\n}") << "\n";
    return out_.str();
  }

 private:
  void begin(const std::string& key) {
    out_ << (first_ ? "{\n" : ",\n") << "  " << OrderedJson(key).dump() << ": ";
    first_ = false;
  }

  std::ostringstream out_;
  bool first_ = true;
};

inline OrderedJson variable_json(const Variable& v) {
  OrderedJson j;
  j["name"] = v.name;
  if (v.has_lower()) j["lb"] = v.lb;
  if (v.has_upper()) j["ub"] = v.ub;
  return j;
}

inline std::string write_document(
    const Model& m, bool inline_defs,
    const std::unordered_map<ConstraintId, OrderedJson>& extra,
    const std::vector<OrderedJson>* eliminated) {
  std::unordered_map<VariableId, std::string> names;
  for (const auto& v : m.variables) names.emplace(v.id, v.name);
  const ExpressionWriter expr(m.defs, names, inline_defs);

  DocumentBuilder doc;
  std::vector<OrderedJson> vars;
  for (const auto& v : m.variables) vars.push_back(variable_json(v));
  doc.list("variables", vars);
  if (!inline_defs && !m.defs.empty()) {
    std::vector<OrderedJson> defs;
    for (const auto& d : m.defs.entries()) {
      OrderedJson j;
      j["name"] = d.name;
      j["expr"] = expr(d.expr);
      defs.push_back(std::move(j));
    }
    doc.list("defined", defs);
  }
  doc.value("objective", expr(m.objective));
  auto constraints = [&](const std::vector<Constraint>& list) {
    std::vector<OrderedJson> out;
    for (const auto& c : list) {
      OrderedJson j;
      j["name"] = c.name;
      j["expr"] = expr(c.expr);
      if (auto it = extra.find(c.id); it != extra.end()) j["origin"] = it->second;
      out.push_back(std::move(j));
    }
    return out;
  };
  doc.list("equalities", constraints(m.equalities));
  doc.list("inequalities", constraints(m.inequalities));
  if (eliminated) doc.list("eliminated", *eliminated);
  return doc.finish();
}

}  // namespace detail

/// Parses a model document. Throws ParseError for malformed JSON (with line
/// and column) or grammar violations, ModelError for unknown variables,
/// duplicate names and lb > ub.
inline Model read_model(std::string_view text) {
  detail::Json doc;
  try {
    doc = detail::Json::parse(text.begin(), text.end());
  } catch (const detail::Json::parse_error& e) {
    const auto [line, column] = detail::line_column(text, e.byte);
    std::string what = e.what();
    if (auto pos = what.find("syntax error"); pos != std::string::npos)
      what = what.substr(pos);
    throw ParseError(what, line, column);
  }
  detail::ModelReader reader;
  return reader.read(doc);
}

inline Model read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return read_model(text);
}

/// Canonical serialization. With `inline_defs` every defined reference is
/// expanded into a tree and no "defined" section is written.
inline std::string write_model(const Model& m, bool inline_defs = false) {
  return detail::write_document(m, inline_defs, {}, nullptr);
}

/// Serializes a reduced model: the retained model plus an "eliminated"
/// section and an "origin" tag on every bound-derived inequality.
inline std::string write_model(const ReducedModel& r, bool inline_defs = false) {
  std::unordered_map<VariableId, std::string> var_names;
  for (const auto& v : r.eliminated_variables) var_names.emplace(v.id, v.name);
  std::unordered_map<ConstraintId, std::string> con_names;
  for (const auto& c : r.eliminated_constraints) con_names.emplace(c.id, c.name);

  std::unordered_map<ConstraintId, detail::OrderedJson> extra;
  for (const auto& o : r.origin) {
    detail::OrderedJson j;
    j["var"] = var_names.at(o.var);
    j["bound"] = o.side == BoundSide::kLower ? "lb" : "ub";
    extra.emplace(o.inequality, std::move(j));
  }

  std::unordered_map<VariableId, std::string> retained;
  for (const auto& v : r.model.variables) retained.emplace(v.id, v.name);
  const detail::ExpressionWriter expr(r.model.defs, retained, true);

  std::vector<detail::OrderedJson> eliminated;
  for (std::size_t i = 0; i < r.order.entries.size(); ++i) {
    const Elimination& e = r.order.entries[i];
    detail::OrderedJson j = detail::variable_json(r.eliminated_variables.at(i));
    j["constraint"] = con_names.at(e.con);
    if (inline_defs)
      j["expr"] = expr(r.model.defs.expression(e.def));
    else
      j["def"] = r.model.defs.at(e.def).name;
    eliminated.push_back(std::move(j));
  }
  return detail::write_document(r.model, inline_defs, extra, &eliminated);
}

/// Model equality up to expression structure: names, bounds, constraint
/// names and expressions, objective and definitions.
inline bool structurally_equal(const Model& a, const Model& b) {
  if (a.variables.size() != b.variables.size() ||
      a.equalities.size() != b.equalities.size() ||
      a.inequalities.size() != b.inequalities.size() ||
      a.defs.size() != b.defs.size())
    return false;
  for (std::size_t i = 0; i < a.variables.size(); ++i) {
    const auto& x = a.variables[i];
    const auto& y = b.variables[i];
    if (x.id != y.id || x.name != y.name || x.lb != y.lb || x.ub != y.ub)
      return false;
  }
  auto same = [](const std::vector<Constraint>& p,
                 const std::vector<Constraint>& q) {
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i].name != q[i].name || !structurally_equal(p[i].expr, q[i].expr))
        return false;
    return true;
  };
  if (!same(a.equalities, b.equalities) || !same(a.inequalities, b.inequalities))
    return false;
  for (std::size_t i = 0; i < a.defs.size(); ++i)
    if (a.defs.entries()[i].name != b.defs.entries()[i].name ||
        !structurally_equal(a.defs.entries()[i].expr, b.defs.entries()[i].expr))
      return false;
  return structurally_equal(a.objective, b.objective);
}

}  // namespace varagg
