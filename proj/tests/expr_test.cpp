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

#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "random_models.hpp"
#include "varagg/varagg.hpp"

using namespace varagg;
using Catch::Matchers::ContainsSubstring;

namespace {

const VariableId kX{0}, kY{1}, kW{2};

Assignment random_point(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Assignment a;
  for (int i = 0; i < n; ++i) a.set(VariableId{static_cast<std::uint32_t>(i)}, u(rng));
  return a;
}

}  // namespace

TEST_CASE("all_vars lists variables once in first-appearance order") {
  DefinitionTable defs;
  const DefinedId d = defs.add("d", var(kW) * var(kX));
  const Expression e = var(kY) + ref(d) + var(kX) * var(kY);
  const auto vs = all_vars(e, defs);
  REQUIRE(vs == std::vector<VariableId>{kY, kW, kX});
  CHECK(all_vars(constant(3.0), defs).empty());
}

TEST_CASE("all_vars on an unresolved reference is a structural error") {
  DefinitionTable defs;
  CHECK_THROWS_AS(all_vars(ref(DefinedId{4}), defs), StructuralError);
  CHECK(has_unresolved_reference(ref(DefinedId{4}) + var(kX), defs));
}

TEST_CASE("definition table only accepts backward references") {
  DefinitionTable defs;
  CHECK_THROWS_AS(defs.add("a", ref(DefinedId{0})), StructuralError);
  const DefinedId a = defs.add("a", var(kX));
  CHECK_NOTHROW(defs.add("b", ref(a) + 1.0));
  CHECK(defs.is_topological());
}

TEST_CASE("classify_linear on hand-written cases") {
  DefinitionTable defs;
  // y - 2x^2
  const Expression quad = var(kY) - 2.0 * pow(var(kX), 2.0);
  CHECK(classify_linear(quad, kY, defs) == LinClass::linear(1.0));
  CHECK(classify_linear(quad, kX, defs).is_nonlinear());
  CHECK(classify_linear(quad, kW, defs).is_absent());

  // (3x + y) / 2 - x
  const Expression lin = (3.0 * var(kX) + var(kY)) / 2.0 - var(kX);
  CHECK(classify_linear(lin, kX, defs).coefficient == Catch::Approx(0.5));
  CHECK(classify_linear(lin, kY, defs).coefficient == Catch::Approx(0.5));

  // x*y is bilinear: nonlinear in both
  CHECK(classify_linear(var(kX) * var(kY), kX, defs).is_nonlinear());
  // division by a variable
  CHECK(classify_linear(var(kX) / var(kY), kX, defs).is_nonlinear());
  // constant coefficient built from a folded subtree
  CHECK(classify_linear((2.0 + 3.0) * var(kX), kX, defs) == LinClass::linear(5.0));
  // through a defined entry
  const DefinedId d = defs.add("d", 4.0 * var(kX) + 1.0);
  CHECK(classify_linear(var(kY) - ref(d), kX, defs) == LinClass::linear(-4.0));
  // cancellation is not detected: x - x has coefficient 0 and is dropped
  CHECK(linear_vars(var(kX) - var(kX), defs).empty());
}

TEST_CASE("linear classification agrees with finite differences") {
  std::mt19937_64 rng(11);
  int linear_seen = 0;
  for (int trial = 0; trial < 300; ++trial) {
    testing_support::ExprFactory f(rng, {var(kX), var(kY), var(kW)}, true);
    const Expression e = f.make(4);
    DefinitionTable defs;
    for (VariableId x : {kX, kY, kW}) {
      const LinClass c = classify_linear(e, x, defs);
      for (int p = 0; p < 3; ++p) {
        const Assignment at = random_point(rng, 3);
        if (c.is_linear()) {
          ++linear_seen;
          const double d = oracle::central_difference(e, x, at, defs, 0.5);
          CHECK(oracle::close_rel(d, c.coefficient, 1e-7));
          // zero curvature: a second difference vanishes
          Assignment up = at, down = at;
          up.set(x, at.get(x) + 0.75);
          down.set(x, at.get(x) - 0.75);
          const double a = evaluate(e, up, defs), b = evaluate(e, down, defs),
                       mid = evaluate(e, at, defs);
          const double scale = std::max({1.0, std::abs(a), std::abs(b), std::abs(mid)});
          CHECK(std::abs(a + b - 2 * mid) <= 1e-7 * scale);
        } else if (c.is_absent()) {
          Assignment moved = at;
          moved.set(x, at.get(x) + 1.0);
          CHECK(evaluate(e, moved, defs) == evaluate(e, at, defs));
        }
      }
    }
  }
  CHECK(linear_seen > 100);
}

TEST_CASE("fold collapses constant subtrees") {
  const Expression e = fold_constants(constant(2.0) * constant(3.0) + var(kX));
  CHECK(structurally_equal(e, constant(6.0) + var(kX)));

  const Expression x = var(kX);
  CHECK(fold_constants(x).same_node(x));
}

TEST_CASE("fold drops neutral constants") {
  const Expression e = fold_constants(100.0 * var(kX) * 1.0 + 1.0 + 0.0);
  CHECK(structurally_equal(e, 100.0 * var(kX) + 1.0));
  std::mt19937_64 rng(5);
  DefinitionTable defs;
  const Expression raw = 100.0 * var(kX) * 1.0 + 1.0 + 0.0;
  for (int i = 0; i < 10; ++i) {
    const Assignment at = random_point(rng, 1);
    CHECK(oracle::close_rel(evaluate(e, at, defs), evaluate(raw, at, defs), 1e-12));
  }
}

TEST_CASE("fold reports domain errors with a node path") {
  const Expression e = var(kX) + constant(1.0) / (constant(2.0) - constant(2.0));
  try {
    fold_constants(e);
    FAIL("expected a fold error");
  } catch (const FoldError& err) {
    CHECK(err.path() == "$.1");
  }
  CHECK_THROWS_AS(fold_constants(log(constant(-1.0))), FoldError);
}

TEST_CASE("fold is idempotent and preserves values") {
  std::mt19937_64 rng(23);
  DefinitionTable defs;
  for (int trial = 0; trial < 200; ++trial) {
    testing_support::ExprFactory f(rng, {var(kX), var(kY)}, true);
    const Expression e = f.make(5);
    const Expression once = fold_constants(e);
    CHECK(structurally_equal(fold_constants(once), once));
    const Assignment at = random_point(rng, 2);
    CHECK(oracle::close_rel(evaluate(once, at, defs), evaluate(e, at, defs), 1e-12));
  }
}

TEST_CASE("evaluation errors are classified") {
  DefinitionTable defs;
  const DefinedId d = defs.add("bad", log(var(kX)));
  try {
    evaluate(var(kY) + ref(d), Assignment{{kX, -1.0}, {kY, 0.0}}, defs);
    FAIL("expected a domain error");
  } catch (const EvalError& err) {
    CHECK(err.kind() == EvalError::Kind::kDomain);
    CHECK_THAT(err.path(), ContainsSubstring("@bad"));
  }
  try {
    evaluate(var(kY), Assignment{{kX, 1.0}}, defs);
    FAIL("expected a missing assignment");
  } catch (const EvalError& err) {
    CHECK(err.kind() == EvalError::Kind::kMissingAssignment);
  }
  CHECK_THROWS_AS(evaluate(var(kX) / (var(kX) - 1.0), Assignment{{kX, 1.0}}, defs),
                  EvalError);
}

TEST_CASE("substitution keeps untouched subtrees shared") {
  const Expression shared = sin(var(kY));
  const Expression e = (var(kX) + shared) * shared;
  const Expression out = substitute(e, kX, DefinedId{0});
  CHECK(out.lhs().rhs().same_node(shared));
  CHECK(out.rhs().same_node(shared));
  CHECK(out.lhs().lhs().op() == Op::kDefined);
  CHECK(substitute(shared, kX, DefinedId{0}).same_node(shared));
}

TEST_CASE("substitution is evaluation of the definition") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    testing_support::ExprFactory f(rng, {var(kX), var(kY), var(kW)}, true);
    DefinitionTable defs;
    const DefinedId d = defs.add("d", f.make(3));
    const Expression e = f.make(4);
    const Expression s = substitute(e, kX, d);
    Assignment at = random_point(rng, 3);
    const double through_def = evaluate(s, at, defs);
    at.set(kX, evaluate(ref(d), at, defs));
    CHECK(oracle::close_rel(through_def, evaluate(e, at, defs), 1e-12));
  }
}

TEST_CASE("worked aggregation examples") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-10.0, 10.0);

  SECTION("y := 100x + 1 into w - 2y") {
    DefinitionTable defs;
    const DefinedId y = defs.add("y", 100.0 * var(kX) + 1.0);
    const Expression reduced = substitute(var(kW) - 2.0 * var(kY), kY, y);
    for (int i = 0; i < 100; ++i) {
      const double x = u(rng), w = u(rng);
      const double got = evaluate(reduced, Assignment{{kX, x}, {kW, w}}, defs);
      CHECK(oracle::close_rel(got, w - (200.0 * x + 2.0), 1e-12));
    }
  }
  SECTION("y := x^2 + 2 into w - x - y") {
    DefinitionTable defs;
    const DefinedId y = defs.add("y", pow(var(kX), 2.0) + 2.0);
    const Expression reduced = substitute(var(kW) - var(kX) - var(kY), kY, y);
    for (int i = 0; i < 100; ++i) {
      const double x = u(rng), w = u(rng);
      const double got = evaluate(reduced, Assignment{{kX, x}, {kW, w}}, defs);
      CHECK(oracle::close_rel(got, w - (x * x + x + 2.0), 1e-12));
    }
  }
}

TEST_CASE("to_string renders infix") {
  const std::string s = to_string(var(kX) + 2.0 * sin(var(kY)),
                                  [](VariableId v) { return v == kX ? "x" : "y"; });
  CHECK(s == "(x + (2 * sin(y)))");
}
