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

#include "json.hpp"
#include "oracles.hpp"
#include "varagg/varagg.hpp"

using namespace varagg;
using Catch::Matchers::ContainsSubstring;

namespace {

void check_against_recount(const Model& m) {
  const StructuralMetrics s = structural_metrics(m);
  const oracle::Recount r = oracle::recount(m);
  CHECK(s.n_con == r.n_con);
  CHECK(s.max_con_degree == r.max_degree);
  if (r.n_con > 0) {
    CHECK(s.nnz_per_con == Catch::Approx(double(r.nnz) / double(r.n_con)));
    CHECK(s.lin_nnz_per_con == Catch::Approx(double(r.lin_nnz) / double(r.n_con)));
  }
  CHECK(s.lin_nnz_per_con <= s.nnz_per_con);
  CHECK(s.n_lin_con <= s.n_con);
}

}  // namespace

TEST_CASE("metrics of single constraints") {
  Model a;
  const VariableId x = a.add_variable("x"), y = a.add_variable("y");
  a.add_equality("c", var(x) + var(y));
  StructuralMetrics s = structural_metrics(a);
  CHECK(s.nnz_per_con == 2.0);
  CHECK(s.lin_nnz_per_con == 2.0);
  CHECK(s.n_lin_con == 1);

  Model b;
  const VariableId bx = b.add_variable("x"), by = b.add_variable("y");
  b.add_equality("c", var(by) - 2.0 * pow(var(bx), 2.0));
  s = structural_metrics(b);
  CHECK(s.nnz_per_con == 2.0);
  CHECK(s.lin_nnz_per_con == 1.0);
  CHECK(s.n_lin_con == 0);
  CHECK(s.max_con_degree == 2);

  Model empty;
  empty.add_variable("x");
  s = structural_metrics(empty);
  CHECK(s.n_con == 0);
  CHECK(s.nnz_per_con == 0.0);
}

TEST_CASE("metrics agree with a direct recount") {
  for (std::uint64_t seed = 0; seed < 4; ++seed)
    for (double f : {0.0, 0.3, 0.7}) {
      const Model m = generate_model({GeneratorShape::kLadder, 20, f, seed});
      check_against_recount(m);
      for (StrategyKind k : kAllStrategies) {
        const StrategyResult r = run_strategy(m, k);
        check_against_recount(r.reduced.model);
        const StructuralMetrics before = structural_metrics(m);
        const StructuralMetrics after = structural_metrics(r.reduced);
        // counting identities
        CHECK(after.n_elim == before.n_var - after.n_var);
        CHECK(after.n_con == before.n_con - after.n_elim + r.reduced.origin.size());
      }
    }
}

TEST_CASE("identity run leaves metrics unchanged") {
  const Model m = generate_model({GeneratorShape::kCycle, 30, 0.3, 2});
  const ReducedModel r = identity_reduction(m);
  CHECK(structural_metrics(r) == structural_metrics(m));
}

TEST_CASE("bounds report") {
  SECTION("diagonal linear system") {
    Model m;
    std::vector<VariableId> vs;
    for (int i = 0; i < 5; ++i) vs.push_back(m.add_variable("x" + std::to_string(i)));
    for (int i = 0; i < 5; ++i) m.add_equality("c" + std::to_string(i), var(vs[i]) - 1.0);
    const LinearMatchingResult lm =
        linear_matching_aggregation_set(vs, m.equality_ids(), m);
    const BoundsReport b = bounds_report(lm);
    CHECK(b.n_block == 5);
    CHECK(b.n_agg == 5);
    CHECK(b.n_match == 5);
  }
  SECTION("dense linear block") {
    Model m;
    std::vector<VariableId> vs;
    for (int i = 0; i < 3; ++i) vs.push_back(m.add_variable("x" + std::to_string(i)));
    m.add_equality("c0", var(vs[0]) + var(vs[1]) + var(vs[2]));
    m.add_equality("c1", var(vs[0]) - var(vs[1]) + 2.0 * var(vs[2]));
    m.add_equality("c2", 3.0 * var(vs[0]) + var(vs[1]) - var(vs[2]) - 1.0);
    const BoundsReport b =
        bounds_report(linear_matching_aggregation_set(vs, m.equality_ids(), m));
    CHECK(b.n_block == 1);
    CHECK(b.n_agg == 1);
    CHECK(b.n_match == 3);
  }
  SECTION("inconsistent counts are an internal error") {
    LinearMatchingResult lm;
    lm.aggregation = {{VariableId{0}, ConstraintId{0}}};
    CHECK_THROWS_AS(bounds_report(lm), std::logic_error);
  }
}

TEST_CASE("report rendering") {
  StructuralMetrics before{10, 8, 0, 2.5, 2.0, 3, 4};
  StructuralMetrics after{7, 6, 3, 3.0, 2.0, 4, 2};

  const std::string json = render_report(before, after, std::nullopt,
                                         ReportFormat::kJson, "LD2");
  const auto doc = nlohmann::json::parse(json);
  CHECK(doc["method"] == "LD2");
  CHECK(doc["before"]["n_var"] == 10);
  CHECK(doc["after"]["n_elim"] == 3);
  CHECK(doc["after"]["nnz_per_con"] == 3.0);
  CHECK(doc["bounds"].is_null());

  const std::string with_bounds = render_report(before, after, BoundsReport{2, 3, 4},
                                                ReportFormat::kJson, "LM");
  CHECK(nlohmann::json::parse(with_bounds)["bounds"]["n_agg"] == 3);

  const std::string table = render_report(before, after, BoundsReport{2, 3, 4},
                                          ReportFormat::kTable, "LM");
  CHECK_THAT(table, ContainsSubstring("NNZ/Con."));
  CHECK_THAT(table, ContainsSubstring("2.50"));
  CHECK_THAT(table, ContainsSubstring("n_block 2 <= n_agg 3 <= n_match 4"));
  CHECK(std::count(table.begin(), table.end(), '\n') == 4);

  CHECK(parse_report_format("json") == ReportFormat::kJson);
  CHECK_FALSE(parse_report_format("csv"));
}
