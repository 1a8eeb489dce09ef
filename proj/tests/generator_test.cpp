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

#include "varagg/varagg.hpp"

using namespace varagg;

TEST_CASE("generator is deterministic per seed") {
  for (GeneratorShape shape : {GeneratorShape::kLadder, GeneratorShape::kCycle}) {
    const GeneratorOptions opt{shape, 40, 0.3, 17};
    CHECK(write_model(generate_model(opt)) == write_model(generate_model(opt)));
    GeneratorOptions other = opt;
    other.seed = 18;
    CHECK(write_model(generate_model(opt)) != write_model(generate_model(other)));
  }
}

TEST_CASE("generated models are valid and sized") {
  for (GeneratorShape shape : {GeneratorShape::kLadder, GeneratorShape::kCycle})
    for (std::size_t n : {1u, 10u, 50u, 200u})
      for (double f : {0.0, 0.3, 0.7, 1.0}) {
        const Model m = generate_model({shape, n, f, n});
        CHECK_NOTHROW(check_model(m));
        CHECK_FALSE(has_errors(validate(m)));
        // chain equalities plus one leaf per six chain members
        CHECK(m.equalities.size() == n + n / 6);
        CHECK(m.variables.size() == n + std::max<std::size_t>(1, n / 5) + n / 6);
        CHECK(m.inequalities.size() == std::max<std::size_t>(1, n / 5));
        // the model reads back unchanged
        CHECK(structurally_equal(read_model(write_model(m)), m));
      }
}

TEST_CASE("zero nonlinear fraction gives linear equalities") {
  for (GeneratorShape shape : {GeneratorShape::kLadder, GeneratorShape::kCycle}) {
    const Model m = generate_model({shape, 60, 0.0, 5});
    for (const auto& c : m.equalities) CHECK(is_linear_constraint(c.expr, m.defs));
  }
  const Model nl = generate_model({GeneratorShape::kLadder, 60, 1.0, 5});
  std::size_t nonlinear = 0;
  for (const auto& c : nl.equalities)
    if (!is_linear_constraint(c.expr, nl.defs)) ++nonlinear;
  CHECK(nonlinear > 30);
}

TEST_CASE("shape tokens") {
  CHECK(parse_generator_shape("ladder") == GeneratorShape::kLadder);
  CHECK(parse_generator_shape("cycle") == GeneratorShape::kCycle);
  CHECK_FALSE(parse_generator_shape("grid"));
}
