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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"

using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "varagg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = varagg::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(VARAGG_TEST_DATA) + "/" + name; }
std::string demo() { return std::string(VARAGG_SOURCE_DIR) + "/models/demo.json"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "varagg_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("reduce with every method succeeds on the demo model") {
  for (const char* method : {"none", "ld1", "ecd2", "ld2", "d2", "gr", "lm"}) {
    const Run r = run({"reduce", demo(), "--method", method, "--report", "json", "--check", "100"});
    INFO(method << "\n" << r.err);
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["before"]["n_var"] == 12);
    CHECK(doc["after"]["n_var"].get<int>() + doc["after"]["n_elim"].get<int>() == 12);
    CHECK_THAT(r.err, ContainsSubstring("check: 100 samples agree"));
    if (std::string(method) == "none") CHECK(doc["before"] == doc["after"]);
    if (std::string(method) == "lm") {
      CHECK(doc["after"]["n_elim"].get<int>() > 0);
      CHECK(doc["bounds"]["n_agg"] == doc["after"]["n_elim"]);
    } else {
      CHECK(doc["bounds"].is_null());
    }
  }
}

TEST_CASE("input errors exit with code 1") {
  Run r = run({"reduce", data("broken.json")});
  CHECK(r.code == 1);
  CHECK_THAT(r.err, ContainsSubstring("flow"));

  r = run({"reduce", data("syntax.json")});
  CHECK(r.code == 1);
  CHECK_THAT(r.err, ContainsSubstring("syntax.json:3:"));

  CHECK(run({"reduce", data("does_not_exist.json")}).code == 1);
  CHECK(run({"reduce", demo(), "--method", "bogus"}).code == 1);
  CHECK(run({}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("transformation failures exit with code 2") {
  const Run r = run({"reduce", data("bad_fold.json"), "--method", "gr"});
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("odd"));
}

TEST_CASE("failed equivalence checks exit with code 3") {
  const Run r = run({"reduce", data("no_domain.json"), "--method", "gr", "--check", "5"});
  CHECK(r.code == 3);
  CHECK_THAT(r.err, ContainsSubstring("check:"));
}

TEST_CASE("written models read back and evaluate the same") {
  const fs::path out = scratch("demo_lm.json");
  const Run r = run({"reduce", demo(), "--method", "lm", "-o", out.string()});
  REQUIRE(r.code == 0);
  const varagg::Model reduced = varagg::read_model_file(out.string());
  const varagg::Model original = varagg::read_model_file(demo());
  CHECK(reduced.variables.size() < original.variables.size());

  const fs::path flat = scratch("demo_lm_inline.json");
  REQUIRE(run({"reduce", demo(), "--method", "lm", "--inline", "-o", flat.string()}).code == 0);
  CHECK(varagg::read_model_file(flat.string()).defs.empty());
}

TEST_CASE("runs are byte-for-byte reproducible") {
  const fs::path a = scratch("gen_a.json"), b = scratch("gen_b.json");
  REQUIRE(run({"gen", "--shape", "cycle", "--size", "40", "--seed", "3", "-o", a.string()}).code == 0);
  REQUIRE(run({"gen", "--shape", "cycle", "--size", "40", "--seed", "3", "-o", b.string()}).code == 0);
  CHECK(slurp(a) == slurp(b));

  const fs::path ra = scratch("red_a.json"), rb = scratch("red_b.json");
  const Run x = run({"reduce", a.string(), "--method", "d2", "-o", ra.string()});
  const Run y = run({"reduce", a.string(), "--method", "d2", "-o", rb.string()});
  CHECK(x.out == y.out);
  CHECK(slurp(ra) == slurp(rb));
}

TEST_CASE("analyze and incidence dump") {
  const Run r = run({"analyze", demo(), "--dump-incidence"});
  REQUIRE(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("before"));
  CHECK_THAT(r.err, ContainsSubstring("% rows 10 cols 12"));
}

TEST_CASE("output matches the golden files") {
  const fs::path golden = fs::path(VARAGG_TEST_DATA) / "golden";
  for (const char* method : {"ld2", "lm"}) {
    const fs::path out = scratch(std::string("golden_") + method + ".json");
    const Run r = run({"reduce", demo(), "--method", method, "-o", out.string()});
    REQUIRE(r.code == 0);
    INFO(method);
    CHECK(r.out == slurp(golden / (std::string("demo_") + method + ".txt")));
    CHECK(slurp(out) == slurp(golden / (std::string("demo_") + method + ".json")));
  }
}

#ifdef VARAGG_CLI_PATH
TEST_CASE("installed binary reports exit codes") {
  const std::string cli = VARAGG_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(s);
  };
  CHECK(status(cli + " reduce " + demo() + " --method lm") == 0);
  CHECK(status(cli + " reduce " + data("broken.json")) == 1);
  CHECK(status(cli + " reduce " + data("bad_fold.json") + " --method gr") == 2);
}
#endif
