// Copyright 2026 The cqm Authors
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

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(CQM_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& name) {
  return std::string(CQM_DATA_DIR) + "/" + name;
}

nlohmann::json parse(const std::string& s) { return nlohmann::json::parse(s); }

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cqm_cli_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("povm subcommand") {
  auto r = run("povm validate " + data("computational_pvm.json"));
  CHECK(r.code == 0);
  CHECK(parse(r.out)["passed"] == true);

  r = run("povm validate " + data("invalid_06.json"));
  CHECK(r.code == 1);
  CHECK(std::abs(parse(r.out)["normalization_residual"].get<double>() - 0.2) < 1e-12);

  r = run("povm refine " + data("computational_pvm.json"));
  CHECK(r.code == 0);
  CHECK(parse(r.out)["multiplicities"] == nlohmann::json::array({1, 1}));

  r = run("povm refine " + data("c3_example.json"));
  CHECK(r.code == 0);
  CHECK(parse(r.out)["multiplicities"] == nlohmann::json::array({2, 2}));

  r = run("povm ic " + data("sic.json"));
  CHECK(r.code == 0);
  CHECK(parse(r.out) == parse(R"({"ic": true, "span": 4})"));

  r = run("povm ic " + data("computational_pvm.json"));
  CHECK(parse(r.out) == parse(R"({"ic": false, "span": 2})"));

  CHECK(run("povm validate " + data("malformed.json")).code == 2);
  CHECK(run("povm validate " + data("does_not_exist.json")).code == 2);
  CHECK(run("povm frobnicate " + data("sic.json")).code == 2);
  CHECK(run("povm validate " + data("sic.json") + " --tol -1").code == 2);
  CHECK(run("povm refine " + data("invalid_06.json")).code == 1);
}

TEST_CASE("instrument subcommand") {
  auto r = run("instrument complete " + data("c3_example.json") + " --name c3");
  CHECK(r.code == 0);
  const auto j = parse(r.out);
  CHECK(j["name"] == "c3");
  CHECK(j["outcomes"].size() == 4);
  CHECK(j["outcomes"][1]["label"] == "x1:1");

  r = run("instrument luders " + data("trine.json"));
  CHECK(r.code == 0);
  CHECK(parse(r.out)["outcomes"].size() == 3);
  CHECK(run("instrument complete " + data("invalid_06.json")).code == 1);
  CHECK(run("instrument complete " + data("malformed.json")).code == 2);
}

TEST_CASE("ebcheck subcommand") {
  auto r = run("ebcheck " + data("complete_trine_instrument.json"));
  CHECK(r.code == 0);
  auto j = parse(r.out);
  CHECK(j["verdict"] == "entanglement_breaking_consistent");
  CHECK(j["max_negativity"].get<double>() < 1e-7);
  CHECK(j["trials"] == 200);
  CHECK(j["seed"] == 42);
  CHECK(j["counterexample"].is_null());

  r = run("ebcheck " + data("identity_channel.json") + " --trials 5");
  CHECK(r.code == 1);
  j = parse(r.out);
  CHECK(j["verdict"] == "counterexample_found");
  CHECK(j["counterexample"].is_object());

  r = run("ebcheck " + data("luders_rank2_instrument.json") + " --env-dim 2 --trials 20");
  CHECK(r.code == 1);
  CHECK(parse(r.out)["max_negativity"].get<double>() >= 0.5 - 1e-7);

  SECTION("same seed gives identical bytes") {
    const std::string args = "ebcheck " + data("complete_trine_instrument.json") + " --trials 50 --seed 9";
    const auto a = run(args), b = run(args);
    CHECK(a.out == b.out);
    CHECK_FALSE(a.out.empty());
    const auto c = run("ebcheck " + data("luders_rank2_instrument.json") + " --trials 50 --seed 9 --env-dim 3");
    const auto d = run("ebcheck " + data("luders_rank2_instrument.json") + " --trials 50 --seed 9 --env-dim 3");
    CHECK(c.out == d.out);
  }

  CHECK(run("ebcheck " + data("malformed.json")).code == 2);
  CHECK(run("ebcheck " + data("sic.json")).code == 2);
  CHECK(run("ebcheck " + data("identity_channel.json") + " --env-dim 1").code == 2);
  CHECK(run("ebcheck " + data("identity_channel.json") + " --trials abc").code == 2);
}

TEST_CASE("scenario subcommand") {
  SECTION("position example") {
    const auto dir = fresh_dir("position");
    const auto r = run("scenario position-example --out " + dir.string());
    CHECK(r.code == 0);
    const auto j = parse(r.out);
    CHECK(j["passed"] == true);
    for (const auto& ev : j["events"]) {
      CHECK(ev["bell_preserved"] == true);
      CHECK(ev["entanglement_broken"] == true);
    }
    CHECK(line_count(dir / "position-example.csv") == 65);
    std::ifstream summary(dir / "position-example_summary.json");
    std::stringstream buf;
    buf << summary.rdbuf();
    CHECK(parse(buf.str()) == j);
  }

  SECTION("position example with a config and a bad grid") {
    CHECK(run("scenario position-example " + data("position_default.json")).code == 0);
    CHECK(run("scenario position-example --grid-points 16 --grid-halfwidth 1").code == 1);
  }

  SECTION("zeno complete, 100 steps") {
    const auto dir = fresh_dir("zeno");
    const auto r = run("scenario zeno " + data("zeno_canonical.json") + " --steps 100 --mode complete --out " + dir.string());
    CHECK(r.code == 0);
    const auto j = parse(r.out);
    CHECK(j["checks"]["survival_monotone"] == true);
    CHECK(j["checks"]["entanglement_broken_every_step"] == true);
    CHECK(j["final_survival"].get<double>() >= 0.9);
    CHECK(line_count(dir / "zeno.csv") == 101);
  }

  SECTION("zeno defaults and incomplete mode") {
    auto r = run("scenario zeno");
    CHECK(r.code == 0);
    r = run("scenario zeno --mode incomplete --steps 40");
    CHECK(r.code == 0);
    CHECK(std::abs(parse(r.out)["final_fidelity"].get<double>() - 0.5) < 1e-9);
  }

  SECTION("errors") {
    CHECK(run("scenario zeno " + data("zeno_noncommuting.json")).code == 1);
    CHECK(run("scenario zeno " + data("malformed.json")).code == 2);
    CHECK(run("scenario zeno --mode sometimes").code == 2);
    CHECK(run("scenario teleport").code == 2);
    CHECK(run("").code == 2);
    CHECK(run("--bogus").code == 2);
  }
}
