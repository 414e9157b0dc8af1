// Copyright 2025 The seqassort Authors
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

// Drives the installed binary end to end: exit-code contract, report
// contents, and byte-determinism of emitted files.

#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

const std::string kCli = SEQASSORT_CLI_PATH;
const std::string kData = SEQASSORT_DATA_DIR;

std::string instance_path(const std::string& name) {
  return kData + "/" + name;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("seqassort_cli_" + name);
}

// Runs the binary with stderr silenced; returns the process exit code.
int run_cli(const std::string& args) {
  const std::string command = kCli + " " + args + " 2> /dev/null";
  const int status = std::system(command.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json run_json(const std::string& args, const std::string& out_name,
              int expected_exit) {
  const fs::path out = temp_file(out_name);
  REQUIRE(run_cli(args + " --out " + out.string()) == expected_exit);
  return Json::parse(slurp(out));
}

}  // namespace

TEST_CASE("simulate reports the guarantee check and passes on the fixture") {
  const Json report = run_json("simulate --instance " +
                                   instance_path("mnl_two_point.json") +
                                   " --policy alg1:gamma --order worst --exact",
                               "simulate.json", 0);
  REQUIRE(report["pass"].get<bool>());
  REQUIRE(report["policy_value"].get<double>() == Catch::Approx(1.05));
  REQUIRE(report["opt_value"].get<double>() == Catch::Approx(1.25));
  REQUIRE(report["gamma"].get<double>() == Catch::Approx(5.0 / 12.0));
  REQUIRE(report["mode"] == "exact");
  REQUIRE(report["rows"].size() == 2);
}

TEST_CASE("simulate honors an explicit arrival order") {
  const Json report = run_json("simulate --instance " +
                                   instance_path("mnl_two_point.json") +
                                   " --policy alg1:half --order given:1,0 --exact",
                               "given.json", 0);
  for (const Json& row : report["rows"]) {
    REQUIRE(row["order"] == "1 0");
  }
}

TEST_CASE("simulate exits 1 when the guarantee fails") {
  // An absurd external threshold collects nothing, so rho * 0 < opt.
  const int code = run_cli("simulate --instance " +
                           instance_path("mnl_two_point.json") +
                           " --policy alg1:half --threshold-source external:1000"
                           " --order worst --exact --out " +
                           temp_file("fail.json").string());
  REQUIRE(code == 1);
  const Json report = Json::parse(slurp(temp_file("fail.json")));
  REQUIRE_FALSE(report["pass"].get<bool>());
  REQUIRE(report["policy_value"].get<double>() == 0.0);
}

TEST_CASE("usage and validation problems exit 2") {
  REQUIRE(run_cli("simulate --instance /nonexistent.json --policy alg1:half"
                  " --exact") == 2);
  REQUIRE(run_cli("simulate --instance " + instance_path("mnl_two_point.json") +
                  " --policy alg9:bogus --exact") == 2);
  REQUIRE(run_cli("simulate --instance " + instance_path("mnl_two_point.json") +
                  " --policy convexpi:half --exact") == 2);
  REQUIRE(run_cli("simulate --instance " + instance_path("mnl_two_point.json") +
                  " --policy alg1:half --threshold-source bogus --exact") == 2);
  REQUIRE(run_cli("simulate --no-such-flag") == 2);
  REQUIRE(run_cli("") == 2);
  REQUIRE(run_cli("lowerbound --delta 0.5") == 2);           // neither mode
  REQUIRE(run_cli("lowerbound --thm53 --reduction --delta 0.5 --kappa 0.5 "
                  "--instance " + instance_path("mnl_two_point.json")) == 2);
  // Cardinality policy on an unconstrained instance is a model mismatch.
  REQUIRE(run_cli("simulate --instance " + instance_path("mnl_two_point.json") +
                  " --policy alg2:strong --exact") == 2);
  // CSV is defined only for the per-realization simulate rows.
  REQUIRE(run_cli("oracle --instance " + instance_path("mnl_two_point.json") +
                  " --exact --format csv") == 2);
  REQUIRE(run_cli("--help > /dev/null") == 0);
}

TEST_CASE("identical flags and seed produce byte-identical reports") {
  const std::string base = "simulate --instance " +
                           instance_path("lcf_knapsack.json") +
                           " --policy alg3:weak --order random --trials 2000"
                           " --seed 42";
  const fs::path a = temp_file("bytes_a.json");
  const fs::path b = temp_file("bytes_b.json");
  REQUIRE(run_cli(base + " --out " + a.string()) == 0);
  REQUIRE(run_cli(base + " --out " + b.string()) == 0);
  REQUIRE(slurp(a) == slurp(b));

  // Thread count must not change the bytes either.
  const std::string exact = "simulate --instance " +
                            instance_path("mnl_knapsack_mixed.json") +
                            " --policy alg4:five --order worst --exact";
  const fs::path t1 = temp_file("bytes_t1.json");
  const fs::path t4 = temp_file("bytes_t4.json");
  REQUIRE(run_cli(exact + " --threads 1 --out " + t1.string()) == 0);
  REQUIRE(run_cli(exact + " --threads 4 --out " + t4.string()) == 0);
  REQUIRE(slurp(t1) == slurp(t4));
}

TEST_CASE("csv output has one row per joint support point plus a header") {
  const fs::path out = temp_file("rows.csv");
  REQUIRE(run_cli("simulate --instance " + instance_path("mnl_cardinality.json") +
                  " --policy alg2:strong --order worst --exact --format csv"
                  " --out " + out.string()) == 0);
  const std::string csv = slurp(out);
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  // Joint support: 2 * 1 * 2 atom combinations.
  REQUIRE(lines == 4 + 1);
  REQUIRE(csv.rfind("prob,opt,policy,order\n", 0) == 0);
}

TEST_CASE("conditions subcommand reports the expected condition set") {
  const char* files[] = {"mnl_two_point.json", "gam_unconstrained.json",
                         "rum_cardinality.json", "lcf_knapsack.json"};
  for (const char* file : files) {
    const Json reports =
        run_json("conditions --instance " + instance_path(file) +
                     " --model-checks all --tol 1e-9",
                 "conditions.json", 0);
    REQUIRE(reports.size() == 4);
    for (const Json& entry : reports) {
      REQUIRE(entry["holds"].get<bool>());
    }
  }
}

TEST_CASE("threshold and oracle subcommands emit their statistics") {
  const Json thresholds =
      run_json("threshold --instance " + instance_path("mnl_two_point.json") +
                   " --policy alg1:gamma",
               "threshold.json", 0);
  REQUIRE(thresholds["tau"].get<double>() == Catch::Approx(15.0 / 17.0));

  const Json stats = run_json(
      "oracle --instance " + instance_path("mnl_two_point.json") + " --exact",
      "oracle.json", 0);
  REQUIRE(stats["exact"].get<bool>());
  REQUIRE(stats["expected_opt"].get<double>() == Catch::Approx(1.25));

  const Json sampled = run_json(
      "oracle --instance " + instance_path("mnl_two_point.json") +
          " --trials 4000 --seed 3",
      "oracle_mc.json", 0);
  REQUIRE_FALSE(sampled["exact"].get<bool>());
  REQUIRE(sampled["expected_opt"].get<double>() ==
          Catch::Approx(1.25).margin(0.1));
}

TEST_CASE("lowerbound subcommand covers both experiment modes") {
  const Json thm53 = run_json(
      "lowerbound --thm53 --delta 0.001 --kappa 0.5", "thm53.json", 0);
  REQUIRE(thm53["ratio"].get<double>() >= 1.49);
  REQUIRE(thm53["gamma"].get<double>() == Catch::Approx(0.5).margin(0.005));
  REQUIRE(thm53["instance"]["items"].size() == 2);

  const Json reduced = run_json(
      "lowerbound --reduction --delta 1e-6 --instance " +
          instance_path("mnl_cardinality.json"),
      "reduction.json", 0);
  REQUIRE(reduced["instance"]["model"]["v0"].get<double>() == 0.0);
  REQUIRE(reduced["log_attraction"].size() == 3);
  // Zero revenue is outside the reduction's domain.
  REQUIRE(run_cli("lowerbound --reduction --delta 1e-6 --instance " +
                  instance_path("mnl_two_point.json")) == 2);
}

TEST_CASE("convexpi subcommand checks the factor-two bound") {
  const Json report = run_json(
      "convexpi --instance " + instance_path("mnl_two_point.json") + " --exact",
      "convexpi.json", 0);
  REQUIRE(report["pass"].get<bool>());
  REQUIRE(report["benchmark"].get<double>() == Catch::Approx(3.5));
  REQUIRE(report["threshold"].get<double>() == Catch::Approx(1.75));
  REQUIRE(run_cli("convexpi --instance " + instance_path("mnl_two_point.json") +
                  " --policy alg1:half --exact") == 2);
}
