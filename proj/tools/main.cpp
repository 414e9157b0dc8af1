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

// Command-line front end: load an instance, run a policy evaluation,
// condition check, threshold/oracle computation, or lower-bound experiment,
// and emit a machine-readable report.
//
// Exit codes: 0 success (and, for simulate/convexpi/conditions, the checked
// property holds); 1 a guarantee or condition fails; 2 usage or validation
// error. Identical flags and seed produce byte-identical reports.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "seqassort/json_io.hpp"

namespace {

using namespace seqassort;

// Usage/validation failure carrying the message for standard error.
struct UsageError {
  std::string message;
};

// Sub-seed tag so Monte Carlo threshold estimation never replays the same
// realizations as the evaluation trials drawn from the same --seed.
constexpr std::uint64_t kThresholdSeedTag = (1u << 20) + 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError{"cannot read instance file: " + path};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Instance load_instance(const std::string& path) {
  Instance inst;
  try {
    inst = parse_instance(read_file(path));
  } catch (const std::runtime_error& e) {
    throw UsageError{path + ": " + e.what()};
  }
  const std::vector<std::string> problems = validate(inst);
  if (!problems.empty()) {
    std::string message = path + ": invalid instance";
    for (const std::string& p : problems) message += "\n  - " + p;
    throw UsageError{message};
  }
  return inst;
}

PolicyAlg parse_policy(const std::string& text) {
  if (text == "alg1:gamma") return Alg1Config{Alg1Variant::GammaTuned};
  if (text == "alg1:half") return Alg1Config{Alg1Variant::Half};
  if (text == "alg2:strong") return Alg2Config{Alg2Variant::Strong};
  if (text == "alg2:weak") return Alg2Config{Alg2Variant::Weak};
  if (text == "alg2:gammaweak") return Alg2Config{Alg2Variant::GammaWeak};
  if (text == "alg3:strong") return Alg3Config{Alg3Variant::Strong};
  if (text == "alg3:weak") return Alg3Config{Alg3Variant::Weak};
  if (text == "alg4:five") return Alg4Config{Alg4Variant::FiveCompetitive};
  if (text == "alg4:eight") return Alg4Config{Alg4Variant::EightCompetitive};
  if (text == "convexpi:half") return ConvexPiConfig{ConvexPiRule::HalfExpectedMax};
  if (text == "convexpi:median") return ConvexPiConfig{ConvexPiRule::MedianMax};
  throw UsageError{
      "unknown policy \"" + text +
      "\"; expected one of alg1:{gamma,half} alg2:{strong,weak,gammaweak} "
      "alg3:{strong,weak} alg4:{five,eight} convexpi:{half,median}"};
}

ThresholdSource parse_source(const std::string& text, std::uint64_t seed) {
  if (text == "exact") return ExactThreshold{};
  const auto tail = [&text](const std::string& prefix) {
    return text.substr(prefix.size());
  };
  try {
    if (text.rfind("mc:", 0) == 0) {
      const int samples = std::stoi(tail("mc:"));
      if (samples <= 0) throw UsageError{"mc threshold sample count must be positive"};
      return MonteCarloThreshold{samples, mix_keys(seed, kThresholdSeedTag)};
    }
    if (text.rfind("external:", 0) == 0) {
      return ExternalThreshold{std::stod(tail("external:"))};
    }
    if (text.rfind("approx:", 0) == 0) {
      const std::string rest = tail("approx:");
      const std::size_t colon = rest.find(':');
      if (colon == std::string::npos) {
        throw UsageError{"approx threshold source needs approx:<alpha>:<value>"};
      }
      const double alpha = std::stod(rest.substr(0, colon));
      const double value = std::stod(rest.substr(colon + 1));
      if (alpha < 1.0) throw UsageError{"approx alpha must be >= 1"};
      return ApproxOracleThreshold{alpha, value};
    }
  } catch (const std::invalid_argument&) {
  } catch (const std::out_of_range&) {
  }
  throw UsageError{"unknown threshold source \"" + text +
                   "\"; expected exact | mc:<samples> | external:<v> | "
                   "approx:<alpha>:<v>"};
}

OrderStrategy parse_order(const std::string& text, std::uint64_t seed) {
  if (text == "worst") return WorstCaseOrder{};
  if (text == "random") return UniformRandomOrder{seed};
  if (text.rfind("given:", 0) == 0) {
    std::vector<int> order;
    std::stringstream parts(text.substr(6));
    std::string token;
    while (std::getline(parts, token, ',')) {
      try {
        order.push_back(std::stoi(token));
      } catch (const std::exception&) {
        throw UsageError{"given order entries must be integers: " + text};
      }
    }
    if (order.empty()) throw UsageError{"given order must list item ids: " + text};
    return GivenOrder{std::move(order)};
  }
  throw UsageError{"unknown order \"" + text +
                   "\"; expected given:<i,j,...> | random | worst"};
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw UsageError{"cannot write report file: " + out_path};
  out << text;
  if (!out) throw UsageError{"write failed for report file: " + out_path};
}

std::string render(const Json& json) { return json.dump(2) + "\n"; }

// Flags shared by the subcommands that read an instance and emit a report.
struct CommonFlags {
  std::string instance_path;
  std::string policy = "alg1:gamma";
  std::string order = "worst";
  std::string source = "exact";
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  bool exact = false;
  double tolerance = kDefaultGuaranteeTol;
  int threads = 0;  // 0 -> hardware concurrency
  std::string out_path;
  std::string format = "json";
};

int resolved_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void require_json_format(const CommonFlags& flags) {
  if (flags.format != "json") {
    throw UsageError{"csv output is only available for simulate reports"};
  }
}

int run_simulate(const CommonFlags& flags) {
  const Instance inst = load_instance(flags.instance_path);
  PolicyConfig config;
  config.alg = parse_policy(flags.policy);
  if (std::holds_alternative<ConvexPiConfig>(config.alg)) {
    throw UsageError{
        "simulate evaluates the threshold policies; use the convexpi "
        "subcommand for convexpi:half / convexpi:median"};
  }
  config.source = parse_source(flags.source, flags.seed);
  config.coin_seed = flags.seed;
  const OrderStrategy strategy = parse_order(flags.order, flags.seed);
  const EvaluationReport report =
      flags.exact
          ? exact_evaluate(inst, config, strategy, flags.tolerance,
                           resolved_threads(flags.threads))
          : mc_evaluate(inst, config, strategy, flags.trials, flags.seed,
                        flags.tolerance, resolved_threads(flags.threads));
  if (flags.format == "csv") {
    emit(report_to_csv(report), flags.out_path);
  } else {
    emit(render(report_to_json(report)), flags.out_path);
  }
  return report.pass ? 0 : 1;
}

int run_convexpi(const CommonFlags& flags) {
  require_json_format(flags);
  const Instance inst = load_instance(flags.instance_path);
  const PolicyAlg alg = parse_policy(flags.policy);
  const auto* config = std::get_if<ConvexPiConfig>(&alg);
  if (config == nullptr) {
    throw UsageError{"convexpi needs --policy convexpi:half or convexpi:median"};
  }
  const ThresholdSource source = parse_source(flags.source, flags.seed);
  const ConvexPiReport report =
      flags.exact ? convexpi_exact(inst, config->rule, source, flags.tolerance)
                  : convexpi_mc(inst, config->rule, source, flags.trials,
                                flags.seed, flags.tolerance);
  emit(render(convexpi_report_to_json(report)), flags.out_path);
  return report.pass ? 0 : 1;
}

int run_conditions(const CommonFlags& flags, const std::string& checks,
                   int pi_trials) {
  require_json_format(flags);
  if (checks != "all") {
    throw UsageError{"only --model-checks all is supported"};
  }
  const Instance inst = load_instance(flags.instance_path);
  const std::vector<ConditionReport> reports = check_all_conditions(
      inst, flags.tolerance, pi_trials, flags.seed);
  Json out = Json::array();
  bool all_hold = true;
  for (const ConditionReport& report : reports) {
    all_hold = all_hold && report.holds;
    out.push_back(condition_report_to_json(report));
  }
  emit(render(out), flags.out_path);
  return all_hold ? 0 : 1;
}

int run_threshold(const CommonFlags& flags) {
  require_json_format(flags);
  const Instance inst = load_instance(flags.instance_path);
  PolicyConfig config;
  config.alg = parse_policy(flags.policy);
  config.source = parse_source(flags.source, flags.seed);
  config.coin_seed = flags.seed;
  emit(render(thresholds_to_json(compute_threshold(inst, config))),
       flags.out_path);
  return 0;
}

int run_oracle(const CommonFlags& flags) {
  require_json_format(flags);
  const Instance inst = load_instance(flags.instance_path);
  const OptStats stats =
      flags.exact ? opt_stats_exact(inst)
                  : opt_stats_mc(inst, static_cast<int>(flags.trials), flags.seed);
  emit(render(opt_stats_to_json(stats)), flags.out_path);
  return 0;
}

int run_lowerbound(const CommonFlags& flags, bool thm53, bool reduction,
                   double delta, double kappa) {
  require_json_format(flags);
  if (thm53 == reduction) {
    throw UsageError{"lowerbound needs exactly one of --thm53 or --reduction"};
  }
  if (thm53) {
    const LowerBoundReport report = evaluate_lower_bound_thm53(delta, kappa);
    Json out = lower_bound_report_to_json(report);
    out["instance"] = instance_to_json(make_lower_bound_thm53(delta, kappa));
    emit(render(out), flags.out_path);
    return 0;
  }
  const Instance source = load_instance(flags.instance_path);
  const ReductionInstance reduced = make_reduction_appB(source.items, delta);
  Json out;
  out["delta"] = reduced.delta;
  out["shared_revenue_values"] = reduced.shared_revenue_values;
  out["instance"] = instance_to_json(reduced.instance);
  Json logs = Json::array();
  for (const std::vector<double>& item : reduced.log_attraction) {
    logs.push_back(item);
  }
  out["log_attraction"] = std::move(logs);
  emit(render(out), flags.out_path);
  return 0;
}

void add_common_flags(CLI::App* cmd, CommonFlags* flags, bool with_instance,
                      bool with_policy, bool with_order) {
  if (with_instance) {
    cmd->add_option("--instance", flags->instance_path, "instance JSON path")
        ->required();
  }
  if (with_policy) {
    cmd->add_option("--policy", flags->policy,
                    "policy id, e.g. alg1:gamma or alg3:strong");
  }
  if (with_order) {
    cmd->add_option("--order", flags->order,
                    "arrival order: given:<i,j,...> | random | worst");
  }
  cmd->add_option("--threshold-source", flags->source,
                  "exact | mc:<samples> | external:<v> | approx:<alpha>:<v>");
  cmd->add_option("--trials", flags->trials, "Monte Carlo trial count");
  cmd->add_option("--seed", flags->seed, "master seed for all randomness");
  cmd->add_flag("--exact", flags->exact, "enumerate the joint support exactly");
  cmd->add_option("--tol", flags->tolerance, "guarantee slack tolerance");
  cmd->add_option("--threads", flags->threads,
                  "worker threads (default: hardware cores)");
  cmd->add_option("--out", flags->out_path, "report path (default: stdout)");
  cmd->add_option("--format", flags->format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequential assortment policies under discrete choice models"};
  app.require_subcommand(1);

  CommonFlags simulate_flags;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "evaluate a threshold policy against its guarantee");
  add_common_flags(simulate, &simulate_flags, true, true, true);

  CommonFlags conditions_flags;
  std::string model_checks = "all";
  int pi_trials = 50;
  CLI::App* conditions = app.add_subcommand(
      "conditions", "check the structural choice-model conditions");
  add_common_flags(conditions, &conditions_flags, true, false, false);
  conditions->add_option("--model-checks", model_checks,
                         "which condition set to run (all)");
  conditions->add_option("--pi-trials", pi_trials,
                         "parameter-independence resample count");

  CommonFlags threshold_flags;
  CLI::App* threshold = app.add_subcommand(
      "threshold", "compute a policy's thresholds without running it");
  add_common_flags(threshold, &threshold_flags, true, true, false);

  CommonFlags oracle_flags;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "offline optimum statistics for an instance");
  add_common_flags(oracle, &oracle_flags, true, false, false);

  CommonFlags lowerbound_flags;
  bool thm53 = false;
  bool reduction = false;
  double delta = 0.0;
  double kappa = 0.0;
  CLI::App* lowerbound = app.add_subcommand(
      "lowerbound", "hard-family and single-item reduction experiments");
  add_common_flags(lowerbound, &lowerbound_flags, false, false, false);
  lowerbound->add_option("--instance", lowerbound_flags.instance_path,
                         "reward marginals for --reduction");
  lowerbound->add_flag("--thm53", thm53, "two-item hard family");
  lowerbound->add_flag("--reduction", reduction,
                       "reduce reward marginals to a single-choice instance");
  lowerbound->add_option("--delta", delta, "scale parameter in (0,1)")->required();
  lowerbound->add_option("--kappa", kappa, "spike mass for --thm53");

  CommonFlags convexpi_flags;
  convexpi_flags.policy = "convexpi:half";
  CLI::App* convexpi = app.add_subcommand(
      "convexpi", "min-adversary threshold rule vs the expected maximum");
  add_common_flags(convexpi, &convexpi_flags, true, true, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return run_simulate(simulate_flags);
    if (conditions->parsed())
      return run_conditions(conditions_flags, model_checks, pi_trials);
    if (threshold->parsed()) return run_threshold(threshold_flags);
    if (oracle->parsed()) return run_oracle(oracle_flags);
    if (lowerbound->parsed())
      return run_lowerbound(lowerbound_flags, thm53, reduction, delta, kappa);
    if (convexpi->parsed()) return run_convexpi(convexpi_flags);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << e.message << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
}
