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

#ifndef SEQASSORT_HARNESS_HPP_
#define SEQASSORT_HARNESS_HPP_

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "seqassort/choice.hpp"
#include "seqassort/core.hpp"
#include "seqassort/instance.hpp"
#include "seqassort/oracle.hpp"
#include "seqassort/policy.hpp"
#include "seqassort/rng.hpp"

namespace seqassort {

inline constexpr int kDefaultWorstCaseCap = 8;
inline constexpr double kDefaultGuaranteeTol = 1e-9;

// --- Arrival-order strategies -----------------------------------------------

struct GivenOrder {
  std::vector<int> order;  // bijection on [0, n)
};

// One independent uniform order per evaluated term, drawn from
// (seed, term index, order stream tag).
struct UniformRandomOrder {
  std::uint64_t seed = 0;
};

// Exhaustive search over all n! orders per realization; requires n <= cap.
struct WorstCaseOrder {
  bool exhaustive = true;
  int cap = kDefaultWorstCaseCap;
};

using OrderStrategy = std::variant<GivenOrder, UniformRandomOrder, WorstCaseOrder>;

namespace detail {

inline void check_permutation(std::span<const int> order, int item_count) {
  SEQASSORT_CHECK(static_cast<int>(order.size()) == item_count,
                  "arrival order must list every item exactly once");
  std::uint32_t seen = 0;
  for (const int i : order) {
    SEQASSORT_CHECK(i >= 0 && i < item_count, "arrival order mentions an unknown item");
    SEQASSORT_CHECK((seen & (1u << i)) == 0, "arrival order repeats an item");
    seen |= 1u << i;
  }
}

inline std::vector<int> random_order_for(std::uint64_t seed, std::uint64_t term,
                                         int item_count) {
  std::vector<int> order(static_cast<std::size_t>(item_count));
  std::iota(order.begin(), order.end(), 0);
  RngStream stream(seed, term, kOrderStreamTag);
  shuffle(order, stream);
  return order;
}

// Runs fn(0..count-1), splitting indices over worker threads. Results must be
// written to per-index slots; the caller folds them in index order so the
// outcome does not depend on the thread count.
template <typename Fn>
inline void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      while (!stop.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          stop.store(true, std::memory_order_relaxed);
          return;
        }
      }
    });
  }
  for (std::thread& worker : pool) worker.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

// --- Single arrival sequence ------------------------------------------------

struct RunOutcome {
  PolicyState state;
  double value = 0.0;  // f(collected set) under the model
};

inline RunOutcome run_once(const ChoiceModelSpec& model,
                           const ConstraintSpec& constraint,
                           const PolicyConfig& config, const Thresholds& thresholds,
                           const Realization& real, std::span<const int> order,
                           std::optional<Coin> coin = std::nullopt,
                           std::uint64_t trial = 0) {
  detail::check_permutation(order, real.item_count());
  RunOutcome out;
  out.state = run_policy(model, constraint, config, thresholds, real, order, coin,
                         trial);
  out.value = total_revenue(model, real, out.state.collected);
  return out;
}

// Minimizes f(collected set) over all n! arrival orders of one realization and
// returns the lexicographically smallest minimizer. The unconstrained and
// convex-combination rules accept {i : r_i >= tau} regardless of order, so the
// identity order is returned without search. The coin-flip policy requires a
// fixed coin: the adversary orders each branch separately.
inline std::pair<std::vector<int>, double> worst_case_order(
    const ChoiceModelSpec& model, const ConstraintSpec& constraint,
    const PolicyConfig& config, const Thresholds& thresholds,
    const Realization& real, int cap = kDefaultWorstCaseCap,
    std::optional<Coin> coin = std::nullopt) {
  const int n = real.item_count();
  std::vector<int> identity(static_cast<std::size_t>(n));
  std::iota(identity.begin(), identity.end(), 0);
  if (std::holds_alternative<Alg1Config>(config.alg) ||
      std::holds_alternative<ConvexPiConfig>(config.alg)) {
    const double value =
        run_once(model, constraint, config, thresholds, real, identity).value;
    return {std::move(identity), value};
  }
  if (n > cap) {
    throw Error(ErrorCode::TooLarge,
                "worst-case order search over " + std::to_string(n) +
                    " items exceeds the cap of " + std::to_string(cap));
  }
  SEQASSORT_CHECK(!std::holds_alternative<Alg4Config>(config.alg) || coin.has_value(),
                  "worst-case search for the coin-flip policy needs a fixed coin");
  std::vector<double> value_of_set(std::size_t{1} << n,
                                   std::numeric_limits<double>::quiet_NaN());
  std::vector<int> perm = identity;
  std::vector<int> best_order;
  double best_value = std::numeric_limits<double>::infinity();
  do {
    const PolicyState st =
        run_policy(model, constraint, config, thresholds, real, perm, coin);
    double& cached = value_of_set[st.collected.bits];
    if (std::isnan(cached)) cached = total_revenue(model, real, st.collected);
    if (cached < best_value) {  // strict: keeps the first (lex-smallest) order
      best_value = cached;
      best_order = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {std::move(best_order), best_value};
}

// Adversary value of the cardinality rule in closed form: the collected set is
// always the first min(k, |E|) eligible items in arrival order, so the worst
// order achieves the minimum of f over subsets of the eligible set E of that
// size. Cross-checked against full order enumeration in the test suite.
inline double alg2_worst_subset_value(const ChoiceModelSpec& model, double tau,
                                      int k, const Realization& real) {
  Assortment eligible;
  for (int i = 0; i < real.item_count(); ++i) {
    if (alg2_decide(singleton_choice(model, real, i), real.item(i).revenue, tau,
                    k)) {
      eligible.add(i);
    }
  }
  const int take = std::min(k, eligible.count());
  if (take == 0) return 0.0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::uint32_t sub = eligible.bits;; sub = (sub - 1) & eligible.bits) {
    if (std::popcount(sub) == take) {
      worst = std::min(worst, total_revenue(model, real, Assortment{sub}));
    }
    if (sub == 0) break;
  }
  return worst;
}

// --- Guarantee evaluation ---------------------------------------------------

enum class EvalMode { Exact, MonteCarlo };

// One evaluated term: a joint-support point (exact mode, prob = its
// probability) or one sampled trial (Monte Carlo mode, prob = 1/trials).
struct RealizationRow {
  double prob = 0.0;
  double opt = 0.0;
  double policy = 0.0;
  std::string order;  // arrival order used; "H:...;T:..." for the coin-flip policy
};

struct EvaluationReport {
  double policy_value = 0.0;  // E[f(A)]
  double opt_value = 0.0;     // E[f(S*)]
  double gamma = 0.0;         // E[psi(S*)]
  std::optional<double> beta;  // knapsack constraint only
  double claimed_rho = 0.0;    // infinity when the stated bound is vacuous
  double achieved_ratio = 0.0;  // opt/policy; inf if policy = 0 < opt, 1 if both 0
  bool pass = false;
  EvalMode mode = EvalMode::Exact;
  std::size_t samples = 0;   // Monte Carlo only
  std::uint64_t seed = 0;    // Monte Carlo only
  double policy_stderr = 0.0;
  double opt_stderr = 0.0;
  double tolerance = 0.0;
  double slack = 0.0;  // tolerance + 4 combined standard errors
  Thresholds thresholds;
  double value_heads = 0.0;  // coin-flip policy: expected value per branch
  double value_tails = 0.0;
  double expected_g_small = 0.0;  // knapsack split benchmarks
  double expected_g_large = 0.0;
  std::vector<RealizationRow> rows;
};

namespace detail {

struct EvalPoint {
  double prob = 1.0;
  double opt = 0.0;
  double gamma = 0.0;
  double g_small = 0.0;
  double g_large = 0.0;
  double policy = 0.0;
  double heads = 0.0;
  double tails = 0.0;
  int branch = -1;  // Monte Carlo coin draw: 0 heads, 1 tails
  std::string order;
};

inline std::string order_string(std::span<const int> order) {
  std::string text;
  for (const int i : order) {
    if (!text.empty()) text += ' ';
    text += std::to_string(i);
  }
  return text;
}

inline std::vector<int> resolve_order(const OrderStrategy& strategy,
                                      const ChoiceModelSpec& model,
                                      const ConstraintSpec& constraint,
                                      const PolicyConfig& config,
                                      const Thresholds& thresholds,
                                      const Realization& real, std::uint64_t term,
                                      std::optional<Coin> coin) {
  if (const auto* given = std::get_if<GivenOrder>(&strategy)) {
    return given->order;
  }
  if (const auto* random = std::get_if<UniformRandomOrder>(&strategy)) {
    return random_order_for(random->seed, term, real.item_count());
  }
  const auto& worst = std::get<WorstCaseOrder>(strategy);
  return worst_case_order(model, constraint, config, thresholds, real, worst.cap,
                          coin)
      .first;
}

// Evaluates one term. Without a forced coin the coin-flip policy is averaged
// over both branches with weights (p, 1-p); under a worst-case strategy each
// branch gets its own adversarial order.
inline void eval_point(const Instance& inst, const PolicyConfig& config,
                       const Thresholds& thresholds, const OrderStrategy& strategy,
                       const Realization& real, std::uint64_t term,
                       std::optional<Coin> coin, EvalPoint& point) {
  opt_point(inst, real, point.opt, point.gamma, point.g_small, point.g_large);
  const bool coin_flip = std::holds_alternative<Alg4Config>(config.alg);
  if (!coin_flip || coin.has_value()) {
    const std::vector<int> order = resolve_order(strategy, inst.model,
                                                 inst.constraint, config,
                                                 thresholds, real, term, coin);
    const RunOutcome out = run_once(inst.model, inst.constraint, config,
                                    thresholds, real, order, coin, term);
    point.policy = out.value;
    point.order = order_string(order);
    if (coin_flip) {
      point.branch = (*coin == Coin::Heads) ? 0 : 1;
      (point.branch == 0 ? point.heads : point.tails) = out.value;
    }
    return;
  }
  const double p = thresholds.heads_prob;
  if (std::holds_alternative<WorstCaseOrder>(strategy)) {
    const auto& worst = std::get<WorstCaseOrder>(strategy);
    auto [heads_order, heads_value] =
        worst_case_order(inst.model, inst.constraint, config, thresholds, real,
                         worst.cap, Coin::Heads);
    auto [tails_order, tails_value] =
        worst_case_order(inst.model, inst.constraint, config, thresholds, real,
                         worst.cap, Coin::Tails);
    point.heads = heads_value;
    point.tails = tails_value;
    point.order =
        "H:" + order_string(heads_order) + ";T:" + order_string(tails_order);
  } else {
    const std::vector<int> order =
        resolve_order(strategy, inst.model, inst.constraint, config, thresholds,
                      real, term, std::nullopt);
    point.heads = run_once(inst.model, inst.constraint, config, thresholds, real,
                           order, Coin::Heads, term)
                      .value;
    point.tails = run_once(inst.model, inst.constraint, config, thresholds, real,
                           order, Coin::Tails, term)
                      .value;
    point.order = order_string(order);
  }
  point.policy = p * point.heads + (1.0 - p) * point.tails;
}

inline double square(double x) { return x * x; }

inline void finish_report(EvaluationReport& report, const Instance& inst,
                          const PolicyConfig& config, double tolerance) {
  if (std::holds_alternative<Knapsack>(inst.constraint)) {
    report.beta = compute_beta(inst).value;
  }
  report.claimed_rho =
      claimed_rho(config.alg, report.gamma, report.beta.value_or(0.0));
  // An alpha-approximate offline oracle only supports the degraded bound.
  if (const auto* ap = std::get_if<ApproxOracleThreshold>(&config.source)) {
    report.claimed_rho *= ap->alpha;
  }
  report.tolerance = tolerance;
  const double rho = report.claimed_rho;
  if (std::isinf(rho)) {
    report.slack = tolerance;
    report.pass = true;  // vacuous bound: rho * E[f(A)] >= anything finite
  } else {
    const Thresholds& th = report.thresholds;
    const double combined = std::sqrt(
        square(rho * report.policy_stderr) + square(report.opt_stderr) +
        square(rho * th.tau_stderr) + square(rho * th.tau_small_stderr) +
        square(rho * th.tau_large_stderr));
    report.slack = tolerance + 4.0 * combined;
    report.pass = rho * report.policy_value >= report.opt_value - report.slack;
  }
  if (report.policy_value > 0.0) {
    report.achieved_ratio = report.opt_value / report.policy_value;
  } else {
    report.achieved_ratio = report.opt_value > 0.0
                                ? std::numeric_limits<double>::infinity()
                                : 1.0;
  }
}

inline void check_strategy(const OrderStrategy& strategy, int item_count) {
  if (const auto* given = std::get_if<GivenOrder>(&strategy)) {
    check_permutation(given->order, item_count);
  } else if (const auto* worst = std::get_if<WorstCaseOrder>(&strategy)) {
    if (item_count > worst->cap) {
      throw Error(ErrorCode::TooLarge,
                  "worst-case order search over " + std::to_string(item_count) +
                      " items exceeds the cap of " + std::to_string(worst->cap));
    }
  }
}

}  // namespace detail

// Verifies the competitive guarantee exactly: both E[f(A)] and E[f(S*)] are
// prob-weighted sums over the enumerated joint support. Terms may be computed
// in parallel; the reduction always runs in index order, so reports are
// identical for every thread count. With a UniformRandom strategy one order is
// drawn per joint index from the strategy seed.
inline EvaluationReport exact_evaluate(const Instance& inst,
                                       const PolicyConfig& config,
                                       const OrderStrategy& strategy,
                                       double tolerance = kDefaultGuaranteeTol,
                                       int threads = 1,
                                       std::size_t joint_cap = kDefaultJointCap) {
  require_constraint(config.alg, inst.constraint);
  detail::check_strategy(strategy, static_cast<int>(inst.items.size()));
  const Thresholds thresholds = compute_threshold(inst, config);
  const JointSpace joint(inst, joint_cap);
  std::vector<detail::EvalPoint> points(joint.size());
  detail::parallel_for(joint.size(), threads, [&](std::size_t i) {
    Realization real;
    points[i].prob = joint.decode(i, real);
    detail::eval_point(inst, config, thresholds, strategy, real, i, std::nullopt,
                       points[i]);
  });
  EvaluationReport report;
  report.mode = EvalMode::Exact;
  report.thresholds = thresholds;
  report.rows.reserve(points.size());
  for (detail::EvalPoint& point : points) {
    report.policy_value += point.prob * point.policy;
    report.opt_value += point.prob * point.opt;
    report.gamma += point.prob * point.gamma;
    report.expected_g_small += point.prob * point.g_small;
    report.expected_g_large += point.prob * point.g_large;
    report.value_heads += point.prob * point.heads;
    report.value_tails += point.prob * point.tails;
    report.rows.push_back(RealizationRow{point.prob, point.opt, point.policy,
                                         std::move(point.order)});
  }
  detail::finish_report(report, inst, config, tolerance);
  return report;
}

// Statistical fallback for supports too large to enumerate: seeded trials,
// standard errors, and a pass bound widened by 4 combined standard errors.
// The coin-flip policy draws its coin per trial from config.coin_seed.
inline EvaluationReport mc_evaluate(const Instance& inst,
                                    const PolicyConfig& config,
                                    const OrderStrategy& strategy,
                                    std::size_t trials, std::uint64_t seed,
                                    double tolerance = kDefaultGuaranteeTol,
                                    int threads = 1) {
  SEQASSORT_CHECK(trials > 0, "Monte Carlo evaluation needs at least one trial");
  require_constraint(config.alg, inst.constraint);
  detail::check_strategy(strategy, static_cast<int>(inst.items.size()));
  const Thresholds thresholds = compute_threshold(inst, config);
  const bool coin_flip = std::holds_alternative<Alg4Config>(config.alg);
  std::vector<detail::EvalPoint> points(trials);
  detail::parallel_for(trials, threads, [&](std::size_t t) {
    const Realization real = sample(inst, seed, t);
    std::optional<Coin> coin;
    if (coin_flip) coin = draw_coin(config.coin_seed, t, thresholds.heads_prob);
    detail::eval_point(inst, config, thresholds, strategy, real, t, coin,
                       points[t]);
  });
  double policy_sum = 0.0, policy_sq = 0.0, opt_sum = 0.0, opt_sq = 0.0;
  double gamma_sum = 0.0, g_small_sum = 0.0, g_large_sum = 0.0;
  double heads_sum = 0.0, tails_sum = 0.0;
  std::size_t heads_count = 0;
  EvaluationReport report;
  report.rows.reserve(points.size());
  const double weight = 1.0 / static_cast<double>(trials);
  for (detail::EvalPoint& point : points) {
    policy_sum += point.policy;
    policy_sq += point.policy * point.policy;
    opt_sum += point.opt;
    opt_sq += point.opt * point.opt;
    gamma_sum += point.gamma;
    g_small_sum += point.g_small;
    g_large_sum += point.g_large;
    if (point.branch == 0) {
      heads_sum += point.policy;
      ++heads_count;
    } else if (point.branch == 1) {
      tails_sum += point.policy;
    }
    report.rows.push_back(RealizationRow{weight, point.opt, point.policy,
                                         std::move(point.order)});
  }
  const double m = static_cast<double>(trials);
  report.mode = EvalMode::MonteCarlo;
  report.samples = trials;
  report.seed = seed;
  report.thresholds = thresholds;
  report.policy_value = policy_sum / m;
  report.opt_value = opt_sum / m;
  report.gamma = gamma_sum / m;
  report.expected_g_small = g_small_sum / m;
  report.expected_g_large = g_large_sum / m;
  report.policy_stderr = std::sqrt(
      std::max(0.0, policy_sq / m - report.policy_value * report.policy_value) /
      m);
  report.opt_stderr = std::sqrt(
      std::max(0.0, opt_sq / m - report.opt_value * report.opt_value) / m);
  if (coin_flip) {
    const std::size_t tails_count = trials - heads_count;
    report.value_heads =
        heads_count > 0 ? heads_sum / static_cast<double>(heads_count) : 0.0;
    report.value_tails =
        tails_count > 0 ? tails_sum / static_cast<double>(tails_count) : 0.0;
  }
  detail::finish_report(report, inst, config, tolerance);
  return report;
}

// --- Worst-case convex-combination mode ---------------------------------------

// The adversary resolves the offered set to its cheapest member: the policy
// earns min_{i in A} r_i, or 0 when nothing was accepted.
inline double min_adversary_value(std::span<const double> accepted_rewards) {
  double value = 0.0;
  bool any = false;
  for (const double r : accepted_rewards) {
    if (!any || r < value) value = r;
    any = true;
  }
  return any ? value : 0.0;
}

inline double min_adversary_value(const Realization& real, Assortment s) {
  double value = 0.0;
  bool any = false;
  for (const int i : s.members()) {
    const double r = real.item(i).revenue;
    if (!any || r < value) value = r;
    any = true;
  }
  return any ? value : 0.0;
}

struct ConvexPiReport {
  double threshold = 0.0;
  double benchmark = 0.0;     // E[max_i r_i]
  double policy_value = 0.0;  // E[min-adversary value of the accepted set]
  double claimed_rho = 2.0;
  double achieved_ratio = 0.0;
  bool pass = false;
  EvalMode mode = EvalMode::Exact;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double policy_stderr = 0.0;
  double benchmark_stderr = 0.0;
  double tolerance = 0.0;
  double slack = 0.0;
  Thresholds thresholds;
};

namespace detail {

inline void finish_convexpi(ConvexPiReport& report, double tolerance) {
  report.tolerance = tolerance;
  const double rho = report.claimed_rho;
  const double combined = std::sqrt(square(rho * report.policy_stderr) +
                                    square(report.benchmark_stderr) +
                                    square(rho * report.thresholds.tau_stderr));
  report.slack = tolerance + 4.0 * combined;
  report.pass =
      rho * report.policy_value >= report.benchmark - report.slack;
  if (report.policy_value > 0.0) {
    report.achieved_ratio = report.benchmark / report.policy_value;
  } else {
    report.achieved_ratio = report.benchmark > 0.0
                                ? std::numeric_limits<double>::infinity()
                                : 1.0;
  }
}

inline Assortment threshold_set(const Realization& real, double tau) {
  Assortment a;
  for (int i = 0; i < real.item_count(); ++i) {
    if (real.item(i).revenue >= tau) a.add(i);
  }
  return a;
}

}  // namespace detail

// Exact min-adversary evaluation of the accept-everything-above-tau rule.
// Only revenues matter: the choice model plays no role in either side.
inline ConvexPiReport convexpi_exact(const Instance& inst, ConvexPiRule rule,
                                     const ThresholdSource& source = ExactThreshold{},
                                     double tolerance = kDefaultGuaranteeTol,
                                     std::size_t joint_cap = kDefaultJointCap) {
  PolicyConfig config;
  config.alg = ConvexPiConfig{rule};
  config.source = source;
  require_constraint(config.alg, inst.constraint);
  ConvexPiReport report;
  report.thresholds = compute_threshold(inst, config);
  report.threshold = report.thresholds.tau;
  report.benchmark = max_reward_stats(inst).expected_max;
  const JointSpace joint(inst, joint_cap);
  Realization real;
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const double prob = joint.decode(i, real);
    report.policy_value +=
        prob *
        min_adversary_value(real, detail::threshold_set(real, report.threshold));
  }
  detail::finish_convexpi(report, tolerance);
  return report;
}

inline ConvexPiReport convexpi_mc(const Instance& inst, ConvexPiRule rule,
                                  const ThresholdSource& source,
                                  std::size_t trials, std::uint64_t seed,
                                  double tolerance = kDefaultGuaranteeTol) {
  SEQASSORT_CHECK(trials > 0, "Monte Carlo evaluation needs at least one trial");
  PolicyConfig config;
  config.alg = ConvexPiConfig{rule};
  config.source = source;
  require_constraint(config.alg, inst.constraint);
  ConvexPiReport report;
  report.mode = EvalMode::MonteCarlo;
  report.samples = trials;
  report.seed = seed;
  report.thresholds = compute_threshold(inst, config);
  report.threshold = report.thresholds.tau;
  double policy_sum = 0.0, policy_sq = 0.0, bench_sum = 0.0, bench_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Realization real = sample(inst, seed, t);
    const double score = min_adversary_value(
        real, detail::threshold_set(real, report.threshold));
    double best = 0.0;
    for (const RealizedItem& item : real.items) best = std::max(best, item.revenue);
    policy_sum += score;
    policy_sq += score * score;
    bench_sum += best;
    bench_sq += best * best;
  }
  const double m = static_cast<double>(trials);
  report.policy_value = policy_sum / m;
  report.benchmark = bench_sum / m;
  report.policy_stderr = std::sqrt(
      std::max(0.0, policy_sq / m - report.policy_value * report.policy_value) /
      m);
  report.benchmark_stderr = std::sqrt(
      std::max(0.0, bench_sq / m - report.benchmark * report.benchmark) / m);
  detail::finish_convexpi(report, tolerance);
  return report;
}

// --- Lower-bound instance families --------------------------------------------

// Two-item family on which no fixed-threshold policy beats the prophet by less
// than (1+gamma) as delta -> 0: a sure item with revenue 1 and attraction
// 1/delta, and a spike item worth (1/delta)(v0+1) with probability delta,
// where v0 = ((1-kappa)/kappa)/delta. Closed form: E[f(S*)] = 1 + (1-delta)kappa.
inline Instance make_lower_bound_thm53(double delta, double kappa) {
  SEQASSORT_CHECK(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
  SEQASSORT_CHECK(kappa > 0.0 && kappa < 1.0, "kappa must lie in (0,1)");
  Instance inst;
  const double sure_attraction = 1.0 / delta;
  const double v0 = ((1.0 - kappa) / kappa) * sure_attraction;
  inst.model = MnlModel{v0};
  ItemDistribution sure;
  sure.atoms.push_back(Atom{1.0, 1.0, MnlAttraction{sure_attraction}, 0.0});
  ItemDistribution spike;
  spike.atoms.push_back(
      Atom{delta, (1.0 / delta) * (v0 + 1.0), MnlAttraction{1.0}, 0.0});
  spike.atoms.push_back(Atom{1.0 - delta, 0.0, MnlAttraction{1.0}, 0.0});
  inst.items.push_back(std::move(sure));
  inst.items.push_back(std::move(spike));
  return inst;
}

struct ThresholdSweep {
  double best_tau = 0.0;
  double best_value = 0.0;
  std::size_t candidates = 0;
};

// Best accept-everything-above-tau value over the candidate grid
// {0} ∪ {revenue support} ∪ {max+1}. Between consecutive candidates the
// acceptance set {i : r_i >= tau} never changes, so the grid is exhaustive.
// Ties prefer the smallest tau.
inline ThresholdSweep sweep_fixed_thresholds(const Instance& inst,
                                             std::size_t joint_cap = kDefaultJointCap) {
  std::vector<double> taus{0.0};
  double top = 0.0;
  for (const ItemDistribution& item : inst.items) {
    for (const Atom& atom : item.atoms) {
      taus.push_back(atom.revenue);
      top = std::max(top, atom.revenue);
    }
  }
  taus.push_back(top + 1.0);
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
  std::vector<double> values(taus.size(), 0.0);
  const JointSpace joint(inst, joint_cap);
  Realization real;
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const double prob = joint.decode(i, real);
    for (std::size_t t = 0; t < taus.size(); ++t) {
      values[t] += prob * total_revenue(inst.model, real,
                                        detail::threshold_set(real, taus[t]));
    }
  }
  ThresholdSweep sweep;
  sweep.candidates = taus.size();
  sweep.best_value = -1.0;
  for (std::size_t t = 0; t < taus.size(); ++t) {
    if (values[t] > sweep.best_value) {
      sweep.best_value = values[t];
      sweep.best_tau = taus[t];
    }
  }
  return sweep;
}

struct LowerBoundReport {
  double delta = 0.0;
  double kappa = 0.0;
  double expected_opt = 0.0;  // closed form 1 + (1-delta)*kappa
  double gamma = 0.0;         // -> kappa as delta -> 0
  double value_accept_low = 0.0;  // threshold at 1: take the sure item too
  double value_skip_low = 0.0;    // threshold above 1: wait for the spike
  double ratio = 0.0;  // expected_opt / max(value_accept_low, value_skip_low)
  double best_fixed_tau = 0.0;
  double best_fixed_value = 0.0;
  double best_fixed_ratio = 0.0;  // floor over every fixed-threshold policy
};

inline LowerBoundReport evaluate_lower_bound_thm53(double delta, double kappa) {
  const Instance inst = make_lower_bound_thm53(delta, kappa);
  LowerBoundReport report;
  report.delta = delta;
  report.kappa = kappa;
  const OptStats stats = opt_stats_exact(inst);
  report.expected_opt = stats.expected_opt;
  report.gamma = stats.gamma;
  const double spike_revenue = inst.items[1].atoms[0].revenue;
  const JointSpace joint(inst);
  Realization real;
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const double prob = joint.decode(i, real);
    report.value_accept_low +=
        prob * total_revenue(inst.model, real, detail::threshold_set(real, 1.0));
    report.value_skip_low +=
        prob * total_revenue(inst.model, real,
                             detail::threshold_set(real, spike_revenue));
  }
  report.ratio = report.expected_opt /
                 std::max(report.value_accept_low, report.value_skip_low);
  const ThresholdSweep sweep = sweep_fixed_thresholds(inst);
  report.best_fixed_tau = sweep.best_tau;
  report.best_fixed_value = sweep.best_value;
  report.best_fixed_ratio = report.expected_opt / sweep.best_value;
  return report;
}

// --- Revenue-to-attraction reduction ------------------------------------------

// With v0 = 0 and v = delta^(-1/r), the lowest-revenue offered item swallows
// the choice probability as delta -> 0, so f(A) -> min_{i in A} r_i: maximizing
// expected revenue becomes maximizing the minimum accepted revenue.
struct ReductionInstance {
  Instance instance;  // linear attractions exp(log); can overflow for tiny
                      // revenues — reduction_value is the safe evaluator
  std::vector<std::vector<double>> log_attraction;  // ln v per item atom
  double delta = 0.0;
  bool shared_revenue_values = false;  // a revenue appears in two items'
                                       // supports; the limit argument assumes
                                       // distinct values
};

inline ReductionInstance make_reduction_appB(
    const std::vector<ItemDistribution>& reward_marginals, double delta) {
  SEQASSORT_CHECK(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
  ReductionInstance reduced;
  reduced.delta = delta;
  reduced.instance.model = MnlModel{0.0};
  const double log_scale = -std::log(delta);
  for (const ItemDistribution& marginal : reward_marginals) {
    ItemDistribution out;
    std::vector<double> logs;
    for (const Atom& atom : marginal.atoms) {
      if (!(atom.revenue > 0.0)) {
        throw Error(ErrorCode::NonPositiveReward,
                    "the reduction requires strictly positive revenues");
      }
      const double log_v = log_scale / atom.revenue;
      logs.push_back(log_v);
      out.atoms.push_back(
          Atom{atom.prob, atom.revenue, MnlAttraction{std::exp(log_v)}, 0.0});
    }
    reduced.instance.items.push_back(std::move(out));
    reduced.log_attraction.push_back(std::move(logs));
  }
  for (std::size_t a = 0; a < reward_marginals.size(); ++a) {
    for (std::size_t b = a + 1; b < reward_marginals.size(); ++b) {
      for (const Atom& x : reward_marginals[a].atoms) {
        for (const Atom& y : reward_marginals[b].atoms) {
          if (x.revenue == y.revenue) reduced.shared_revenue_values = true;
        }
      }
    }
  }
  return reduced;
}

// f(S) for the reduced instance, computed in log space so any delta works:
// weights are exp(-ln(delta)/r - max), never above 1. Singletons come out as
// exactly r (the lone weight is exp(0) = 1).
inline double reduction_value(const Realization& real, Assortment s,
                              double delta) {
  if (s.empty()) return 0.0;
  const double log_scale = -std::log(delta);
  double top = -std::numeric_limits<double>::infinity();
  for (const int i : s.members()) {
    const double r = real.item(i).revenue;
    SEQASSORT_CHECK(r > 0.0, "the reduction requires strictly positive revenues");
    top = std::max(top, log_scale / r);
  }
  double numerator = 0.0;
  double denominator = 0.0;
  for (const int i : s.members()) {
    const double r = real.item(i).revenue;
    const double w = std::exp(log_scale / r - top);
    numerator += r * w;
    denominator += w;
  }
  return numerator / denominator;
}

}  // namespace seqassort

#endif  // SEQASSORT_HARNESS_HPP_
