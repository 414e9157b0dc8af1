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

#pragma once

// Online threshold policies. Items arrive one at a time in an adversarial
// order, reveal their realized parameters, and must be accepted or rejected
// irrevocably; the collected set A is then offered as an assortment worth
// f(A). Every policy below reduces to comparisons against thresholds that
// are computed (from offline statistics) before the first arrival:
//
//   alg1  unconstrained:  accept iff r_i >= tau
//   alg2  cardinality k:  accept iff phi(i,{i})(r_i - tau) >= phi(0,{i}) tau / k
//                         while fewer than k items are collected
//   alg3  knapsack:       accept iff phi(i,{i})(r_i - tau) >= b_i phi(0,{i}) tau / B
//                         while the budget allows
//   alg4  knapsack:       flip a biased coin up front, then run alg3 on the
//                         small items (b <= B/2) or a one-slot rule on the
//                         large items, each against its own benchmark
//   convex-pi             accept iff r_i >= tau; scored by the minimum
//                         accepted reward (adversarial convex combination)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "seqassort/choice.hpp"
#include "seqassort/core.hpp"
#include "seqassort/instance.hpp"
#include "seqassort/oracle.hpp"
#include "seqassort/rng.hpp"

namespace seqassort {

// --- Threshold sources ------------------------------------------------------

struct ExactThreshold {};

struct MonteCarloThreshold {
  int samples = 10000;
  std::uint64_t seed = 0;
};

// A caller-supplied final threshold, bypassing the offline statistics.
struct ExternalThreshold {
  double value = 0.0;
};

// A caller-supplied approximation of E[f(S*)] known to lie within a factor
// alpha (approx in [E/alpha, E]); degrades the guarantee to alpha * rho.
struct ApproxOracleThreshold {
  double alpha = 1.0;
  double approx_expected_opt = 0.0;
};

using ThresholdSource = std::variant<ExactThreshold, MonteCarloThreshold,
                                     ExternalThreshold, ApproxOracleThreshold>;

// --- Policy configuration ---------------------------------------------------

enum class Alg1Variant { GammaTuned, Half };
enum class Alg2Variant { Strong, Weak, GammaWeak };
enum class Alg3Variant { Strong, Weak };
enum class Alg4Variant { FiveCompetitive, EightCompetitive };
enum class ConvexPiRule { HalfExpectedMax, MedianMax };

struct Alg1Config {
  Alg1Variant variant = Alg1Variant::Half;
};
struct Alg2Config {
  Alg2Variant variant = Alg2Variant::Strong;
};
struct Alg3Config {
  Alg3Variant variant = Alg3Variant::Strong;
};
struct Alg4Config {
  Alg4Variant variant = Alg4Variant::FiveCompetitive;
};
struct ConvexPiConfig {
  ConvexPiRule rule = ConvexPiRule::HalfExpectedMax;
};

using PolicyAlg =
    std::variant<Alg1Config, Alg2Config, Alg3Config, Alg4Config, ConvexPiConfig>;

struct PolicyConfig {
  PolicyAlg alg = Alg1Config{};
  ThresholdSource source = ExactThreshold{};
  std::uint64_t coin_seed = 0;  // the coin flip depends on this seed only
};

// Thresholds resolved before any arrival. tau drives alg1/2/3 and the
// convex-combination rule; the coin-flip policy uses the two branch
// thresholds and the coin bias instead.
struct Thresholds {
  double tau = 0.0;
  double tau_small = 0.0;
  double tau_large = 0.0;
  double heads_prob = 0.0;
  double tau_stderr = 0.0;  // sampled sources only
  double tau_small_stderr = 0.0;
  double tau_large_stderr = 0.0;
};

// --- Realized size ratio ----------------------------------------------------

struct Beta {
  double value = 0.0;  // max over the size support of b_i / B; 0 if unconstrained
};

// Support-wide bound on item size relative to the budget. beta = 1 is legal;
// the knapsack guarantees then become vacuous and callers should treat the
// claimed factor as infinite.
inline Beta compute_beta(const Instance& inst) {
  const auto* knap = std::get_if<Knapsack>(&inst.constraint);
  if (knap == nullptr) return Beta{0.0};
  double worst = 0.0;
  for (const ItemDistribution& d : inst.items) {
    for (const Atom& a : d.atoms) {
      worst = std::max(worst, a.size / knap->budget);
    }
  }
  return Beta{worst};
}

// --- Decision rules ---------------------------------------------------------

// phi(i, {i}) and phi(0, {i}); they sum to 1.
struct SingletonChoice {
  double phi_own = 0.0;
  double phi_out = 1.0;
};

inline SingletonChoice singleton_choice(const ChoiceModelSpec& model,
                                        const Realization& real, int item) {
  const PhiRow row = all_phi(model, real, Assortment::of({item}));
  return SingletonChoice{row.member[static_cast<std::size_t>(item)], row.outside};
}

// The unconstrained rule reads nothing but the revenue.
inline bool alg1_decide(double tau, const RealizedItem& item) {
  return item.revenue >= tau;
}

inline bool alg2_decide(const SingletonChoice& sc, double revenue, double tau,
                        int k) {
  return sc.phi_own * (revenue - tau) >= (sc.phi_out / static_cast<double>(k)) * tau;
}

// MNL-only rewrite of alg2_decide: v_i r_i / (v0 / k + v_i) >= tau. Valid on
// the equivalence domain v0 + v_i > 0; with v0 = v_i = 0 the general form
// rejects (phi(i,{i}) = 0 under the degenerate convention) and this rewrite
// must not be used.
inline bool alg2_decide_mnl_form(double v0, double v, double revenue, double tau,
                                 int k) {
  return v * revenue >= tau * (v0 / static_cast<double>(k) + v);
}

inline bool alg3_decide(const SingletonChoice& sc, double revenue, double size,
                        double budget, double tau) {
  return sc.phi_own * (revenue - tau) >= (size * sc.phi_out / budget) * tau;
}

// --- Policy execution -------------------------------------------------------

enum class Coin { Heads, Tails };

enum class DecisionReason {
  Accepted,
  BelowThreshold,
  CapacityFull,
  WrongBranch,  // coin-flip policy: item size belongs to the other branch
};

struct DecisionRecord {
  int item = 0;
  bool accepted = false;
  DecisionReason reason = DecisionReason::Accepted;
};

struct PolicyState {
  Assortment collected;
  double used_size = 0.0;
  std::optional<Coin> coin;
  std::vector<DecisionRecord> trace;
};

namespace detail {

inline void record(PolicyState& st, int item, bool accepted, DecisionReason why) {
  st.trace.push_back(DecisionRecord{item, accepted, why});
}

}  // namespace detail

inline PolicyState alg1_run(double tau, const Realization& real,
                            std::span<const int> order) {
  PolicyState st;
  for (const int i : order) {
    const bool take = alg1_decide(tau, real.item(i));
    if (take) st.collected.add(i);
    detail::record(st, i, take,
                   take ? DecisionReason::Accepted : DecisionReason::BelowThreshold);
  }
  return st;
}

inline PolicyState alg2_run(const ChoiceModelSpec& model, double tau, int k,
                            const Realization& real, std::span<const int> order) {
  PolicyState st;
  for (const int i : order) {
    const RealizedItem& item = real.item(i);
    const SingletonChoice sc = singleton_choice(model, real, i);
    if (!alg2_decide(sc, item.revenue, tau, k)) {
      detail::record(st, i, false, DecisionReason::BelowThreshold);
      continue;
    }
    if (st.collected.count() >= k) {
      detail::record(st, i, false, DecisionReason::CapacityFull);
      continue;
    }
    st.collected.add(i);
    detail::record(st, i, true, DecisionReason::Accepted);
  }
  return st;
}

inline PolicyState alg3_run(const ChoiceModelSpec& model, double tau, double budget,
                            const Realization& real, std::span<const int> order) {
  PolicyState st;
  for (const int i : order) {
    const RealizedItem& item = real.item(i);
    const SingletonChoice sc = singleton_choice(model, real, i);
    if (!alg3_decide(sc, item.revenue, item.size, budget, tau)) {
      detail::record(st, i, false, DecisionReason::BelowThreshold);
      continue;
    }
    if (st.used_size + item.size > budget) {
      detail::record(st, i, false, DecisionReason::CapacityFull);
      continue;
    }
    st.collected.add(i);
    st.used_size += item.size;
    detail::record(st, i, true, DecisionReason::Accepted);
  }
  return st;
}

// Coin-flip policy. Heads: alg3 restricted to the small items against
// tau_small. Tails: a single slot for a large item against tau_large (the
// cardinality rule with k = 1).
inline PolicyState alg4_run(const ChoiceModelSpec& model, double budget,
                            const Thresholds& thresholds, Coin coin,
                            const Realization& real, std::span<const int> order) {
  PolicyState st;
  st.coin = coin;
  for (const int i : order) {
    const RealizedItem& item = real.item(i);
    const bool small = item.size <= budget / 2.0;
    if ((coin == Coin::Heads) != small) {
      detail::record(st, i, false, DecisionReason::WrongBranch);
      continue;
    }
    const SingletonChoice sc = singleton_choice(model, real, i);
    if (coin == Coin::Heads) {
      if (!alg3_decide(sc, item.revenue, item.size, budget, thresholds.tau_small)) {
        detail::record(st, i, false, DecisionReason::BelowThreshold);
        continue;
      }
      if (st.used_size + item.size > budget) {
        detail::record(st, i, false, DecisionReason::CapacityFull);
        continue;
      }
    } else {
      if (!alg2_decide(sc, item.revenue, thresholds.tau_large, 1)) {
        detail::record(st, i, false, DecisionReason::BelowThreshold);
        continue;
      }
      if (st.collected.count() >= 1 || st.used_size + item.size > budget) {
        detail::record(st, i, false, DecisionReason::CapacityFull);
        continue;
      }
    }
    st.collected.add(i);
    st.used_size += item.size;
    detail::record(st, i, true, DecisionReason::Accepted);
  }
  return st;
}

inline PolicyState convex_pi_run(double tau, const Realization& real,
                                 std::span<const int> order) {
  return alg1_run(tau, real, order);  // same accept rule; scoring differs
}

inline bool convex_pi_decide(double tau, double reward) { return reward >= tau; }

// Heads iff one u64 draw from (coin_seed, trial, coin tag) lands below the
// bias. Depends on nothing else, in particular not on the realization.
inline Coin draw_coin(std::uint64_t coin_seed, std::uint64_t trial,
                      double heads_prob) {
  RngStream stream(coin_seed, trial, kCoinStreamTag);
  return stream.uniform01() < heads_prob ? Coin::Heads : Coin::Tails;
}

// --- Threshold computation --------------------------------------------------

// Distribution of max_i r_i under the per-item revenue marginals (items are
// independent). Used by the convex-combination rule.
struct MaxRewardStats {
  double expected_max = 0.0;
  double median_max = 0.0;  // smallest support value m with Pr[max <= m] >= 1/2
};

inline MaxRewardStats max_reward_stats(const Instance& inst) {
  std::vector<double> values;
  for (const ItemDistribution& d : inst.items) {
    for (const Atom& a : d.atoms) values.push_back(a.revenue);
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  MaxRewardStats out;
  double prev_cdf = 0.0;
  bool median_set = false;
  for (const double x : values) {
    double cdf = 1.0;
    for (const ItemDistribution& d : inst.items) {
      double below = 0.0;
      for (const Atom& a : d.atoms) {
        if (a.revenue <= x) below += a.prob;
      }
      cdf *= below;
    }
    out.expected_max += x * (cdf - prev_cdf);
    if (!median_set && cdf >= 0.5) {
      out.median_max = x;
      median_set = true;
    }
    prev_cdf = cdf;
  }
  if (!median_set && !values.empty()) out.median_max = values.back();
  return out;
}

namespace detail {

struct SourceStats {
  double expected_opt = 0.0;
  double gamma = 0.0;
  double g_small = 0.0;
  double g_large = 0.0;
  double se_opt = 0.0;
  double se_gamma = 0.0;
  double se_g_small = 0.0;
  double se_g_large = 0.0;
};

inline SourceStats stats_for(const Instance& inst, const ThresholdSource& source) {
  SourceStats out;
  if (const auto* mc = std::get_if<MonteCarloThreshold>(&source)) {
    const OptStats s = opt_stats_mc(inst, mc->samples, mc->seed);
    out = {s.expected_opt, s.gamma,        s.expected_g_small, s.expected_g_large,
           s.stderr_opt,   s.stderr_gamma, s.stderr_g_small,   s.stderr_g_large};
  } else {
    const OptStats s = opt_stats_exact(inst);
    out = {s.expected_opt, s.gamma, s.expected_g_small, s.expected_g_large,
           0.0,            0.0,     0.0,                0.0};
  }
  return out;
}

}  // namespace detail

// Resolves the policy's thresholds on an instance. The sampled source
// propagates standard errors through the threshold formulas (delta method
// for the gamma-tuned coefficients). The external source is taken verbatim;
// the approximate-oracle source scales the supplied value by the variant's
// coefficient, with exact gamma where the coefficient needs it.
inline Thresholds compute_threshold(const Instance& inst, const PolicyConfig& config) {
  Thresholds th;

  if (const auto* cp = std::get_if<ConvexPiConfig>(&config.alg)) {
    if (const auto* ext = std::get_if<ExternalThreshold>(&config.source)) {
      th.tau = ext->value;
    } else if (const auto* ap = std::get_if<ApproxOracleThreshold>(&config.source)) {
      if (cp->rule != ConvexPiRule::HalfExpectedMax) {
        throw Error(ErrorCode::ModelMismatch,
                    "median rule cannot use an approximate expected maximum");
      }
      th.tau = 0.5 * ap->approx_expected_opt;
    } else if (const auto* mc = std::get_if<MonteCarloThreshold>(&config.source)) {
      // Sample the max reward directly.
      double sum = 0.0, sum_sq = 0.0;
      std::vector<double> maxes(static_cast<std::size_t>(mc->samples));
      for (int t = 0; t < mc->samples; ++t) {
        const Realization real = sample(inst, mc->seed, static_cast<std::uint64_t>(t));
        double mx = 0.0;
        for (const RealizedItem& it : real.items) mx = std::max(mx, it.revenue);
        maxes[static_cast<std::size_t>(t)] = mx;
        sum += mx;
        sum_sq += mx * mx;
      }
      const double m = static_cast<double>(mc->samples);
      if (cp->rule == ConvexPiRule::HalfExpectedMax) {
        th.tau = 0.5 * (sum / m);
        const double var = std::max(0.0, sum_sq / m - (sum / m) * (sum / m));
        th.tau_stderr = 0.5 * std::sqrt(var / m);
      } else {
        std::sort(maxes.begin(), maxes.end());
        th.tau = maxes[(maxes.size() - 1) / 2];  // lower sample median
      }
    } else {
      const MaxRewardStats mx = max_reward_stats(inst);
      th.tau = (cp->rule == ConvexPiRule::HalfExpectedMax) ? 0.5 * mx.expected_max
                                                           : mx.median_max;
    }
    return th;
  }

  if (const auto* a4 = std::get_if<Alg4Config>(&config.alg)) {
    const bool five = a4->variant == Alg4Variant::FiveCompetitive;
    th.heads_prob = five ? 3.0 / 5.0 : 5.0 / 8.0;
    const double c_small = five ? 2.0 / 3.0 : 2.0 / 5.0;
    const double c_large = five ? 1.0 / 2.0 : 1.0 / 3.0;
    if (const auto* ext = std::get_if<ExternalThreshold>(&config.source)) {
      th.tau_small = ext->value;
      th.tau_large = ext->value;
      return th;
    }
    if (std::holds_alternative<ApproxOracleThreshold>(config.source)) {
      throw Error(ErrorCode::ModelMismatch,
                  "the coin-flip policy needs separate small/large benchmarks; "
                  "an approximate overall optimum is not enough");
    }
    const detail::SourceStats st = detail::stats_for(inst, config.source);
    th.tau_small = c_small * st.g_small;
    th.tau_large = c_large * st.g_large;
    th.tau_small_stderr = c_small * st.se_g_small;
    th.tau_large_stderr = c_large * st.se_g_large;
    return th;
  }

  // alg1/2/3: tau = coefficient * E[f(S*)].
  if (const auto* ext = std::get_if<ExternalThreshold>(&config.source)) {
    th.tau = ext->value;
    return th;
  }

  const Beta beta = compute_beta(inst);
  const auto coefficient = [&](double gamma) -> double {
    if (const auto* a1 = std::get_if<Alg1Config>(&config.alg)) {
      return a1->variant == Alg1Variant::GammaTuned ? 1.0 / (1.0 + gamma) : 0.5;
    }
    if (const auto* a2 = std::get_if<Alg2Config>(&config.alg)) {
      switch (a2->variant) {
        case Alg2Variant::Strong: return 1.0 / 2.0;
        case Alg2Variant::Weak: return 1.0 / 3.0;
        case Alg2Variant::GammaWeak: return 1.0 / (2.0 + gamma);
      }
    }
    const auto& a3 = std::get<Alg3Config>(config.alg);
    return a3.variant == Alg3Variant::Strong ? 1.0 / (2.0 - beta.value)
                                             : 1.0 / (3.0 - beta.value);
  };

  if (const auto* ap = std::get_if<ApproxOracleThreshold>(&config.source)) {
    // The supplied value approximates E[f(S*)] only; gamma-dependent
    // coefficients fall back to the exact gamma.
    const bool needs_gamma =
        (std::holds_alternative<Alg1Config>(config.alg) &&
         std::get<Alg1Config>(config.alg).variant == Alg1Variant::GammaTuned) ||
        (std::holds_alternative<Alg2Config>(config.alg) &&
         std::get<Alg2Config>(config.alg).variant == Alg2Variant::GammaWeak);
    const double gamma = needs_gamma ? opt_stats_exact(inst).gamma : 0.0;
    th.tau = coefficient(gamma) * ap->approx_expected_opt;
    return th;
  }

  const detail::SourceStats st = detail::stats_for(inst, config.source);
  const double c = coefficient(st.gamma);
  th.tau = c * st.expected_opt;

  if (std::holds_alternative<MonteCarloThreshold>(config.source)) {
    // Delta method: the coefficient itself is noisy when it involves gamma.
    double rel_sq = 0.0;
    if (st.expected_opt > 0.0) {
      rel_sq += (st.se_opt / st.expected_opt) * (st.se_opt / st.expected_opt);
    }
    if (const auto* a1 = std::get_if<Alg1Config>(&config.alg);
        a1 != nullptr && a1->variant == Alg1Variant::GammaTuned) {
      const double d = 1.0 + st.gamma;
      rel_sq += (st.se_gamma / d) * (st.se_gamma / d);
    }
    if (const auto* a2 = std::get_if<Alg2Config>(&config.alg);
        a2 != nullptr && a2->variant == Alg2Variant::GammaWeak) {
      const double d = 2.0 + st.gamma;
      rel_sq += (st.se_gamma / d) * (st.se_gamma / d);
    }
    th.tau_stderr = th.tau * std::sqrt(rel_sq);
  }
  return th;
}

// The fixed reward threshold for one of the convex-combination rules.
inline double convex_pi_threshold(const Instance& inst, ConvexPiRule rule) {
  PolicyConfig config;
  config.alg = ConvexPiConfig{rule};
  return compute_threshold(inst, config).tau;
}

// --- Claimed competitive factors --------------------------------------------

// The factor rho such that rho * E[f(A)] >= E[f(S*)] is guaranteed. Needs
// the exact gamma (for the gamma-tuned variants) and the size ratio beta
// (for the knapsack policies). Returns +inf when beta = 1 makes the knapsack
// guarantee vacuous.
inline double claimed_rho(const PolicyAlg& alg, double gamma, double beta) {
  if (const auto* a1 = std::get_if<Alg1Config>(&alg)) {
    return a1->variant == Alg1Variant::GammaTuned ? 1.0 + gamma : 2.0;
  }
  if (const auto* a2 = std::get_if<Alg2Config>(&alg)) {
    switch (a2->variant) {
      case Alg2Variant::Strong: return 2.0;
      case Alg2Variant::Weak: return 3.0;
      case Alg2Variant::GammaWeak: return 2.0 + gamma;
    }
  }
  if (const auto* a3 = std::get_if<Alg3Config>(&alg)) {
    if (beta >= 1.0) return std::numeric_limits<double>::infinity();
    return a3->variant == Alg3Variant::Strong ? (2.0 - beta) / (1.0 - beta)
                                              : (3.0 - beta) / (1.0 - beta);
  }
  if (const auto* a4 = std::get_if<Alg4Config>(&alg)) {
    return a4->variant == Alg4Variant::FiveCompetitive ? 5.0 : 8.0;
  }
  return 2.0;  // convex-combination rule
}

// --- Policy/constraint compatibility and dispatch ---------------------------

inline void require_constraint(const PolicyAlg& alg, const ConstraintSpec& c) {
  const bool ok =
      (std::holds_alternative<Alg1Config>(alg) &&
       std::holds_alternative<Unconstrained>(c)) ||
      (std::holds_alternative<Alg2Config>(alg) &&
       std::holds_alternative<Cardinality>(c)) ||
      (std::holds_alternative<Alg3Config>(alg) &&
       std::holds_alternative<Knapsack>(c)) ||
      (std::holds_alternative<Alg4Config>(alg) &&
       std::holds_alternative<Knapsack>(c)) ||
      (std::holds_alternative<ConvexPiConfig>(alg) &&
       std::holds_alternative<Unconstrained>(c));
  if (!ok) {
    throw Error(ErrorCode::ModelMismatch,
                "policy does not match the instance's constraint type");
  }
}

// Runs one arrival sequence. The coin (coin-flip policy only) is forced by
// the caller or drawn from (coin_seed, trial).
inline PolicyState run_policy(const ChoiceModelSpec& model,
                              const ConstraintSpec& constraint,
                              const PolicyConfig& config, const Thresholds& th,
                              const Realization& real, std::span<const int> order,
                              std::optional<Coin> forced_coin = std::nullopt,
                              std::uint64_t trial = 0) {
  require_constraint(config.alg, constraint);
  if (std::holds_alternative<Alg1Config>(config.alg)) {
    return alg1_run(th.tau, real, order);
  }
  if (std::holds_alternative<Alg2Config>(config.alg)) {
    return alg2_run(model, th.tau, std::get<Cardinality>(constraint).k, real, order);
  }
  if (std::holds_alternative<Alg3Config>(config.alg)) {
    return alg3_run(model, th.tau, std::get<Knapsack>(constraint).budget, real, order);
  }
  if (std::holds_alternative<Alg4Config>(config.alg)) {
    const Coin coin = forced_coin.has_value()
                          ? *forced_coin
                          : draw_coin(config.coin_seed, trial, th.heads_prob);
    return alg4_run(model, std::get<Knapsack>(constraint).budget, th, coin, real,
                    order);
  }
  return convex_pi_run(th.tau, real, order);
}

}  // namespace seqassort
