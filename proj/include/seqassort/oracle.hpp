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

// Offline (clairvoyant) benchmarks: the best feasible assortment for a fully
// revealed realization, and its expectation over the instance. The generic
// oracle enumerates all feasible subsets; the revenue-ordered shortcut for
// MNL scans only the nested revenue-prefix assortments. Ties are broken
// toward the lexicographically smallest member list so every result is
// deterministic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "seqassort/choice.hpp"
#include "seqassort/core.hpp"
#include "seqassort/instance.hpp"
#include "seqassort/rng.hpp"

namespace seqassort {

inline constexpr int kOracleExhaustiveMax = 20;

struct OracleResult {
  Assortment best_set;
  double value = 0.0;          // f(S*)
  double purchase_prob = 0.0;  // psi(S*)
};

namespace detail {

inline bool feasible(const ConstraintSpec& constraint, const Realization& real,
                     Assortment s) {
  if (std::holds_alternative<Unconstrained>(constraint)) return true;
  if (const auto* c = std::get_if<Cardinality>(&constraint)) {
    return s.count() <= c->k;
  }
  const auto& knap = std::get<Knapsack>(constraint);
  double used = 0.0;
  for (std::uint32_t m = s.bits; m; m &= m - 1) {
    used += real.items[static_cast<std::size_t>(std::countr_zero(m))].size;
  }
  return used <= knap.budget;
}

struct BestTracker {
  Assortment set;
  double value = 0.0;

  void offer(Assortment s, double v) {
    if (v > value || (v == value && lex_less(s, set))) {
      set = s;
      value = v;
    }
  }
};

}  // namespace detail

// Exhaustive search over all feasible subsets. The empty set (value 0) is
// always feasible, so the result value is never negative.
inline OracleResult opt_brute(const ChoiceModelSpec& model, const Realization& real,
                              const ConstraintSpec& constraint,
                              int max_items = kOracleExhaustiveMax) {
  const int n = real.item_count();
  if (n > max_items) {
    throw Error(ErrorCode::TooLarge,
                "exhaustive oracle limited to " + std::to_string(max_items) + " items");
  }
  detail::BestTracker best;
  const std::uint32_t full = Assortment::full(n).bits;
  for (std::uint32_t bits = 0; bits <= full; ++bits) {
    const Assortment s{bits};
    if (!detail::feasible(constraint, real, s)) continue;
    best.offer(s, total_revenue(model, real, s));
  }
  OracleResult out;
  out.best_set = best.set;
  out.value = best.value;
  out.purchase_prob = purchase_prob(model, real, best.set);
  return out;
}

// MNL shortcut: an optimal unconstrained assortment is always of the form
// { i : r_i >= t }, so scanning the distinct revenue levels suffices.
inline OracleResult opt_mnl_revenue_ordered(const ChoiceModelSpec& model,
                                            const Realization& real) {
  if (!std::holds_alternative<MnlModel>(model)) {
    throw Error(ErrorCode::ModelMismatch,
                "revenue-ordered oracle requires the MNL model");
  }
  const int n = real.item_count();
  std::vector<double> levels;
  levels.reserve(static_cast<std::size_t>(n));
  for (const RealizedItem& it : real.items) levels.push_back(it.revenue);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  detail::BestTracker best;  // starts at the empty set, value 0
  for (const double t : levels) {
    Assortment s;
    for (const RealizedItem& it : real.items) {
      if (it.revenue >= t) s.add(it.id);
    }
    best.offer(s, total_revenue(model, real, s));
  }
  OracleResult out;
  out.best_set = best.set;
  out.value = best.value;
  out.purchase_prob = purchase_prob(model, real, best.set);
  return out;
}

// Split benchmark for the coin-flip policy: the budget-feasible optimum over
// the small items (size <= budget/2) and the best single large item.
struct GSplit {
  OracleResult small;  // g(Q): knapsack optimum over small items
  OracleResult large;  // g(V): best feasible singleton among large items
};

inline GSplit g_split(const ChoiceModelSpec& model, const Realization& real,
                      double budget, int max_items = kOracleExhaustiveMax) {
  const int n = real.item_count();
  if (n > max_items) {
    throw Error(ErrorCode::TooLarge,
                "exhaustive oracle limited to " + std::to_string(max_items) + " items");
  }
  Assortment small_items;
  Assortment large_items;
  for (const RealizedItem& it : real.items) {
    (it.size <= budget / 2.0 ? small_items : large_items).add(it.id);
  }

  const ConstraintSpec knap = Knapsack{budget};
  GSplit out;

  detail::BestTracker best_small;
  std::uint32_t sub = small_items.bits;
  while (true) {
    const Assortment s{sub};
    if (detail::feasible(knap, real, s)) {
      best_small.offer(s, total_revenue(model, real, s));
    }
    if (sub == 0) break;
    sub = (sub - 1) & small_items.bits;
  }
  out.small.best_set = best_small.set;
  out.small.value = best_small.value;
  out.small.purchase_prob = purchase_prob(model, real, best_small.set);

  detail::BestTracker best_large;
  for (std::uint32_t m = large_items.bits; m; m &= m - 1) {
    const int i = std::countr_zero(m);
    const Assortment s = Assortment::of({i});
    if (!detail::feasible(knap, real, s)) continue;
    best_large.offer(s, total_revenue(model, real, s));
  }
  out.large.best_set = best_large.set;
  out.large.value = best_large.value;
  out.large.purchase_prob = purchase_prob(model, real, best_large.set);
  return out;
}

// Expected offline statistics across the instance: E[f(S*)], the expected
// purchase probability of the offline optimum gamma = E[psi(S*)], and under
// knapsack constraints the split benchmarks E[g(Q)], E[g(V)].
struct OptStats {
  double expected_opt = 0.0;
  double gamma = 0.0;
  double expected_g_small = 0.0;
  double expected_g_large = 0.0;
  bool exact = true;
  int samples = 0;           // Monte Carlo only
  std::uint64_t seed = 0;    // Monte Carlo only
  double stderr_opt = 0.0;   // Monte Carlo only
  double stderr_gamma = 0.0;
  double stderr_g_small = 0.0;
  double stderr_g_large = 0.0;
};

namespace detail {

struct OptAccum {
  double opt = 0.0, opt_sq = 0.0;
  double gam = 0.0, gam_sq = 0.0;
  double gs = 0.0, gs_sq = 0.0;
  double gl = 0.0, gl_sq = 0.0;

  void add(double w, double opt_v, double gam_v, double gs_v, double gl_v) {
    opt += w * opt_v;
    opt_sq += w * opt_v * opt_v;
    gam += w * gam_v;
    gam_sq += w * gam_v * gam_v;
    gs += w * gs_v;
    gs_sq += w * gs_v * gs_v;
    gl += w * gl_v;
    gl_sq += w * gl_v * gl_v;
  }
};

inline void opt_point(const Instance& inst, const Realization& real, double& opt_v,
                      double& gam_v, double& gs_v, double& gl_v) {
  const OracleResult opt = opt_brute(inst.model, real, inst.constraint);
  opt_v = opt.value;
  gam_v = opt.purchase_prob;
  gs_v = 0.0;
  gl_v = 0.0;
  if (const auto* knap = std::get_if<Knapsack>(&inst.constraint)) {
    const GSplit split = g_split(inst.model, real, knap->budget);
    gs_v = split.small.value;
    gl_v = split.large.value;
  }
}

}  // namespace detail

inline OptStats opt_stats_exact(const Instance& inst,
                                std::size_t joint_cap = kDefaultJointCap) {
  const JointSpace space(inst, joint_cap);
  detail::OptAccum acc;
  Realization real;
  for (std::size_t idx = 0; idx < space.size(); ++idx) {
    const double w = space.decode(idx, real);
    double opt_v, gam_v, gs_v, gl_v;
    detail::opt_point(inst, real, opt_v, gam_v, gs_v, gl_v);
    acc.add(w, opt_v, gam_v, gs_v, gl_v);
  }
  OptStats out;
  out.expected_opt = acc.opt;
  out.gamma = acc.gam;
  out.expected_g_small = acc.gs;
  out.expected_g_large = acc.gl;
  out.exact = true;
  return out;
}

inline OptStats opt_stats_mc(const Instance& inst, int samples, std::uint64_t seed) {
  SEQASSORT_CHECK(samples > 0, "sample count must be positive");
  detail::OptAccum acc;
  for (int t = 0; t < samples; ++t) {
    const Realization real = sample(inst, seed, static_cast<std::uint64_t>(t));
    double opt_v, gam_v, gs_v, gl_v;
    detail::opt_point(inst, real, opt_v, gam_v, gs_v, gl_v);
    acc.add(1.0, opt_v, gam_v, gs_v, gl_v);  // raw sums, normalized once below
  }
  const double m = static_cast<double>(samples);
  OptStats out;
  out.expected_opt = acc.opt / m;
  out.gamma = acc.gam / m;
  out.expected_g_small = acc.gs / m;
  out.expected_g_large = acc.gl / m;
  out.exact = false;
  out.samples = samples;
  out.seed = seed;
  const auto stderr_of = [m](double mean, double sum_sq) {
    const double var = std::max(0.0, sum_sq / m - mean * mean);
    return std::sqrt(var / m);
  };
  out.stderr_opt = stderr_of(out.expected_opt, acc.opt_sq);
  out.stderr_gamma = stderr_of(out.gamma, acc.gam_sq);
  out.stderr_g_small = stderr_of(out.expected_g_small, acc.gs_sq);
  out.stderr_g_large = stderr_of(out.expected_g_large, acc.gl_sq);
  return out;
}

}  // namespace seqassort
