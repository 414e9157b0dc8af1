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

// Deterministic random-instance generators and hand-built fixtures shared by
// the unit tests and the acceptance suite. Parameters stay in moderate
// ranges on purpose: edge cases (zero revenues, zero attractions, shadow
// equal to attraction, tied fares and utilities) are injected with fixed
// probabilities rather than by extreme magnitudes.

#include <cmath>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "seqassort/choice.hpp"
#include "seqassort/core.hpp"
#include "seqassort/instance.hpp"
#include "seqassort/policy.hpp"
#include "seqassort/rng.hpp"

namespace testsupport {

using namespace seqassort;

// --- Hand-built realizations ------------------------------------------------

// Items from (revenue, attraction) pairs under MNL.
inline Realization mnl_realization(const std::vector<std::pair<double, double>>& rv) {
  Realization real;
  int id = 0;
  for (const auto& [r, v] : rv) {
    real.items.push_back(RealizedItem{id++, r, MnlAttraction{v}, 0.0});
  }
  return real;
}

inline Realization gam_realization(const std::vector<std::pair<double, double>>& rv) {
  Realization real;
  int id = 0;
  for (const auto& [r, v] : rv) {
    real.items.push_back(RealizedItem{id++, r, GamAttraction{v}, 0.0});
  }
  return real;
}

// Items from (revenue, fare, q) triples under the lowest-considered-fare model.
inline Realization lcf_realization(
    const std::vector<std::tuple<double, double, double>>& rfq) {
  Realization real;
  int id = 0;
  for (const auto& [r, fare, q] : rfq) {
    real.items.push_back(RealizedItem{id++, r, LcfParams{fare, q}, 0.0});
  }
  return real;
}

// --- Random instance generation --------------------------------------------

// Revenue in [0, 5], exactly 0 with probability ~0.1.
inline double random_revenue(RngStream& rng) {
  if (rng.uniform01() < 0.1) return 0.0;
  return 5.0 * rng.uniform01();
}

inline std::vector<double> random_probs(RngStream& rng, int m) {
  std::vector<double> w(static_cast<std::size_t>(m));
  double total = 0.0;
  for (double& x : w) {
    x = 0.1 + rng.uniform01();
    total += x;
  }
  for (double& x : w) x /= total;
  return w;
}

// Unconstrained random instance of the given model kind with n in
// [2, max_items] and 1..max_atoms support points per item.
inline Instance random_instance(RngStream& rng, ModelKind kind, int max_items,
                                int max_atoms) {
  Instance inst;
  const int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_items - 1)));

  std::vector<double> shadow;
  RumModel rum;
  if (kind == ModelKind::Gam) {
    for (int i = 0; i < n; ++i) shadow.push_back(rng.uniform01());
  } else if (kind == ModelKind::Rum) {
    rum.u0 = 2.0 * rng.uniform01();
    for (int i = 0; i < n; ++i) {
      const int dists = 1 + static_cast<int>(rng.below(2));
      std::vector<UtilityDist> family;
      for (int l = 0; l < dists; ++l) {
        const int atoms = 1 + static_cast<int>(rng.below(2));
        const std::vector<double> p = random_probs(rng, atoms);
        UtilityDist d;
        for (int a = 0; a < atoms; ++a) {
          // Utilities on a half-integer grid so ties (item-item and item-u0)
          // actually occur.
          const double u = 0.5 * static_cast<double>(rng.below(7));
          d.push_back(UtilityAtom{p[static_cast<std::size_t>(a)], u});
        }
        family.push_back(std::move(d));
      }
      rum.families.push_back(std::move(family));
    }
    if (rng.uniform01() < 0.3) rum.u0 = 1.0;  // grid value: ties against u0
  }

  switch (kind) {
    case ModelKind::Mnl: {
      const double v0 = (rng.uniform01() < 0.2) ? 0.0 : 3.0 * rng.uniform01();
      inst.model = MnlModel{v0};
      break;
    }
    case ModelKind::Gam:
      inst.model = GamModel{1.0 + 2.0 * rng.uniform01(), shadow};
      break;
    case ModelKind::Rum:
      inst.model = rum;
      break;
    case ModelKind::Lcf:
      inst.model = LcfModel{};
      break;
  }

  for (int i = 0; i < n; ++i) {
    const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_atoms)));
    const std::vector<double> p = random_probs(rng, m);
    ItemDistribution dist;
    for (int a = 0; a < m; ++a) {
      Atom atom;
      atom.prob = p[static_cast<std::size_t>(a)];
      atom.revenue = random_revenue(rng);
      switch (kind) {
        case ModelKind::Mnl: {
          const double v = (rng.uniform01() < 0.1) ? 0.0 : 4.0 * rng.uniform01();
          atom.demand = MnlAttraction{v};
          break;
        }
        case ModelKind::Gam: {
          const double w = shadow[static_cast<std::size_t>(i)];
          const double v = (rng.uniform01() < 0.1) ? w : w + 3.0 * rng.uniform01();
          atom.demand = GamAttraction{v};
          break;
        }
        case ModelKind::Rum: {
          const int fam = static_cast<int>(rum.families[static_cast<std::size_t>(i)].size());
          atom.demand = RumDistIndex{1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(fam)))};
          break;
        }
        case ModelKind::Lcf: {
          const double fare = (rng.uniform01() < 0.5)
                                  ? static_cast<double>(rng.below(4))
                                  : 3.0 * rng.uniform01();
          double q = rng.uniform01();
          const double edge = rng.uniform01();
          if (edge < 0.05) q = 0.0;
          else if (edge < 0.1) q = 1.0;
          atom.demand = LcfParams{fare, q};
          break;
        }
      }
      dist.atoms.push_back(atom);
    }
    inst.items.push_back(std::move(dist));
  }
  return inst;
}

inline void attach_cardinality(Instance& inst, int k) {
  inst.constraint = Cardinality{k};
}

// Attaches a unit-budget knapsack whose size support peaks at exactly
// beta * budget (item 0's first atom), so the realized size ratio is beta.
inline void attach_knapsack(Instance& inst, RngStream& rng, double beta) {
  inst.constraint = Knapsack{1.0};
  const std::vector<double> grid = {beta, beta / 2.0, beta / 4.0, beta / 8.0};
  bool first = true;
  for (ItemDistribution& dist : inst.items) {
    for (Atom& a : dist.atoms) {
      a.size = first ? beta : grid[static_cast<std::size_t>(rng.below(grid.size()))];
      first = false;
    }
  }
}

inline std::vector<int> identity_order(int n) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  return order;
}

inline std::vector<int> random_order(int n, RngStream& rng) {
  std::vector<int> order = identity_order(n);
  seqassort::shuffle(order, rng);
  return order;
}

// Exact decomposition of the unconstrained threshold rule's collected set
// A = { i : r_i >= tau }:
//   f(A) = sum_i phi(i, A) (r_i - tau)^+ + psi(A) tau.
// Returns |lhs - rhs|; the identity holds to machine precision.
inline double eq1_identity_gap(const ChoiceModelSpec& model, const Realization& real,
                               double tau) {
  Assortment a;
  for (const RealizedItem& it : real.items) {
    if (it.revenue >= tau) a.add(it.id);
  }
  const PhiRow row = all_phi(model, real, a);
  double rhs = 0.0;
  for (const RealizedItem& it : real.items) {
    rhs += row.member[static_cast<std::size_t>(it.id)] *
           std::max(0.0, it.revenue - tau);
  }
  rhs += (1.0 - row.outside) * tau;
  return std::fabs(total_revenue(model, real, a) - rhs);
}

// Exact decomposition of the cardinality rule's collected set A:
//   f(A) = sum_{i in A} [phi(i,A)/phi(i,{i})] zeta_i
//        + (psi(A) + sum_{i in A} [phi(0,{i})/k] phi(i,A)/phi(i,{i})) tau
// with zeta_i = (phi(i,{i})(r_i - tau)^+ - phi(0,{i}) tau / k)^+. Requires
// tau > 0 so accepted items always have phi(i,{i}) > 0.
inline double eq2_identity_gap(const ChoiceModelSpec& model, const Realization& real,
                               double tau, int k, std::span<const int> order) {
  const PolicyState st = alg2_run(model, tau, k, real, order);
  const PhiRow row = all_phi(model, real, st.collected);
  double rhs = 0.0;
  double extra_psi = 0.0;
  for (const int i : st.collected.members()) {
    const SingletonChoice sc = singleton_choice(model, real, i);
    const double zeta =
        std::max(0.0, sc.phi_own * std::max(0.0, real.item(i).revenue - tau) -
                          sc.phi_out * tau / static_cast<double>(k));
    const double ratio = row.member[static_cast<std::size_t>(i)] / sc.phi_own;
    rhs += ratio * zeta;
    extra_psi += (sc.phi_out / static_cast<double>(k)) * ratio;
  }
  rhs += ((1.0 - row.outside) + extra_psi) * tau;
  return std::fabs(total_revenue(model, real, st.collected) - rhs);
}

// Two-item fixture with one deterministic and one two-point item; frozen
// offline statistics: E[f(S*)] = 1.25, gamma = 5/12, best sets {0,1} / {0}.
inline seqassort::Instance two_point_instance() {
  seqassort::Instance inst;
  inst.model = seqassort::MnlModel{2.0};
  seqassort::ItemDistribution d1;
  d1.atoms.push_back(seqassort::Atom{1.0, 1.0, seqassort::MnlAttraction{2.0}, 0.0});
  seqassort::ItemDistribution d2;
  d2.atoms.push_back(seqassort::Atom{0.5, 6.0, seqassort::MnlAttraction{1.0}, 0.0});
  d2.atoms.push_back(seqassort::Atom{0.5, 0.0, seqassort::MnlAttraction{1.0}, 0.0});
  inst.items.push_back(d1);
  inst.items.push_back(d2);
  return inst;
}

// Knapsack sizes straddling budget/2 so both coin branches see items.
inline void attach_mixed_knapsack(Instance& inst, RngStream& rng) {
  inst.constraint = Knapsack{1.0};
  const std::vector<double> grid = {0.125, 0.25, 0.5, 0.7, 0.9};
  bool small_seen = false;
  bool large_seen = false;
  for (ItemDistribution& dist : inst.items) {
    for (Atom& a : dist.atoms) {
      a.size = grid[static_cast<std::size_t>(rng.below(grid.size()))];
      (a.size > 0.5 ? large_seen : small_seen) = true;
    }
  }
  if (!small_seen) inst.items[0].atoms[0].size = 0.25;
  if (!large_seen) inst.items[0].atoms.back().size = 0.7;
}

}  // namespace testsupport
