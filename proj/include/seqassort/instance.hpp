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

// Problem instances: per-item discrete distributions over (revenue, demand
// parameter, size) triples, independent across items, plus the choice model
// and the feasibility constraint. Within one item's atom the fields may be
// arbitrarily correlated; independence holds only across items.

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "seqassort/choice.hpp"
#include "seqassort/core.hpp"
#include "seqassort/rng.hpp"

namespace seqassort {

inline constexpr double kProbSumTol = 1e-12;
inline constexpr std::size_t kDefaultJointCap = 1'000'000;

// One support point of an item's parameter distribution.
struct Atom {
  double prob = 1.0;
  double revenue = 0.0;
  DemandParam demand = MnlAttraction{0.0};
  double size = 0.0;  // budget units; 0 unless the instance is knapsack-constrained
};

struct ItemDistribution {
  std::vector<Atom> atoms;
};

struct Unconstrained {};
struct Cardinality {
  int k = 1;
};
struct Knapsack {
  double budget = 1.0;
};
using ConstraintSpec = std::variant<Unconstrained, Cardinality, Knapsack>;

struct Instance {
  ChoiceModelSpec model = MnlModel{};
  ConstraintSpec constraint = Unconstrained{};
  std::vector<ItemDistribution> items;

  int item_count() const { return static_cast<int>(items.size()); }
};

namespace detail {

inline bool demand_matches(ModelKind kind, const DemandParam& d) {
  switch (kind) {
    case ModelKind::Mnl: return std::holds_alternative<MnlAttraction>(d);
    case ModelKind::Gam: return std::holds_alternative<GamAttraction>(d);
    case ModelKind::Rum: return std::holds_alternative<RumDistIndex>(d);
    case ModelKind::Lcf: return std::holds_alternative<LcfParams>(d);
  }
  return false;
}

}  // namespace detail

// Structural validation. Returns human-readable violations; empty means the
// instance is well formed. Never throws.
inline std::vector<std::string> validate(const Instance& inst) {
  std::vector<std::string> out;
  auto fail = [&out](const std::string& msg) { out.push_back(msg); };

  const int n = inst.item_count();
  if (n == 0) fail("instance has no items");
  if (n > kMaxItems) fail("instance has more than " + std::to_string(kMaxItems) + " items");

  const ModelKind kind = model_kind(inst.model);
  if (const auto* m = std::get_if<MnlModel>(&inst.model)) {
    if (!(m->v0 >= 0.0)) fail("outside attraction v0 must be >= 0");
  } else if (const auto* g = std::get_if<GamModel>(&inst.model)) {
    if (!(g->v0 >= 0.0)) fail("outside attraction v0 must be >= 0");
    if (static_cast<int>(g->shadow.size()) != n) {
      fail("shadow attraction vector length must equal the item count");
    }
    for (std::size_t i = 0; i < g->shadow.size(); ++i) {
      if (!(g->shadow[i] >= 0.0)) {
        fail("shadow attraction of item " + std::to_string(i) + " must be >= 0");
      }
    }
  } else if (const auto* r = std::get_if<RumModel>(&inst.model)) {
    if (static_cast<int>(r->families.size()) != n) {
      fail("utility family list length must equal the item count");
    }
    for (std::size_t i = 0; i < r->families.size(); ++i) {
      if (r->families[i].empty()) {
        fail("item " + std::to_string(i) + " declares no utility distributions");
      }
      for (std::size_t l = 0; l < r->families[i].size(); ++l) {
        const UtilityDist& d = r->families[i][l];
        if (d.empty()) {
          fail("utility distribution " + std::to_string(l + 1) + " of item " +
               std::to_string(i) + " has no atoms");
          continue;
        }
        double sum = 0.0;
        for (const UtilityAtom& a : d) {
          if (!(a.p > 0.0)) {
            fail("utility atom probabilities of item " + std::to_string(i) +
                 " must be > 0");
          }
          sum += a.p;
        }
        if (std::fabs(sum - 1.0) > kProbSumTol) {
          fail("utility atom probabilities of item " + std::to_string(i) +
               " must sum to 1");
        }
      }
    }
  }

  const auto* knap = std::get_if<Knapsack>(&inst.constraint);
  if (const auto* c = std::get_if<Cardinality>(&inst.constraint)) {
    if (c->k < 1) fail("cardinality bound k must be >= 1");
  }
  if (knap != nullptr && !(knap->budget > 0.0)) fail("knapsack budget must be > 0");

  for (int i = 0; i < n; ++i) {
    const auto& atoms = inst.items[static_cast<std::size_t>(i)].atoms;
    const std::string who = "item " + std::to_string(i);
    if (atoms.empty()) {
      fail(who + " has no atoms");
      continue;
    }
    double sum = 0.0;
    for (const Atom& a : atoms) {
      if (!(a.prob > 0.0)) fail(who + " has an atom with probability <= 0");
      sum += a.prob;
      if (!(a.revenue >= 0.0)) fail(who + " has an atom with negative revenue");
      if (!detail::demand_matches(kind, a.demand)) {
        fail(who + " has a demand parameter that does not match the model type");
        continue;
      }
      if (kind == ModelKind::Gam) {
        const auto* g = std::get_if<GamModel>(&inst.model);
        if (g != nullptr && static_cast<int>(g->shadow.size()) == n) {
          const double v = std::get<GamAttraction>(a.demand).v;
          if (!(v >= 0.0)) fail(who + " has a negative attraction");
          if (v < g->shadow[static_cast<std::size_t>(i)]) {
            fail(who + " has an attraction below its shadow attraction");
          }
        }
      } else if (kind == ModelKind::Mnl) {
        if (!(std::get<MnlAttraction>(a.demand).v >= 0.0)) {
          fail(who + " has a negative attraction");
        }
      } else if (kind == ModelKind::Rum) {
        const auto* r = std::get_if<RumModel>(&inst.model);
        const int idx = std::get<RumDistIndex>(a.demand).index;
        if (r != nullptr && static_cast<std::size_t>(i) < r->families.size()) {
          const int m = static_cast<int>(r->families[static_cast<std::size_t>(i)].size());
          if (idx < 1 || idx > m) {
            fail(who + " references utility distribution " + std::to_string(idx) +
                 " outside its family");
          }
        }
      } else if (kind == ModelKind::Lcf) {
        const LcfParams& p = std::get<LcfParams>(a.demand);
        if (!(p.q >= 0.0 && p.q <= 1.0)) {
          fail(who + " has a consideration probability outside [0,1]");
        }
      }
      if (knap != nullptr) {
        if (!(a.size >= 0.0)) fail(who + " has a negative size");
        if (a.size > knap->budget) fail(who + " has an atom larger than the budget");
      } else if (a.size != 0.0) {
        fail(who + " has a nonzero size without a knapsack constraint");
      }
    }
    if (std::fabs(sum - 1.0) > kProbSumTol) {
      fail(who + " atom probabilities must sum to 1");
    }
  }
  return out;
}

namespace detail {

inline const Atom& pick_atom(const ItemDistribution& dist, double u) {
  double cum = 0.0;
  for (const Atom& a : dist.atoms) {
    cum += a.prob;
    if (u < cum) return a;
  }
  return dist.atoms.back();  // u landed in the rounding slack at the top
}

inline RealizedItem realize(int id, const Atom& a) {
  return RealizedItem{id, a.revenue, a.demand, a.size};
}

}  // namespace detail

// Draws one realization. Each item consumes exactly one value from its own
// (seed, trial, item) stream, so results do not depend on evaluation order
// and distinct trials are independent.
inline Realization sample(const Instance& inst, std::uint64_t seed, std::uint64_t trial) {
  Realization real;
  const int n = inst.item_count();
  real.items.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    RngStream stream(seed, trial, static_cast<std::uint64_t>(i));
    const Atom& a = detail::pick_atom(inst.items[static_cast<std::size_t>(i)], stream.uniform01());
    real.items.push_back(detail::realize(i, a));
  }
  return real;
}

// Resamples only the items outside `keep`, leaving the kept items' realized
// parameters untouched. Used by the parameter-independence check.
inline Realization resample_outside(const Instance& inst, const Realization& base,
                                    Assortment keep, std::uint64_t seed,
                                    std::uint64_t trial) {
  Realization real = base;
  for (int i = 0; i < inst.item_count(); ++i) {
    if (keep.contains(i)) continue;
    RngStream stream(seed, trial, static_cast<std::uint64_t>(i));
    const Atom& a = detail::pick_atom(inst.items[static_cast<std::size_t>(i)], stream.uniform01());
    real.items[static_cast<std::size_t>(i)] = detail::realize(i, a);
  }
  return real;
}

// Indexable view of the joint support (Cartesian product of the per-item
// atom lists). Index 0 is the all-first-atoms point and item 0 varies
// slowest, giving one fixed deterministic order for enumeration and for
// chunked parallel reductions.
class JointSpace {
 public:
  explicit JointSpace(const Instance& inst, std::size_t cap = kDefaultJointCap)
      : inst_(&inst) {
    total_ = 1;
    for (const ItemDistribution& d : inst.items) {
      SEQASSORT_CHECK(!d.atoms.empty(), "item distribution has no atoms");
      if (total_ > cap / d.atoms.size()) {
        throw Error(ErrorCode::EnumerationTooLarge,
                    "joint support exceeds " + std::to_string(cap) + " realizations");
      }
      total_ *= d.atoms.size();
    }
  }

  std::size_t size() const { return total_; }

  // Writes the idx-th support point and returns its probability.
  double decode(std::size_t idx, Realization& out) const {
    const int n = inst_->item_count();
    out.items.resize(static_cast<std::size_t>(n));
    double prob = 1.0;
    std::size_t rem = idx;
    for (int i = n - 1; i >= 0; --i) {
      const auto& atoms = inst_->items[static_cast<std::size_t>(i)].atoms;
      const std::size_t j = rem % atoms.size();
      rem /= atoms.size();
      const Atom& a = atoms[j];
      out.items[static_cast<std::size_t>(i)] = detail::realize(i, a);
      prob *= a.prob;
    }
    return prob;
  }

 private:
  const Instance* inst_;
  std::size_t total_ = 1;
};

struct WeightedRealization {
  double prob = 1.0;
  Realization real;
};

// Materializes the whole joint support. Intended for small instances; the
// streaming JointSpace view is what evaluation loops use.
inline std::vector<WeightedRealization> enumerate_joint(
    const Instance& inst, std::size_t cap = kDefaultJointCap) {
  const JointSpace space(inst, cap);
  std::vector<WeightedRealization> out(space.size());
  for (std::size_t idx = 0; idx < space.size(); ++idx) {
    out[idx].prob = space.decode(idx, out[idx].real);
  }
  return out;
}

}  // namespace seqassort
