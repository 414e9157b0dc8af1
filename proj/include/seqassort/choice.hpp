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

// Choice probabilities phi(i, S) for the four supported demand models, plus
// the derived quantities every policy and oracle is built on:
//
//   purchase_prob(S) = 1 - phi(0, S)          probability anything sells
//   total_revenue(S) = sum_i phi(i, S) * r_i  expected revenue of offering S
//
// All models are evaluated exactly (closed forms, or exhaustive enumeration
// of the joint utility support for the random-utility model). Probabilities
// are never renormalized: each evaluation asserts that member probabilities
// and the no-purchase probability sum to 1 within a strict tolerance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqassort/core.hpp"

namespace seqassort {

inline constexpr double kNormalizationTol = 1e-9;
inline constexpr std::uint64_t kDefaultRumAtomCap = 10'000'000;

// Choice probabilities of one assortment: member[i] = phi(i, S) (0 for
// non-members), outside = phi(0, S).
struct PhiRow {
  std::vector<double> member;
  double outside = 1.0;
};

namespace detail {

inline double mnl_attraction(const RealizedItem& it) {
  if (const auto* p = std::get_if<MnlAttraction>(&it.demand)) return p->v;
  throw Error(ErrorCode::ModelMismatch,
              "item " + std::to_string(it.id) + " does not carry an MNL attraction");
}

inline double gam_attraction(const RealizedItem& it) {
  if (const auto* p = std::get_if<GamAttraction>(&it.demand)) return p->v;
  throw Error(ErrorCode::ModelMismatch,
              "item " + std::to_string(it.id) + " does not carry a GAM attraction");
}

inline const LcfParams& lcf_params(const RealizedItem& it) {
  if (const auto* p = std::get_if<LcfParams>(&it.demand)) return *p;
  throw Error(ErrorCode::ModelMismatch,
              "item " + std::to_string(it.id) + " does not carry fare parameters");
}

inline const UtilityDist& rum_dist(const RumModel& m, const RealizedItem& it) {
  const auto* p = std::get_if<RumDistIndex>(&it.demand);
  if (p == nullptr) {
    throw Error(ErrorCode::ModelMismatch,
                "item " + std::to_string(it.id) + " does not carry a utility-distribution index");
  }
  const std::size_t id = static_cast<std::size_t>(it.id);
  if (id >= m.families.size()) {
    throw Error(ErrorCode::UnknownItem,
                "item " + std::to_string(it.id) + " has no declared utility family");
  }
  const auto& family = m.families[id];
  if (p->index < 1 || static_cast<std::size_t>(p->index) > family.size()) {
    throw Error(ErrorCode::ModelMismatch,
                "utility-distribution index " + std::to_string(p->index) +
                    " out of range for item " + std::to_string(it.id));
  }
  return family[static_cast<std::size_t>(p->index - 1)];
}

inline void check_assortment(const Realization& real, Assortment s) {
  const Assortment universe = Assortment::full(real.item_count());
  if (!s.subset_of(universe)) {
    throw Error(ErrorCode::UnknownItem, "assortment contains an id not in the instance");
  }
}

inline void check_normalized(const PhiRow& row, Assortment s) {
  double sum = row.outside;
  for (std::uint32_t m = s.bits; m; m &= m - 1) {
    sum += row.member[static_cast<std::size_t>(std::countr_zero(m))];
  }
  SEQASSORT_CHECK(std::fabs(sum - 1.0) <= kNormalizationTol,
                  "choice probabilities do not sum to 1");
}

inline PhiRow mnl_row(double v0, const Realization& real, Assortment s,
                      bool gam_variant) {
  const int n = real.item_count();
  PhiRow row;
  row.member.assign(static_cast<std::size_t>(n), 0.0);
  double v_in = 0.0;
  for (std::uint32_t m = s.bits; m; m &= m - 1) {
    const int i = std::countr_zero(m);
    v_in += gam_variant ? gam_attraction(real.items[static_cast<std::size_t>(i)])
                        : mnl_attraction(real.items[static_cast<std::size_t>(i)]);
  }
  const double denom = v0 + v_in;
  if (denom <= 0.0) {
    // Degenerate: nothing attracts, the outside option is chosen surely.
    row.outside = 1.0;
    return row;
  }
  for (std::uint32_t m = s.bits; m; m &= m - 1) {
    const int i = std::countr_zero(m);
    const double v = gam_variant
                         ? gam_attraction(real.items[static_cast<std::size_t>(i)])
                         : mnl_attraction(real.items[static_cast<std::size_t>(i)]);
    row.member[static_cast<std::size_t>(i)] = v / denom;
  }
  row.outside = v0 / denom;
  return row;
}

}  // namespace detail

// MNL: phi(i, S) = v_i / (v0 + v(S)).
inline PhiRow mnl_all_phi(const MnlModel& model, const Realization& real,
                          Assortment s) {
  detail::check_assortment(real, s);
  PhiRow row = detail::mnl_row(model.v0, real, s, /*gam_variant=*/false);
  detail::check_normalized(row, s);
  return row;
}

// GAM: removed items keep a shadow attraction w_i <= v_i that accrues to the
// outside option, so phi(i, S) = v_i / (v0 + v(S) + w(N\S)) and
// phi(0, S) = (v0 + w(N\S)) / (v0 + v(S) + w(N\S)).
inline PhiRow gam_all_phi(const GamModel& model, const Realization& real,
                          Assortment s) {
  detail::check_assortment(real, s);
  const int n = real.item_count();
  if (static_cast<int>(model.shadow.size()) != n) {
    throw Error(ErrorCode::ModelMismatch,
                "shadow attraction vector length does not match item count");
  }
  double w_out = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!s.contains(i)) w_out += model.shadow[static_cast<std::size_t>(i)];
  }
  for (std::uint32_t m = s.bits; m; m &= m - 1) {
    const int i = std::countr_zero(m);
    const double v = detail::gam_attraction(real.items[static_cast<std::size_t>(i)]);
    if (v < model.shadow[static_cast<std::size_t>(i)]) {
      throw Error(ErrorCode::ShadowExceedsAttraction,
                  "item " + std::to_string(i) + " realized attraction below its shadow");
    }
  }
  PhiRow row = detail::mnl_row(model.v0 + w_out, real, s, /*gam_variant=*/true);
  detail::check_normalized(row, s);
  return row;
}

// Random-utility model with independent discrete utilities and deterministic
// outside utility u0. Exhaustive enumeration of the joint support; a member
// wins its atom when it strictly beats every other member or ties one with a
// larger id, and additionally attains at least u0 (the outside option never
// wins ties).
inline PhiRow rum_all_phi(const RumModel& model, const Realization& real,
                          Assortment s,
                          std::uint64_t atom_cap = kDefaultRumAtomCap) {
  detail::check_assortment(real, s);
  const int n = real.item_count();
  PhiRow row;
  row.member.assign(static_cast<std::size_t>(n), 0.0);
  row.outside = 0.0;

  std::vector<int> ids;
  std::vector<const UtilityDist*> dists;
  std::uint64_t total = 1;
  for (std::uint32_t m = s.bits; m; m &= m - 1) {
    const int i = std::countr_zero(m);
    const UtilityDist& d = detail::rum_dist(model, real.items[static_cast<std::size_t>(i)]);
    SEQASSORT_CHECK(!d.empty(), "utility distribution has no atoms");
    ids.push_back(i);
    dists.push_back(&d);
    total *= d.size();
    if (total > atom_cap) {
      throw Error(ErrorCode::SupportTooLarge,
                  "joint utility support exceeds " + std::to_string(atom_cap) + " atoms");
    }
  }
  if (ids.empty()) {
    row.outside = 1.0;
    return row;
  }

  const std::size_t k = ids.size();
  std::vector<std::size_t> idx(k, 0);
  while (true) {
    double p = 1.0;
    int winner = kOutside;
    double best = model.u0;
    for (std::size_t j = 0; j < k; ++j) {
      const UtilityAtom& a = (*dists[j])[idx[j]];
      p *= a.p;
      // Ascending id order: only a strictly larger utility displaces an item
      // winner, so ties go to the smaller id; ties against u0 go to the item.
      if (a.u > best || (a.u == best && winner == kOutside)) {
        winner = ids[j];
        best = a.u;
      }
    }
    if (winner == kOutside) {
      row.outside += p;
    } else {
      row.member[static_cast<std::size_t>(winner)] += p;
    }
    std::size_t j = k;
    while (j > 0) {
      --j;
      if (++idx[j] < dists[j]->size()) break;
      idx[j] = 0;
      if (j == 0) {
        detail::check_normalized(row, s);
        return row;
      }
    }
  }
}

// Lowest-considered-fare model: each offered item enters the consideration
// set independently with probability q_i and the buyer takes the considered
// item with the lowest fare, ties broken toward the smaller id.
inline PhiRow lcf_all_phi(const LcfModel&, const Realization& real, Assortment s) {
  detail::check_assortment(real, s);
  const int n = real.item_count();
  PhiRow row;
  row.member.assign(static_cast<std::size_t>(n), 0.0);

  std::vector<int> order;
  for (std::uint32_t m = s.bits; m; m &= m - 1) order.push_back(std::countr_zero(m));
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const LcfParams& pa = detail::lcf_params(real.items[static_cast<std::size_t>(a)]);
    const LcfParams& pb = detail::lcf_params(real.items[static_cast<std::size_t>(b)]);
    if (pa.fare != pb.fare) return pa.fare < pb.fare;
    return a < b;
  });

  // First considered item in priority order wins; survival telescopes.
  double survive = 1.0;
  for (int i : order) {
    const LcfParams& pi = detail::lcf_params(real.items[static_cast<std::size_t>(i)]);
    row.member[static_cast<std::size_t>(i)] = survive * pi.q;
    survive *= (1.0 - pi.q);
  }
  row.outside = survive;
  detail::check_normalized(row, s);
  return row;
}

// Dispatch on the model variant.
inline PhiRow all_phi(const ChoiceModelSpec& model, const Realization& real,
                      Assortment s, std::uint64_t rum_atom_cap = kDefaultRumAtomCap) {
  if (const auto* m = std::get_if<MnlModel>(&model)) return mnl_all_phi(*m, real, s);
  if (const auto* m = std::get_if<GamModel>(&model)) return gam_all_phi(*m, real, s);
  if (const auto* m = std::get_if<RumModel>(&model)) return rum_all_phi(*m, real, s, rum_atom_cap);
  return lcf_all_phi(std::get<LcfModel>(model), real, s);
}

// phi(option, S); option is an item id or kOutside. Items not offered in S
// have probability 0.
inline double choice_prob(const ChoiceModelSpec& model, const Realization& real,
                          Assortment s, int option) {
  if (option != kOutside && (option < 0 || option >= real.item_count())) {
    throw Error(ErrorCode::UnknownItem,
                "option " + std::to_string(option) + " not in instance");
  }
  const PhiRow row = all_phi(model, real, s);
  if (option == kOutside) return row.outside;
  return row.member[static_cast<std::size_t>(option)];
}

// psi(S) = 1 - phi(0, S).
inline double purchase_prob(const ChoiceModelSpec& model, const Realization& real,
                            Assortment s) {
  return 1.0 - all_phi(model, real, s).outside;
}

// f(S) = sum_{i in S} phi(i, S) * r_i.
inline double total_revenue(const ChoiceModelSpec& model, const Realization& real,
                            Assortment s) {
  const PhiRow row = all_phi(model, real, s);
  double f = 0.0;
  for (std::uint32_t m = s.bits; m; m &= m - 1) {
    const std::size_t i = static_cast<std::size_t>(std::countr_zero(m));
    f += row.member[i] * real.items[i].revenue;
  }
  return f;
}

// Memoizing phi evaluator bound to one (model, realization) pair. Condition
// checkers probe the same assortments repeatedly; caching whole rows keeps
// the exhaustive checks cheap even for the enumeration-based model.
class PhiEvaluator {
 public:
  PhiEvaluator(const ChoiceModelSpec& model, const Realization& real)
      : model_(&model), real_(&real) {}

  double operator()(Assortment s, int option) const {
    if (option != kOutside && (option < 0 || option >= real_->item_count())) {
      throw Error(ErrorCode::UnknownItem,
                  "option " + std::to_string(option) + " not in instance");
    }
    const PhiRow& row = this->row(s);
    if (option == kOutside) return row.outside;
    return row.member[static_cast<std::size_t>(option)];
  }

  const PhiRow& row(Assortment s) const {
    auto it = cache_.find(s.bits);
    if (it == cache_.end()) {
      it = cache_.emplace(s.bits, all_phi(*model_, *real_, s)).first;
    }
    return it->second;
  }

 private:
  const ChoiceModelSpec* model_;
  const Realization* real_;
  mutable std::unordered_map<std::uint32_t, PhiRow> cache_;
};

}  // namespace seqassort
