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

// Structural conditions on choice models that the threshold policies'
// guarantees rest on. Each checker verifies one condition exhaustively over
// assortments of a realization (or over sampled pairs beyond the exhaustive
// scale) and reports the worst violation with a witness:
//
//   substitutability      phi(i, S) >= phi(i, T) for S subset of T
//   param independence    phi(i, S) reads only the parameters of items in S
//   negative correlation  phi(i, S) >= phi(i, {i}) * phi(0, S \ {i})
//   IIA, strong           phi(0, S) / phi(i, S) == phi(0, {i}) / phi(i, {i})
//   IIA, weak             phi(0, S) / phi(i, S) <= phi(0, {i}) / phi(i, {i})
//
// Checkers are generic over the phi functor, so stub models that break a
// condition on purpose (negative controls in the tests) use the same code
// path as the real models.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqassort/choice.hpp"
#include "seqassort/core.hpp"
#include "seqassort/instance.hpp"
#include "seqassort/rng.hpp"

namespace seqassort {

inline constexpr int kConditionExhaustiveMax = 10;
inline constexpr double kConditionTol = 1e-9;

enum class ModelCondition {
  Substitutable,
  ParamIndependence,
  NegativeCorrelation,
  IiaStrong,
  IiaWeak,
};

inline const char* condition_name(ModelCondition c) {
  switch (c) {
    case ModelCondition::Substitutable: return "substitutable";
    case ModelCondition::ParamIndependence: return "param_independence";
    case ModelCondition::NegativeCorrelation: return "negative_correlation";
    case ModelCondition::IiaStrong: return "iia_strong";
    case ModelCondition::IiaWeak: return "iia_weak";
  }
  return "?";
}

struct ConditionWitness {
  Assortment s;
  Assortment t;  // enclosing set where applicable, otherwise equals s
  int option = kOutside;
};

struct ConditionReport {
  ModelCondition condition = ModelCondition::Substitutable;
  bool holds = true;
  double worst_violation = 0.0;  // largest LHS-RHS deficit, 0 when none
  double tolerance = kConditionTol;
  std::optional<ConditionWitness> witness;
  int checked_pairs = 0;
  int skipped_pairs = 0;  // IIA pairs skipped for a vanishing denominator
  bool exhaustive = true;
};

namespace detail {

// Tracks the max deficit; keeps the first witness attaining it so reports
// are deterministic under the fixed iteration order.
struct ViolationTracker {
  double worst = 0.0;
  std::optional<ConditionWitness> witness;

  void offer(double deficit, Assortment s, Assortment t, int option) {
    if (deficit > worst) {
      worst = deficit;
      witness = ConditionWitness{s, t, option};
    }
  }
};

inline ConditionReport finish(ModelCondition c, const ViolationTracker& tr,
                              double tol, int checked, int skipped, bool exhaustive) {
  ConditionReport rep;
  rep.condition = c;
  rep.worst_violation = tr.worst;
  rep.holds = tr.worst <= tol;
  rep.tolerance = tol;
  rep.witness = tr.witness;
  rep.checked_pairs = checked;
  rep.skipped_pairs = skipped;
  rep.exhaustive = exhaustive;
  return rep;
}

inline void require_exhaustive_scale(int n) {
  if (n > kConditionExhaustiveMax) {
    throw Error(ErrorCode::TooLarge,
                "exhaustive condition check limited to " +
                    std::to_string(kConditionExhaustiveMax) + " items");
  }
}

}  // namespace detail

// phi(i, S) >= phi(i, T) - tol for every S subset of T and i in S, and
// phi(0, S) >= phi(0, T) - tol. Iterates (T asc, S desc submask, option asc).
template <typename Phi>
ConditionReport check_substitutable(Phi&& phi, int n, double tol = kConditionTol) {
  detail::require_exhaustive_scale(n);
  detail::ViolationTracker tr;
  int checked = 0;
  const std::uint32_t full = Assortment::full(n).bits;
  for (std::uint32_t t = 0; t <= full; ++t) {
    const Assortment big{t};
    for (std::uint32_t s = t;; s = (s - 1) & t) {
      const Assortment small{s};
      if (small != big) {
        tr.offer(phi(big, kOutside) - phi(small, kOutside), small, big, kOutside);
        ++checked;
        for (std::uint32_t m = s; m; m &= m - 1) {
          const int i = std::countr_zero(m);
          tr.offer(phi(big, i) - phi(small, i), small, big, i);
          ++checked;
        }
      }
      if (s == 0) break;
    }
  }
  return detail::finish(ModelCondition::Substitutable, tr, tol, checked, 0, true);
}

// phi(i, S) >= phi(i, {i}) * phi(0, S \ {i}) - tol for every S and i in S.
template <typename Phi>
ConditionReport check_negative_correlation(Phi&& phi, int n,
                                           double tol = kConditionTol) {
  detail::require_exhaustive_scale(n);
  detail::ViolationTracker tr;
  int checked = 0;
  const std::uint32_t full = Assortment::full(n).bits;
  for (std::uint32_t s = 1; s <= full; ++s) {
    const Assortment set{s};
    for (std::uint32_t m = s; m; m &= m - 1) {
      const int i = std::countr_zero(m);
      const double lhs = phi(set, i);
      const double rhs =
          phi(Assortment::of({i}), i) * phi(set.without(i), kOutside);
      tr.offer(rhs - lhs, set, set, i);
      ++checked;
    }
  }
  return detail::finish(ModelCondition::NegativeCorrelation, tr, tol, checked, 0, true);
}

// IIA ratio comparison: phi(0,S)/phi(i,S) versus phi(0,{i})/phi(i,{i}).
// Pairs with a vanishing phi(i,S) or phi(i,{i}) are skipped and counted.
template <typename Phi>
ConditionReport check_iia(Phi&& phi, int n, bool strong,
                          double tol = kConditionTol) {
  detail::require_exhaustive_scale(n);
  detail::ViolationTracker tr;
  int checked = 0;
  int skipped = 0;
  const std::uint32_t full = Assortment::full(n).bits;
  for (std::uint32_t s = 1; s <= full; ++s) {
    const Assortment set{s};
    for (std::uint32_t m = s; m; m &= m - 1) {
      const int i = std::countr_zero(m);
      const double phi_in_set = phi(set, i);
      const double phi_single = phi(Assortment::of({i}), i);
      if (phi_in_set == 0.0 || phi_single == 0.0) {
        ++skipped;
        continue;
      }
      const double lhs = phi(set, kOutside) / phi_in_set;
      const double rhs = phi(Assortment::of({i}), kOutside) / phi_single;
      tr.offer(strong ? std::fabs(lhs - rhs) : lhs - rhs, set, set, i);
      ++checked;
    }
  }
  return detail::finish(strong ? ModelCondition::IiaStrong : ModelCondition::IiaWeak,
                        tr, tol, checked, skipped, true);
}

// Sampled variants for instances beyond the exhaustive scale: random (S, T)
// pairs with S a submask of T, checking the same inequalities.
template <typename Phi>
ConditionReport check_substitutable_sampled(Phi&& phi, int n, int pairs,
                                            std::uint64_t seed,
                                            double tol = kConditionTol) {
  detail::ViolationTracker tr;
  RngStream rng(seed, 0, 0);
  const std::uint32_t full = Assortment::full(n).bits;
  int checked = 0;
  for (int rep = 0; rep < pairs; ++rep) {
    const std::uint32_t t = static_cast<std::uint32_t>(rng.next_u64()) & full;
    const std::uint32_t s = static_cast<std::uint32_t>(rng.next_u64()) & t;
    const Assortment small{s};
    const Assortment big{t};
    if (small == big) continue;
    tr.offer(phi(big, kOutside) - phi(small, kOutside), small, big, kOutside);
    ++checked;
    for (std::uint32_t m = s; m; m &= m - 1) {
      const int i = std::countr_zero(m);
      tr.offer(phi(big, i) - phi(small, i), small, big, i);
      ++checked;
    }
  }
  return detail::finish(ModelCondition::Substitutable, tr, tol, checked, 0, false);
}

// Parameter independence: phi(i, S) may depend only on the parameters of
// items in S (plus deterministic model data). Re-draws the parameters of all
// items outside S and demands bit-identical probabilities. The phi factory
// receives each perturbed realization, so stubs can (incorrectly) read
// whatever they like and get caught.
template <typename PhiFactory>
ConditionReport check_param_independence(PhiFactory&& make_phi, const Instance& inst,
                                         const Realization& base, int trials,
                                         std::uint64_t seed) {
  const int n = base.item_count();
  detail::require_exhaustive_scale(n);
  detail::ViolationTracker tr;
  int checked = 0;
  auto base_phi = make_phi(base);
  const std::uint32_t full = Assortment::full(n).bits;
  for (std::uint32_t s = 0; s <= full; ++s) {
    const Assortment set{s};
    for (int trial = 0; trial < trials; ++trial) {
      const Realization perturbed =
          resample_outside(inst, base, set, seed, static_cast<std::uint64_t>(trial));
      auto phi = make_phi(perturbed);
      const double d0 = std::fabs(base_phi(set, kOutside) - phi(set, kOutside));
      tr.offer(d0 > 0.0 ? d0 : 0.0, set, set, kOutside);
      ++checked;
      for (std::uint32_t m = s; m; m &= m - 1) {
        const int i = std::countr_zero(m);
        const double d = std::fabs(base_phi(set, i) - phi(set, i));
        tr.offer(d > 0.0 ? d : 0.0, set, set, i);
        ++checked;
      }
    }
  }
  // Bit-identical means zero tolerance.
  return detail::finish(ModelCondition::ParamIndependence, tr, 0.0, checked, 0, true);
}

// --- Convenience entry points bound to a model ------------------------------

inline ConditionReport check_substitutable(const ChoiceModelSpec& model,
                                           const Realization& real,
                                           double tol = kConditionTol) {
  const PhiEvaluator phi(model, real);
  return check_substitutable(phi, real.item_count(), tol);
}

inline ConditionReport check_negative_correlation(const ChoiceModelSpec& model,
                                                  const Realization& real,
                                                  double tol = kConditionTol) {
  const PhiEvaluator phi(model, real);
  return check_negative_correlation(phi, real.item_count(), tol);
}

inline ConditionReport check_iia(const ChoiceModelSpec& model, const Realization& real,
                                 bool strong, double tol = kConditionTol) {
  const PhiEvaluator phi(model, real);
  return check_iia(phi, real.item_count(), strong, tol);
}

inline ConditionReport check_param_independence(const Instance& inst,
                                                const Realization& base, int trials,
                                                std::uint64_t seed) {
  return check_param_independence(
      [&inst](const Realization& r) { return PhiEvaluator(inst.model, r); }, inst,
      base, trials, seed);
}

// The conditions each stock model is expected to satisfy: all four support
// substitutability, parameter independence, and negative correlation; MNL
// satisfies strong IIA, the others only the weak inequality.
inline bool expects_strong_iia(ModelKind kind) { return kind == ModelKind::Mnl; }

// Instance-level suite: the realization-level checks run on every joint
// support point, keeping the worst violation and its witness; parameter
// independence runs once against the first support point. The reports cover
// exactly the conditions the model is expected to satisfy, so "every report
// holds" is the instance-level verdict.
inline std::vector<ConditionReport> check_all_conditions(
    const Instance& inst, double tol = kConditionTol, int pi_trials = 50,
    std::uint64_t seed = 0, std::size_t joint_cap = kDefaultJointCap) {
  const JointSpace space(inst, joint_cap);
  const bool strong = expects_strong_iia(model_kind(inst.model));
  std::array<std::optional<ConditionReport>, 3> merged;
  Realization real;
  for (std::size_t idx = 0; idx < space.size(); ++idx) {
    space.decode(idx, real);
    const ConditionReport parts[] = {
        check_substitutable(inst.model, real, tol),
        check_negative_correlation(inst.model, real, tol),
        check_iia(inst.model, real, strong, tol)};
    for (std::size_t c = 0; c < 3; ++c) {
      if (!merged[c]) {
        merged[c] = parts[c];
        continue;
      }
      ConditionReport& acc = *merged[c];
      acc.holds = acc.holds && parts[c].holds;
      if (parts[c].worst_violation > acc.worst_violation) {
        acc.worst_violation = parts[c].worst_violation;
        acc.witness = parts[c].witness;
      }
      acc.checked_pairs += parts[c].checked_pairs;
      acc.skipped_pairs += parts[c].skipped_pairs;
      acc.exhaustive = acc.exhaustive && parts[c].exhaustive;
    }
  }
  Realization base;
  space.decode(0, base);
  std::vector<ConditionReport> out;
  out.push_back(*merged[0]);
  out.push_back(check_param_independence(inst, base, pi_trials, seed));
  out.push_back(*merged[1]);
  out.push_back(*merged[2]);
  return out;
}

}  // namespace seqassort
