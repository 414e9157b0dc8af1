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

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace seqassort {

// Items are dense integer ids in [0, n). Assortments are bit masks, so n is
// capped at 31 (far above the exhaustive scales used anywhere in the library).
inline constexpr int kMaxItems = 31;

// Pseudo-option for the no-purchase event in choice-probability queries.
inline constexpr int kOutside = -1;

enum class ErrorCode {
  UnknownItem,
  ModelMismatch,
  ShadowExceedsAttraction,
  NonPositiveReward,
  TooLarge,
  SupportTooLarge,
  EnumerationTooLarge,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {
[[noreturn]] inline void check_fail(const char* msg) {
  throw std::logic_error(msg);
}
}  // namespace detail

// Always-on internal invariant check (violations are bugs, not user errors).
#define SEQASSORT_CHECK(cond, msg) \
  do {                             \
    if (!(cond)) ::seqassort::detail::check_fail(msg); \
  } while (0)

// A subset of [0, n), value type backed by a bit mask.
struct Assortment {
  std::uint32_t bits = 0;

  constexpr Assortment() = default;
  constexpr explicit Assortment(std::uint32_t mask) : bits(mask) {}
  static Assortment of(std::initializer_list<int> ids) {
    Assortment a;
    for (int i : ids) a.add(i);
    return a;
  }
  static constexpr Assortment full(int n) {
    return Assortment((n >= 32) ? 0xFFFFFFFFu : ((1u << n) - 1u));
  }

  bool contains(int i) const { return (bits >> i) & 1u; }
  void add(int i) { bits |= (1u << i); }
  void remove(int i) { bits &= ~(1u << i); }
  int count() const { return std::popcount(bits); }
  bool empty() const { return bits == 0; }
  bool subset_of(Assortment other) const { return (bits & ~other.bits) == 0; }
  Assortment without(int i) const {
    Assortment a = *this;
    a.remove(i);
    return a;
  }

  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count()));
    for (std::uint32_t m = bits; m; m &= m - 1) {
      out.push_back(std::countr_zero(m));
    }
    return out;
  }

  friend bool operator==(Assortment a, Assortment b) { return a.bits == b.bits; }
  friend bool operator!=(Assortment a, Assortment b) { return a.bits != b.bits; }
};

// Orders assortments by their sorted member lists; a proper prefix is smaller.
// Used to break ties deterministically in oracles and adversaries.
inline bool lex_less(Assortment a, Assortment b) {
  std::uint32_t x = a.bits;
  std::uint32_t y = b.bits;
  while (x && y) {
    const int i = std::countr_zero(x);
    const int j = std::countr_zero(y);
    if (i != j) return i < j;
    x &= x - 1;
    y &= y - 1;
  }
  return x == 0 && y != 0;
}

// --- Demand parameters (one per item, realized from its distribution) -------

struct MnlAttraction {
  double v = 0.0;
};

struct GamAttraction {
  double v = 0.0;
};

// 1-based index into the item's declared family of utility distributions.
struct RumDistIndex {
  int index = 1;
};

struct LcfParams {
  double fare = 0.0;
  double q = 0.0;  // consideration probability, in [0,1]
};

using DemandParam =
    std::variant<MnlAttraction, GamAttraction, RumDistIndex, LcfParams>;

// One item's realized parameters: revenue, demand parameter, and (under
// knapsack constraints) size in budget units.
struct RealizedItem {
  int id = 0;
  double revenue = 0.0;
  DemandParam demand = MnlAttraction{0.0};
  double size = 0.0;
};

// Realized parameters for all n items; items[i].id == i always.
struct Realization {
  std::vector<RealizedItem> items;

  int item_count() const { return static_cast<int>(items.size()); }
  const RealizedItem& item(int id) const {
    if (id < 0 || id >= item_count()) {
      throw Error(ErrorCode::UnknownItem,
                  "item id " + std::to_string(id) + " not in instance");
    }
    return items[static_cast<std::size_t>(id)];
  }
};

// --- Choice model specifications (deterministic model data) -----------------

struct MnlModel {
  double v0 = 0.0;  // attraction of the outside option
};

struct GamModel {
  double v0 = 0.0;
  std::vector<double> shadow;  // shadow attraction w_i per item, length n
};

struct UtilityAtom {
  double p = 0.0;
  double u = 0.0;
};
using UtilityDist = std::vector<UtilityAtom>;

// Independent random-utility model with deterministic outside utility. Each
// item declares a family of discrete utility distributions; the realized
// demand parameter selects one of them.
struct RumModel {
  double u0 = 0.0;
  std::vector<std::vector<UtilityDist>> families;  // families[item][l-1]
};

// Lowest-considered-fare model: all parameters live in the realized
// LcfParams, so the model struct carries no deterministic data.
struct LcfModel {};

using ChoiceModelSpec = std::variant<MnlModel, GamModel, RumModel, LcfModel>;

enum class ModelKind { Mnl, Gam, Rum, Lcf };

inline ModelKind model_kind(const ChoiceModelSpec& m) {
  if (std::holds_alternative<MnlModel>(m)) return ModelKind::Mnl;
  if (std::holds_alternative<GamModel>(m)) return ModelKind::Gam;
  if (std::holds_alternative<RumModel>(m)) return ModelKind::Rum;
  return ModelKind::Lcf;
}

inline const char* model_name(ModelKind k) {
  switch (k) {
    case ModelKind::Mnl: return "mnl";
    case ModelKind::Gam: return "gam";
    case ModelKind::Rum: return "rum";
    case ModelKind::Lcf: return "lcf";
  }
  return "?";
}

}  // namespace seqassort
