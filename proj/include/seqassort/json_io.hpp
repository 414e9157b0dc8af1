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

#ifndef SEQASSORT_JSON_IO_HPP_
#define SEQASSORT_JSON_IO_HPP_

#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqassort/conditions.hpp"
#include "seqassort/core.hpp"
#include "seqassort/harness.hpp"
#include "seqassort/instance.hpp"
#include "seqassort/oracle.hpp"
#include "seqassort/policy.hpp"

namespace seqassort {

using Json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void schema_error(const std::string& message) {
  throw std::runtime_error("instance schema: " + message);
}

inline void expect_fields(const Json& object,
                          std::initializer_list<const char*> allowed,
                          const char* where) {
  if (!object.is_object()) schema_error(std::string(where) + " must be an object");
  for (auto it = object.begin(); it != object.end(); ++it) {
    bool known = false;
    for (const char* name : allowed) {
      if (it.key() == name) {
        known = true;
        break;
      }
    }
    if (!known) {
      schema_error("unknown field \"" + it.key() + "\" in " + where);
    }
  }
}

inline const Json& need(const Json& object, const char* key, const char* where) {
  const auto it = object.find(key);
  if (it == object.end()) {
    schema_error(std::string("missing field \"") + key + "\" in " + where);
  }
  return *it;
}

inline double need_number(const Json& object, const char* key, const char* where) {
  const Json& value = need(object, key, where);
  if (!value.is_number()) {
    schema_error(std::string("field \"") + key + "\" in " + where +
                 " must be a number");
  }
  return value.get<double>();
}

inline int need_integer(const Json& object, const char* key, const char* where) {
  const Json& value = need(object, key, where);
  if (!value.is_number_integer()) {
    schema_error(std::string("field \"") + key + "\" in " + where +
                 " must be an integer");
  }
  return value.get<int>();
}

// Doubles print via the shortest round-trip form; infinities become strings
// because JSON has no representation for them.
inline Json json_number(double value) {
  if (std::isfinite(value)) return Json(value);
  if (std::isnan(value)) return Json("nan");
  return Json(value > 0 ? "inf" : "-inf");
}

inline std::string number_text(double value) {
  return json_number(value).dump();
}

}  // namespace detail

// --- Instance schema ----------------------------------------------------------

inline Json model_to_json(const ChoiceModelSpec& model) {
  Json out;
  if (const auto* mnl = std::get_if<MnlModel>(&model)) {
    out["type"] = "mnl";
    out["v0"] = mnl->v0;
  } else if (const auto* gam = std::get_if<GamModel>(&model)) {
    out["type"] = "gam";
    out["v0"] = gam->v0;
    out["shadow"] = gam->shadow;
  } else if (const auto* rum = std::get_if<RumModel>(&model)) {
    out["type"] = "rum";
    out["u0"] = rum->u0;
    Json families = Json::array();
    for (const auto& family : rum->families) {
      Json dists = Json::array();
      for (const UtilityDist& dist : family) {
        Json atoms = Json::array();
        for (const UtilityAtom& atom : dist) {
          atoms.push_back(Json{{"p", atom.p}, {"u", atom.u}});
        }
        dists.push_back(std::move(atoms));
      }
      families.push_back(std::move(dists));
    }
    out["families"] = std::move(families);
  } else {
    out["type"] = "lcf";
  }
  return out;
}

inline Json instance_to_json(const Instance& inst) {
  Json out;
  out["model"] = model_to_json(inst.model);
  Json constraint;
  if (std::holds_alternative<Unconstrained>(inst.constraint)) {
    constraint["type"] = "unconstrained";
  } else if (const auto* card = std::get_if<Cardinality>(&inst.constraint)) {
    constraint["type"] = "cardinality";
    constraint["k"] = card->k;
  } else {
    constraint["type"] = "knapsack";
    constraint["B"] = std::get<Knapsack>(inst.constraint).budget;
  }
  out["constraint"] = std::move(constraint);
  Json items = Json::array();
  for (const ItemDistribution& item : inst.items) {
    Json atoms = Json::array();
    for (const Atom& atom : item.atoms) {
      Json entry;
      entry["p"] = atom.prob;
      entry["r"] = atom.revenue;
      if (const auto* mnl = std::get_if<MnlAttraction>(&atom.demand)) {
        entry["d"] = mnl->v;
      } else if (const auto* gam = std::get_if<GamAttraction>(&atom.demand)) {
        entry["d"] = gam->v;
      } else if (const auto* rum = std::get_if<RumDistIndex>(&atom.demand)) {
        entry["d"] = rum->index;
      } else {
        const auto& lcf = std::get<LcfParams>(atom.demand);
        entry["d"] = Json{{"fare", lcf.fare}, {"q", lcf.q}};
      }
      entry["b"] = atom.size;
      atoms.push_back(std::move(entry));
    }
    items.push_back(Json{{"atoms", std::move(atoms)}});
  }
  out["items"] = std::move(items);
  return out;
}

namespace detail {

inline ChoiceModelSpec model_from_json(const Json& node) {
  const Json& type = need(node, "type", "model");
  if (!type.is_string()) schema_error("model type must be a string");
  const std::string name = type.get<std::string>();
  if (name == "mnl") {
    expect_fields(node, {"type", "v0"}, "model");
    return MnlModel{need_number(node, "v0", "model")};
  }
  if (name == "gam") {
    expect_fields(node, {"type", "v0", "shadow"}, "model");
    GamModel gam;
    gam.v0 = need_number(node, "v0", "model");
    const Json& shadow = need(node, "shadow", "model");
    if (!shadow.is_array()) schema_error("gam shadow must be an array");
    for (const Json& w : shadow) {
      if (!w.is_number()) schema_error("gam shadow entries must be numbers");
      gam.shadow.push_back(w.get<double>());
    }
    return gam;
  }
  if (name == "rum") {
    expect_fields(node, {"type", "u0", "families"}, "model");
    RumModel rum;
    rum.u0 = need_number(node, "u0", "model");
    const Json& families = need(node, "families", "model");
    if (!families.is_array()) schema_error("rum families must be an array");
    for (const Json& family : families) {
      if (!family.is_array()) schema_error("rum family must be an array");
      std::vector<UtilityDist> dists;
      for (const Json& dist : family) {
        if (!dist.is_array()) schema_error("rum distribution must be an array");
        UtilityDist atoms;
        for (const Json& atom : dist) {
          expect_fields(atom, {"p", "u"}, "utility atom");
          atoms.push_back(UtilityAtom{need_number(atom, "p", "utility atom"),
                                      need_number(atom, "u", "utility atom")});
        }
        dists.push_back(std::move(atoms));
      }
      rum.families.push_back(std::move(dists));
    }
    return rum;
  }
  if (name == "lcf") {
    expect_fields(node, {"type"}, "model");
    return LcfModel{};
  }
  schema_error("unknown model type \"" + name + "\"");
}

inline ConstraintSpec constraint_from_json(const Json& node) {
  const Json& type = need(node, "type", "constraint");
  if (!type.is_string()) schema_error("constraint type must be a string");
  const std::string name = type.get<std::string>();
  if (name == "unconstrained") {
    expect_fields(node, {"type"}, "constraint");
    return Unconstrained{};
  }
  if (name == "cardinality") {
    expect_fields(node, {"type", "k"}, "constraint");
    return Cardinality{need_integer(node, "k", "constraint")};
  }
  if (name == "knapsack") {
    expect_fields(node, {"type", "B"}, "constraint");
    return Knapsack{need_number(node, "B", "constraint")};
  }
  schema_error("unknown constraint type \"" + name + "\"");
}

inline DemandParam demand_from_json(const Json& value, ModelKind kind) {
  switch (kind) {
    case ModelKind::Mnl:
      if (!value.is_number()) schema_error("mnl \"d\" must be a number");
      return MnlAttraction{value.get<double>()};
    case ModelKind::Gam:
      if (!value.is_number()) schema_error("gam \"d\" must be a number");
      return GamAttraction{value.get<double>()};
    case ModelKind::Rum:
      if (!value.is_number_integer()) {
        schema_error("rum \"d\" must be an integer distribution index");
      }
      return RumDistIndex{value.get<int>()};
    case ModelKind::Lcf: {
      expect_fields(value, {"fare", "q"}, "lcf \"d\"");
      return LcfParams{need_number(value, "fare", "lcf \"d\""),
                       need_number(value, "q", "lcf \"d\"")};
    }
  }
  schema_error("unhandled model kind");
}

}  // namespace detail

inline Instance instance_from_json(const Json& root) {
  detail::expect_fields(root, {"model", "constraint", "items"}, "instance");
  Instance inst;
  inst.model = detail::model_from_json(detail::need(root, "model", "instance"));
  inst.constraint =
      detail::constraint_from_json(detail::need(root, "constraint", "instance"));
  const ModelKind kind = model_kind(inst.model);
  const Json& items = detail::need(root, "items", "instance");
  if (!items.is_array()) detail::schema_error("items must be an array");
  for (const Json& item : items) {
    detail::expect_fields(item, {"atoms"}, "item");
    const Json& atoms = detail::need(item, "atoms", "item");
    if (!atoms.is_array()) detail::schema_error("item atoms must be an array");
    ItemDistribution dist;
    for (const Json& atom : atoms) {
      detail::expect_fields(atom, {"p", "r", "d", "b"}, "atom");
      Atom out;
      out.prob = detail::need_number(atom, "p", "atom");
      out.revenue = detail::need_number(atom, "r", "atom");
      out.demand = detail::demand_from_json(detail::need(atom, "d", "atom"), kind);
      if (const auto it = atom.find("b"); it != atom.end()) {
        if (!it->is_number()) detail::schema_error("atom \"b\" must be a number");
        out.size = it->get<double>();
      }
      dist.atoms.push_back(std::move(out));
    }
    inst.items.push_back(std::move(dist));
  }
  return inst;
}

inline Instance parse_instance(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("instance is not valid JSON: ") +
                             e.what());
  }
  return instance_from_json(root);
}

// --- Report serialization -----------------------------------------------------

inline Json thresholds_to_json(const Thresholds& th) {
  Json out;
  out["tau"] = detail::json_number(th.tau);
  out["tau_small"] = detail::json_number(th.tau_small);
  out["tau_large"] = detail::json_number(th.tau_large);
  out["heads_prob"] = th.heads_prob;
  out["tau_stderr"] = th.tau_stderr;
  out["tau_small_stderr"] = th.tau_small_stderr;
  out["tau_large_stderr"] = th.tau_large_stderr;
  return out;
}

inline Json report_to_json(const EvaluationReport& report) {
  Json out;
  out["policy_value"] = detail::json_number(report.policy_value);
  out["opt_value"] = detail::json_number(report.opt_value);
  out["gamma"] = detail::json_number(report.gamma);
  if (report.beta.has_value()) out["beta"] = detail::json_number(*report.beta);
  out["claimed_rho"] = detail::json_number(report.claimed_rho);
  out["achieved_ratio"] = detail::json_number(report.achieved_ratio);
  out["pass"] = report.pass;
  out["mode"] = report.mode == EvalMode::Exact ? "exact" : "monte_carlo";
  out["samples"] = report.samples;
  out["seed"] = report.seed;
  out["policy_stderr"] = report.policy_stderr;
  out["opt_stderr"] = report.opt_stderr;
  out["tolerance"] = report.tolerance;
  out["slack"] = report.slack;
  out["thresholds"] = thresholds_to_json(report.thresholds);
  out["value_heads"] = detail::json_number(report.value_heads);
  out["value_tails"] = detail::json_number(report.value_tails);
  out["expected_g_small"] = detail::json_number(report.expected_g_small);
  out["expected_g_large"] = detail::json_number(report.expected_g_large);
  Json rows = Json::array();
  for (const RealizationRow& row : report.rows) {
    Json entry;
    entry["prob"] = row.prob;
    entry["opt"] = detail::json_number(row.opt);
    entry["policy"] = detail::json_number(row.policy);
    entry["order"] = row.order;
    rows.push_back(std::move(entry));
  }
  out["rows"] = std::move(rows);
  return out;
}

// One line per evaluated term: joint-support point (exact) or trial (MC).
inline std::string report_to_csv(const EvaluationReport& report) {
  std::string out = "prob,opt,policy,order\n";
  for (const RealizationRow& row : report.rows) {
    out += detail::number_text(row.prob);
    out += ',';
    out += detail::number_text(row.opt);
    out += ',';
    out += detail::number_text(row.policy);
    out += ",\"";
    out += row.order;
    out += "\"\n";
  }
  return out;
}

inline Json condition_report_to_json(const ConditionReport& report) {
  Json out;
  out["condition"] = condition_name(report.condition);
  out["holds"] = report.holds;
  out["worst_violation"] = detail::json_number(report.worst_violation);
  out["tolerance"] = report.tolerance;
  out["checked_pairs"] = report.checked_pairs;
  out["skipped_pairs"] = report.skipped_pairs;
  out["exhaustive"] = report.exhaustive;
  if (report.witness.has_value()) {
    Json witness;
    witness["s"] = report.witness->s.members();
    witness["t"] = report.witness->t.members();
    witness["option"] = report.witness->option;
    out["witness"] = std::move(witness);
  }
  return out;
}

inline Json convexpi_report_to_json(const ConvexPiReport& report) {
  Json out;
  out["threshold"] = detail::json_number(report.threshold);
  out["benchmark"] = detail::json_number(report.benchmark);
  out["policy_value"] = detail::json_number(report.policy_value);
  out["claimed_rho"] = detail::json_number(report.claimed_rho);
  out["achieved_ratio"] = detail::json_number(report.achieved_ratio);
  out["pass"] = report.pass;
  out["mode"] = report.mode == EvalMode::Exact ? "exact" : "monte_carlo";
  out["samples"] = report.samples;
  out["seed"] = report.seed;
  out["policy_stderr"] = report.policy_stderr;
  out["benchmark_stderr"] = report.benchmark_stderr;
  out["tolerance"] = report.tolerance;
  out["slack"] = report.slack;
  out["thresholds"] = thresholds_to_json(report.thresholds);
  return out;
}

inline Json lower_bound_report_to_json(const LowerBoundReport& report) {
  Json out;
  out["delta"] = report.delta;
  out["kappa"] = report.kappa;
  out["expected_opt"] = detail::json_number(report.expected_opt);
  out["gamma"] = detail::json_number(report.gamma);
  out["value_accept_low"] = detail::json_number(report.value_accept_low);
  out["value_skip_low"] = detail::json_number(report.value_skip_low);
  out["ratio"] = detail::json_number(report.ratio);
  out["best_fixed_tau"] = detail::json_number(report.best_fixed_tau);
  out["best_fixed_value"] = detail::json_number(report.best_fixed_value);
  out["best_fixed_ratio"] = detail::json_number(report.best_fixed_ratio);
  return out;
}

inline Json opt_stats_to_json(const OptStats& stats) {
  Json out;
  out["expected_opt"] = detail::json_number(stats.expected_opt);
  out["gamma"] = detail::json_number(stats.gamma);
  out["expected_g_small"] = detail::json_number(stats.expected_g_small);
  out["expected_g_large"] = detail::json_number(stats.expected_g_large);
  out["exact"] = stats.exact;
  out["samples"] = stats.samples;
  out["seed"] = stats.seed;
  out["stderr_opt"] = stats.stderr_opt;
  out["stderr_gamma"] = stats.stderr_gamma;
  out["stderr_g_small"] = stats.stderr_g_small;
  out["stderr_g_large"] = stats.stderr_g_large;
  return out;
}

}  // namespace seqassort

#endif  // SEQASSORT_JSON_IO_HPP_
