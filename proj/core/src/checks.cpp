// Copyright 2026 The coevo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "coevo/checks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "coevo/efdt.hpp"
#include "numfmt.hpp"

namespace coevo {

using nlohmann::json;

std::string_view to_token(RuleOp op) {
  switch (op) {
    case RuleOp::kEq: return "=";
    case RuleOp::kNe: return "!=";
    case RuleOp::kLt: return "<";
    case RuleOp::kLe: return "<=";
    case RuleOp::kGt: return ">";
    case RuleOp::kGe: return ">=";
  }
  return "?";
}

RuleOp rule_op_from_token(std::string_view token) {
  for (RuleOp op : {RuleOp::kEq, RuleOp::kNe, RuleOp::kLt, RuleOp::kLe, RuleOp::kGt, RuleOp::kGe}) {
    if (to_token(op) == token) return op;
  }
  fail(ErrorCode::kInvalidArgument, "unknown rule operator: '" + std::string(token) + "'");
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kSensitiveAttribute: return "sensitive_attribute";
    case ViolationKind::kOverlap: return "overlap";
    case ViolationKind::kTypeMismatch: return "type_mismatch";
  }
  return "unknown";
}

bool Condition::satisfied_by(const Record& r) const {
  const double v = r[attribute];
  switch (op) {
    case RuleOp::kEq: return v == value;
    case RuleOp::kNe: return v != value;
    case RuleOp::kLt: return v < value;
    case RuleOp::kLe: return v <= value;
    case RuleOp::kGt: return v > value;
    case RuleOp::kGe: return v >= value;
  }
  return false;
}

bool Rule::covers(const Record& r) const {
  return std::all_of(conditions.begin(), conditions.end(), [&](const Condition& c) { return c.satisfied_by(r); });
}

std::string RuleSet::render(std::size_t rule, const Schema& schema) const {
  const Rule& r = rules.at(rule);
  std::string out = "IF ";
  for (std::size_t i = 0; i < r.conditions.size(); ++i) {
    const Condition& c = r.conditions[i];
    if (i) out += " AND ";
    out += schema[c.attribute].name + " " + std::string(to_token(c.op)) + " " + schema.render_value(c.attribute, c.value);
  }
  if (r.conditions.empty()) out += "TRUE";
  return out + " THEN " + schema.label_name(r.label);
}

json RuleSet::to_json(const Schema& schema) const {
  json out = json::array();
  for (const Rule& r : rules) {
    json conds = json::array();
    for (const Condition& c : r.conditions) {
      json value = schema[c.attribute].categorical() ? json(schema.render_value(c.attribute, c.value)) : json(c.value);
      conds.push_back({schema[c.attribute].name, std::string(to_token(c.op)), std::move(value)});
    }
    out.push_back({{"conditions", std::move(conds)}, {"label", std::string(to_token(r.label))}});
  }
  return {{"rules", std::move(out)}};
}

RuleSet RuleSet::from_json(const json& j, const Schema& schema) {
  RuleSet set;
  try {
    const json& rules = j.is_array() ? j : j.at("rules");
    for (const auto& jr : rules) {
      Rule rule;
      rule.label = label_from_token(jr.at("label").get<std::string>());
      for (const auto& jc : jr.at("conditions")) {
        require(jc.is_array() && jc.size() == 3, ErrorCode::kInvalidArgument,
                "condition must be [attribute, operator, value]");
        Condition c;
        c.attribute = schema.require_index(jc[0].get<std::string>());
        c.op = rule_op_from_token(jc[1].get<std::string>());
        const Attribute& a = schema[c.attribute];
        if (a.categorical()) {
          const std::string value = jc[2].is_string() ? jc[2].get<std::string>() : jc[2].dump();
          auto code = a.category_code(value);
          require(code.has_value(), ErrorCode::kInvalidArgument,
                  "rule value '" + value + "' not in domain of " + a.name);
          c.value = static_cast<double>(*code);
        } else {
          require(jc[2].is_number(), ErrorCode::kInvalidArgument, "rule on " + a.name + " needs a numeric value");
          c.value = jc[2].get<double>();
        }
        rule.conditions.push_back(c);
      }
      set.rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed rule set: ") + e.what());
  }
  return set;
}

RuleSet RuleSet::load(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kNotFound, "cannot open rule file: " + path.string());
  json j = json::parse(in, nullptr, false);
  require(!j.is_discarded(), ErrorCode::kInvalidArgument, "rule file is not valid JSON: " + path.string());
  return from_json(j, schema);
}

namespace {

struct Bound {
  double value;
  bool closed;
};

// Feasible set of one numeric attribute: an interval minus finitely many points.
struct NumericDomain {
  Bound lo{-std::numeric_limits<double>::infinity(), false};
  Bound hi{std::numeric_limits<double>::infinity(), false};
  std::vector<double> excluded;

  void raise_lo(double v, bool closed) {
    if (v > lo.value || (v == lo.value && !closed)) lo = {v, closed};
  }
  void lower_hi(double v, bool closed) {
    if (v < hi.value || (v == hi.value && !closed)) hi = {v, closed};
  }
  void apply(RuleOp op, double v) {
    switch (op) {
      case RuleOp::kEq: raise_lo(v, true); lower_hi(v, true); break;
      case RuleOp::kNe: excluded.push_back(v); break;
      case RuleOp::kLt: lower_hi(v, false); break;
      case RuleOp::kLe: lower_hi(v, true); break;
      case RuleOp::kGt: raise_lo(v, false); break;
      case RuleOp::kGe: raise_lo(v, true); break;
    }
  }
  bool feasible() const {
    if (lo.value > hi.value) return false;
    if (lo.value < hi.value) return true;  // a real interval; finite exclusions cannot empty it
    return lo.closed && hi.closed && std::find(excluded.begin(), excluded.end(), lo.value) == excluded.end();
  }
};

bool ordered(RuleOp op) { return op != RuleOp::kEq && op != RuleOp::kNe; }

}  // namespace

bool jointly_satisfiable(const Rule& a, const Rule& b, const Schema& schema) {
  std::map<std::size_t, std::vector<const Condition*>> by_attribute;
  for (const Rule* r : {&a, &b}) {
    for (const Condition& c : r->conditions) by_attribute[c.attribute].push_back(&c);
  }
  for (const auto& [attr, conds] : by_attribute) {
    const Attribute& at = schema[attr];
    if (at.categorical()) {
      std::vector<bool> allowed(at.categories.size(), true);
      for (const Condition* c : conds) {
        if (ordered(c->op)) continue;  // reported as a type mismatch
        for (std::size_t v = 0; v < allowed.size(); ++v) {
          const bool match = static_cast<double>(v) == c->value;
          if ((c->op == RuleOp::kEq && !match) || (c->op == RuleOp::kNe && match)) allowed[v] = false;
        }
      }
      if (std::none_of(allowed.begin(), allowed.end(), [](bool x) { return x; })) return false;
    } else {
      NumericDomain d;
      for (const Condition* c : conds) d.apply(c->op, c->value);
      if (!d.feasible()) return false;
    }
  }
  return true;
}

std::vector<RuleViolation> validate_ruleset(const RuleSet& rules, const Schema& schema) {
  std::vector<RuleViolation> out;
  for (std::size_t i = 0; i < rules.rules.size(); ++i) {
    for (const Condition& c : rules.rules[i].conditions) {
      if (c.attribute == schema.sensitive) {
        out.push_back({ViolationKind::kSensitiveAttribute, i, std::nullopt,
                       "sensitive attribute in rule " + std::to_string(i) + ": " + schema[c.attribute].name});
      }
      if (schema[c.attribute].categorical() && ordered(c.op)) {
        out.push_back({ViolationKind::kTypeMismatch, i, std::nullopt,
                       "ordered operator " + std::string(to_token(c.op)) + " on categorical attribute " +
                           schema[c.attribute].name});
      }
    }
  }
  for (std::size_t i = 0; i < rules.rules.size(); ++i) {
    for (std::size_t j = i + 1; j < rules.rules.size(); ++j) {
      if (jointly_satisfiable(rules.rules[i], rules.rules[j], schema)) {
        out.push_back({ViolationKind::kOverlap, i, j,
                       "rules " + std::to_string(i) + " and " + std::to_string(j) + " are not mutually exclusive"});
      }
    }
  }
  return out;
}

std::optional<Label> match_rule(const RuleSet& rules, const Record& x) {
  for (const Rule& r : rules.rules) {
    if (r.covers(x)) return r.label;
  }
  return std::nullopt;
}

SimilarityKey project(const Record& x, std::size_t sensitive) {
  SimilarityKey key;
  key.reserve(x.size() - 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i != sensitive) key.push_back(x[i]);
  }
  return key;
}

const SimilarityIndex::Group* SimilarityIndex::lookup(const SimilarityKey& key) const {
  auto it = groups_.find(key);
  return it == groups_.end() ? nullptr : &it->second;
}

void SimilarityIndex::add(const SimilarityKey& key, Label label, std::size_t record_index) {
  auto [it, inserted] = groups_.try_emplace(key, Group{label, {}});
  require(inserted || it->second.label == label, ErrorCode::kConflict,
          "similar records must share a label; resolve the conflict before registering record " +
              std::to_string(record_index));
  it->second.members.push_back(record_index);
}

void SimilarityIndex::relabel(const SimilarityKey& key, Label label) {
  auto it = groups_.find(key);
  require(it != groups_.end(), ErrorCode::kNotFound, "no similarity group for key");
  it->second.label = label;
}

std::int64_t uc_count(std::span<const Record> records, std::span<const Label> labels, std::size_t sensitive) {
  require(records.size() == labels.size(), ErrorCode::kInvalidArgument, "records/labels size mismatch");
  std::map<SimilarityKey, ClassCounts> groups;
  for (std::size_t i = 0; i < records.size(); ++i) groups[project(records[i], sensitive)][index_of(labels[i])] += 1;
  std::int64_t pairs = 0;
  for (const auto& [key, c] : groups) pairs += c[0] * c[1];
  return pairs;
}

GroupCounts count_groups(std::span<const Record> records, std::span<const Label> labels, std::size_t sensitive,
                         double discriminated) {
  require(records.size() == labels.size(), ErrorCode::kInvalidArgument, "records/labels size mismatch");
  GroupCounts g;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const bool positive = labels[i] == Label::kPositive;
    if (records[i][sensitive] == discriminated) {
      (positive ? g.discriminated_positive : g.discriminated_negative) += 1;
    } else {
      (positive ? g.privileged_positive : g.privileged_negative) += 1;
    }
  }
  return g;
}

std::optional<double> disc(const GroupCounts& g) {
  if (g.privileged() == 0 || g.discriminated() == 0) return std::nullopt;
  return static_cast<double>(g.privileged_positive) / static_cast<double>(g.privileged()) -
         static_cast<double>(g.discriminated_positive) / static_cast<double>(g.discriminated());
}

std::optional<double> disc(std::span<const Record> records, std::span<const Label> labels, std::size_t sensitive,
                           double discriminated) {
  return disc(count_groups(records, labels, sensitive, discriminated));
}

json GfcPlan::to_json() const {
  auto list = [](const std::vector<GfcCandidate>& c) {
    json out = json::array();
    for (const auto& x : c) out.push_back({{"index", x.index}, {"probability", x.probability}});
    return out;
  };
  return {{"disc_before", disc_before},       {"swapped", swapped},
          {"dn_candidates", list(dn_candidates)}, {"pp_candidates", list(pp_candidates)},
          {"target_dn_flips", target_dn_flips}, {"target_pp_flips", target_pp_flips}};
}

GfcPlan GfcPlan::from_json(const json& j) {
  auto list = [](const json& a) {
    std::vector<GfcCandidate> out;
    for (const auto& x : a) out.push_back({x.at("index").get<std::size_t>(), x.at("probability").get<double>()});
    return out;
  };
  GfcPlan p;
  p.disc_before = j.at("disc_before").get<double>();
  p.swapped = j.at("swapped").get<bool>();
  p.dn_candidates = list(j.at("dn_candidates"));
  p.pp_candidates = list(j.at("pp_candidates"));
  p.target_dn_flips = j.at("target_dn_flips").get<std::size_t>();
  p.target_pp_flips = j.at("target_pp_flips").get<std::size_t>();
  require(p.target_dn_flips <= p.dn_candidates.size() && p.target_pp_flips <= p.pp_candidates.size(),
          ErrorCode::kCorrupt, "plan targets exceed candidates");
  return p;
}

bool operator==(const GfcPlan& a, const GfcPlan& b) { return a.to_json() == b.to_json(); }

namespace {

// round(num / den) with halves rounded up; num, den >= 0, den > 0.

}  // namespace

std::pair<std::size_t, std::size_t> gfc_targets(std::int64_t adv_pos, std::int64_t adv_n, std::int64_t dis_pos,
                                                std::int64_t dis_n, std::size_t max_dn, std::size_t max_pp) {
  auto residual = [&](std::size_t a, std::size_t b) {
    return std::abs(static_cast<double>(adv_pos - static_cast<std::int64_t>(b)) / static_cast<double>(adv_n) -
                    static_cast<double>(dis_pos + static_cast<std::int64_t>(a)) / static_cast<double>(dis_n));
  };
  // Feasible pairs first, fewest flips, smallest residual, most dn flips.
  // Without a feasible pair the smallest residual wins.
  struct Key {
    bool infeasible;
    std::size_t flips;
    double residual;
    std::size_t a, b;
    bool better_than(const Key& o) const {
      if (infeasible != o.infeasible) return !infeasible;
      if (infeasible) {
        if (residual != o.residual) return residual < o.residual;
        if (flips != o.flips) return flips < o.flips;
      } else {
        if (flips != o.flips) return flips < o.flips;
        if (residual != o.residual) return residual < o.residual;
      }
      return a > o.a;
    }
  };
  Key best{true, 0, residual(0, 0), 0, 0};
  best.infeasible = best.residual > kGfcTolerance;
  if (!best.infeasible) return {0, 0};
  for (std::size_t a = 0; a <= std::min(max_dn, max_pp + 1); ++a) {
    for (std::size_t b = a == 0 ? 0 : a - 1; b <= std::min(max_pp, a + 1); ++b) {
      const double r = residual(a, b);
      const Key k{r > kGfcTolerance, a + b, r, a, b};
      if (k.better_than(best)) best = k;
    }
  }
  return {best.a, best.b};
}

std::optional<GfcPlan> plan_gfc(std::span<const Record> records, std::span<const Label> labels,
                                const std::vector<bool>& eligible, std::span<const double> positive_probability,
                                std::size_t sensitive, double discriminated) {
  require(records.size() == labels.size() && records.size() == eligible.size() &&
              records.size() == positive_probability.size(),
          ErrorCode::kInvalidArgument, "plan_gfc: input sizes differ");
  const GroupCounts g = count_groups(records, labels, sensitive, discriminated);
  const auto d = disc(g);
  if (!d) return std::nullopt;

  GfcPlan plan;
  plan.disc_before = *d;
  plan.swapped = *d < 0;
  const bool swapped = plan.swapped;
  // Effective groups: "disadvantaged" has the lower positive rate.
  const std::int64_t adv_pos = swapped ? g.discriminated_positive : g.privileged_positive;
  const std::int64_t adv_n = swapped ? g.discriminated() : g.privileged();
  const std::int64_t dis_pos = swapped ? g.privileged_positive : g.discriminated_positive;
  const std::int64_t dis_n = swapped ? g.privileged() : g.discriminated();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!eligible[i]) continue;
    const bool in_disc = records[i][sensitive] == discriminated;
    const bool disadvantaged = swapped ? !in_disc : in_disc;
    if (disadvantaged && labels[i] == Label::kNegative) {
      plan.dn_candidates.push_back({i, positive_probability[i]});
    } else if (!disadvantaged && labels[i] == Label::kPositive) {
      plan.pp_candidates.push_back({i, 1.0 - positive_probability[i]});
    }
  }
  auto by_probability = [](const GfcCandidate& a, const GfcCandidate& b) {
    return a.probability > b.probability || (a.probability == b.probability && a.index < b.index);
  };
  std::sort(plan.dn_candidates.begin(), plan.dn_candidates.end(), by_probability);
  std::sort(plan.pp_candidates.begin(), plan.pp_candidates.end(), by_probability);
  const auto [dn, pp] = gfc_targets(adv_pos, adv_n, dis_pos, dis_n, plan.dn_candidates.size(),
                                     plan.pp_candidates.size());
  plan.target_dn_flips = dn;
  plan.target_pp_flips = pp;
  return plan;
}

std::optional<GfcPlan> plan_gfc(std::span<const Record> records, std::span<const Label> labels,
                                const std::vector<bool>& eligible, const EfdtModel& model) {
  std::vector<double> p(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) p[i] = model.predict(records[i]).probability(Label::kPositive);
  const Schema& s = model.schema();
  return plan_gfc(records, labels, eligible, p, s.sensitive, s.discriminated);
}

namespace {

void check_accepted(const std::vector<GfcCandidate>& candidates, std::span<const std::size_t> accepted,
                    const char* list) {
  for (std::size_t idx : accepted) {
    const bool ok = std::any_of(candidates.begin(), candidates.end(),
                                [&](const GfcCandidate& c) { return c.index == idx; });
    require(ok, ErrorCode::kInvalidArgument,
            "record " + std::to_string(idx) + " is not a " + list + " candidate of this plan");
  }
}

}  // namespace

bool apply_gfc(std::span<Label> labels, const GfcPlan& plan, std::span<const std::size_t> dn_accepted,
               std::span<const std::size_t> pp_accepted) {
  check_accepted(plan.dn_candidates, dn_accepted, "dn");
  check_accepted(plan.pp_candidates, pp_accepted, "pp");
  bool changed = false;
  for (std::size_t idx : dn_accepted) {
    require(idx < labels.size(), ErrorCode::kInvalidArgument, "gfc index out of range");
    changed |= labels[idx] != Label::kPositive;
    labels[idx] = Label::kPositive;
  }
  for (std::size_t idx : pp_accepted) {
    require(idx < labels.size(), ErrorCode::kInvalidArgument, "gfc index out of range");
    changed |= labels[idx] != Label::kNegative;
    labels[idx] = Label::kNegative;
  }
  return changed;
}

std::optional<double> preview_gfc(std::span<const Record> records, std::span<const Label> labels,
                                  const GfcPlan& plan, std::span<const std::size_t> dn_accepted,
                                  std::span<const std::size_t> pp_accepted, std::size_t sensitive,
                                  double discriminated) {
  std::vector<Label> copy(labels.begin(), labels.end());
  apply_gfc(copy, plan, dn_accepted, pp_accepted);
  return disc(records, copy, sensitive, discriminated);
}

}  // namespace coevo
