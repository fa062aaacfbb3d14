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

#include "coevo/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "coevo/random.hpp"
#include "numfmt.hpp"

namespace coevo {

using nlohmann::json;

double gower_distance(const Schema& schema, const Record& a, const Record& b) {
  if (schema.size() == 0) return 0;
  double sum = 0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (a[i] == b[i]) continue;
    const Attribute& at = schema[i];
    const double range = at.range();
    sum += at.categorical() || range <= 0 ? 1.0 : std::min(1.0, std::abs(a[i] - b[i]) / range);
  }
  return sum / static_cast<double>(schema.size());
}

std::string render_condition(const Schema& schema, const PathStep& step) {
  std::string op = step.op == TestOp::kEq ? " = " : step.op == TestOp::kLe ? " <= " : " > ";
  return schema[step.attribute].name + op + schema.render_value(step.attribute, step.value);
}

LogicExplanation logic_explanation(const EfdtModel& model, const Record& x) {
  const Schema& schema = model.schema();
  LogicExplanation e;
  e.global_tree = model.export_structure();
  const DecisionPath path = model.decision_path(x);
  e.conditions = path.steps;
  e.empty_tree = path.empty_tree;
  e.label = model.predict(x).label;
  std::string rule;
  for (std::size_t i = 0; i < e.conditions.size(); ++i) {
    rule += i == 0 ? "IF " : " AND ";
    rule += render_condition(schema, e.conditions[i]);
  }
  if (!rule.empty()) rule += " ";
  e.local_rule = rule + "THEN " + schema.label_name(e.label);
  return e;
}

json LogicExplanation::to_json(const Schema& schema) const {
  json conds = json::array();
  for (const PathStep& s : conditions) {
    conds.push_back({{"attribute", schema[s.attribute].name},
                     {"op", std::string(to_string(s.op))},
                     {"value", schema[s.attribute].categorical() ? json(schema.render_value(s.attribute, s.value))
                                                                 : json(s.value)},
                     {"text", render_condition(schema, s)}});
  }
  return {{"global_tree", global_tree}, {"conditions", std::move(conds)}, {"label", std::string(to_token(label))},
          {"local_rule", local_rule},   {"empty_tree", empty_tree}};
}

LogicExplanation LogicExplanation::from_json(const json& j, const Schema& schema) {
  LogicExplanation e;
  e.global_tree = j.at("global_tree").get<std::string>();
  e.label = label_from_token(j.at("label").get<std::string>());
  e.local_rule = j.at("local_rule").get<std::string>();
  e.empty_tree = j.at("empty_tree").get<bool>();
  for (const auto& c : j.at("conditions")) {
    PathStep s;
    s.attribute = schema.require_index(c.at("attribute").get<std::string>());
    const std::string op = c.at("op").get<std::string>();
    s.op = op == "=" ? TestOp::kEq : op == "<=" ? TestOp::kLe : TestOp::kGt;
    if (schema[s.attribute].categorical()) {
      auto code = schema[s.attribute].category_code(c.at("value").get<std::string>());
      require(code.has_value(), ErrorCode::kCorrupt, "unknown category in explanation");
      s.value = static_cast<double>(*code);
    } else {
      s.value = c.at("value").get<double>();
    }
    e.conditions.push_back(s);
  }
  return e;
}

std::string_view to_string(InstanceSource source) {
  return source == InstanceSource::kReal ? "real" : "synthetic";
}

namespace {

json instances_to_json(const std::vector<Instance>& list, const Schema& schema) {
  json out = json::array();
  for (const Instance& i : list) {
    out.push_back({{"record", schema.record_to_json(i.record)},
                   {"tag", std::string(to_token(i.tag))},
                   {"distance", i.distance}});
  }
  return out;
}

std::vector<Instance> instances_from_json(const json& j, const Schema& schema) {
  std::vector<Instance> out;
  for (const auto& x : j) {
    out.push_back({schema.record_from_json(x.at("record")), label_from_token(x.at("tag").get<std::string>()),
                   x.at("distance").get<double>()});
  }
  return out;
}

}  // namespace

json InstanceExplanation::to_json(const Schema& schema) const {
  return {{"source", std::string(to_string(source))},
          {"shortage", shortage},
          {"examples", instances_to_json(examples, schema)},
          {"counterexamples", instances_to_json(counterexamples, schema)}};
}

InstanceExplanation InstanceExplanation::from_json(const json& j, const Schema& schema) {
  InstanceExplanation e;
  e.source = j.at("source").get<std::string>() == "real" ? InstanceSource::kReal : InstanceSource::kSynthetic;
  e.shortage = j.at("shortage").get<bool>();
  e.examples = instances_from_json(j.at("examples"), schema);
  e.counterexamples = instances_from_json(j.at("counterexamples"), schema);
  return e;
}

InstanceExplanation real_instances(const EfdtModel& model, std::span<const Record> past, const Record& x,
                                   Label suggested, Label user, std::size_t k) {
  const Schema& schema = model.schema();
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(past.size());
  for (std::size_t i = 0; i < past.size(); ++i) {
    if (past[i] == x) continue;
    order.emplace_back(gower_distance(schema, x, past[i]), i);
  }
  std::sort(order.begin(), order.end());
  InstanceExplanation e;
  e.source = InstanceSource::kReal;
  for (const auto& [d, i] : order) {
    if (e.examples.size() >= k && e.counterexamples.size() >= k) break;
    const Label p = model.predict(past[i]).label;
    if (p == suggested && e.examples.size() < k) {
      e.examples.push_back({past[i], p, d});
    } else if (p == user && p != suggested && e.counterexamples.size() < k) {
      e.counterexamples.push_back({past[i], p, d});
    }
  }
  e.shortage = e.examples.size() < k || e.counterexamples.size() < k;
  return e;
}

InstanceExplanation synthetic_instances(const EfdtModel& model, std::span<const Record> pool, const Record& x,
                                        Label suggested, Label user, std::size_t k, std::uint64_t seed) {
  const Schema& schema = model.schema();
  InstanceExplanation e;
  e.source = InstanceSource::kSynthetic;
  const std::size_t m = schema.size();
  if (k == 0) return e;
  if (pool.empty() || m == 0) {
    e.shortage = true;
    return e;
  }
  Rng rng(seed);
  std::set<std::vector<double>> seen{x.values};
  std::vector<std::size_t> attrs(m);
  const std::size_t attempts = 500 * k;
  for (std::size_t a = 0; a < attempts; ++a) {
    if (e.examples.size() >= k && e.counterexamples.size() >= k) break;
    Record r = x;
    std::iota(attrs.begin(), attrs.end(), std::size_t{0});
    const std::size_t changes = std::min<std::size_t>(m, 1 + uniform_index(rng, 3));
    for (std::size_t c = 0; c < changes; ++c) {
      const std::size_t pick = c + uniform_index(rng, m - c);
      std::swap(attrs[c], attrs[pick]);
      const std::size_t attr = attrs[c];
      r.values[attr] = pool[uniform_index(rng, pool.size())][attr];
    }
    if (!seen.insert(r.values).second) continue;
    const Label p = model.predict(r).label;
    if (p == suggested && e.examples.size() < k) {
      e.examples.push_back({std::move(r), p, 0});
      e.examples.back().distance = gower_distance(schema, x, e.examples.back().record);
    } else if (p == user && p != suggested && e.counterexamples.size() < k) {
      e.counterexamples.push_back({std::move(r), p, 0});
      e.counterexamples.back().distance = gower_distance(schema, x, e.counterexamples.back().record);
    }
  }
  e.shortage = e.examples.size() < k || e.counterexamples.size() < k;
  return e;
}

}  // namespace coevo
