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

#ifndef COEVO_EXPLAIN_HPP_
#define COEVO_EXPLAIN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/dataset.hpp"
#include "coevo/efdt.hpp"
#include "coevo/label.hpp"

namespace coevo {

// Mean per-attribute dissimilarity: |a-b|/range for numeric attributes
// (clamped to 1), 0/1 mismatch for categorical ones. The sensitive attribute
// counts like any other.
double gower_distance(const Schema& schema, const Record& a, const Record& b);

struct LogicExplanation {
  std::string global_tree;
  std::vector<PathStep> conditions;
  Label label = Label::kNegative;
  std::string local_rule;  // "IF t1 AND ... THEN label", or "THEN label" for a bare leaf
  bool empty_tree = false;

  nlohmann::json to_json(const Schema& schema) const;
  static LogicExplanation from_json(const nlohmann::json& j, const Schema& schema);
};

std::string render_condition(const Schema& schema, const PathStep& step);

LogicExplanation logic_explanation(const EfdtModel& model, const Record& x);

enum class InstanceSource { kReal, kSynthetic };

std::string_view to_string(InstanceSource source);

struct Instance {
  Record record;
  Label tag = Label::kNegative;
  double distance = 0;
};

struct InstanceExplanation {
  std::vector<Instance> examples;         // model predicts the suggested label
  std::vector<Instance> counterexamples;  // model predicts the user's label
  InstanceSource source = InstanceSource::kSynthetic;
  bool shortage = false;  // fewer than k on at least one side

  nlohmann::json to_json(const Schema& schema) const;
  static InstanceExplanation from_json(const nlohmann::json& j, const Schema& schema);
};

// Nearest past records by Gower distance (ties by position), split by the
// model's current prediction. Records equal to x are skipped.
InstanceExplanation real_instances(const EfdtModel& model, std::span<const Record> past, const Record& x,
                                   Label suggested, Label user, std::size_t k);

// Perturbs x by resampling 1-3 random attributes from the empirical marginals
// of `pool` and keeps distinct variants the model labels `suggested` (examples)
// or `user` (counterexamples), giving up after 500*k attempts.
InstanceExplanation synthetic_instances(const EfdtModel& model, std::span<const Record> pool, const Record& x,
                                        Label suggested, Label user, std::size_t k, std::uint64_t seed);

}  // namespace coevo

#endif  // COEVO_EXPLAIN_HPP_
