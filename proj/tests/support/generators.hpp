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


#ifndef COEVO_TESTS_SUPPORT_GENERATORS_HPP_
#define COEVO_TESTS_SUPPORT_GENERATORS_HPP_

// Hand-rolled generators for property tests. Everything is driven by an
// explicit seed so a failing case can be reproduced from the test output.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "coevo/dataset.hpp"
#include "coevo/label.hpp"
#include "coevo/random.hpp"

namespace coevo::testing {

// Attribute 0 is the sensitive "sex" {Female, Male} with Female discriminated.
// Numeric attributes take integer values in [0, numeric_levels) so that
// records collide often enough to exercise similarity groups.
struct SchemaShape {
  std::size_t numeric = 2;
  std::size_t categorical = 2;
  std::size_t categories = 3;
  int numeric_levels = 4;
};

inline std::shared_ptr<const Schema> make_schema(const SchemaShape& shape = {}) {
  auto s = std::make_shared<Schema>();
  s->attributes.push_back({"sex", AttributeKind::kCategorical, {"Female", "Male"}, 0, 0});
  for (std::size_t i = 0; i < shape.numeric; ++i) {
    s->attributes.push_back({"n" + std::to_string(i), AttributeKind::kNumeric, {}, 0,
                             static_cast<double>(shape.numeric_levels - 1)});
  }
  for (std::size_t i = 0; i < shape.categorical; ++i) {
    std::vector<std::string> cats;
    for (std::size_t c = 0; c < shape.categories; ++c) cats.push_back("v" + std::to_string(c));
    s->attributes.push_back({"c" + std::to_string(i), AttributeKind::kCategorical, cats, 0, 0});
  }
  s->sensitive = 0;
  s->discriminated = 0;
  s->label_column = "label";
  s->validate();
  return s;
}

inline Record random_record(const Schema& schema, Rng& rng) {
  Record r;
  r.values.reserve(schema.size());
  for (const Attribute& a : schema.attributes) {
    if (a.categorical()) {
      r.values.push_back(static_cast<double>(uniform_index(rng, a.categories.size())));
    } else {
      const auto levels = static_cast<std::uint64_t>(a.max - a.min) + 1;
      r.values.push_back(a.min + static_cast<double>(uniform_index(rng, levels)));
    }
  }
  return r;
}

inline Label random_label(Rng& rng, double p_positive = 0.5) {
  return bernoulli(rng, p_positive) ? Label::kPositive : Label::kNegative;
}

// Labels follow a hidden rule on the first non-sensitive attributes, with
// `noise` of them flipped and a bias against the discriminated group.
inline Label rule_label(const Schema& schema, const Record& r, Rng& rng, double noise = 0.1, double bias = 0.2) {
  double score = 0;
  for (std::size_t i = 1; i < schema.size(); ++i) {
    const Attribute& a = schema[i];
    const double span = a.categorical() ? static_cast<double>(a.categories.size() - 1) : a.max - a.min;
    score += span > 0 ? r[i] / span : 0;
  }
  score /= static_cast<double>(schema.size() - 1);
  if (schema.in_discriminated_group(r)) score -= bias;
  Label y = score > 0.45 ? Label::kPositive : Label::kNegative;
  if (bernoulli(rng, noise)) y = flip(y);
  return y;
}

inline LabeledSet random_labeled_set(const Schema& schema, std::size_t n, Rng& rng, double noise = 0.1) {
  LabeledSet out;
  for (std::size_t i = 0; i < n; ++i) {
    out.records.push_back(random_record(schema, rng));
    out.labels.push_back(rule_label(schema, out.records.back(), rng, noise));
    out.rows.push_back(i);
  }
  return out;
}

inline std::shared_ptr<const Dataset> random_dataset(std::shared_ptr<const Schema> schema, std::size_t n,
                                                     std::uint64_t seed, double noise = 0.1) {
  Rng rng(seed);
  auto d = std::make_shared<Dataset>();
  d->schema = schema;
  const LabeledSet set = random_labeled_set(*schema, n, rng, noise);
  d->records = set.records;
  for (Label l : set.labels) d->labels.emplace_back(l);
  return d;
}

}  // namespace coevo::testing

#endif  // COEVO_TESTS_SUPPORT_GENERATORS_HPP_
