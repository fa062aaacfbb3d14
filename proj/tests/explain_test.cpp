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


#include <gtest/gtest.h>

#include <algorithm>

#include "coevo/efdt.hpp"
#include "coevo/explain.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace coevo {
namespace {

using testing::make_schema;
using testing::random_record;

struct Fixture {
  std::shared_ptr<const Schema> schema;
  LabeledSet past;
  EfdtModel model;
};

Fixture grown(std::uint64_t seed, std::size_t n = 800) {
  auto schema = make_schema({2, 3, 3, 8});
  Rng rng(seed);
  LabeledSet past = testing::random_labeled_set(*schema, n, rng, 0.02);
  EfdtModel model = retrain_from_scratch(schema, EfdtConfig{.grace_period = 20}, past.records, past.labels);
  return {schema, std::move(past), std::move(model)};
}

TEST(Gower, MixedAttributes) {
  const auto s = make_schema({2, 1, 3, 5});  // sex, n0 [0,4], n1 [0,4], c0
  const Record a{{0, 0, 4, 1}};
  EXPECT_EQ(gower_distance(*s, a, a), 0.0);
  EXPECT_DOUBLE_EQ(gower_distance(*s, a, Record{{1, 0, 4, 1}}), 0.25);
  EXPECT_DOUBLE_EQ(gower_distance(*s, a, Record{{0, 2, 4, 1}}), 0.5 / 4);
  EXPECT_DOUBLE_EQ(gower_distance(*s, a, Record{{1, 4, 0, 2}}), 1.0);
  EXPECT_DOUBLE_EQ(gower_distance(*s, a, Record{{0, 9, 4, 1}}), 0.25);  // clamped beyond the range
}

TEST(LogicExplanation, EmptyTree) {
  EfdtModel m(make_schema());
  Rng rng(1);
  const LogicExplanation e = logic_explanation(m, random_record(m.schema(), rng));
  EXPECT_TRUE(e.empty_tree);
  EXPECT_TRUE(e.conditions.empty());
  EXPECT_EQ(e.local_rule, "THEN -");
  EXPECT_EQ(e.label, Label::kNegative);
  EXPECT_FALSE(e.global_tree.empty());
}

TEST(LogicExplanation, RuleShapeAndFidelity) {
  std::size_t multi_step = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Fixture f = grown(seed);
    for (std::size_t i = 0; i < 40; ++i) {
      const Record& x = f.past.records[i];
      const LogicExplanation e = logic_explanation(f.model, x);
      const Prediction p = f.model.predict(x);
      ASSERT_EQ(e.label, p.label);
      ASSERT_EQ(e.conditions, f.model.decision_path(x).steps);
      const std::string then = "THEN " + f.schema->label_name(p.label);
      ASSERT_TRUE(e.local_rule.ends_with(then)) << e.local_rule;
      if (!e.conditions.empty()) {
        std::string expected = "IF ";
        for (std::size_t c = 0; c < e.conditions.size(); ++c) {
          if (c) expected += " AND ";
          expected += render_condition(*f.schema, e.conditions[c]);
        }
        ASSERT_EQ(e.local_rule, expected + " " + then);
      }
      multi_step += e.conditions.size() >= 2;
      for (const Record& r : f.past.records) {
        if (testing::path_holds(e.conditions, r)) ASSERT_EQ(f.model.predict(r).label, e.label);
      }
    }
  }
  EXPECT_GT(multi_step, 0u);
}

TEST(LogicExplanation, ConditionRendering) {
  const auto s = make_schema({1, 1, 3, 10});
  EXPECT_EQ(render_condition(*s, {1, TestOp::kLe, 5}), "n0 <= 5");
  EXPECT_EQ(render_condition(*s, {1, TestOp::kGt, 2.5}), "n0 > 2.5");
  EXPECT_EQ(render_condition(*s, {2, TestOp::kEq, 1}), "c0 = v1");
}

TEST(LogicExplanation, JsonRoundTrip) {
  const Fixture f = grown(3);
  const LogicExplanation e = logic_explanation(f.model, f.past.records[0]);
  const LogicExplanation back = LogicExplanation::from_json(e.to_json(*f.schema), *f.schema);
  EXPECT_EQ(back.local_rule, e.local_rule);
  EXPECT_EQ(back.conditions, e.conditions);
  EXPECT_EQ(back.global_tree, e.global_tree);
  EXPECT_EQ(back.label, e.label);
}

TEST(RealInstances, NearestByLabelWithoutSelf) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Fixture f = grown(seed, 500);
    const std::vector<Record>& past = f.past.records;
    for (std::size_t i = 0; i < 20; ++i) {
      const Record& x = past[i];
      const Label suggested = f.model.predict(x).label;
      const Label user = flip(suggested);
      const InstanceExplanation e = real_instances(f.model, past, x, suggested, user, 5);
      EXPECT_EQ(e.source, InstanceSource::kReal);
      for (const auto* side : {&e.examples, &e.counterexamples}) {
        const Label tag = side == &e.examples ? suggested : user;
        // Oracle: sorted distances of every other record predicted `tag`.
        std::vector<double> all;
        for (const Record& r : past) {
          if (r != x && f.model.predict(r).label == tag) all.push_back(gower_distance(*f.schema, x, r));
        }
        std::sort(all.begin(), all.end());
        ASSERT_EQ(side->size(), std::min<std::size_t>(5, all.size()));
        for (std::size_t k = 0; k < side->size(); ++k) {
          const Instance& inst = (*side)[k];
          ASSERT_NE(inst.record, x);
          ASSERT_EQ(inst.tag, tag);
          ASSERT_EQ(f.model.predict(inst.record).label, tag);
          ASSERT_DOUBLE_EQ(inst.distance, all[k]);
        }
      }
    }
  }
}

TEST(RealInstances, ShortageIsFlagged) {
  const Fixture f = grown(1, 500);
  const Record& x = f.past.records[0];
  const Label suggested = f.model.predict(x).label;
  std::vector<Record> past = {x};
  for (const Record& r : f.past.records) {
    if (f.model.predict(r).label == suggested && r != x) {
      past.push_back(r);
      break;
    }
  }
  for (const Record& r : f.past.records) {
    if (f.model.predict(r).label != suggested) past.push_back(r);
  }
  const InstanceExplanation e = real_instances(f.model, past, x, suggested, flip(suggested), 5);
  EXPECT_EQ(e.examples.size(), 1u);
  EXPECT_EQ(e.counterexamples.size(), 5u);
  EXPECT_TRUE(e.shortage);
}

TEST(SyntheticInstances, FidelityAndDeterminism) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Fixture f = grown(seed);
    for (std::size_t i = 0; i < 15; ++i) {
      const Record& x = f.past.records[i];
      const Label suggested = f.model.predict(x).label;
      const Label user = flip(suggested);
      const InstanceExplanation e = synthetic_instances(f.model, f.past.records, x, suggested, user, 5, seed * 100 + i);
      EXPECT_EQ(e.source, InstanceSource::kSynthetic);
      EXPECT_LE(e.examples.size(), 5u);
      EXPECT_LE(e.counterexamples.size(), 5u);
      EXPECT_EQ(e.shortage, e.examples.size() < 5 || e.counterexamples.size() < 5);
      std::vector<Record> seen;
      for (const auto* side : {&e.examples, &e.counterexamples}) {
        for (const Instance& inst : *side) {
          ASSERT_NE(inst.record, x);
          ASSERT_EQ(f.model.predict(inst.record).label, inst.tag);
          ASSERT_EQ(inst.tag, side == &e.examples ? suggested : user);
          ASSERT_NO_THROW(f.schema->check_record(inst.record));
          ASSERT_EQ(std::count(seen.begin(), seen.end(), inst.record), 0);
          seen.push_back(inst.record);
        }
      }
      const InstanceExplanation again =
          synthetic_instances(f.model, f.past.records, x, suggested, user, 5, seed * 100 + i);
      ASSERT_EQ(again.to_json(*f.schema), e.to_json(*f.schema));
    }
  }
}

TEST(SyntheticInstances, ConstantModelHasNoCounterexamples) {
  const auto schema = make_schema();
  EfdtModel m(schema);
  Rng rng(2);
  const Record x = random_record(*schema, rng);
  m.learn_one(x, Label::kPositive);
  std::vector<Record> pool;
  for (int i = 0; i < 50; ++i) pool.push_back(random_record(*schema, rng));
  const InstanceExplanation e = synthetic_instances(m, pool, x, Label::kPositive, Label::kNegative, 5, 9);
  EXPECT_EQ(e.examples.size(), 5u);
  EXPECT_TRUE(e.counterexamples.empty());
  EXPECT_TRUE(e.shortage);
}

TEST(InstanceExplanation, JsonRoundTrip) {
  const Fixture f = grown(4);
  const Record& x = f.past.records[0];
  const Label s = f.model.predict(x).label;
  const InstanceExplanation e = real_instances(f.model, f.past.records, x, s, flip(s), 3);
  const InstanceExplanation back = InstanceExplanation::from_json(e.to_json(*f.schema), *f.schema);
  EXPECT_EQ(back.to_json(*f.schema), e.to_json(*f.schema));
  ASSERT_EQ(back.examples.size(), e.examples.size());
  for (std::size_t i = 0; i < e.examples.size(); ++i) EXPECT_EQ(back.examples[i].record, e.examples[i].record);
}

}  // namespace
}  // namespace coevo
