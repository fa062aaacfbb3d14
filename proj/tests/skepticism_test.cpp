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

#include "coevo/skepticism.hpp"
#include "support/generators.hpp"

namespace coevo {
namespace {

TEST(Ledger, ColdStart) {
  const AccuracyLedger l;
  for (Label y : {Label::kPositive, Label::kNegative}) {
    EXPECT_EQ(l.ea(Agent::kUser, y), 1.0);
    EXPECT_EQ(l.ea(Agent::kModel, y), 0.0);
  }
}

TEST(Ledger, RatioOfAcceptedToProposed) {
  AccuracyLedger l;
  // Model proposes + four times; three of those rounds end +.
  l.record_outcome(Label::kPositive, Label::kPositive, Label::kPositive);
  l.record_outcome(Label::kNegative, Label::kPositive, Label::kPositive);
  l.record_outcome(Label::kPositive, Label::kPositive, Label::kPositive);
  l.record_outcome(Label::kNegative, Label::kPositive, Label::kNegative);
  EXPECT_EQ(l.proposed(Agent::kModel, Label::kPositive), 4);
  EXPECT_EQ(l.accepted(Agent::kModel, Label::kPositive), 3);
  EXPECT_DOUBLE_EQ(l.ea(Agent::kModel, Label::kPositive), 0.75);
  EXPECT_DOUBLE_EQ(l.ea(Agent::kUser, Label::kPositive), 1.0);
  EXPECT_DOUBLE_EQ(l.ea(Agent::kUser, Label::kNegative), 0.5);
  EXPECT_EQ(l.ea(Agent::kModel, Label::kNegative), 0.0);
}

TEST(Ledger, AllAcceptedIsOne) {
  AccuracyLedger l;
  for (int i = 0; i < 10; ++i) l.record_outcome(Label::kNegative, Label::kNegative, Label::kNegative);
  EXPECT_EQ(l.ea(Agent::kUser, Label::kNegative), 1.0);
  EXPECT_EQ(l.ea(Agent::kModel, Label::kNegative), 1.0);
}

TEST(Ledger, CountersStayOrderedUnderRandomRounds) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    AccuracyLedger l;
    std::array<std::int64_t, 4> proposed{}, accepted{};
    for (int i = 0; i < 300; ++i) {
      const Label u = testing::random_label(rng), m = testing::random_label(rng);
      const Label y = bernoulli(rng, 0.5) ? u : m;
      l.record_outcome(u, m, y);
      proposed[index_of(u)]++;
      proposed[2 + index_of(m)]++;
      accepted[index_of(u)] += u == y;
      accepted[2 + index_of(m)] += m == y;
    }
    for (Label y : {Label::kNegative, Label::kPositive}) {
      EXPECT_EQ(l.proposed(Agent::kUser, y), proposed[index_of(y)]);
      EXPECT_EQ(l.accepted(Agent::kUser, y), accepted[index_of(y)]);
      EXPECT_EQ(l.proposed(Agent::kModel, y), proposed[2 + index_of(y)]);
      EXPECT_EQ(l.accepted(Agent::kModel, y), accepted[2 + index_of(y)]);
      for (Agent a : {Agent::kUser, Agent::kModel}) {
        EXPECT_LE(l.accepted(a, y), l.proposed(a, y));
        EXPECT_GE(l.ea(a, y), 0.0);
        EXPECT_LE(l.ea(a, y), 1.0);
      }
    }
    EXPECT_EQ(AccuracyLedger::from_json(l.to_json()), l);
  }
}

TEST(SkepticismScore, Formula) {
  EXPECT_NEAR(skepticism_score(0.9, 0.6, 0.7, 1.0), -0.16, 1e-12);
  EXPECT_EQ(skepticism_score(0.3, 0.8, 0.3, 0.8), 0.0);
  EXPECT_EQ(skepticism_score(1, 1, 0, 0.42), 1.0);
  EXPECT_EQ(skepticism_score(0, 0.3, 1, 1), -1.0);
}

TEST(SkepticismScore, StrictThreshold) {
  EXPECT_TRUE(is_skeptical(0.06, 0.05));
  EXPECT_FALSE(is_skeptical(0.05, 0.05));
  EXPECT_FALSE(is_skeptical(-0.16, 0.05));
}

TEST(SkepticismScore, StaysInRange) {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    const double s =
        skepticism_score(uniform_unit(rng), uniform_unit(rng), uniform_unit(rng), uniform_unit(rng));
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
  }
}

}  // namespace
}  // namespace coevo
