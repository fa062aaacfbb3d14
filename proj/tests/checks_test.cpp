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

#include <cmath>

#include "coevo/checks.hpp"
#include "coevo/error.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace coevo {
namespace {

using nlohmann::json;
using testing::make_schema;
using testing::random_record;

std::shared_ptr<const Schema> gain_schema() {
  auto s = std::make_shared<Schema>();
  s->attributes.push_back({"sex", AttributeKind::kCategorical, {"Female", "Male"}, 0, 0});
  s->attributes.push_back({"capital_gain", AttributeKind::kNumeric, {}, 0, 99999});
  s->attributes.push_back({"workclass", AttributeKind::kCategorical, {"Private", "State-gov", "Self-emp"}, 0, 0});
  s->sensitive = 0;
  s->discriminated = 0;
  s->validate();
  return s;
}

Record gain_record(double sex, double gain, double workclass) { return Record{{sex, gain, workclass}}; }

TEST(RuleOp, TokensRoundTrip) {
  for (RuleOp op : {RuleOp::kEq, RuleOp::kNe, RuleOp::kLt, RuleOp::kLe, RuleOp::kGt, RuleOp::kGe}) {
    EXPECT_EQ(rule_op_from_token(to_token(op)), op);
  }
  EXPECT_THROW(rule_op_from_token("=="), Error);
  EXPECT_THROW(rule_op_from_token("=<"), Error);
}

TEST(RuleSet, JsonRoundTripAndRendering) {
  const auto s = gain_schema();
  const RuleSet rules = RuleSet::from_json(
      json::parse(R"({"rules": [{"conditions": [["capital_gain", ">", 9000], ["workclass", "=", "Private"]],
                                 "label": "+"}]})"),
      *s);
  ASSERT_EQ(rules.rules.size(), 1u);
  EXPECT_EQ(rules.rules[0].conditions[1].value, 0);
  EXPECT_EQ(RuleSet::from_json(rules.to_json(*s), *s), rules);
  const std::string text = rules.render(0, *s);
  EXPECT_NE(text.find("capital_gain > 9000"), std::string::npos) << text;
  EXPECT_NE(text.find("workclass = Private"), std::string::npos) << text;
}

TEST(RuleSet, UnknownNamesAreErrors) {
  const auto s = gain_schema();
  EXPECT_THROW(RuleSet::from_json(json::parse(R"({"rules": [{"conditions": [["nosuch", ">", 1]], "label": "+"}]})"), *s),
               Error);
  EXPECT_THROW(
      RuleSet::from_json(json::parse(R"({"rules": [{"conditions": [["workclass", "=", "Nope"]], "label": "+"}]})"), *s),
      Error);
  EXPECT_THROW(RuleSet::from_json(json::parse(R"({"rules": [{"conditions": [], "label": "?"}]})"), *s), Error);
}

TEST(MatchRule, StrictGreaterThan) {
  const auto s = gain_schema();
  const RuleSet rules =
      RuleSet::from_json(json::parse(R"({"rules": [{"conditions": [["capital_gain", ">", 9000]], "label": "+"}]})"), *s);
  EXPECT_EQ(match_rule(rules, gain_record(1, 10000, 0)), Label::kPositive);
  EXPECT_EQ(match_rule(rules, gain_record(1, 9000, 0)), std::nullopt);
  EXPECT_EQ(match_rule(RuleSet{}, gain_record(1, 10000, 0)), std::nullopt);
}

TEST(ValidateRuleset, Violations) {
  const auto s = gain_schema();
  auto check = [&](const char* text) {
    return validate_ruleset(RuleSet::from_json(json::parse(text), *s), *s);
  };
  auto sa = check(R"({"rules": [{"conditions": [["sex", "=", "Female"]], "label": "-"}]})");
  ASSERT_EQ(sa.size(), 1u);
  EXPECT_EQ(sa[0].kind, ViolationKind::kSensitiveAttribute);
  EXPECT_NE(sa[0].message.find("sensitive attribute in rule"), std::string::npos) << sa[0].message;

  auto type = check(R"({"rules": [{"conditions": [["workclass", "<", "Self-emp"]], "label": "-"}]})");
  ASSERT_EQ(type.size(), 1u);
  EXPECT_EQ(type[0].kind, ViolationKind::kTypeMismatch);

  auto overlap = check(R"({"rules": [{"conditions": [["capital_gain", ">", 9000]], "label": "+"},
                                     {"conditions": [["capital_gain", ">=", 20000]], "label": "-"}]})");
  ASSERT_EQ(overlap.size(), 1u);
  EXPECT_EQ(overlap[0].kind, ViolationKind::kOverlap);
  EXPECT_EQ(overlap[0].other, 1u);

  EXPECT_TRUE(check(R"({"rules": [{"conditions": [["capital_gain", ">", 9000]], "label": "+"},
                                   {"conditions": [["capital_gain", "<=", 9000]], "label": "-"}]})")
                  .empty());
  EXPECT_TRUE(check(R"({"rules": [{"conditions": [["workclass", "=", "Private"]], "label": "+"},
                                   {"conditions": [["workclass", "!=", "Private"]], "label": "-"}]})")
                  .empty());
}

// Conditions with integer thresholds: every non-empty feasible region of a
// numeric attribute contains a half-integer, so a grid of half-integers
// decides satisfiability.
Rule random_rule(const Schema& s, Rng& rng) {
  Rule r;
  const std::size_t n = 1 + uniform_index(rng, 3);
  for (std::size_t i = 0; i < n; ++i) {
    Condition c;
    c.attribute = 1 + uniform_index(rng, s.size() - 1);
    if (s[c.attribute].categorical()) {
      c.op = bernoulli(rng, 0.5) ? RuleOp::kEq : RuleOp::kNe;
      c.value = static_cast<double>(uniform_index(rng, s[c.attribute].categories.size()));
    } else {
      c.op = static_cast<RuleOp>(uniform_index(rng, 6));
      c.value = static_cast<double>(uniform_index(rng, 4));
    }
    r.conditions.push_back(c);
  }
  r.label = testing::random_label(rng);
  return r;
}

bool grid_satisfiable(const Rule& a, const Rule& b, const Schema& s) {
  std::vector<std::vector<double>> axes;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<double> axis;
    if (s[i].categorical()) {
      for (std::size_t c = 0; c < s[i].categories.size(); ++c) axis.push_back(static_cast<double>(c));
    } else {
      for (double v = -1.5; v <= 4.5; v += 0.5) axis.push_back(v);
    }
    axes.push_back(axis);
  }
  std::vector<std::size_t> at(s.size(), 0);
  Record r{std::vector<double>(s.size())};
  while (true) {
    for (std::size_t i = 0; i < s.size(); ++i) r.values[i] = axes[i][at[i]];
    if (a.covers(r) && b.covers(r)) return true;
    std::size_t k = 0;
    while (k < s.size() && ++at[k] == axes[k].size()) at[k++] = 0;
    if (k == s.size()) return false;
  }
}

TEST(JointlySatisfiable, AgreesWithGridSearch) {
  const auto s = make_schema({2, 2, 3, 4});
  Rng rng(4);
  std::size_t overlapping = 0;
  for (int i = 0; i < 600; ++i) {
    const Rule a = random_rule(*s, rng), b = random_rule(*s, rng);
    const bool expected = grid_satisfiable(a, b, *s);
    overlapping += expected;
    ASSERT_EQ(jointly_satisfiable(a, b, *s), expected) << "case " << i;
  }
  EXPECT_GT(overlapping, 100u);
  EXPECT_LT(overlapping, 500u);
}

TEST(MatchRule, ValidatedRuleSetsAreMutuallyExclusive) {
  const auto s = make_schema({2, 2, 3, 4});
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    RuleSet rules;
    for (int k = 0; k < 3; ++k) rules.rules.push_back(random_rule(*s, rng));
    if (!validate_ruleset(rules, *s).empty()) continue;
    for (int i = 0; i < 200; ++i) {
      const Record r = random_record(*s, rng);
      int covering = 0;
      for (const Rule& rule : rules.rules) covering += rule.covers(r);
      ASSERT_LE(covering, 1);
      const auto m = match_rule(rules, r);
      ASSERT_EQ(m.has_value(), covering == 1);
    }
  }
}

TEST(SimilarityIndex, ProjectsAwayTheSensitiveAttribute) {
  const auto s = gain_schema();
  EXPECT_EQ(project(gain_record(0, 5, 1), 0), project(gain_record(1, 5, 1), 0));
  EXPECT_NE(project(gain_record(0, 5, 1), 0), project(gain_record(0, 6, 1), 0));

  SimilarityIndex idx;
  const auto key = project(gain_record(0, 5, 1), 0);
  EXPECT_EQ(idx.lookup(key), nullptr);
  idx.add(key, Label::kPositive, 0);
  idx.add(key, Label::kPositive, 3);
  ASSERT_NE(idx.lookup(key), nullptr);
  EXPECT_EQ(idx.lookup(key)->members, (std::vector<std::size_t>{0, 3}));
  EXPECT_THROW(idx.add(key, Label::kNegative, 4), Error);
  idx.relabel(key, Label::kNegative);
  EXPECT_EQ(idx.lookup(key)->label, Label::kNegative);
  EXPECT_EQ(idx.lookup(project(gain_record(0, 6, 1), 0)), nullptr);
  EXPECT_EQ(idx.group_count(), 1u);
}

TEST(UcCount, Examples) {
  const auto s = gain_schema();
  const std::vector<Record> two = {gain_record(0, 5, 1), gain_record(1, 5, 1)};
  const std::vector<Label> pm = {Label::kPositive, Label::kNegative};
  EXPECT_EQ(uc_count(two, pm, 0), 1);
  const std::vector<Record> three = {gain_record(0, 5, 1), gain_record(1, 5, 1), gain_record(1, 5, 1)};
  const std::vector<Label> ppm = {Label::kPositive, Label::kPositive, Label::kNegative};
  EXPECT_EQ(uc_count(three, ppm, 0), 2);
}

TEST(UcCount, AgreesWithPairwiseCount) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto s = make_schema({1, 1, 2, 3});
    Rng rng(seed);
    const auto set = testing::random_labeled_set(*s, 150, rng, 0.3);
    const std::int64_t uc = uc_count(set.records, set.labels, s->sensitive);
    ASSERT_EQ(uc, testing::naive_uc(set.records, set.labels, s->sensitive)) << "seed " << seed;
    // Zero exactly when every similarity group is uniformly labeled.
    SimilarityIndex idx;
    bool uniform = true;
    for (std::size_t i = 0; i < set.size(); ++i) {
      try {
        idx.add(project(set.records[i], s->sensitive), set.labels[i], i);
      } catch (const Error&) {
        uniform = false;
      }
    }
    EXPECT_EQ(uc == 0, uniform);
  }
}

// n records of each group with the requested positives; values beyond the
// sensitive attribute are irrelevant here.
struct GroupSet {
  std::vector<Record> records;
  std::vector<Label> labels;
};

GroupSet group_set(int p, int pp, int d, int dp) {
  GroupSet g;
  for (int i = 0; i < p; ++i) {
    g.records.push_back(gain_record(1, i, 0));
    g.labels.push_back(i < pp ? Label::kPositive : Label::kNegative);
  }
  for (int i = 0; i < d; ++i) {
    g.records.push_back(gain_record(0, i, 0));
    g.labels.push_back(i < dp ? Label::kPositive : Label::kNegative);
  }
  return g;
}

TEST(Disc, Examples) {
  const GroupSet a = group_set(100, 75, 100, 30);
  EXPECT_NEAR(*disc(a.records, a.labels, 0, 0), 0.45, 1e-12);
  const GroupSet b = group_set(40, 10, 80, 20);
  EXPECT_EQ(*disc(b.records, b.labels, 0, 0), 0.0);
  const GroupSet c = group_set(30, 30, 50, 0);
  EXPECT_EQ(*disc(c.records, c.labels, 0, 0), 1.0);
  const GroupSet empty = group_set(10, 5, 0, 0);
  EXPECT_EQ(disc(empty.records, empty.labels, 0, 0), std::nullopt);
}

TEST(Disc, AntisymmetricUnderGroupSwap) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = make_schema();
    Rng rng(seed);
    const auto set = testing::random_labeled_set(*s, 100, rng, 0.3);
    const auto a = disc(set.records, set.labels, 0, 0);
    const auto b = disc(set.records, set.labels, 0, 1);
    ASSERT_TRUE(a && b);
    EXPECT_EQ(*a, -*b);
    EXPECT_EQ(*a, *testing::naive_disc(set.records, set.labels, 0, 0));
  }
}

std::vector<double> flat_probability(std::size_t n) {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<double>((i * 37) % 101) / 100.0;
  return p;
}

TEST(PlanGfc, ReferenceExample) {
  const GroupSet g = group_set(100, 75, 100, 30);
  const std::vector<bool> eligible(g.records.size(), true);
  const auto plan = plan_gfc(g.records, g.labels, eligible, flat_probability(g.records.size()), 0, 0);
  ASSERT_TRUE(plan);
  EXPECT_FALSE(plan->swapped);
  EXPECT_EQ(plan->target_pp_flips, 22u);
  EXPECT_EQ(plan->target_dn_flips, 23u);
  EXPECT_EQ(plan->dn_candidates.size(), 70u);
  EXPECT_EQ(plan->pp_candidates.size(), 75u);

  std::vector<Label> labels = g.labels;
  std::vector<std::size_t> dn, pp;
  for (const auto& c : plan->shown_dn()) dn.push_back(c.index);
  for (const auto& c : plan->shown_pp()) pp.push_back(c.index);
  const auto preview = preview_gfc(g.records, labels, *plan, dn, pp, 0, 0);
  EXPECT_TRUE(apply_gfc(labels, *plan, dn, pp));
  const double after = *disc(g.records, labels, 0, 0);
  EXPECT_LE(std::abs(after), 0.01);
  EXPECT_EQ(*preview, after);
}

TEST(PlanGfc, AcceptNoneChangesNothing) {
  const GroupSet g = group_set(100, 75, 100, 30);
  const auto plan = plan_gfc(g.records, g.labels, std::vector<bool>(200, true), flat_probability(200), 0, 0);
  std::vector<Label> labels = g.labels;
  EXPECT_FALSE(apply_gfc(labels, *plan, {}, {}));
  EXPECT_EQ(labels, g.labels);
}

TEST(PlanGfc, TopQuarterMovesTowardZero) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto s = make_schema();
    Rng rng(seed);
    const auto set = testing::random_labeled_set(*s, 200, rng, 0.2);
    const auto plan = plan_gfc(set.records, set.labels, std::vector<bool>(set.size(), true),
                               flat_probability(set.size()), 0, 0);
    ASSERT_TRUE(plan);
    if (plan->disc_before == 0) continue;
    std::vector<std::size_t> dn, pp;
    for (std::size_t i = 0; i < plan->target_dn_flips / 4; ++i) dn.push_back(plan->dn_candidates[i].index);
    for (std::size_t i = 0; i < plan->target_pp_flips / 4; ++i) pp.push_back(plan->pp_candidates[i].index);
    if (dn.empty() && pp.empty()) continue;
    std::vector<Label> labels = set.labels;
    apply_gfc(labels, *plan, dn, pp);
    EXPECT_LT(std::abs(*disc(set.records, labels, 0, 0)), std::abs(plan->disc_before)) << "seed " << seed;
  }
}

TEST(PlanGfc, ZeroDiscGivesEmptyPlan) {
  const GroupSet g = group_set(40, 10, 80, 20);
  const auto plan = plan_gfc(g.records, g.labels, std::vector<bool>(120, true), flat_probability(120), 0, 0);
  ASSERT_TRUE(plan);
  EXPECT_TRUE(plan->empty());
}

TEST(PlanGfc, UndefinedDiscGivesNoPlan) {
  const GroupSet g = group_set(10, 5, 0, 0);
  EXPECT_EQ(plan_gfc(g.records, g.labels, std::vector<bool>(10, true), flat_probability(10), 0, 0), std::nullopt);
}

TEST(PlanGfc, IneligibleRecordsAreNeverCandidates) {
  const GroupSet g = group_set(100, 75, 100, 30);
  std::vector<bool> eligible(200, true);
  for (std::size_t i = 100; i < 200; ++i) eligible[i] = false;  // every discriminated record
  const auto plan = plan_gfc(g.records, g.labels, eligible, flat_probability(200), 0, 0);
  ASSERT_TRUE(plan);
  EXPECT_TRUE(plan->dn_candidates.empty());
  EXPECT_EQ(plan->target_dn_flips, 0u);
  EXPECT_LE(plan->target_pp_flips, 1u);

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto s = make_schema();
    Rng rng(seed);
    const auto set = testing::random_labeled_set(*s, 150, rng, 0.2);
    std::vector<bool> el(set.size());
    for (std::size_t i = 0; i < el.size(); ++i) el[i] = bernoulli(rng, 0.7);
    const auto p = plan_gfc(set.records, set.labels, el, flat_probability(set.size()), 0, 0);
    ASSERT_TRUE(p);
    for (const auto& c : p->dn_candidates) EXPECT_TRUE(el[c.index]);
    for (const auto& c : p->pp_candidates) EXPECT_TRUE(el[c.index]);
  }
}

TEST(PlanGfc, CandidatesOrderedByPlausibility) {
  const auto s = make_schema();
  Rng rng(3);
  const auto set = testing::random_labeled_set(*s, 200, rng, 0.2);
  std::vector<double> p(set.size());
  for (double& v : p) v = uniform_unit(rng);
  const auto plan = plan_gfc(set.records, set.labels, std::vector<bool>(set.size(), true), p, 0, 0);
  ASSERT_TRUE(plan);
  for (std::size_t i = 0; i < plan->dn_candidates.size(); ++i) {
    const auto& c = plan->dn_candidates[i];
    EXPECT_EQ(c.probability, p[c.index]);
    if (i) EXPECT_GE(plan->dn_candidates[i - 1].probability, c.probability);
  }
  for (std::size_t i = 0; i < plan->pp_candidates.size(); ++i) {
    const auto& c = plan->pp_candidates[i];
    EXPECT_EQ(c.probability, 1 - p[c.index]);
    if (i) EXPECT_GE(plan->pp_candidates[i - 1].probability, c.probability);
  }
}

TEST(PlanGfc, NegativeDiscSwapsGroups) {
  const GroupSet g = group_set(100, 20, 100, 60);
  const auto plan = plan_gfc(g.records, g.labels, std::vector<bool>(200, true), flat_probability(200), 0, 0);
  ASSERT_TRUE(plan);
  EXPECT_TRUE(plan->swapped);
  EXPECT_LT(plan->disc_before, 0);
  for (const auto& c : plan->dn_candidates) EXPECT_EQ(g.records[c.index][0], 1.0);
  for (const auto& c : plan->pp_candidates) EXPECT_EQ(g.records[c.index][0], 0.0);
  std::vector<Label> labels = g.labels;
  std::vector<std::size_t> dn, pp;
  for (const auto& c : plan->shown_dn()) dn.push_back(c.index);
  for (const auto& c : plan->shown_pp()) pp.push_back(c.index);
  apply_gfc(labels, *plan, dn, pp);
  EXPECT_LE(std::abs(*disc(g.records, labels, 0, 0)), 0.01);
}

TEST(PlanGfc, TargetsMatchExhaustiveSearch) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    const auto s = make_schema();
    const std::size_t n = 2 + uniform_index(rng, 199);
    const double p_pos = uniform_unit(rng);
    const double bias = uniform_unit(rng) - 0.5;
    std::vector<Record> records;
    std::vector<Label> labels;
    for (std::size_t i = 0; i < n; ++i) {
      records.push_back(random_record(*s, rng));
      const double p = std::clamp(p_pos + (s->in_discriminated_group(records.back()) ? -bias : bias), 0.0, 1.0);
      labels.push_back(testing::random_label(rng, p));
    }
    const auto plan = plan_gfc(records, labels, std::vector<bool>(n, true), flat_probability(n), 0, 0);
    const auto oracle = testing::brute_force_flips(records, labels, 0, 0);
    if (!plan) {
      EXPECT_TRUE(oracle.optimal.empty());
      continue;
    }
    ASSERT_EQ(plan->target_dn_flips, oracle.dn) << "seed " << seed << " n=" << n;
    ASSERT_EQ(plan->target_pp_flips, oracle.pp) << "seed " << seed << " n=" << n;
  }
}

TEST(ApplyGfc, RejectsIndicesOutsideThePlan) {
  const GroupSet g = group_set(100, 75, 100, 30);
  const auto plan = plan_gfc(g.records, g.labels, std::vector<bool>(200, true), flat_probability(200), 0, 0);
  std::vector<Label> labels = g.labels;
  const std::vector<std::size_t> bad = {0};  // a privileged positive is not a DN candidate
  EXPECT_THROW(apply_gfc(labels, *plan, bad, {}), Error);
  EXPECT_EQ(labels, g.labels);
}

TEST(GfcPlan, JsonRoundTrip) {
  const GroupSet g = group_set(60, 40, 50, 10);
  const auto plan = plan_gfc(g.records, g.labels, std::vector<bool>(110, true), flat_probability(110), 0, 0);
  EXPECT_TRUE(GfcPlan::from_json(plan->to_json()) == *plan);
}

TEST(GfcTargets, SmallGroupsFallBackToSmallestResidual) {
  // |P| = 3, |D| = 2: no flip pair reaches 0.01, so the closest one wins.
  const auto [dn, pp] = gfc_targets(3, 3, 0, 2, 2, 3);
  const double residual = std::abs((3.0 - pp) / 3.0 - (0.0 + dn) / 2.0);
  EXPECT_GT(residual, 0.01);
  for (std::size_t a = 0; a <= 2; ++a) {
    for (std::size_t b = 0; b <= 3; ++b) {
      if ((a > b ? a - b : b - a) > 1) continue;
      EXPECT_LE(residual, std::abs((3.0 - b) / 3.0 - (0.0 + a) / 2.0));
    }
  }
}

}  // namespace
}  // namespace coevo
