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

#include "coevo/error.hpp"
#include "coevo/experiment.hpp"
#include "support/generators.hpp"

namespace coevo {
namespace {

ExperimentConfig synthetic_config(const std::string& checks, UserKind user, Policy policy) {
  ExperimentConfig c;
  c.data = testing::random_dataset(testing::make_schema(), 1200, 21);
  c.rules = RuleSet::from_json(
      nlohmann::json::parse(R"({"rules": [{"conditions": [["n0", ">", 2], ["n1", ">", 2]], "label": "+"}]})"),
      *c.data->schema);
  c.user = user;
  c.policy = policy;
  c.session.checks = ChecksEnabled::parse(checks);
  c.session.gfc_period = 50;
  c.session.model.grace_period = 20;
  c.sizes = SplitSizes{300, 150, 400, 200};
  c.repeats = 3;
  c.threads = 2;
  return c;
}

TEST(Experiment, NamedCheckSets) {
  EXPECT_EQ(named_check_sets().size(), 6u);
  EXPECT_EQ(*checks_by_name("FRANK"), ChecksEnabled{});
  EXPECT_EQ(*checks_by_name("none"), ChecksEnabled::none());
  EXPECT_EQ(checks_by_name("SL")->to_string(), "slc");
  EXPECT_EQ(checks_by_name("oGFC")->to_string(), "gfc");
  EXPECT_FALSE(checks_by_name("everything"));
}

TEST(Experiment, PassThroughCopiesTheUser) {
  const ExperimentConfig c = synthetic_config("none", UserKind::kReal, Policy::kRandom);
  const RunResult r = run_once(c, 0);
  EXPECT_EQ(r.metrics.ca, 1.0);
  EXPECT_EQ(r.metrics.ca_series.size(), 400u);
  EXPECT_EQ(r.metrics.cd_series.size(), 400u);
  EXPECT_EQ(r.metrics.stats.retrains, 0);
}

TEST(Experiment, FullRunKeepsIndividualFairness) {
  const ExperimentConfig c = synthetic_config("all", UserKind::kCoin, Policy::kRandom);
  const RunResult r = run_once(c, 2, true);
  EXPECT_EQ(r.metrics.uc, 0.0);
  EXPECT_FALSE(r.final_snapshot.is_null());
  EXPECT_GE(r.metrics.ma, 0.0);
  EXPECT_LE(r.metrics.ma, 1.0);
}

TEST(Experiment, DeterministicAcrossThreadCounts) {
  ExperimentConfig c = synthetic_config("all", UserKind::kAbsentMinded, Policy::kRandom);
  const ExperimentResult a = run_experiment(c);
  c.threads = 1;
  const ExperimentResult b = run_experiment(c);
  ASSERT_EQ(a.runs.size(), 3u);
  EXPECT_EQ(a.mean.to_json(true).dump(), b.mean.to_json(true).dump());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].seed, b.runs[i].seed);
    EXPECT_EQ(a.runs[i].metrics.to_json().dump(), b.runs[i].metrics.to_json().dump());
  }
}

TEST(Experiment, MeanIsTheAverageOfRuns) {
  const ExperimentConfig c = synthetic_config("slc", UserKind::kBayesian, Policy::kXai);
  const ExperimentResult r = run_experiment(c);
  double ca = 0;
  std::int64_t flips = 0;
  for (const RunResult& run : r.runs) {
    ca += run.metrics.ca;
    flips += run.metrics.stats.suggestions_accepted;
  }
  EXPECT_NEAR(r.mean.ca, ca / 3, 1e-12);
  EXPECT_EQ(r.mean.stats.suggestions_accepted, flips);
}

TEST(Experiment, RatesArePooledShares) {
  InteractionStats s;
  s.slc_agreements = 6;
  s.slc_skeptical = 3;
  s.slc_quiet_disagreements = 1;
  s.suggestions_accepted = 1;
  s.suggestions_declined = 2;
  const InteractionRates r = InteractionRates::from(s);
  EXPECT_DOUBLE_EQ(r.agreement, 0.6);
  EXPECT_DOUBLE_EQ(r.skepticism, 0.3);
  EXPECT_DOUBLE_EQ(r.disagreement, 0.1);
  EXPECT_DOUBLE_EQ(r.accepted, 1.0 / 3);
  EXPECT_TRUE(std::isnan(InteractionRates::from(InteractionStats{}).agreement));
}

TEST(Experiment, TooFewRowsIsAnError) {
  ExperimentConfig c = synthetic_config("all", UserKind::kReal, Policy::kRandom);
  c.sizes.stream = 5000;
  EXPECT_THROW(run_once(c, 0), Error);
}

}  // namespace
}  // namespace coevo
