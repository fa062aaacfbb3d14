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
#include <numeric>

#include "coevo/experiment.hpp"
#include "coevo/explain.hpp"
#include "coevo/oracles.hpp"
#include "support/generators.hpp"

namespace coevo {
namespace {

TEST(NaiveBayes, SingleClassAlwaysWins) {
  const auto schema = testing::make_schema();
  Rng rng(1);
  const LabeledSet set = testing::random_labeled_set(*schema, 200, rng);
  const std::vector<Label> all_pos(set.size(), Label::kPositive);
  const NaiveBayes nb = NaiveBayes::fit(schema, set.records, all_pos);
  EXPECT_EQ(nb.prior(Label::kPositive), 1.0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(nb.predict(testing::random_record(*schema, rng)), Label::kPositive);
}

TEST(NaiveBayes, LearnsASeparableRule) {
  const auto schema = testing::make_schema();
  Rng rng(2);
  const LabeledSet train = testing::random_labeled_set(*schema, 2000, rng, 0.0);
  const LabeledSet test = testing::random_labeled_set(*schema, 500, rng, 0.0);
  const NaiveBayes nb = NaiveBayes::fit(schema, train.records, train.labels);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) hits += nb.predict(test.records[i]) == test.labels[i];
  EXPECT_GT(static_cast<double>(hits) / static_cast<double>(test.size()), 0.75);
}

TEST(Knn, OneNeighbourReturnsTheTrainingLabel) {
  const auto schema = testing::make_schema({2, 2, 3, 50});
  Rng rng(3);
  LabeledSet train = testing::random_labeled_set(*schema, 150, rng);
  const Knn knn = Knn::fit(schema, train.records, train.labels, 1);
  for (std::size_t i = 0; i < train.size(); ++i) {
    // Duplicates resolve to the first copy.
    std::size_t first = i;
    for (std::size_t j = 0; j < i; ++j) {
      if (train.records[j] == train.records[i]) {
        first = j;
        break;
      }
    }
    EXPECT_EQ(knn.predict(train.records[i]), train.labels[first]);
  }
}

// Sort all training records by (distance, index) and vote over the first k.
Label brute_knn(const Schema& schema, const LabeledSet& train, const Record& x, std::size_t k) {
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> d(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) d[i] = gower_distance(schema, train.records[i], x);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  std::size_t pos = 0;
  for (std::size_t i = 0; i < k; ++i) pos += train.labels[order[i]] == Label::kPositive;
  return 2 * pos > k ? Label::kPositive : Label::kNegative;
}

TEST(Knn, MatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto schema = testing::make_schema({3, 2, 4, 6});
    Rng rng(seed);
    const LabeledSet train = testing::random_labeled_set(*schema, 120, rng, 0.3);
    for (std::size_t k : {1u, 4u, 5u}) {
      const Knn knn = Knn::fit(schema, train.records, train.labels, k);
      for (int i = 0; i < 60; ++i) {
        const Record x = testing::random_record(*schema, rng);
        EXPECT_EQ(knn.predict(x), brute_knn(*schema, train, x, k)) << "seed " << seed << " k " << k;
      }
    }
  }
}

#ifdef COEVO_DATA_DIR
TEST(Oracles, AccurateOnAdult) {
  const std::filesystem::path dir = COEVO_DATA_DIR;
  if (!std::filesystem::exists(dir / "adult.csv")) GTEST_SKIP() << "adult.csv not present";
  const DatasetBundle b = load_named_bundle(dir, "adult");
  const Splits s = make_splits(*b.data, 0);
  const NaiveBayes nb = NaiveBayes::fit(b.data->schema, s.oracle_train.records, s.oracle_train.labels);
  const Knn knn = Knn::fit(b.data->schema, s.oracle_train.records, s.oracle_train.labels);
  std::size_t nb_hits = 0, knn_hits = 0;
  for (std::size_t i = 0; i < s.test.size(); ++i) {
    nb_hits += nb.predict(s.test.records[i]) == s.test.labels[i];
    knn_hits += knn.predict(s.test.records[i]) == s.test.labels[i];
  }
  const double n = static_cast<double>(s.test.size());
  EXPECT_GE(nb_hits / n, 0.70);
  EXPECT_GE(knn_hits / n, 0.70);
}
#endif

}  // namespace
}  // namespace coevo
