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


#ifndef COEVO_SIMULATED_USER_HPP_
#define COEVO_SIMULATED_USER_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include "coevo/dataset.hpp"
#include "coevo/engine.hpp"
#include "coevo/oracles.hpp"
#include "coevo/random.hpp"

namespace coevo {

enum class UserKind { kReal, kAbsentMinded, kCoin, kBayesian, kSimilarity };
enum class Policy { kAccept, kDecline, kRandom, kXai };

std::string_view to_string(UserKind kind);
std::string_view to_string(Policy policy);
UserKind user_kind_from_string(std::string_view s);
Policy policy_from_string(std::string_view s);

struct UserBehavior {
  double absent_minded_accuracy = 0.75;
  double ifc_change_probability = 0.80;  // otherwise relabel the past records
  double gfc_fraction = 0.25;            // share of each list relabeled
  bool gfc_whole_lists = false;          // take the share of every candidate, not just the shown ones
  std::size_t knn_k = 5;
};

class SimulatedUser {
 public:
  // `oracle_train` fits the Naive Bayes / KNN oracles for the model-based kinds.
  SimulatedUser(UserKind kind, Policy policy, std::uint64_t seed, std::shared_ptr<const Schema> schema,
                const LabeledSet& oracle_train, UserBehavior behavior = {});

  UserKind kind() const { return kind_; }
  Policy policy() const { return policy_; }

  Label label(const Record& x, Label ground_truth);
  // The user's own judgement of an arbitrary record (oracle kinds only).
  Label judge(const Record& x) const;

  bool wants_explanation(const SlcOfferExplanation& offer);
  bool accepts(const SlcSuggestion& suggestion);
  IfcResponse resolve(const IfcConflict& conflict);
  GfcResponse review(const GfcReview& review) const;

  Response respond(const Prompt& prompt);

 private:
  UserKind kind_;
  Policy policy_;
  UserBehavior behavior_;
  Rng rng_;
  std::optional<NaiveBayes> bayes_;
  std::optional<Knn> knn_;
};

}  // namespace coevo

#endif  // COEVO_SIMULATED_USER_HPP_
