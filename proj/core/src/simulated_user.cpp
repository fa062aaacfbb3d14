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


#include "coevo/simulated_user.hpp"

#include <cmath>

namespace coevo {

std::string_view to_string(UserKind kind) {
  switch (kind) {
    case UserKind::kReal: return "real";
    case UserKind::kAbsentMinded: return "absent_minded";
    case UserKind::kCoin: return "coin";
    case UserKind::kBayesian: return "bayesian";
    case UserKind::kSimilarity: return "similarity";
  }
  return "?";
}

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::kAccept: return "accept";
    case Policy::kDecline: return "decline";
    case Policy::kRandom: return "random";
    case Policy::kXai: return "xai";
  }
  return "?";
}

UserKind user_kind_from_string(std::string_view s) {
  for (UserKind k : {UserKind::kReal, UserKind::kAbsentMinded, UserKind::kCoin, UserKind::kBayesian,
                     UserKind::kSimilarity}) {
    if (to_string(k) == s) return k;
  }
  fail(ErrorCode::kInvalidArgument,
       "unknown user kind: '" + std::string(s) + "' (expected real, absent_minded, coin, bayesian, similarity)");
}

Policy policy_from_string(std::string_view s) {
  for (Policy p : {Policy::kAccept, Policy::kDecline, Policy::kRandom, Policy::kXai}) {
    if (to_string(p) == s) return p;
  }
  fail(ErrorCode::kInvalidArgument,
       "unknown policy: '" + std::string(s) + "' (expected accept, decline, random, xai)");
}

SimulatedUser::SimulatedUser(UserKind kind, Policy policy, std::uint64_t seed, std::shared_ptr<const Schema> schema,
                             const LabeledSet& oracle_train, UserBehavior behavior)
    : kind_(kind), policy_(policy), behavior_(behavior), rng_(seed) {
  const bool oracle = kind == UserKind::kBayesian || kind == UserKind::kSimilarity;
  require(policy != Policy::kXai || oracle, ErrorCode::kInvalidArgument,
          "the xai policy needs a bayesian or similarity user: synthetic records have no ground truth");
  if (kind == UserKind::kBayesian) bayes_ = NaiveBayes::fit(schema, oracle_train.records, oracle_train.labels);
  if (kind == UserKind::kSimilarity) {
    knn_ = Knn::fit(schema, oracle_train.records, oracle_train.labels, behavior_.knn_k);
  }
}

Label SimulatedUser::judge(const Record& x) const {
  if (bayes_) return bayes_->predict(x);
  require(knn_.has_value(), ErrorCode::kInvalidArgument, "only oracle-backed users can judge records");
  return knn_->predict(x);
}

Label SimulatedUser::label(const Record& x, Label ground_truth) {
  switch (kind_) {
    case UserKind::kReal: return ground_truth;
    case UserKind::kAbsentMinded:
      return bernoulli(rng_, behavior_.absent_minded_accuracy) ? ground_truth : flip(ground_truth);
    case UserKind::kCoin: return bernoulli(rng_, 0.5) ? Label::kPositive : Label::kNegative;
    case UserKind::kBayesian:
    case UserKind::kSimilarity: return judge(x);
  }
  return ground_truth;
}

bool SimulatedUser::wants_explanation(const SlcOfferExplanation&) { return policy_ == Policy::kXai; }

bool SimulatedUser::accepts(const SlcSuggestion& suggestion) {
  switch (policy_) {
    case Policy::kAccept: return true;
    case Policy::kDecline: return false;
    case Policy::kRandom: return bernoulli(rng_, 0.5);
    case Policy::kXai: {
      require(suggestion.explanation.has_value(), ErrorCode::kInvalidArgument,
              "the xai policy needs an instance-based explanation");
      const InstanceExplanation& inst = suggestion.explanation->instances;
      std::size_t agree = 0;
      std::size_t total = 0;
      for (const auto* list : {&inst.examples, &inst.counterexamples}) {
        for (const Instance& i : *list) {
          agree += judge(i.record) == i.tag;
          ++total;
        }
      }
      return 2 * agree > total;
    }
  }
  return false;
}

IfcResponse SimulatedUser::resolve(const IfcConflict&) {
  return {bernoulli(rng_, behavior_.ifc_change_probability) ? IfcResponse::Choice::kChangeCurrent
                                                            : IfcResponse::Choice::kRelabelPast};
}

GfcResponse SimulatedUser::review(const GfcReview& review) const {
  GfcResponse r;
  auto take = [&](std::span<const GfcCandidate> shown, std::vector<std::size_t>& out) {
    const auto n = static_cast<std::size_t>(std::floor(behavior_.gfc_fraction * static_cast<double>(shown.size())));
    for (std::size_t i = 0; i < n; ++i) out.push_back(shown[i].index);
  };
  if (behavior_.gfc_whole_lists) {
    take(review.plan.dn_candidates, r.dn_accepted);
    take(review.plan.pp_candidates, r.pp_accepted);
  } else {
    take(review.plan.shown_dn(), r.dn_accepted);
    take(review.plan.shown_pp(), r.pp_accepted);
  }
  return r;
}

Response SimulatedUser::respond(const Prompt& prompt) {
  if (const auto* p = std::get_if<IfcConflict>(&prompt)) return resolve(*p);
  if (const auto* p = std::get_if<SlcOfferExplanation>(&prompt)) return ExplanationResponse{wants_explanation(*p)};
  if (const auto* p = std::get_if<SlcSuggestion>(&prompt)) return SuggestionResponse{accepts(*p)};
  return review(std::get<GfcReview>(prompt));
}

}  // namespace coevo
