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

#ifndef COEVO_SKEPTICISM_HPP_
#define COEVO_SKEPTICISM_HPP_

#include <array>
#include <cstdint>

#include <nlohmann/json.hpp>

#include "coevo/label.hpp"

namespace coevo {

enum class Agent : std::uint8_t { kUser = 0, kModel = 1 };

// Track record of each agent's proposals per label, and how many of them
// became the round's final decision. Counters only ever grow.
class AccuracyLedger {
 public:
  std::int64_t proposed(Agent agent, Label label) const { return proposed_[slot(agent, label)]; }
  std::int64_t accepted(Agent agent, Label label) const { return accepted_[slot(agent, label)]; }

  // Empirical accuracy. With no history the user starts trusted (1) and the
  // model untrusted (0).
  double ea(Agent agent, Label label) const;

  // One finished round: the user proposed `user`, the model `model`, and
  // `final_label` was decided before any later fairness relabeling.
  void record_outcome(Label user, Label model, Label final_label);

  nlohmann::json to_json() const;
  static AccuracyLedger from_json(const nlohmann::json& j);
  friend bool operator==(const AccuracyLedger&, const AccuracyLedger&) = default;

 private:
  static std::size_t slot(Agent agent, Label label) {
    return static_cast<std::size_t>(agent) * 2 + index_of(label);
  }
  std::array<std::int64_t, 4> proposed_{};
  std::array<std::int64_t, 4> accepted_{};
};

// c_model * ea_model - c_user * ea_user
double skepticism_score(double model_confidence, double model_ea, double user_confidence, double user_ea);

// Strictly greater than the threshold.
inline bool is_skeptical(double score, double threshold) { return score > threshold; }

}  // namespace coevo

#endif  // COEVO_SKEPTICISM_HPP_
