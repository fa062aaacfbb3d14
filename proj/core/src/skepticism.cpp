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

#include "coevo/skepticism.hpp"

#include "coevo/error.hpp"

namespace coevo {

double AccuracyLedger::ea(Agent agent, Label label) const {
  const std::int64_t p = proposed(agent, label);
  if (p == 0) return agent == Agent::kUser ? 1.0 : 0.0;
  return static_cast<double>(accepted(agent, label)) / static_cast<double>(p);
}

void AccuracyLedger::record_outcome(Label user, Label model, Label final_label) {
  proposed_[slot(Agent::kUser, user)] += 1;
  proposed_[slot(Agent::kModel, model)] += 1;
  if (user == final_label) accepted_[slot(Agent::kUser, user)] += 1;
  if (model == final_label) accepted_[slot(Agent::kModel, model)] += 1;
}

nlohmann::json AccuracyLedger::to_json() const {
  nlohmann::json j;
  for (Agent agent : {Agent::kUser, Agent::kModel}) {
    const char* name = agent == Agent::kUser ? "user" : "model";
    for (Label l : kAllLabels) {
      j[name][std::string(to_token(l))] = {{"proposed", proposed(agent, l)}, {"accepted", accepted(agent, l)}};
    }
  }
  return j;
}

AccuracyLedger AccuracyLedger::from_json(const nlohmann::json& j) {
  AccuracyLedger ledger;
  try {
    for (Agent agent : {Agent::kUser, Agent::kModel}) {
      const char* name = agent == Agent::kUser ? "user" : "model";
      for (Label l : kAllLabels) {
        const auto& entry = j.at(name).at(std::string(to_token(l)));
        const auto p = entry.at("proposed").get<std::int64_t>();
        const auto a = entry.at("accepted").get<std::int64_t>();
        require(0 <= a && a <= p, ErrorCode::kCorrupt, "ledger counters out of order");
        ledger.proposed_[slot(agent, l)] = p;
        ledger.accepted_[slot(agent, l)] = a;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kCorrupt, std::string("malformed ledger: ") + e.what());
  }
  return ledger;
}

double skepticism_score(double model_confidence, double model_ea, double user_confidence, double user_ea) {
  return model_confidence * model_ea - user_confidence * user_ea;
}

}  // namespace coevo
