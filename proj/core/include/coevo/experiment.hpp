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


#ifndef COEVO_EXPERIMENT_HPP_
#define COEVO_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/dataset.hpp"
#include "coevo/engine.hpp"
#include "coevo/simulated_user.hpp"

namespace coevo {

// A cleaned dataset with its ideal rules, as found next to each other on disk.
struct DatasetBundle {
  std::string name;
  std::shared_ptr<const Dataset> data;
  RuleSet rules;
  std::vector<std::string> warnings;  // from cleaning
};

// Loads `csv` described by the `schema` sidecar and, when given, `rules`.
DatasetBundle load_bundle(const std::filesystem::path& csv, const std::filesystem::path& schema,
                          const std::optional<std::filesystem::path>& rules);
// <dir>/<name>.csv with <name>.schema.json and <name>.rules.json (if present).
DatasetBundle load_named_bundle(const std::filesystem::path& dir, const std::string& name);

// Check combinations compared in the ablation and baseline tables.
struct NamedChecks {
  std::string name;
  ChecksEnabled checks;
};

// none, oIRC, oIFC, oGFC, SL (skeptical learning only), FRANK (every check).
const std::vector<NamedChecks>& named_check_sets();
std::optional<ChecksEnabled> checks_by_name(std::string_view name);

struct ExperimentConfig {
  std::shared_ptr<const Dataset> data;  // cleaned, fully labeled
  RuleSet rules;
  UserKind user = UserKind::kReal;
  Policy policy = Policy::kRandom;
  SessionConfig session;  // session.seed is replaced per repeat
  UserBehavior behavior;
  SplitSizes sizes;
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: hardware concurrency
};

// Skeptical-learning interaction rates, pooled over the records that reached
// that stage (agreement, skepticism, quiet disagreement) and over the
// suggestions answered (accepted, declined). NaN when undefined.
struct InteractionRates {
  double agreement = 0;
  double skepticism = 0;
  double disagreement = 0;
  double accepted = 0;
  double declined = 0;

  static InteractionRates from(const InteractionStats& stats);
};

struct MetricsReport {
  double ca = 0;  // agreement of the final labels with the ground truth
  double ma = 0;  // model accuracy on the test split
  double cd = 0;  // disc of the final labels
  double md = 0;  // disc of the model's test predictions
  double uc = 0;  // unfair couples among the final labels
  std::vector<double> ca_series;  // after each streamed record
  std::vector<double> cd_series;
  InteractionStats stats;
  InteractionRates rates;

  nlohmann::json to_json(bool with_series = false) const;
};

struct RunResult {
  MetricsReport metrics;
  std::uint64_t seed = 0;
  nlohmann::json final_snapshot;  // only when requested
};

struct ExperimentResult {
  MetricsReport mean;  // element-wise average over repeats; stats are summed
  std::vector<RunResult> runs;
};

// Streams the split through one session with a simulated user answering
// every prompt.
RunResult run_once(const ExperimentConfig& config, std::uint64_t seed, bool keep_snapshot = false);

ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace coevo

#endif  // COEVO_EXPERIMENT_HPP_
