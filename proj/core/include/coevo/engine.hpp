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


#ifndef COEVO_ENGINE_HPP_
#define COEVO_ENGINE_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/checks.hpp"
#include "coevo/dataset.hpp"
#include "coevo/efdt.hpp"
#include "coevo/explain.hpp"
#include "coevo/label.hpp"
#include "coevo/skepticism.hpp"

namespace coevo {

inline constexpr int kWireVersion = 1;

// Which check decided a record's final label.
enum class Provenance : std::uint8_t { kIrc, kIfc, kSlcAccepted, kUser };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct ChecksEnabled {
  bool irc = true;
  bool ifc = true;
  bool slc = true;
  bool gfc = true;

  static ChecksEnabled none() { return {false, false, false, false}; }
  // Comma-separated subset of irc,ifc,slc,gfc; "none" and "all" are accepted.
  static ChecksEnabled parse(std::string_view text);
  std::string to_string() const;
  friend bool operator==(const ChecksEnabled&, const ChecksEnabled&) = default;
};

struct SessionConfig {
  std::size_t gfc_period = 100;
  double skepticism_threshold = 0.05;
  ChecksEnabled checks;
  std::size_t stop_after = 2000;
  std::uint64_t seed = 0;
  std::size_t explanation_size = 5;
  InstanceSource explanation_source = InstanceSource::kSynthetic;
  EfdtConfig model;

  void validate() const;
  nlohmann::json to_json() const;
  static SessionConfig from_json(const nlohmann::json& j);
  friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

// ---------------------------------------------------------------------------
// Prompts and responses

struct IfcConflict {
  std::size_t record = 0;
  Label user_label = Label::kNegative;
  Label past_label = Label::kNegative;
  std::vector<std::size_t> affected;
};

struct SlcOfferExplanation {
  std::size_t record = 0;
  Label suggested = Label::kNegative;
  Label user_label = Label::kNegative;
  double score = 0;
};

struct Explanation {
  LogicExplanation logic;
  InstanceExplanation instances;

  nlohmann::json to_json(const Schema& schema) const;
  static Explanation from_json(const nlohmann::json& j, const Schema& schema);
};

struct SlcSuggestion {
  std::size_t record = 0;
  Label suggested = Label::kNegative;
  Label user_label = Label::kNegative;
  double score = 0;
  std::optional<Explanation> explanation;
};

struct GfcReview {
  GfcPlan plan;
};

using Prompt = std::variant<IfcConflict, SlcOfferExplanation, SlcSuggestion, GfcReview>;

std::string_view prompt_kind(const Prompt& p);

struct IfcResponse {
  enum class Choice { kChangeCurrent, kRelabelPast };
  Choice choice = Choice::kChangeCurrent;
};

struct ExplanationResponse {
  bool want = false;
};

struct SuggestionResponse {
  bool accept = false;
};

struct GfcResponse {
  std::vector<std::size_t> dn_accepted;
  std::vector<std::size_t> pp_accepted;
};

using Response = std::variant<IfcResponse, ExplanationResponse, SuggestionResponse, GfcResponse>;

// Same discriminator values as the prompt each response answers.
std::string_view response_kind(const Response& r);

struct Finalized {
  std::size_t index = 0;
  Label label = Label::kNegative;
  Provenance provenance = Provenance::kUser;
};

struct Notice {
  std::string code;
  std::string message;
};

struct Outcome {
  std::optional<Finalized> finalized;
  std::optional<Prompt> prompt;
  std::vector<Notice> notices;
  bool complete = false;

  bool has_notice(std::string_view code) const;
};

// Interaction counters. Agreement, quiet disagreement and skepticism are
// counted for records that reach the skeptical-learning stage.
struct InteractionStats {
  std::int64_t irc_decisions = 0;
  std::int64_t irc_overrides = 0;
  std::int64_t ifc_conflicts = 0;
  std::int64_t ifc_changed_current = 0;
  std::int64_t ifc_relabeled_past = 0;
  std::int64_t slc_agreements = 0;
  std::int64_t slc_quiet_disagreements = 0;
  std::int64_t slc_skeptical = 0;
  std::int64_t explanations_requested = 0;
  std::int64_t suggestions_accepted = 0;
  std::int64_t suggestions_declined = 0;
  std::int64_t gfc_reviews = 0;
  std::int64_t gfc_flips = 0;
  std::int64_t retrains = 0;

  nlohmann::json to_json() const;
  static InteractionStats from_json(const nlohmann::json& j);
};

// ---------------------------------------------------------------------------
// Wire format

nlohmann::json prompt_to_json(const Prompt& p, const Schema& schema);
Prompt prompt_from_json(const nlohmann::json& j, const Schema& schema);
nlohmann::json response_to_json(const Response& r);
Response response_from_json(const nlohmann::json& j);
nlohmann::json outcome_to_json(const Outcome& o, const Schema& schema);
Outcome outcome_from_json(const nlohmann::json& j, const Schema& schema);

// One line of the append-only session log. Inputs are "label" and
// "response"; every input is followed by its "outcome".
struct Event {
  std::uint64_t seq = 0;
  std::string type;
  std::optional<std::size_t> record;
  nlohmann::json payload;
  std::int64_t ts = 0;

  nlohmann::json to_json() const;
  static Event from_json(const nlohmann::json& j);
  friend bool operator==(const Event&, const Event&) = default;
};

// Timestamp source for events. The default is a logical clock (the event's
// sequence number) so simulated sessions stay reproducible.
using Clock = std::function<std::int64_t()>;

// ---------------------------------------------------------------------------
// Session

class Session {
 public:
  // Validates the rule set (kValidation listing every violation) and copies
  // `model` as the starting point. `pool` seeds the attribute marginals used
  // for synthetic explanations, together with every labeled record.
  Session(std::shared_ptr<const Schema> schema, SessionConfig config, RuleSet rules, EfdtModel model,
          std::vector<Record> pool);

  // Pretrains a fresh model on `pretrain` and uses its records as the pool.
  static Session create(std::shared_ptr<const Schema> schema, SessionConfig config, RuleSet rules,
                        const LabeledSet& pretrain);

  // The user labels a new record. Throws kConflict while a prompt is pending
  // or once the session is complete.
  Outcome submit_label(const Record& x, Label user_label, const std::optional<std::string>& client_key = {});
  // Answers the pending prompt. Throws kConflict on a kind mismatch.
  Outcome respond(const Response& response);

  // Outcome JSON of an earlier label submitted with this key, if any.
  std::optional<nlohmann::json> outcome_for_client_key(const std::string& key) const;

  // Disc after hypothetically applying the given flips of the pending review.
  std::optional<double> preview_gfc(std::span<const std::size_t> dn_accepted,
                                    std::span<const std::size_t> pp_accepted) const;

  const std::optional<Prompt>& pending() const { return pending_; }
  bool complete() const { return !pending_ && records_.size() >= config_.stop_after; }
  std::size_t size() const { return records_.size(); }

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }
  const SessionConfig& config() const { return config_; }
  const RuleSet& rules() const { return rules_; }
  const EfdtModel& model() const { return model_; }
  const AccuracyLedger& ledger() const { return ledger_; }
  const InteractionStats& stats() const { return stats_; }
  const std::vector<Record>& records() const { return records_; }
  const std::vector<Label>& final_labels() const { return final_labels_; }
  const std::vector<Label>& model_labels() const { return model_labels_; }
  const std::vector<Label>& user_labels() const { return user_labels_; }
  const std::vector<Label>& decisions() const { return decisions_; }
  const std::vector<Provenance>& provenance() const { return provenance_; }
  const std::vector<Event>& events() const { return events_; }
  const std::optional<nlohmann::json>& latest_explanation() const { return latest_explanation_; }
  // Record awaiting a final label while a record-level prompt is pending.
  const Record* current_record() const { return current_ ? &current_->x : nullptr; }

  // Records eligible for group-fairness relabeling.
  std::vector<bool> gfc_eligible() const;

  void set_clock(Clock clock) { clock_ = std::move(clock); }

  // Lossless image: configuration, sets, model, ledger, pending prompt and
  // event log. Keys are sorted, so equal sessions dump to equal bytes.
  nlohmann::json snapshot() const;
  static Session restore(const nlohmann::json& image);

  // Re-executes a logged input event with its original timestamp. Outcome
  // events are checked against the regenerated outcome (kCorrupt on drift).
  void apply_event(const Event& event);

 private:
  struct Current {
    Record x;
    Label user_label = Label::kNegative;
    Label model_label = Label::kNegative;
  };

  Outcome finalize(Label y, Provenance provenance);
  void schedule_gfc(Outcome& out);
  void retrain();
  void log(std::string type, std::optional<std::size_t> record, nlohmann::json payload);
  Explanation build_explanation() const;
  void rebuild_similarity_index();

  std::shared_ptr<const Schema> schema_;
  SessionConfig config_;
  RuleSet rules_;
  EfdtModel model_;
  std::vector<Record> pool_;

  std::vector<Record> records_;       // X'
  std::vector<Label> final_labels_;   // Y', relabeled by fairness checks
  std::vector<Label> model_labels_;   // model predictions at arrival
  std::vector<Label> user_labels_;    // user proposals
  std::vector<Label> decisions_;      // final label of each round, never relabeled
  std::vector<Provenance> provenance_;
  AccuracyLedger ledger_;
  SimilarityIndex similarity_;
  InteractionStats stats_;

  std::optional<Current> current_;
  std::optional<Prompt> pending_;
  std::optional<nlohmann::json> latest_explanation_;

  std::vector<Event> events_;
  std::map<std::string, std::uint64_t> client_keys_;  // key -> seq of the label event
  Clock clock_;
  std::optional<std::int64_t> forced_ts_;
  std::int64_t op_ts_ = 0;
};

// Rebuilds a session from its genesis image and logged events.
Session replay(const nlohmann::json& genesis, std::span<const Event> events);

}  // namespace coevo

#endif  // COEVO_ENGINE_HPP_
