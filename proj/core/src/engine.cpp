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


#include "coevo/engine.hpp"

#include <algorithm>

#include "coevo/random.hpp"

namespace coevo {

using nlohmann::json;

namespace {

std::string labels_to_string(const std::vector<Label>& labels) {
  std::string out;
  out.reserve(labels.size());
  for (Label l : labels) out += to_token(l);
  return out;
}

std::vector<Label> labels_from_string(const std::string& s) {
  std::vector<Label> out;
  out.reserve(s.size());
  for (char c : s) out.push_back(label_from_token(std::string_view(&c, 1)));
  return out;
}

json records_to_json(const std::vector<Record>& records) {
  json out = json::array();
  for (const Record& r : records) out.push_back(r.values);
  return out;
}

std::vector<Record> records_from_json(const json& j) {
  std::vector<Record> out;
  out.reserve(j.size());
  for (const auto& r : j) out.push_back(Record{r.get<std::vector<double>>()});
  return out;
}

std::string describe_violations(const std::vector<RuleViolation>& violations) {
  std::string msg = "invalid rule set:";
  for (const auto& v : violations) msg += " [" + std::string(to_string(v.kind)) + "] " + v.message + ";";
  return msg;
}

}  // namespace

Session::Session(std::shared_ptr<const Schema> schema, SessionConfig config, RuleSet rules, EfdtModel model,
                 std::vector<Record> pool)
    : schema_(std::move(schema)),
      config_(std::move(config)),
      rules_(std::move(rules)),
      model_(std::move(model)),
      pool_(std::move(pool)) {
  require(schema_ != nullptr, ErrorCode::kInvalidArgument, "session needs a schema");
  config_.validate();
  const auto violations = validate_ruleset(rules_, *schema_);
  require(violations.empty(), ErrorCode::kValidation, describe_violations(violations));
  require(model_.schema() == *schema_, ErrorCode::kInvalidArgument, "model schema differs from session schema");
}

Session Session::create(std::shared_ptr<const Schema> schema, SessionConfig config, RuleSet rules,
                        const LabeledSet& pretrain) {
  EfdtModel model = retrain_from_scratch(schema, config.model, pretrain.records, pretrain.labels);
  return Session(std::move(schema), std::move(config), std::move(rules), std::move(model), pretrain.records);
}

void Session::log(std::string type, std::optional<std::size_t> record, json payload) {
  events_.push_back(Event{events_.size(), std::move(type), record, std::move(payload), op_ts_});
}

Outcome Session::submit_label(const Record& x, Label user_label, const std::optional<std::string>& client_key) {
  require(!pending_, ErrorCode::kConflict, "a prompt is pending; respond to it first");
  require(!complete(), ErrorCode::kConflict, "session is complete");
  schema_->check_record(x);
  if (client_key) {
    require(!client_keys_.contains(*client_key), ErrorCode::kConflict, "client key already used: " + *client_key);
  }
  op_ts_ = forced_ts_ ? *forced_ts_ : clock_ ? clock_() : static_cast<std::int64_t>(events_.size());

  const std::size_t index = records_.size();
  json payload = {{"values", schema_->record_to_json(x)}, {"label", std::string(to_token(user_label))}};
  if (client_key) {
    payload["client_key"] = *client_key;
    client_keys_[*client_key] = events_.size();
  }
  log("label", index, std::move(payload));

  const Prediction prediction = model_.predict(x);
  current_ = Current{x, user_label, prediction.label};

  Outcome out;
  const auto rule_label = config_.checks.irc ? match_rule(rules_, x) : std::nullopt;
  if (rule_label) {
    stats_.irc_decisions += 1;
    if (*rule_label != user_label) {
      stats_.irc_overrides += 1;
      out.notices.push_back({"rule_noncompliance", "decision overridden by an ideal rule: label " +
                                                       schema_->label_name(*rule_label) + " is mandatory"});
    }
    Outcome f = finalize(*rule_label, Provenance::kIrc);
    f.notices.insert(f.notices.begin(), out.notices.begin(), out.notices.end());
    out = std::move(f);
  } else if (const SimilarityIndex::Group* group =
                 config_.checks.ifc ? similarity_.lookup(project(x, schema_->sensitive)) : nullptr) {
    if (group->label != user_label) {
      stats_.ifc_conflicts += 1;
      pending_ = IfcConflict{index, user_label, group->label, group->members};
      out.prompt = pending_;
    } else {
      out = finalize(user_label, Provenance::kUser);
    }
  } else if (config_.checks.slc) {
    const Label suggested = prediction.label;
    if (suggested == user_label) {
      stats_.slc_agreements += 1;
      out = finalize(user_label, Provenance::kUser);
    } else {
      const double score = skepticism_score(prediction.confidence, ledger_.ea(Agent::kModel, suggested),
                                            prediction.probability(user_label), ledger_.ea(Agent::kUser, user_label));
      if (is_skeptical(score, config_.skepticism_threshold)) {
        stats_.slc_skeptical += 1;
        pending_ = SlcOfferExplanation{index, suggested, user_label, score};
        out.prompt = pending_;
      } else {
        stats_.slc_quiet_disagreements += 1;
        out = finalize(user_label, Provenance::kUser);
      }
    }
  } else {
    out = finalize(user_label, Provenance::kUser);
  }
  out.complete = complete();
  log("outcome", index, outcome_to_json(out, *schema_));
  return out;
}

Outcome Session::respond(const Response& response) {
  require(pending_.has_value(), ErrorCode::kConflict, "no prompt is pending");
  require(prompt_kind(*pending_) == response_kind(response), ErrorCode::kConflict,
          "response kind '" + std::string(response_kind(response)) + "' does not match pending prompt '" +
              std::string(prompt_kind(*pending_)) + "'");
  if (const auto* gfc = std::get_if<GfcResponse>(&response)) {
    // Validate before logging so a rejected selection leaves no trace.
    const auto& plan = std::get<GfcReview>(*pending_).plan;
    std::vector<Label> scratch(final_labels_);
    apply_gfc(scratch, plan, gfc->dn_accepted, gfc->pp_accepted);
  }
  op_ts_ = forced_ts_ ? *forced_ts_ : clock_ ? clock_() : static_cast<std::int64_t>(events_.size());
  const std::optional<std::size_t> record =
      current_ ? std::optional<std::size_t>(records_.size()) : std::nullopt;
  log("response", record, response_to_json(response));

  Prompt prompt = std::move(*pending_);
  pending_.reset();
  Outcome out;

  if (auto* ifc = std::get_if<IfcConflict>(&prompt)) {
    if (std::get<IfcResponse>(response).choice == IfcResponse::Choice::kChangeCurrent) {
      stats_.ifc_changed_current += 1;
      out = finalize(ifc->past_label, Provenance::kIfc);
    } else {
      stats_.ifc_relabeled_past += 1;
      for (std::size_t i : ifc->affected) final_labels_[i] = ifc->user_label;
      similarity_.relabel(project(current_->x, schema_->sensitive), ifc->user_label);
      retrain();
      out = finalize(ifc->user_label, Provenance::kIfc);
      out.notices.insert(out.notices.begin(),
                         Notice{"ifc_relabeled", std::to_string(ifc->affected.size()) +
                                                     " past record(s) relabeled; model retrained"});
    }
  } else if (auto* offer = std::get_if<SlcOfferExplanation>(&prompt)) {
    SlcSuggestion suggestion{offer->record, offer->suggested, offer->user_label, offer->score, std::nullopt};
    if (std::get<ExplanationResponse>(response).want) {
      stats_.explanations_requested += 1;
      suggestion.explanation = build_explanation();
      latest_explanation_ = json{{"record", offer->record},
                                 {"suggested", std::string(to_token(offer->suggested))},
                                 {"user_label", std::string(to_token(offer->user_label))},
                                 {"explanation", suggestion.explanation->to_json(*schema_)}};
    }
    pending_ = std::move(suggestion);
    out.prompt = pending_;
  } else if (auto* suggestion = std::get_if<SlcSuggestion>(&prompt)) {
    if (std::get<SuggestionResponse>(response).accept) {
      stats_.suggestions_accepted += 1;
      out = finalize(suggestion->suggested, Provenance::kSlcAccepted);
    } else {
      stats_.suggestions_declined += 1;
      out = finalize(suggestion->user_label, Provenance::kUser);
    }
  } else {
    const auto& plan = std::get<GfcReview>(prompt).plan;
    const auto& sel = std::get<GfcResponse>(response);
    const bool changed = apply_gfc(final_labels_, plan, sel.dn_accepted, sel.pp_accepted);
    const std::int64_t flips = static_cast<std::int64_t>(sel.dn_accepted.size() + sel.pp_accepted.size());
    stats_.gfc_flips += flips;
    if (config_.checks.ifc) {
      for (auto list : {&sel.dn_accepted, &sel.pp_accepted}) {
        for (std::size_t i : *list) similarity_.relabel(project(records_[i], schema_->sensitive), final_labels_[i]);
      }
    }
    if (changed) retrain();
    const auto after = disc(records_, final_labels_, schema_->sensitive, schema_->discriminated);
    out.notices.push_back({"gfc_applied", std::to_string(flips) + " label(s) flipped; disc " +
                                              std::to_string(plan.disc_before) + " -> " +
                                              (after ? std::to_string(*after) : std::string("undefined"))});
  }
  out.complete = complete();
  log("outcome", record, outcome_to_json(out, *schema_));
  return out;
}

Outcome Session::finalize(Label y, Provenance provenance) {
  require(current_.has_value(), ErrorCode::kInternal, "finalize without a current record");
  Current c = std::move(*current_);
  current_.reset();
  const std::size_t index = records_.size();
  if (config_.checks.ifc) similarity_.add(project(c.x, schema_->sensitive), y, index);
  records_.push_back(c.x);
  final_labels_.push_back(y);
  model_labels_.push_back(c.model_label);
  user_labels_.push_back(c.user_label);
  decisions_.push_back(y);
  provenance_.push_back(provenance);
  ledger_.record_outcome(c.user_label, c.model_label, y);
  model_.learn_one(c.x, y);

  Outcome out;
  out.finalized = Finalized{index, y, provenance};
  if (config_.checks.gfc && records_.size() % config_.gfc_period == 0) schedule_gfc(out);
  if (records_.size() >= config_.stop_after && !pending_) {
    out.notices.push_back({"session_complete", std::to_string(records_.size()) + " records labeled"});
  }
  return out;
}

std::vector<bool> Session::gfc_eligible() const {
  std::vector<bool> eligible(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    bool ok = provenance_[i] != Provenance::kIrc && provenance_[i] != Provenance::kIfc;
    if (ok && config_.checks.ifc) {
      // Flipping one member of a similarity group would create unfair couples.
      const auto* group = similarity_.lookup(project(records_[i], schema_->sensitive));
      ok = group != nullptr && group->members.size() == 1;
    }
    eligible[i] = ok;
  }
  return eligible;
}

void Session::schedule_gfc(Outcome& out) {
  auto plan = plan_gfc(records_, final_labels_, gfc_eligible(), model_);
  if (!plan) {
    out.notices.push_back({"gfc_skipped", "insufficient data: a sensitive group has no records"});
    return;
  }
  if (plan->empty()) {
    out.notices.push_back({"gfc_empty_plan", "no relabeling needed; disc " + std::to_string(plan->disc_before)});
    return;
  }
  stats_.gfc_reviews += 1;
  pending_ = GfcReview{std::move(*plan)};
  out.prompt = pending_;
}

void Session::retrain() {
  model_ = retrain_from_scratch(schema_, config_.model, records_, final_labels_);
  stats_.retrains += 1;
}

Explanation Session::build_explanation() const {
  const Current& c = *current_;
  Explanation e;
  e.logic = logic_explanation(model_, c.x);
  if (config_.explanation_source == InstanceSource::kReal) {
    e.instances = real_instances(model_, records_, c.x, c.model_label, c.user_label, config_.explanation_size);
  } else {
    std::vector<Record> pool = pool_;
    pool.insert(pool.end(), records_.begin(), records_.end());
    e.instances = synthetic_instances(model_, pool, c.x, c.model_label, c.user_label, config_.explanation_size,
                                      derive_seed(config_.seed, records_.size()));
  }
  return e;
}

std::optional<json> Session::outcome_for_client_key(const std::string& key) const {
  auto it = client_keys_.find(key);
  if (it == client_keys_.end()) return std::nullopt;
  const std::uint64_t next = it->second + 1;
  if (next >= events_.size()) return std::nullopt;
  return std::optional<json>(events_[next].payload);
}

std::optional<double> Session::preview_gfc(std::span<const std::size_t> dn_accepted,
                                           std::span<const std::size_t> pp_accepted) const {
  require(pending_ && std::holds_alternative<GfcReview>(*pending_), ErrorCode::kConflict,
          "no group fairness review is pending");
  return coevo::preview_gfc(records_, final_labels_, std::get<GfcReview>(*pending_).plan, dn_accepted, pp_accepted,
                            schema_->sensitive, schema_->discriminated);
}

json Session::snapshot() const {
  json events = json::array();
  for (const Event& e : events_) events.push_back(e.to_json());
  json current = nullptr;
  if (current_) {
    current = {{"values", current_->x.values},
               {"user_label", std::string(to_token(current_->user_label))},
               {"model_label", std::string(to_token(current_->model_label))}};
  }
  json provenance = json::array();
  for (Provenance p : provenance_) provenance.push_back(std::string(to_string(p)));
  return {{"version", kWireVersion},
          {"schema", schema_->to_json()},
          {"config", config_.to_json()},
          {"rules", rules_.to_json(*schema_)},
          {"model", model_.to_json()},
          {"pool", records_to_json(pool_)},
          {"records", records_to_json(records_)},
          {"final_labels", labels_to_string(final_labels_)},
          {"model_labels", labels_to_string(model_labels_)},
          {"user_labels", labels_to_string(user_labels_)},
          {"decisions", labels_to_string(decisions_)},
          {"provenance", std::move(provenance)},
          {"ledger", ledger_.to_json()},
          {"stats", stats_.to_json()},
          {"current", std::move(current)},
          {"pending", pending_ ? prompt_to_json(*pending_, *schema_) : json(nullptr)},
          {"latest_explanation", latest_explanation_ ? *latest_explanation_ : json(nullptr)},
          {"events", std::move(events)}};
}

void Session::rebuild_similarity_index() {
  similarity_ = SimilarityIndex{};
  if (!config_.checks.ifc) return;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    similarity_.add(project(records_[i], schema_->sensitive), final_labels_[i], i);
  }
}

Session Session::restore(const json& image) {
  try {
    require(image.at("version").get<int>() == kWireVersion, ErrorCode::kCorrupt, "unsupported snapshot version");
    auto schema = std::make_shared<const Schema>(Schema::from_json(image.at("schema")));
    SessionConfig config = SessionConfig::from_json(image.at("config"));
    RuleSet rules = RuleSet::from_json(image.at("rules"), *schema);
    EfdtModel model = EfdtModel::from_json(image.at("model"), schema);
    Session s(schema, std::move(config), std::move(rules), std::move(model), records_from_json(image.at("pool")));
    s.records_ = records_from_json(image.at("records"));
    s.final_labels_ = labels_from_string(image.at("final_labels").get<std::string>());
    s.model_labels_ = labels_from_string(image.at("model_labels").get<std::string>());
    s.user_labels_ = labels_from_string(image.at("user_labels").get<std::string>());
    s.decisions_ = labels_from_string(image.at("decisions").get<std::string>());
    for (const auto& p : image.at("provenance")) s.provenance_.push_back(provenance_from_string(p.get<std::string>()));
    const std::size_t n = s.records_.size();
    require(s.final_labels_.size() == n && s.model_labels_.size() == n && s.user_labels_.size() == n &&
                s.decisions_.size() == n && s.provenance_.size() == n,
            ErrorCode::kCorrupt, "snapshot sets have different lengths");
    for (const Record& r : s.records_) schema->check_record(r);
    s.ledger_ = AccuracyLedger::from_json(image.at("ledger"));
    s.stats_ = InteractionStats::from_json(image.at("stats"));
    if (!image.at("current").is_null()) {
      const json& c = image.at("current");
      s.current_ = Current{Record{c.at("values").get<std::vector<double>>()},
                           label_from_token(c.at("user_label").get<std::string>()),
                           label_from_token(c.at("model_label").get<std::string>())};
    }
    if (!image.at("pending").is_null()) s.pending_ = prompt_from_json(image.at("pending"), *schema);
    if (!image.at("latest_explanation").is_null()) s.latest_explanation_ = image.at("latest_explanation");
    for (const auto& e : image.at("events")) {
      s.events_.push_back(Event::from_json(e));
      const Event& ev = s.events_.back();
      require(ev.seq == s.events_.size() - 1, ErrorCode::kCorrupt, "event sequence has gaps");
      if (ev.type == "label" && ev.payload.contains("client_key")) {
        s.client_keys_[ev.payload.at("client_key").get<std::string>()] = ev.seq;
      }
    }
    s.rebuild_similarity_index();
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kCorrupt, std::string("corrupt snapshot: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorrupt) throw;
    fail(ErrorCode::kCorrupt, std::string("corrupt snapshot: ") + e.what());
  }
}

void Session::apply_event(const Event& event) {
  require(event.seq == events_.size() || event.type == "outcome", ErrorCode::kCorrupt,
          "event " + std::to_string(event.seq) + " out of order");
  struct ForcedTs {
    std::optional<std::int64_t>& slot;
    ~ForcedTs() { slot.reset(); }
  } guard{forced_ts_};
  forced_ts_ = event.ts;
  try {
    if (event.type == "label") {
      const json& p = event.payload;
      std::optional<std::string> key;
      if (p.contains("client_key")) key = p.at("client_key").get<std::string>();
      submit_label(schema_->record_from_json(p.at("values")), label_from_token(p.at("label").get<std::string>()),
                   key);
    } else if (event.type == "response") {
      respond(response_from_json(event.payload));
    } else if (event.type == "outcome") {
      require(event.seq < events_.size() && events_[event.seq].type == "outcome" &&
                  events_[event.seq].payload == event.payload,
              ErrorCode::kCorrupt, "replayed outcome differs from the log at event " + std::to_string(event.seq));
    } else {
      fail(ErrorCode::kCorrupt, "unknown event type: '" + event.type + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kCorrupt, std::string("malformed event payload: ") + e.what());
  }
}

Session replay(const json& genesis, std::span<const Event> events) {
  Session s = Session::restore(genesis);
  for (const Event& e : events) s.apply_event(e);
  return s;
}

}  // namespace coevo
