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


#include <algorithm>
#include <cmath>
#include <sstream>

#include "coevo/engine.hpp"

namespace coevo {

using nlohmann::json;

namespace {

json label_json(Label l) { return std::string(to_token(l)); }
Label label_at(const json& j, const char* key) { return label_from_token(j.at(key).get<std::string>()); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kIrc: return "IRC";
    case Provenance::kIfc: return "IFC";
    case Provenance::kSlcAccepted: return "SLC";
    case Provenance::kUser: return "USER";
  }
  return "?";
}

Provenance provenance_from_string(std::string_view s) {
  for (Provenance p : {Provenance::kIrc, Provenance::kIfc, Provenance::kSlcAccepted, Provenance::kUser}) {
    if (to_string(p) == s) return p;
  }
  fail(ErrorCode::kInvalidArgument, "unknown provenance: '" + std::string(s) + "'");
}

ChecksEnabled ChecksEnabled::parse(std::string_view text) {
  ChecksEnabled c = none();
  if (text == "none" || text.empty()) return c;
  if (text == "all") return {};
  std::stringstream in{std::string(text)};
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item == "irc") c.irc = true;
    else if (item == "ifc") c.ifc = true;
    else if (item == "slc") c.slc = true;
    else if (item == "gfc") c.gfc = true;
    else fail(ErrorCode::kInvalidArgument, "unknown check: '" + item + "' (expected irc, ifc, slc, gfc)");
  }
  return c;
}

std::string ChecksEnabled::to_string() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ",";
    out += name;
  };
  add(irc, "irc");
  add(ifc, "ifc");
  add(slc, "slc");
  add(gfc, "gfc");
  return out.empty() ? "none" : out;
}

void SessionConfig::validate() const {
  require(gfc_period >= 1, ErrorCode::kValidation, "gfc_period must be at least 1");
  require(std::isfinite(skepticism_threshold), ErrorCode::kValidation, "skepticism threshold must be finite");
  model.validate();
}

json SessionConfig::to_json() const {
  return {{"gfc_period", gfc_period},
          {"skepticism_threshold", skepticism_threshold},
          {"checks", checks.to_string()},
          {"stop_after", stop_after},
          {"seed", seed},
          {"explanation_size", explanation_size},
          {"explanation_source", std::string(coevo::to_string(explanation_source))},
          {"model", model.to_json()}};
}

SessionConfig SessionConfig::from_json(const json& j) {
  SessionConfig c;
  try {
    c.gfc_period = j.value("gfc_period", c.gfc_period);
    c.skepticism_threshold = j.value("skepticism_threshold", c.skepticism_threshold);
    if (j.contains("checks")) c.checks = ChecksEnabled::parse(j.at("checks").get<std::string>());
    c.stop_after = j.value("stop_after", c.stop_after);
    c.seed = j.value("seed", c.seed);
    c.explanation_size = j.value("explanation_size", c.explanation_size);
    if (j.contains("explanation_source")) {
      const std::string s = j.at("explanation_source").get<std::string>();
      require(s == "real" || s == "synthetic", ErrorCode::kInvalidArgument,
              "explanation_source must be real or synthetic");
      c.explanation_source = s == "real" ? InstanceSource::kReal : InstanceSource::kSynthetic;
    }
    if (j.contains("model")) c.model = EfdtConfig::from_json(j.at("model"));
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed session config: ") + e.what());
  }
  c.validate();
  return c;
}

json Explanation::to_json(const Schema& schema) const {
  return {{"logic", logic.to_json(schema)}, {"instances", instances.to_json(schema)}};
}

Explanation Explanation::from_json(const json& j, const Schema& schema) {
  return {LogicExplanation::from_json(j.at("logic"), schema), InstanceExplanation::from_json(j.at("instances"), schema)};
}

std::string_view prompt_kind(const Prompt& p) {
  return std::visit(Overloaded{[](const IfcConflict&) { return std::string_view("ifc_conflict"); },
                               [](const SlcOfferExplanation&) { return std::string_view("slc_offer_explanation"); },
                               [](const SlcSuggestion&) { return std::string_view("slc_suggestion"); },
                               [](const GfcReview&) { return std::string_view("gfc_review"); }},
                    p);
}

std::string_view response_kind(const Response& r) {
  return std::visit(Overloaded{[](const IfcResponse&) { return std::string_view("ifc_conflict"); },
                               [](const ExplanationResponse&) { return std::string_view("slc_offer_explanation"); },
                               [](const SuggestionResponse&) { return std::string_view("slc_suggestion"); },
                               [](const GfcResponse&) { return std::string_view("gfc_review"); }},
                    r);
}

bool Outcome::has_notice(std::string_view code) const {
  return std::any_of(notices.begin(), notices.end(), [&](const Notice& n) { return n.code == code; });
}

json prompt_to_json(const Prompt& p, const Schema& schema) {
  json j = std::visit(
      Overloaded{
          [](const IfcConflict& c) -> json {
            return {{"record", c.record},
                    {"user_label", label_json(c.user_label)},
                    {"past_label", label_json(c.past_label)},
                    {"affected", c.affected}};
          },
          [](const SlcOfferExplanation& c) -> json {
            return {{"record", c.record},
                    {"suggested", label_json(c.suggested)},
                    {"user_label", label_json(c.user_label)},
                    {"score", c.score}};
          },
          [&](const SlcSuggestion& c) -> json {
            return {{"record", c.record},
                    {"suggested", label_json(c.suggested)},
                    {"user_label", label_json(c.user_label)},
                    {"score", c.score},
                    {"explanation", c.explanation ? c.explanation->to_json(schema) : json(nullptr)}};
          },
          [](const GfcReview& c) -> json {
            auto shown = [](std::span<const GfcCandidate> list) {
              json out = json::array();
              for (const auto& x : list) out.push_back({{"index", x.index}, {"probability", x.probability}});
              return out;
            };
            return {{"plan", c.plan.to_json()},
                    {"disc_before", c.plan.disc_before},
                    {"shown_dn", shown(c.plan.shown_dn())},
                    {"shown_pp", shown(c.plan.shown_pp())}};
          }},
      p);
  j["kind"] = std::string(prompt_kind(p));
  return j;
}

Prompt prompt_from_json(const json& j, const Schema& schema) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ifc_conflict") {
      return IfcConflict{j.at("record").get<std::size_t>(), label_at(j, "user_label"), label_at(j, "past_label"),
                         j.at("affected").get<std::vector<std::size_t>>()};
    }
    if (kind == "slc_offer_explanation") {
      return SlcOfferExplanation{j.at("record").get<std::size_t>(), label_at(j, "suggested"),
                                 label_at(j, "user_label"), j.at("score").get<double>()};
    }
    if (kind == "slc_suggestion") {
      SlcSuggestion s{j.at("record").get<std::size_t>(), label_at(j, "suggested"), label_at(j, "user_label"),
                      j.at("score").get<double>(), std::nullopt};
      if (!j.at("explanation").is_null()) s.explanation = Explanation::from_json(j.at("explanation"), schema);
      return s;
    }
    if (kind == "gfc_review") return GfcReview{GfcPlan::from_json(j.at("plan"))};
    fail(ErrorCode::kInvalidArgument, "unknown prompt kind: '" + kind + "'");
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed prompt: ") + e.what());
  }
}

json response_to_json(const Response& r) {
  json j = std::visit(
      Overloaded{[](const IfcResponse& x) -> json {
                   return {{"choice", x.choice == IfcResponse::Choice::kChangeCurrent ? "change_current"
                                                                                       : "relabel_past"}};
                 },
                 [](const ExplanationResponse& x) -> json { return {{"want", x.want}}; },
                 [](const SuggestionResponse& x) -> json { return {{"accept", x.accept}}; },
                 [](const GfcResponse& x) -> json {
                   return {{"dn_accepted", x.dn_accepted}, {"pp_accepted", x.pp_accepted}};
                 }},
      r);
  j["kind"] = std::string(response_kind(r));
  return j;
}

Response response_from_json(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ifc_conflict") {
      const std::string choice = j.at("choice").get<std::string>();
      require(choice == "change_current" || choice == "relabel_past", ErrorCode::kInvalidArgument,
              "choice must be change_current or relabel_past");
      return IfcResponse{choice == "change_current" ? IfcResponse::Choice::kChangeCurrent
                                                    : IfcResponse::Choice::kRelabelPast};
    }
    if (kind == "slc_offer_explanation") return ExplanationResponse{j.at("want").get<bool>()};
    if (kind == "slc_suggestion") return SuggestionResponse{j.at("accept").get<bool>()};
    if (kind == "gfc_review") {
      return GfcResponse{j.value("dn_accepted", std::vector<std::size_t>{}),
                         j.value("pp_accepted", std::vector<std::size_t>{})};
    }
    fail(ErrorCode::kInvalidArgument, "unknown response kind: '" + kind + "'");
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed response: ") + e.what());
  }
}

json outcome_to_json(const Outcome& o, const Schema& schema) {
  json j;
  j["version"] = kWireVersion;
  j["finalized"] = o.finalized ? json{{"index", o.finalized->index},
                                      {"label", label_json(o.finalized->label)},
                                      {"provenance", std::string(to_string(o.finalized->provenance))}}
                               : json(nullptr);
  j["prompt"] = o.prompt ? prompt_to_json(*o.prompt, schema) : json(nullptr);
  json notices = json::array();
  for (const Notice& n : o.notices) notices.push_back({{"code", n.code}, {"message", n.message}});
  j["notices"] = std::move(notices);
  j["complete"] = o.complete;
  return j;
}

Outcome outcome_from_json(const json& j, const Schema& schema) {
  Outcome o;
  try {
    if (!j.at("finalized").is_null()) {
      const json& f = j.at("finalized");
      o.finalized = Finalized{f.at("index").get<std::size_t>(), label_at(f, "label"),
                              provenance_from_string(f.at("provenance").get<std::string>())};
    }
    if (!j.at("prompt").is_null()) o.prompt = prompt_from_json(j.at("prompt"), schema);
    for (const auto& n : j.at("notices")) {
      o.notices.push_back({n.at("code").get<std::string>(), n.at("message").get<std::string>()});
    }
    o.complete = j.at("complete").get<bool>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed outcome: ") + e.what());
  }
  return o;
}

json InteractionStats::to_json() const {
  return {{"irc_decisions", irc_decisions},
          {"irc_overrides", irc_overrides},
          {"ifc_conflicts", ifc_conflicts},
          {"ifc_changed_current", ifc_changed_current},
          {"ifc_relabeled_past", ifc_relabeled_past},
          {"slc_agreements", slc_agreements},
          {"slc_quiet_disagreements", slc_quiet_disagreements},
          {"slc_skeptical", slc_skeptical},
          {"explanations_requested", explanations_requested},
          {"suggestions_accepted", suggestions_accepted},
          {"suggestions_declined", suggestions_declined},
          {"gfc_reviews", gfc_reviews},
          {"gfc_flips", gfc_flips},
          {"retrains", retrains}};
}

InteractionStats InteractionStats::from_json(const json& j) {
  InteractionStats s;
  s.irc_decisions = j.at("irc_decisions").get<std::int64_t>();
  s.irc_overrides = j.at("irc_overrides").get<std::int64_t>();
  s.ifc_conflicts = j.at("ifc_conflicts").get<std::int64_t>();
  s.ifc_changed_current = j.at("ifc_changed_current").get<std::int64_t>();
  s.ifc_relabeled_past = j.at("ifc_relabeled_past").get<std::int64_t>();
  s.slc_agreements = j.at("slc_agreements").get<std::int64_t>();
  s.slc_quiet_disagreements = j.at("slc_quiet_disagreements").get<std::int64_t>();
  s.slc_skeptical = j.at("slc_skeptical").get<std::int64_t>();
  s.explanations_requested = j.at("explanations_requested").get<std::int64_t>();
  s.suggestions_accepted = j.at("suggestions_accepted").get<std::int64_t>();
  s.suggestions_declined = j.at("suggestions_declined").get<std::int64_t>();
  s.gfc_reviews = j.at("gfc_reviews").get<std::int64_t>();
  s.gfc_flips = j.at("gfc_flips").get<std::int64_t>();
  s.retrains = j.at("retrains").get<std::int64_t>();
  return s;
}

json Event::to_json() const {
  return {{"seq", seq}, {"type", type}, {"record", record ? json(*record) : json(nullptr)},
          {"payload", payload}, {"ts", ts}};
}

Event Event::from_json(const json& j) {
  Event e;
  try {
    e.seq = j.at("seq").get<std::uint64_t>();
    e.type = j.at("type").get<std::string>();
    if (!j.at("record").is_null()) e.record = j.at("record").get<std::size_t>();
    e.payload = j.at("payload");
    e.ts = j.at("ts").get<std::int64_t>();
  } catch (const json::exception& ex) {
    fail(ErrorCode::kCorrupt, std::string("malformed event: ") + ex.what());
  }
  return e;
}

}  // namespace coevo
