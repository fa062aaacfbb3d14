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


#include "coevo/service/session_store.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "coevo/random.hpp"

namespace coevo::service {

namespace fs = std::filesystem;
using nlohmann::json;

struct SessionStore::Entry {
  std::mutex mu;
  std::string id;
  std::string dataset;
  std::int64_t created_at = 0;
  json request;
  std::shared_ptr<const DatasetBundle> bundle;
  Splits splits;
  bool streaming = true;
  std::unique_ptr<Session> session;
  std::size_t persisted = 0;  // events already on disk
  std::size_t since_snapshot = 0;
  fs::path dir;

  // Streaming sessions label the split's stream in order.
  std::size_t cursor() const {
    std::size_t n = 0;
    for (const Event& e : session->events()) n += e.type == "label";
    return n;
  }
};

namespace {

bool valid_name(const std::string& s) {
  if (s.empty() || s.size() > 64) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double accuracy(std::span<const Label> a, std::span<const Label> b) {
  if (a.empty()) return std::nan("");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hits += a[i] == b[i];
  return static_cast<double>(hits) / static_cast<double>(a.size());
}

Label parse_label(const json& j, const Schema& schema) {
  require(j.is_string(), ErrorCode::kInvalidArgument, "label must be a string");
  const std::string s = j.get<std::string>();
  if (s == "+" || s == schema.positive_name) return Label::kPositive;
  if (s == "-" || s == schema.negative_name) return Label::kNegative;
  fail(ErrorCode::kInvalidArgument, "unknown label '" + s + "'");
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  require(in.good(), ErrorCode::kIo, "cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kCorrupt, p.string() + ": " + e.what());
  }
}

void write_json_atomic(const fs::path& p, const json& j) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    require(out.good(), ErrorCode::kIo, "cannot write " + tmp.string());
    out << j.dump();
    out.flush();
    require(out.good(), ErrorCode::kIo, "write failed: " + tmp.string());
  }
  fs::rename(tmp, p);
}

// Reads complete lines only; a torn last line from a crash is dropped.
std::vector<Event> read_events(const fs::path& p) {
  std::vector<Event> out;
  std::ifstream in(p, std::ios::binary);
  if (!in) return out;
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::size_t start = 0;
  while (true) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) break;
    const std::string line = text.substr(start, nl - start);
    start = nl + 1;
    if (line.empty()) continue;
    try {
      out.push_back(Event::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      fail(ErrorCode::kCorrupt, p.string() + ": " + e.what());
    }
  }
  return out;
}

std::int64_t wall_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

SessionStore::SessionStore(StoreOptions options) : options_(std::move(options)) {
  if (!options_.clock) options_.clock = wall_ms;
  require(options_.snapshot_every >= 1, ErrorCode::kInvalidArgument, "snapshot_every must be at least 1");
  if (options_.state_dir) fs::create_directories(*options_.state_dir);
}

std::int64_t SessionStore::now() const { return options_.clock(); }

std::string SessionStore::new_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[24];
  std::snprintf(buf, sizeof buf, "s%04llx%012llx", static_cast<unsigned long long>(++id_counter_ & 0xffff),
                static_cast<unsigned long long>(rng() & 0xffffffffffffULL));
  return buf;
}

std::shared_ptr<const DatasetBundle> SessionStore::bundle(const std::string& name) {
  if (!valid_name(name)) throw ServiceError(ErrorCode::kNotFound, "unknown_dataset", "unknown dataset '" + name + "'");
  std::lock_guard lock(bundles_mu_);
  auto it = bundles_.find(name);
  if (it != bundles_.end()) return it->second;
  std::shared_ptr<const DatasetBundle> b;
  try {
    b = std::make_shared<const DatasetBundle>(load_named_bundle(options_.data_dir, name));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNotFound) throw;
    throw ServiceError(ErrorCode::kNotFound, "unknown_dataset", e.what());
  }
  bundles_.emplace(name, b);
  return b;
}

std::vector<std::string> SessionStore::dataset_names() const {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(options_.data_dir, ec)) {
    const std::string file = entry.path().filename().string();
    const std::string suffix = ".schema.json";
    if (file.size() <= suffix.size() || file.compare(file.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    const std::string name = file.substr(0, file.size() - suffix.size());
    if (fs::exists(options_.data_dir / (name + ".csv"))) out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> SessionStore::session_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, e] : sessions_) out.push_back(id);
  return out;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(ErrorCode::kNotFound, "unknown_session", "unknown session '" + id + "'");
  return it->second;
}

json SessionStore::create(const json& request) {
  require(request.is_object(), ErrorCode::kInvalidArgument, "request body must be a JSON object");
  require(request.contains("dataset") && request.at("dataset").is_string(), ErrorCode::kInvalidArgument,
          "dataset is required");
  auto e = std::make_shared<Entry>();
  e->dataset = request.at("dataset").get<std::string>();
  e->bundle = bundle(e->dataset);
  const Dataset& data = *e->bundle->data;
  const Schema& schema = *data.schema;

  SessionConfig config;
  RuleSet rules = e->bundle->rules;
  std::uint64_t split_seed = 0;
  try {
    if (request.contains("config")) config = SessionConfig::from_json(request.at("config"));
    split_seed = request.value("split_seed", config.seed);
    e->streaming = request.value("streaming", true);
  } catch (const json::exception& ex) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed request: ") + ex.what());
  }
  if (request.contains("rules")) {
    try {
      rules = RuleSet::from_json(request.at("rules"), schema);
    } catch (const Error& ex) {
      throw ServiceError(ErrorCode::kValidation, "rule_violations", ex.what(),
                          json::array({{{"kind", "malformed"}, {"message", ex.what()}}}));
    } catch (const json::exception& ex) {
      throw ServiceError(ErrorCode::kValidation, "rule_violations", ex.what(),
                          json::array({{{"kind", "malformed"}, {"message", ex.what()}}}));
    }
  }
  const auto violations = validate_ruleset(rules, schema);
  if (!violations.empty()) {
    json list = json::array();
    for (const auto& v : violations) {
      json item = {{"kind", to_string(v.kind)}, {"rule", v.rule}, {"message", v.message}};
      if (v.other) item["other"] = *v.other;
      list.push_back(std::move(item));
    }
    throw ServiceError(ErrorCode::kValidation, "rule_violations", "rule set rejected: " + std::to_string(violations.size()) +
                                                    " violation(s)",
                        std::move(list));
  }

  e->splits = make_splits(data, split_seed);
  if (e->streaming) config.stop_after = std::min(config.stop_after, e->splits.stream.size());
  config.validate();
  e->session = std::make_unique<Session>(Session::create(data.schema, config, rules, e->splits.pretrain));
  e->session->set_clock(options_.clock);
  e->created_at = now();
  e->request = {{"dataset", e->dataset},
                {"config", config.to_json()},
                {"rules", rules.to_json(schema)},
                {"split_seed", split_seed},
                {"streaming", e->streaming}};

  {
    std::unique_lock lock(mu_);
    do {
      e->id = new_id();
    } while (sessions_.count(e->id));
    sessions_.emplace(e->id, e);
  }
  std::lock_guard lock(e->mu);
  if (options_.state_dir) {
    e->dir = *options_.state_dir / e->id;
    fs::create_directories(e->dir);
    write_meta(*e);
    write_json_atomic(e->dir / "genesis.json", e->session->snapshot());
  }
  return summary_locked(*e);
}

void SessionStore::write_meta(const Entry& e) const {
  write_json_atomic(e.dir / "meta.json",
                    {{"id", e.id}, {"created_at", e.created_at}, {"request", e.request}});
}

void SessionStore::persist_new_events(Entry& e) {
  const auto& events = e.session->events();
  if (!options_.state_dir) {
    e.persisted = events.size();
    return;
  }
  if (e.persisted < events.size()) {
    std::ofstream out(e.dir / "events.ndjson", std::ios::app | std::ios::binary);
    require(out.good(), ErrorCode::kIo, "cannot append to the event log of " + e.id);
    for (std::size_t i = e.persisted; i < events.size(); ++i) out << events[i].to_json().dump() << '\n';
    out.flush();
    require(out.good(), ErrorCode::kIo, "event log write failed for " + e.id);
    e.since_snapshot += events.size() - e.persisted;
    e.persisted = events.size();
  }
  if (e.since_snapshot >= options_.snapshot_every) {
    write_json_atomic(e.dir / "snapshot.json", e.session->snapshot());
    e.since_snapshot = 0;
  }
}

std::size_t SessionStore::load_persisted() {
  if (!options_.state_dir) return 0;
  std::size_t loaded = 0;
  for (const auto& dir_entry : fs::directory_iterator(*options_.state_dir)) {
    if (!dir_entry.is_directory()) continue;
    const fs::path dir = dir_entry.path();
    if (!fs::exists(dir / "meta.json") || !fs::exists(dir / "genesis.json")) continue;
    const json meta = read_json(dir / "meta.json");
    auto e = std::make_shared<Entry>();
    e->id = meta.at("id").get<std::string>();
    e->created_at = meta.at("created_at").get<std::int64_t>();
    e->request = meta.at("request");
    e->dataset = e->request.at("dataset").get<std::string>();
    e->streaming = e->request.at("streaming").get<bool>();
    e->dir = dir;
    e->bundle = bundle(e->dataset);
    e->splits = make_splits(*e->bundle->data, e->request.at("split_seed").get<std::uint64_t>());

    const json base = fs::exists(dir / "snapshot.json") ? read_json(dir / "snapshot.json") : read_json(dir / "genesis.json");
    e->session = std::make_unique<Session>(Session::restore(base));
    const std::vector<Event> log = read_events(dir / "events.ndjson");
    const std::size_t start = e->session->events().size();
    require(log.size() >= start, ErrorCode::kCorrupt, "event log of " + e->id + " is shorter than its snapshot");
    for (std::size_t i = start; i < log.size(); ++i) e->session->apply_event(log[i]);
    e->session->set_clock(options_.clock);
    e->persisted = log.size();
    // A crash between an input and its outcome leaves the outcome unlogged.
    persist_new_events(*e);
    {
      std::unique_lock lock(mu_);
      sessions_[e->id] = e;
    }
    ++loaded;
  }
  return loaded;
}

json SessionStore::summary_locked(const Entry& e) const {
  const Session& s = *e.session;
  const Schema& schema = s.schema();
  json j = {{"id", e.id},
            {"dataset", e.dataset},
            {"created_at", e.created_at},
            {"streaming", e.streaming},
            {"config", s.config().to_json()},
            {"rules", s.rules().to_json(schema)},
            {"schema", schema.to_json()},
            {"status", s.pending() ? "awaiting_response" : s.complete() ? "complete" : "awaiting_label"},
            {"size", s.size()},
            {"stop_after", s.config().stop_after},
            {"complete", s.complete()},
            {"events", s.events().size()},
            {"ledger", s.ledger().to_json()},
            {"stats", s.stats().to_json()},
            {"pending", s.pending() ? prompt_to_json(*s.pending(), schema) : json(nullptr)},
            {"current_record", s.current_record() ? schema.record_to_json(*s.current_record()) : json(nullptr)},
            {"next", nullptr}};
  if (e.streaming && !s.pending() && !s.complete()) {
    const std::size_t c = e.cursor();
    if (c < e.splits.stream.size()) {
      j["next"] = {{"stream_index", c}, {"record", schema.record_to_json(e.splits.stream.records[c])}};
    }
  }
  return j;
}

json SessionStore::summary(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mu);
  return summary_locked(*e);
}

json SessionStore::post_label(const std::string& id, const json& body) {
  auto e = find(id);
  std::lock_guard lock(e->mu);
  Session& s = *e->session;
  const Schema& schema = s.schema();
  require(body.is_object(), ErrorCode::kInvalidArgument, "request body must be a JSON object");
  std::optional<std::string> key;
  if (body.contains("client_key")) {
    require(body.at("client_key").is_string(), ErrorCode::kInvalidArgument, "client_key must be a string");
    key = body.at("client_key").get<std::string>();
    if (auto prior = s.outcome_for_client_key(*key)) return *prior;
  }
  if (s.pending()) {
    throw ServiceError(ErrorCode::kConflict, "prompt_pending",
                       std::string("a ") + std::string(prompt_kind(*s.pending())) + " prompt is awaiting a response");
  }
  if (s.complete()) throw ServiceError(ErrorCode::kConflict, "session_complete", "the session is complete");
  require(body.contains("label"), ErrorCode::kInvalidArgument, "label is required");
  const Label label = parse_label(body.at("label"), schema);

  Record x;
  if (e->streaming) {
    const std::size_t c = e->cursor();
    if (c >= e->splits.stream.size()) throw ServiceError(ErrorCode::kConflict, "stream_exhausted", "stream exhausted");
    if (body.contains("stream_index") &&
        !(body.at("stream_index").is_number_unsigned() && body.at("stream_index").get<std::size_t>() == c)) {
      throw ServiceError(ErrorCode::kConflict, "stream_mismatch",
                         "stream_index must be the next record (" + std::to_string(c) + ")");
    }
    x = e->splits.stream.records[c];
    if (body.contains("record") && schema.record_from_json(body.at("record")) != x) {
      throw ServiceError(ErrorCode::kConflict, "stream_mismatch", "record differs from the next stream record");
    }
  } else {
    require(body.contains("record"), ErrorCode::kInvalidArgument, "record is required");
    x = schema.record_from_json(body.at("record"));
  }
  const Outcome out = s.submit_label(x, label, key);
  persist_new_events(*e);
  return outcome_to_json(out, schema);
}

json SessionStore::post_response(const std::string& id, const json& body) {
  auto e = find(id);
  std::lock_guard lock(e->mu);
  Response r;
  try {
    r = response_from_json(body);
  } catch (const json::exception& ex) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed response: ") + ex.what());
  }
  const auto& pending = e->session->pending();
  if (!pending) throw ServiceError(ErrorCode::kConflict, "no_prompt_pending", "no prompt is awaiting a response");
  if (prompt_kind(*pending) != response_kind(r)) {
    throw ServiceError(ErrorCode::kConflict, "response_kind_mismatch",
                       "pending prompt is " + std::string(prompt_kind(*pending)) + ", response is " +
                           std::string(response_kind(r)));
  }
  const Outcome out = e->session->respond(r);
  persist_new_events(*e);
  return outcome_to_json(out, e->session->schema());
}

json SessionStore::events(const std::string& id, std::uint64_t since, std::size_t limit) {
  auto e = find(id);
  std::lock_guard lock(e->mu);
  const auto& all = e->session->events();
  json page = json::array();
  std::uint64_t next = since;
  for (std::size_t i = since; i < all.size() && page.size() < limit; ++i) {
    page.push_back(all[i].to_json());
    next = i + 1;
  }
  return {{"events", std::move(page)}, {"next", next}, {"total", all.size()}};
}

json SessionStore::metrics(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mu);
  const Session& s = *e->session;
  const Schema& schema = s.schema();
  const auto cd = disc(s.records(), s.final_labels(), schema.sensitive, schema.discriminated);
  std::vector<Label> predicted;
  predicted.reserve(e->splits.test.size());
  for (const Record& x : e->splits.test.records) predicted.push_back(s.model().predict(x).label);
  const auto md = disc(e->splits.test.records, predicted, schema.sensitive, schema.discriminated);
  const AccuracyLedger& ledger = s.ledger();
  const InteractionRates rates = InteractionRates::from(s.stats());
  json j = {{"size", s.size()},
            {"CA", nullptr},
            {"MA", number_or_null(accuracy(predicted, e->splits.test.labels))},
            {"CD", cd ? json(*cd) : json(nullptr)},
            {"MD", md ? json(*md) : json(nullptr)},
            {"UC", uc_count(s.records(), s.final_labels(), schema.sensitive)},
            {"ledger", ledger.to_json()},
            {"ea",
             {{"user", {{"+", ledger.ea(Agent::kUser, Label::kPositive)}, {"-", ledger.ea(Agent::kUser, Label::kNegative)}}},
              {"model",
               {{"+", ledger.ea(Agent::kModel, Label::kPositive)}, {"-", ledger.ea(Agent::kModel, Label::kNegative)}}}}},
            {"stats", s.stats().to_json()},
            {"rates",
             {{"agreement", number_or_null(rates.agreement)},
              {"skepticism", number_or_null(rates.skepticism)},
              {"disagreement", number_or_null(rates.disagreement)},
              {"accepted", number_or_null(rates.accepted)},
              {"declined", number_or_null(rates.declined)}}}};
  // Final labels can be scored only when every record came from the stream.
  if (e->streaming && s.size() > 0) {
    std::span<const Label> truth(e->splits.stream.labels.data(), s.size());
    j["CA"] = number_or_null(accuracy(s.final_labels(), truth));
  }
  return j;
}

json SessionStore::latest_explanation(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mu);
  const auto& x = e->session->latest_explanation();
  if (!x) throw ServiceError(ErrorCode::kNotFound, "no_explanation", "no explanation has been produced in this session");
  return *x;
}

json SessionStore::preview_gfc(const std::string& id, const json& body) {
  auto e = find(id);
  std::lock_guard lock(e->mu);
  const Session& s = *e->session;
  if (!s.pending() || !std::holds_alternative<GfcReview>(*s.pending())) {
    throw ServiceError(ErrorCode::kConflict, "no_gfc_review", "no group-fairness review is pending");
  }
  std::vector<std::size_t> dn, pp;
  try {
    dn = body.value("dn_accepted", std::vector<std::size_t>{});
    pp = body.value("pp_accepted", std::vector<std::size_t>{});
  } catch (const json::exception& ex) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed preview request: ") + ex.what());
  }
  const auto after = s.preview_gfc(dn, pp);
  const auto& plan = std::get<GfcReview>(*s.pending()).plan;
  return {{"disc_before", plan.disc_before}, {"disc_after", after ? json(*after) : json(nullptr)}};
}

json SessionStore::snapshot(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mu);
  return e->session->snapshot();
}

}  // namespace coevo::service
