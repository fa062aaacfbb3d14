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


#include "coevo/experiment.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "coevo/random.hpp"

namespace coevo {

using nlohmann::json;

DatasetBundle load_bundle(const std::filesystem::path& csv, const std::filesystem::path& schema,
                          const std::optional<std::filesystem::path>& rules) {
  DatasetBundle b;
  b.name = csv.stem().string();
  auto data = std::make_shared<Dataset>(clean(load_csv(csv, SchemaSpec::load(schema)), &b.warnings));
  if (rules) b.rules = RuleSet::load(*rules, *data->schema);
  b.data = std::move(data);
  return b;
}

DatasetBundle load_named_bundle(const std::filesystem::path& dir, const std::string& name) {
  const auto csv = dir / (name + ".csv");
  require(std::filesystem::exists(csv), ErrorCode::kNotFound,
          "dataset not found: " + csv.string() + " (run tools/prepare_datasets.py)");
  const auto rules = dir / (name + ".rules.json");
  DatasetBundle b = load_bundle(csv, dir / (name + ".schema.json"),
                                std::filesystem::exists(rules) ? std::optional(rules) : std::nullopt);
  b.name = name;
  return b;
}

const std::vector<NamedChecks>& named_check_sets() {
  static const std::vector<NamedChecks> sets = {
      {"none", ChecksEnabled::none()},
      {"oIRC", {true, false, false, false}},
      {"oIFC", {false, true, false, false}},
      {"oGFC", {false, false, false, true}},
      {"SL", {false, false, true, false}},
      {"FRANK", {true, true, true, true}},
  };
  return sets;
}

std::optional<ChecksEnabled> checks_by_name(std::string_view name) {
  for (const auto& s : named_check_sets()) {
    if (s.name == name) return s.checks;
  }
  return std::nullopt;
}

namespace {

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(num) / static_cast<double>(den);
}

double accuracy(std::span<const Label> a, std::span<const Label> b) {
  if (a.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

double disc_or_nan(std::span<const Record> records, std::span<const Label> labels, const Schema& s) {
  return disc(records, labels, s.sensitive, s.discriminated).value_or(std::numeric_limits<double>::quiet_NaN());
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

InteractionStats& operator+=(InteractionStats& a, const InteractionStats& b) {
  a.irc_decisions += b.irc_decisions;
  a.irc_overrides += b.irc_overrides;
  a.ifc_conflicts += b.ifc_conflicts;
  a.ifc_changed_current += b.ifc_changed_current;
  a.ifc_relabeled_past += b.ifc_relabeled_past;
  a.slc_agreements += b.slc_agreements;
  a.slc_quiet_disagreements += b.slc_quiet_disagreements;
  a.slc_skeptical += b.slc_skeptical;
  a.explanations_requested += b.explanations_requested;
  a.suggestions_accepted += b.suggestions_accepted;
  a.suggestions_declined += b.suggestions_declined;
  a.gfc_reviews += b.gfc_reviews;
  a.gfc_flips += b.gfc_flips;
  a.retrains += b.retrains;
  return a;
}

}  // namespace

InteractionRates InteractionRates::from(const InteractionStats& s) {
  const std::int64_t reached = s.slc_agreements + s.slc_quiet_disagreements + s.slc_skeptical;
  const std::int64_t answered = s.suggestions_accepted + s.suggestions_declined;
  return {ratio(s.slc_agreements, reached), ratio(s.slc_skeptical, reached),
          ratio(s.slc_quiet_disagreements, reached), ratio(s.suggestions_accepted, answered),
          ratio(s.suggestions_declined, answered)};
}

json MetricsReport::to_json(bool with_series) const {
  json j = {{"CA", number_or_null(ca)},
            {"MA", number_or_null(ma)},
            {"CD", number_or_null(cd)},
            {"MD", number_or_null(md)},
            {"UC", uc},
            {"stats", stats.to_json()},
            {"rates",
             {{"agreement", number_or_null(rates.agreement)},
              {"skepticism", number_or_null(rates.skepticism)},
              {"disagreement", number_or_null(rates.disagreement)},
              {"accepted", number_or_null(rates.accepted)},
              {"declined", number_or_null(rates.declined)}}}};
  if (with_series) {
    json ca_s = json::array(), cd_s = json::array();
    for (double v : ca_series) ca_s.push_back(number_or_null(v));
    for (double v : cd_series) cd_s.push_back(number_or_null(v));
    j["series"] = {{"CA", std::move(ca_s)}, {"CD", std::move(cd_s)}};
  }
  return j;
}

RunResult run_once(const ExperimentConfig& config, std::uint64_t seed, bool keep_snapshot) {
  require(config.data != nullptr, ErrorCode::kInvalidArgument, "experiment needs a dataset");
  const Dataset& data = *config.data;
  const Schema& schema = *data.schema;
  const Splits splits = make_splits(data, seed, config.sizes);

  SessionConfig session_config = config.session;
  session_config.seed = seed;
  session_config.stop_after = std::min(session_config.stop_after, splits.stream.size());
  Session session = Session::create(data.schema, session_config, config.rules, splits.pretrain);
  SimulatedUser user(config.user, config.policy, derive_seed(seed, 0x05e7), data.schema, splits.oracle_train,
                     config.behavior);

  RunResult result;
  result.seed = seed;
  MetricsReport& m = result.metrics;
  const std::size_t n = session_config.stop_after;
  m.ca_series.reserve(n);
  m.cd_series.reserve(n);
  std::vector<Label> truth;
  truth.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Record& x = splits.stream.records[i];
    truth.push_back(splits.stream.labels[i]);
    Outcome out = session.submit_label(x, user.label(x, splits.stream.labels[i]));
    while (out.prompt) out = session.respond(user.respond(*out.prompt));
    m.ca_series.push_back(accuracy(session.final_labels(), truth));
    m.cd_series.push_back(disc_or_nan(session.records(), session.final_labels(), schema));
  }

  m.ca = accuracy(session.final_labels(), truth);
  m.cd = disc_or_nan(session.records(), session.final_labels(), schema);
  m.uc = static_cast<double>(uc_count(session.records(), session.final_labels(), schema.sensitive));
  std::vector<Label> predicted;
  predicted.reserve(splits.test.size());
  for (const Record& x : splits.test.records) predicted.push_back(session.model().predict(x).label);
  m.ma = accuracy(predicted, splits.test.labels);
  m.md = disc_or_nan(splits.test.records, predicted, schema);
  m.stats = session.stats();
  m.rates = InteractionRates::from(m.stats);
  if (keep_snapshot) result.final_snapshot = session.snapshot();
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  require(config.repeats >= 1, ErrorCode::kInvalidArgument, "repeats must be at least 1");
  ExperimentResult result;
  result.runs.resize(config.repeats);
  const std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < config.repeats; start += threads) {
    const std::size_t end = std::min(config.repeats, start + threads);
    std::vector<std::future<RunResult>> batch;
    for (std::size_t r = start; r < end; ++r) {
      batch.push_back(std::async(std::launch::async, [&config, r] {
        return run_once(config, derive_seed(config.seed, r));
      }));
    }
    for (std::size_t r = start; r < end; ++r) result.runs[r] = batch[r - start].get();
  }

  MetricsReport& mean = result.mean;
  const double k = static_cast<double>(config.repeats);
  const std::size_t len = result.runs.front().metrics.ca_series.size();
  mean.ca_series.assign(len, 0);
  mean.cd_series.assign(len, 0);
  for (const RunResult& run : result.runs) {
    const MetricsReport& m = run.metrics;
    mean.ca += m.ca / k;
    mean.ma += m.ma / k;
    mean.cd += m.cd / k;
    mean.md += m.md / k;
    mean.uc += m.uc / k;
    for (std::size_t i = 0; i < len && i < m.ca_series.size(); ++i) {
      mean.ca_series[i] += m.ca_series[i] / k;
      mean.cd_series[i] += m.cd_series[i] / k;
    }
    mean.stats += m.stats;
  }
  mean.rates = InteractionRates::from(mean.stats);
  return result;
}

}  // namespace coevo
