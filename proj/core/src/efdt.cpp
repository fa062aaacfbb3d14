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

#include "coevo/efdt.hpp"

#include <algorithm>
#include <cmath>

#include "numfmt.hpp"

namespace coevo {

using nlohmann::json;

namespace {

double entropy(std::int64_t neg, std::int64_t pos) {
  const double n = static_cast<double>(neg + pos);
  if (n <= 0) return 0.0;
  double h = 0.0;
  for (std::int64_t c : {neg, pos}) {
    if (c > 0) {
      const double p = static_cast<double>(c) / n;
      h -= p * std::log2(p);
    }
  }
  return h;
}

double information_gain(const ClassCounts& parent, const std::vector<ClassCounts>& branches) {
  const double n = static_cast<double>(total(parent));
  if (n <= 0) return 0.0;
  double children = 0.0;
  for (const auto& b : branches) {
    const double nb = static_cast<double>(total(b));
    if (nb > 0) children += nb / n * entropy(b[0], b[1]);
  }
  return entropy(parent[0], parent[1]) - children;
}

std::size_t nonempty_branches(const std::vector<ClassCounts>& branches) {
  return static_cast<std::size_t>(
      std::count_if(branches.begin(), branches.end(), [](const ClassCounts& b) { return total(b) > 0; }));
}

std::string counts_text(const ClassCounts& c) {
  return "[-:" + std::to_string(c[0]) + " +:" + std::to_string(c[1]) + "]";
}

}  // namespace

void EfdtConfig::validate() const {
  require(delta > 0 && delta < 1, ErrorCode::kInvalidArgument, "delta must be in (0,1)");
  require(grace_period >= 1, ErrorCode::kInvalidArgument, "grace_period must be >= 1");
  require(tie_threshold >= 0, ErrorCode::kInvalidArgument, "tie_threshold must be >= 0");
  require(reeval_period >= 1, ErrorCode::kInvalidArgument, "reeval_period must be >= 1");
  require(laplace >= 0, ErrorCode::kInvalidArgument, "laplace must be >= 0");
  require(max_bins >= 2, ErrorCode::kInvalidArgument, "max_bins must be >= 2");
}

json EfdtConfig::to_json() const {
  return {{"delta", delta},
          {"grace_period", grace_period},
          {"tie_threshold", tie_threshold},
          {"reeval_period", reeval_period},
          {"laplace", laplace},
          {"max_bins", max_bins},
          {"default_label", std::string(to_token(default_label))},
          {"leaf_split", leaf_split == LeafSplitRule::kVersusNull ? "null" : "runner_up"}};
}

EfdtConfig EfdtConfig::from_json(const json& j) {
  EfdtConfig c;
  c.delta = j.value("delta", c.delta);
  c.grace_period = j.value("grace_period", c.grace_period);
  c.tie_threshold = j.value("tie_threshold", c.tie_threshold);
  c.reeval_period = j.value("reeval_period", c.reeval_period);
  c.laplace = j.value("laplace", c.laplace);
  c.max_bins = j.value("max_bins", c.max_bins);
  if (j.contains("default_label")) c.default_label = label_from_token(j.at("default_label").get<std::string>());
  if (j.contains("leaf_split")) {
    const std::string rule = j.at("leaf_split").get<std::string>();
    require(rule == "null" || rule == "runner_up", ErrorCode::kInvalidArgument, "leaf_split must be null or runner_up");
    c.leaf_split = rule == "null" ? LeafSplitRule::kVersusNull : LeafSplitRule::kVersusRunnerUp;
  }
  c.validate();
  return c;
}

double hoeffding_bound(double value_range, double delta, double n) {
  require(n >= 1, ErrorCode::kInvalidArgument, "hoeffding_bound requires n >= 1");
  return std::sqrt(value_range * value_range * std::log(1.0 / delta) / (2.0 * n));
}

Prediction predict_from_counts(const ClassCounts& counts, double laplace) {
  Prediction p;
  const double denom = static_cast<double>(total(counts)) + 2.0 * laplace;
  if (denom <= 0) return p;
  const double pos = (static_cast<double>(counts[1]) + laplace) / denom;
  p.probabilities = {1.0 - pos, pos};
  p.label = pos > p.probabilities[0] ? Label::kPositive : Label::kNegative;
  p.confidence = p.probability(p.label);
  return p;
}

std::string_view to_string(TestOp op) {
  switch (op) {
    case TestOp::kEq: return "=";
    case TestOp::kLe: return "<=";
    case TestOp::kGt: return ">";
  }
  return "?";
}

bool PathStep::satisfied_by(const Record& r) const {
  switch (op) {
    case TestOp::kEq: return r[attribute] == value;
    case TestOp::kLe: return r[attribute] <= value;
    case TestOp::kGt: return r[attribute] > value;
  }
  return false;
}

EfdtModel::EfdtModel(std::shared_ptr<const Schema> schema, EfdtConfig config)
    : schema_(std::move(schema)), config_(config) {
  require(schema_ != nullptr, ErrorCode::kInvalidArgument, "model requires a schema");
  config_.validate();
  root_ = make_node({0, 0});
}

EfdtModel::Node EfdtModel::make_node(const ClassCounts& seed) const {
  Node n;
  n.class_counts = seed;
  n.categorical_stats.resize(schema_->size());
  n.numeric_stats.resize(schema_->size());
  for (std::size_t a = 0; a < schema_->size(); ++a) {
    if ((*schema_)[a].categorical()) n.categorical_stats[a].assign((*schema_)[a].categories.size(), ClassCounts{0, 0});
  }
  return n;
}

void EfdtModel::update_statistics(Node& node, const Record& x, Label y) const {
  const std::size_t yi = index_of(y);
  for (std::size_t a = 0; a < schema_->size(); ++a) {
    if ((*schema_)[a].categorical()) {
      node.categorical_stats[a][static_cast<std::size_t>(x[a])][yi] += 1;
    } else {
      auto& obs = node.numeric_stats[a];
      auto it = std::upper_bound(obs.begin(), obs.end(), x[a],
                                 [](double v, const Observation& o) { return v < o.value; });
      obs.insert(it, Observation{x[a], y});
    }
  }
  node.stats_seen += 1;
}

bool EfdtModel::best_for_attribute(const Node& node, std::size_t attribute, Candidate& out) const {
  const Attribute& attr = (*schema_)[attribute];
  if (attr.categorical()) {
    const auto& branches = node.categorical_stats[attribute];
    if (nonempty_branches(branches) < 2) return false;
    ClassCounts parent{0, 0};
    for (const auto& b : branches) {
      parent[0] += b[0];
      parent[1] += b[1];
    }
    out.attribute = attribute;
    out.threshold = 0;
    out.branches = branches;
    out.gain = information_gain(parent, branches);
    return true;
  }

  const auto& obs = node.numeric_stats[attribute];
  const std::size_t n = obs.size();
  if (n < 2 || obs.front().value == obs.back().value) return false;
  // prefix[i] = class counts of obs[0..i)
  std::vector<ClassCounts> prefix(n + 1, ClassCounts{0, 0});
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i];
    prefix[i + 1][index_of(obs[i].label)] += 1;
  }
  const ClassCounts parent = prefix[n];
  bool found = false;
  double last_threshold = 0;
  for (std::size_t b = 1; b < config_.max_bins; ++b) {
    const std::size_t pos = b * n / config_.max_bins;
    if (pos == 0 || pos >= n) continue;
    const double t = obs[pos - 1].value;
    if (t >= obs.back().value) continue;
    if (found && t == last_threshold) continue;
    // Everything equal to t goes left.
    const auto right_begin = std::upper_bound(obs.begin(), obs.end(), t,
                                              [](double v, const Observation& o) { return v < o.value; });
    const std::size_t left_n = static_cast<std::size_t>(right_begin - obs.begin());
    const ClassCounts left = prefix[left_n];
    const ClassCounts right{parent[0] - left[0], parent[1] - left[1]};
    std::vector<ClassCounts> branches = {left, right};
    const double gain = information_gain(parent, branches);
    if (!found || gain > out.gain) {
      out.attribute = attribute;
      out.threshold = t;
      out.gain = gain;
      out.branches = std::move(branches);
    }
    found = true;
    last_threshold = t;
  }
  return found;
}

std::vector<EfdtModel::Candidate> EfdtModel::rank_candidates(const Node& node) const {
  std::vector<Candidate> out;
  for (std::size_t a = 0; a < schema_->size(); ++a) {
    Candidate c;
    if (best_for_attribute(node, a, c)) out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& l, const Candidate& r) { return l.gain > r.gain; });
  return out;
}

double EfdtModel::current_split_gain(const Node& node) const {
  const std::size_t a = node.split_attribute;
  if ((*schema_)[a].categorical()) {
    const auto& branches = node.categorical_stats[a];
    ClassCounts parent{0, 0};
    for (const auto& b : branches) {
      parent[0] += b[0];
      parent[1] += b[1];
    }
    return information_gain(parent, branches);
  }
  ClassCounts left{0, 0};
  ClassCounts parent{0, 0};
  for (const auto& o : node.numeric_stats[a]) {
    parent[index_of(o.label)] += 1;
    if (o.value <= node.threshold) left[index_of(o.label)] += 1;
  }
  return information_gain(parent, {left, ClassCounts{parent[0] - left[0], parent[1] - left[1]}});
}

void EfdtModel::install(Node& node, const Candidate& c) {
  node.leaf = false;
  node.split_attribute = c.attribute;
  node.threshold = c.threshold;
  node.children.clear();
  // Children inherit their branch's class distribution for prediction; their
  // attribute statistics start empty.
  for (const auto& b : c.branches) node.children.push_back(make_node(b));
  ++structural_changes_;
}

void EfdtModel::attempt_split(Node& node) {
  node.since_check = 0;
  if (node.stats_seen == 0) return;
  auto candidates = rank_candidates(node);
  if (candidates.empty() || candidates.front().gain <= 0) return;
  const double best = candidates.front().gain;
  const double second = config_.leaf_split == LeafSplitRule::kVersusRunnerUp && candidates.size() > 1
                            ? std::max(candidates[1].gain, 0.0)
                            : 0.0;
  const double eps = hoeffding_bound(1.0, config_.delta, static_cast<double>(node.stats_seen));
  if (best - second > eps || eps < config_.tie_threshold) install(node, candidates.front());
}

void EfdtModel::reevaluate(Node& node) {
  node.since_check = 0;
  auto candidates = rank_candidates(node);
  const double eps = hoeffding_bound(1.0, config_.delta, static_cast<double>(node.stats_seen));
  const double current = current_split_gain(node);
  if (candidates.empty() || candidates.front().gain <= 0) {
    // The null split is best: retract when it beats the current split.
    if (0.0 - current > eps) {
      node.leaf = true;
      node.children.clear();
      ++structural_changes_;
    }
    return;
  }
  const Candidate& best = candidates.front();
  if (best.attribute != node.split_attribute && (best.gain - current > eps || eps < config_.tie_threshold)) {
    install(node, best);
  }
}

std::size_t EfdtModel::route(const Node& node, const Record& x) const {
  const double v = x[node.split_attribute];
  if ((*schema_)[node.split_attribute].categorical()) return static_cast<std::size_t>(v);
  return v <= node.threshold ? 0 : 1;
}

const EfdtModel::Node& EfdtModel::find_leaf(const Record& x) const {
  const Node* n = &root_;
  while (!n->leaf) n = &n->children[route(*n, x)];
  return *n;
}

void EfdtModel::learn_one(const Record& x, Label y) {
  schema_->check_record(x);
  ++learned_;
  Node* node = &root_;
  while (true) {
    node->class_counts[index_of(y)] += 1;
    update_statistics(*node, x, y);
    node->since_check += 1;
    if (node->leaf) {
      if (node->since_check >= config_.grace_period) attempt_split(*node);
      return;
    }
    if (node->since_check >= config_.reeval_period) {
      const std::int64_t before = structural_changes_;
      reevaluate(*node);
      // A rebuilt subtree was seeded from statistics that already include x.
      if (structural_changes_ != before) return;
    }
    node = &node->children[route(*node, x)];
  }
}

Prediction EfdtModel::predict(const Record& x) const {
  schema_->check_record(x);
  if (empty()) {
    Prediction p;
    p.label = config_.default_label;
    return p;
  }
  return predict_from_counts(find_leaf(x).class_counts, config_.laplace);
}

DecisionPath EfdtModel::decision_path(const Record& x) const {
  schema_->check_record(x);
  DecisionPath path;
  path.empty_tree = empty();
  const Node* n = &root_;
  while (!n->leaf) {
    PathStep step;
    step.attribute = n->split_attribute;
    if ((*schema_)[n->split_attribute].categorical()) {
      step.op = TestOp::kEq;
      step.value = x[n->split_attribute];
    } else {
      step.op = x[n->split_attribute] <= n->threshold ? TestOp::kLe : TestOp::kGt;
      step.value = n->threshold;
    }
    path.steps.push_back(step);
    n = &n->children[route(*n, x)];
  }
  path.leaf_counts = n->class_counts;
  return path;
}

namespace {

template <typename NodeT, typename Fn>
void visit(const NodeT& n, std::size_t depth, Fn&& fn) {
  fn(n, depth);
  for (const auto& c : n.children) visit(c, depth + 1, fn);
}

}  // namespace

std::size_t EfdtModel::node_count() const {
  std::size_t count = 0;
  visit(root_, 0, [&](const Node&, std::size_t) { ++count; });
  return count;
}

std::size_t EfdtModel::leaf_count() const {
  std::size_t count = 0;
  visit(root_, 0, [&](const Node& n, std::size_t) { count += n.leaf ? 1 : 0; });
  return count;
}

std::size_t EfdtModel::depth() const {
  std::size_t d = 0;
  visit(root_, 0, [&](const Node&, std::size_t depth) { d = std::max(d, depth); });
  return d;
}

ClassCounts EfdtModel::leaf_totals() const {
  ClassCounts c{0, 0};
  visit(root_, 0, [&](const Node& n, std::size_t) {
    if (n.leaf) {
      c[0] += n.class_counts[0];
      c[1] += n.class_counts[1];
    }
  });
  return c;
}

std::optional<std::size_t> EfdtModel::root_attribute() const {
  if (root_.leaf) return std::nullopt;
  return root_.split_attribute;
}

void EfdtModel::export_node(const Node& n, int depth, const std::string& branch, std::string& out) const {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += branch;
  out += " -> ";
  if (n.leaf) {
    out += "leaf " + counts_text(n.class_counts) + "\n";
    return;
  }
  const Attribute& attr = (*schema_)[n.split_attribute];
  out += "split " + attr.name;
  if (attr.categorical()) {
    out += " categorical ";
  } else {
    out += " numeric " + format_number(n.threshold) + " ";
  }
  out += counts_text(n.class_counts) + "\n";
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    std::string b;
    if (attr.categorical()) {
      b = attr.name + " = " + json(attr.categories[i]).dump();
    } else {
      b = attr.name + (i == 0 ? " <= " : " > ") + format_number(n.threshold);
    }
    export_node(n.children[i], depth + 1, b, out);
  }
}

std::string EfdtModel::export_structure() const {
  std::string out;
  export_node(root_, 0, "*", out);
  return out;
}

json EfdtModel::node_to_json(const Node& n) {
  json stats = json::array();
  for (std::size_t a = 0; a < n.categorical_stats.size(); ++a) {
    if (!n.categorical_stats[a].empty()) {
      json cs = json::array();
      for (const auto& c : n.categorical_stats[a]) cs.push_back({c[0], c[1]});
      stats.push_back(std::move(cs));
    } else {
      json values = json::array();
      std::string labels;
      for (const auto& o : n.numeric_stats[a]) {
        values.push_back(o.value);
        labels.push_back(o.label == Label::kPositive ? '1' : '0');
      }
      stats.push_back({{"v", std::move(values)}, {"y", std::move(labels)}});
    }
  }
  json j = {{"counts", {n.class_counts[0], n.class_counts[1]}},
            {"seen", n.stats_seen},
            {"since", n.since_check},
            {"stats", std::move(stats)},
            {"leaf", n.leaf}};
  if (!n.leaf) {
    j["attribute"] = n.split_attribute;
    j["threshold"] = n.threshold;
    json children = json::array();
    for (const auto& c : n.children) children.push_back(node_to_json(c));
    j["children"] = std::move(children);
  }
  return j;
}

EfdtModel::Node EfdtModel::node_from_json(const json& j) const {
  Node n = make_node({j.at("counts").at(0).get<std::int64_t>(), j.at("counts").at(1).get<std::int64_t>()});
  n.stats_seen = j.at("seen").get<std::int64_t>();
  n.since_check = j.at("since").get<std::int64_t>();
  const json& stats = j.at("stats");
  require(stats.size() == schema_->size(), ErrorCode::kCorrupt, "node statistics do not match schema");
  for (std::size_t a = 0; a < schema_->size(); ++a) {
    if ((*schema_)[a].categorical()) {
      require(stats[a].size() == n.categorical_stats[a].size(), ErrorCode::kCorrupt, "categorical statistics size");
      for (std::size_t v = 0; v < stats[a].size(); ++v) {
        n.categorical_stats[a][v] = {stats[a][v].at(0).get<std::int64_t>(), stats[a][v].at(1).get<std::int64_t>()};
      }
    } else {
      const auto& values = stats[a].at("v");
      const auto labels = stats[a].at("y").get<std::string>();
      require(values.size() == labels.size(), ErrorCode::kCorrupt, "numeric statistics size");
      for (std::size_t i = 0; i < values.size(); ++i) {
        n.numeric_stats[a].push_back({values[i].get<double>(), labels[i] == '1' ? Label::kPositive : Label::kNegative});
      }
    }
  }
  n.leaf = j.at("leaf").get<bool>();
  if (!n.leaf) {
    n.split_attribute = j.at("attribute").get<std::size_t>();
    require(n.split_attribute < schema_->size(), ErrorCode::kCorrupt, "split attribute out of range");
    n.threshold = j.at("threshold").get<double>();
    for (const auto& c : j.at("children")) n.children.push_back(node_from_json(c));
    const std::size_t expected =
        (*schema_)[n.split_attribute].categorical() ? (*schema_)[n.split_attribute].categories.size() : 2;
    require(n.children.size() == expected, ErrorCode::kCorrupt, "wrong child count");
  }
  return n;
}

json EfdtModel::to_json() const {
  return {{"config", config_.to_json()},
          {"learned", learned_},
          {"structural_changes", structural_changes_},
          {"root", node_to_json(root_)}};
}

EfdtModel EfdtModel::from_json(const json& j, std::shared_ptr<const Schema> schema) {
  try {
    EfdtModel m(std::move(schema), EfdtConfig::from_json(j.at("config")));
    m.learned_ = j.at("learned").get<std::int64_t>();
    m.structural_changes_ = j.at("structural_changes").get<std::int64_t>();
    m.root_ = m.node_from_json(j.at("root"));
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::kCorrupt, std::string("malformed model: ") + e.what());
  }
}

bool operator==(const EfdtModel& a, const EfdtModel& b) {
  return *a.schema_ == *b.schema_ && a.to_json() == b.to_json();
}

EfdtModel retrain_from_scratch(std::shared_ptr<const Schema> schema, const EfdtConfig& config,
                               std::span<const Record> records, std::span<const Label> labels) {
  require(records.size() == labels.size(), ErrorCode::kInvalidArgument,
          "retrain: " + std::to_string(records.size()) + " records but " + std::to_string(labels.size()) + " labels");
  EfdtModel model(std::move(schema), config);
  for (std::size_t i = 0; i < records.size(); ++i) model.learn_one(records[i], labels[i]);
  return model;
}

}  // namespace coevo
