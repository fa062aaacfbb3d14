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

#ifndef COEVO_EFDT_HPP_
#define COEVO_EFDT_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/dataset.hpp"
#include "coevo/label.hpp"

namespace coevo {

// What a leaf's best split must beat by the Hoeffding bound: the null split
// (split as soon as the split is useful) or the runner-up attribute.
enum class LeafSplitRule { kVersusNull, kVersusRunnerUp };

// Hyperparameters of the incremental tree.
struct EfdtConfig {
  double delta = 1e-5;            // split confidence
  std::int64_t grace_period = 30; // records between split attempts at a leaf
  double tie_threshold = 0.05;
  std::int64_t reeval_period = 100;  // records between re-evaluations of an installed split
  double laplace = 1.0;
  std::size_t max_bins = 16;      // equal-frequency bins for numeric candidates
  Label default_label = Label::kNegative;
  LeafSplitRule leaf_split = LeafSplitRule::kVersusNull;

  void validate() const;
  nlohmann::json to_json() const;
  static EfdtConfig from_json(const nlohmann::json& j);
  friend bool operator==(const EfdtConfig&, const EfdtConfig&) = default;
};

// sqrt(R^2 ln(1/delta) / 2n)
double hoeffding_bound(double value_range, double delta, double n);

// Laplace-smoothed leaf frequencies; ties resolve to the negative label.
struct Prediction {
  Label label = Label::kNegative;
  double confidence = 0.5;
  std::array<double, 2> probabilities = {0.5, 0.5};

  double probability(Label l) const { return probabilities[index_of(l)]; }
};

Prediction predict_from_counts(const ClassCounts& counts, double laplace);

enum class TestOp { kEq, kLe, kGt };

std::string_view to_string(TestOp op);

struct PathStep {
  std::size_t attribute = 0;
  TestOp op = TestOp::kEq;
  double value = 0;  // category code for kEq, threshold otherwise

  bool satisfied_by(const Record& r) const;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct DecisionPath {
  std::vector<PathStep> steps;
  ClassCounts leaf_counts{};
  bool empty_tree = true;  // no record learned yet; leaf is the default leaf
};

// Extremely Fast Decision Tree: a Hoeffding tree that installs a split as
// soon as it is statistically justified and periodically re-evaluates
// installed splits, replacing them when a better one wins by the bound.
class EfdtModel {
 public:
  EfdtModel(std::shared_ptr<const Schema> schema, EfdtConfig config = {});

  Prediction predict(const Record& x) const;
  void learn_one(const Record& x, Label y);
  DecisionPath decision_path(const Record& x) const;

  // One node per line with stable ordering; see TreeRouter for the grammar.
  std::string export_structure() const;

  bool empty() const { return learned_ == 0; }
  std::int64_t records_learned() const { return learned_; }
  std::size_t node_count() const;
  std::size_t leaf_count() const;
  std::size_t depth() const;
  // Sum of class counts over all leaves.
  ClassCounts leaf_totals() const;
  // Number of split installs, replacements and retractions so far.
  std::int64_t structural_changes() const { return structural_changes_; }
  // Attribute tested at the root, if the root is split.
  std::optional<std::size_t> root_attribute() const;

  const EfdtConfig& config() const { return config_; }
  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }

  nlohmann::json to_json() const;
  static EfdtModel from_json(const nlohmann::json& j, std::shared_ptr<const Schema> schema);

  friend bool operator==(const EfdtModel& a, const EfdtModel& b);

 private:
  struct Observation {
    double value;
    Label label;
  };
  struct Node {
    ClassCounts class_counts{};
    std::int64_t stats_seen = 0;   // records reflected in the attribute statistics
    std::int64_t since_check = 0;  // records since the last attempt / re-evaluation
    // Per attribute: categorical -> per-code class counts; numeric -> sorted observations.
    std::vector<std::vector<ClassCounts>> categorical_stats;
    std::vector<std::vector<Observation>> numeric_stats;
    bool leaf = true;
    std::size_t split_attribute = 0;
    double threshold = 0;  // numeric splits: left branch is value <= threshold
    std::vector<Node> children;
  };
  struct Candidate {
    std::size_t attribute = 0;
    double threshold = 0;
    double gain = 0;
    std::vector<ClassCounts> branches;
  };

  Node make_node(const ClassCounts& seed) const;
  void update_statistics(Node& node, const Record& x, Label y) const;
  std::vector<Candidate> rank_candidates(const Node& node) const;
  bool best_for_attribute(const Node& node, std::size_t attribute, Candidate& out) const;
  double current_split_gain(const Node& node) const;
  void install(Node& node, const Candidate& c);
  void attempt_split(Node& node);
  void reevaluate(Node& node);
  std::size_t route(const Node& node, const Record& x) const;
  const Node& find_leaf(const Record& x) const;

  static nlohmann::json node_to_json(const Node& n);
  Node node_from_json(const nlohmann::json& j) const;
  void export_node(const Node& n, int depth, const std::string& branch, std::string& out) const;

  std::shared_ptr<const Schema> schema_;
  EfdtConfig config_;
  Node root_;
  std::int64_t learned_ = 0;
  std::int64_t structural_changes_ = 0;
};

// Fresh model after learn_one over the records in order.
EfdtModel retrain_from_scratch(std::shared_ptr<const Schema> schema, const EfdtConfig& config,
                               std::span<const Record> records, std::span<const Label> labels);

// Rebuilds a routing-only tree from export_structure() text.
//
// Grammar, one node per line, children indented two spaces under their parent:
//   line   := indent branch " -> " node
//   branch := "*" | attr " = " quoted | attr " <= " number | attr " > " number
//   node   := "leaf [-:" int " +:" int "]"
//           | "split " attr (" categorical" | " numeric " number) " [-:" int " +:" int "]"
// Categorical children appear in domain order; numeric children as <=, >.
class TreeRouter {
 public:
  static TreeRouter parse(std::string_view text, std::shared_ptr<const Schema> schema, double laplace = 1.0);

  Prediction predict(const Record& x) const;
  ClassCounts leaf_counts(const Record& x) const;

 private:
  struct Node {
    ClassCounts counts{};
    bool leaf = true;
    std::size_t attribute = 0;
    double threshold = 0;
    std::vector<std::size_t> children;  // indices into nodes_
  };
  std::shared_ptr<const Schema> schema_;
  double laplace_ = 1.0;
  std::vector<Node> nodes_;
};

}  // namespace coevo

#endif  // COEVO_EFDT_HPP_
