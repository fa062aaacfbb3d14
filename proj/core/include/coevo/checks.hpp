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

#ifndef COEVO_CHECKS_HPP_
#define COEVO_CHECKS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/dataset.hpp"
#include "coevo/label.hpp"

namespace coevo {

class EfdtModel;

// ---------------------------------------------------------------------------
// Ideal rules

enum class RuleOp { kEq, kNe, kLt, kLe, kGt, kGe };

std::string_view to_token(RuleOp op);
RuleOp rule_op_from_token(std::string_view token);

struct Condition {
  std::size_t attribute = 0;
  RuleOp op = RuleOp::kEq;
  double value = 0;  // category code for categorical attributes

  bool satisfied_by(const Record& r) const;
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct Rule {
  std::vector<Condition> conditions;
  Label label = Label::kPositive;

  bool covers(const Record& r) const;
  friend bool operator==(const Rule&, const Rule&) = default;
};

// Rule file layout:
//   {"rules": [{"conditions": [["capital_gain", ">", 9000]], "label": "+"}]}
// Operator tokens are exactly =, !=, <, <=, >, >=.
struct RuleSet {
  std::vector<Rule> rules;

  bool empty() const { return rules.empty(); }
  std::string render(std::size_t rule, const Schema& schema) const;
  nlohmann::json to_json(const Schema& schema) const;
  static RuleSet from_json(const nlohmann::json& j, const Schema& schema);
  static RuleSet load(const std::filesystem::path& path, const Schema& schema);
  friend bool operator==(const RuleSet&, const RuleSet&) = default;
};

enum class ViolationKind { kSensitiveAttribute, kOverlap, kTypeMismatch };

std::string_view to_string(ViolationKind kind);

struct RuleViolation {
  ViolationKind kind;
  std::size_t rule = 0;
  std::optional<std::size_t> other;  // second rule for overlaps
  std::string message;
};

// Empty result means the rule set is usable: no rule reads the sensitive
// attribute, operators fit the attribute kinds, and no record can satisfy two
// rules (decided symbolically over the attribute domains).
std::vector<RuleViolation> validate_ruleset(const RuleSet& rules, const Schema& schema);

// True when some record satisfies every condition of both rules.
bool jointly_satisfiable(const Rule& a, const Rule& b, const Schema& schema);

// Label of the covering rule, if any. Assumes a validated rule set.
std::optional<Label> match_rule(const RuleSet& rules, const Record& x);

// ---------------------------------------------------------------------------
// Individual fairness

// Attribute values other than the sensitive one, in schema order.
using SimilarityKey = std::vector<double>;

SimilarityKey project(const Record& x, std::size_t sensitive);

// Past records grouped by projected key. All members of a group share one
// label in the current final labels.
class SimilarityIndex {
 public:
  struct Group {
    Label label = Label::kNegative;
    std::vector<std::size_t> members;
  };

  const Group* lookup(const SimilarityKey& key) const;
  // Throws kConflict when the key already carries a different label.
  void add(const SimilarityKey& key, Label label, std::size_t record_index);
  // Changes the shared label of an existing group.
  void relabel(const SimilarityKey& key, Label label);
  std::size_t group_count() const { return groups_.size(); }

 private:
  std::map<SimilarityKey, Group> groups_;
};

// Pairs of records identical modulo the sensitive attribute with different labels.
std::int64_t uc_count(std::span<const Record> records, std::span<const Label> labels, std::size_t sensitive);

// ---------------------------------------------------------------------------
// Group fairness

struct GroupCounts {
  std::int64_t privileged_positive = 0;
  std::int64_t privileged_negative = 0;
  std::int64_t discriminated_positive = 0;
  std::int64_t discriminated_negative = 0;

  std::int64_t privileged() const { return privileged_positive + privileged_negative; }
  std::int64_t discriminated() const { return discriminated_positive + discriminated_negative; }
  std::int64_t total() const { return privileged() + discriminated(); }
};

GroupCounts count_groups(std::span<const Record> records, std::span<const Label> labels, std::size_t sensitive,
                         double discriminated);

// |PP|/|P| - |DP|/|D|; nullopt when either group is empty.
std::optional<double> disc(const GroupCounts& counts);
std::optional<double> disc(std::span<const Record> records, std::span<const Label> labels, std::size_t sensitive,
                           double discriminated);

struct GfcCandidate {
  std::size_t index = 0;
  double probability = 0;  // model probability of the label the flip would assign
};

// Relabeling proposal. When the observed discrimination is negative the two
// groups swap roles, so "dn" always means negatives of the disadvantaged
// group and "pp" positives of the advantaged one.
struct GfcPlan {
  double disc_before = 0;
  bool swapped = false;
  std::vector<GfcCandidate> dn_candidates;  // flip to +, most plausible first
  std::vector<GfcCandidate> pp_candidates;  // flip to -, most plausible first
  std::size_t target_dn_flips = 0;
  std::size_t target_pp_flips = 0;

  bool empty() const { return target_dn_flips == 0 && target_pp_flips == 0; }
  std::span<const GfcCandidate> shown_dn() const { return {dn_candidates.data(), target_dn_flips}; }
  std::span<const GfcCandidate> shown_pp() const { return {pp_candidates.data(), target_pp_flips}; }

  nlohmann::json to_json() const;
  static GfcPlan from_json(const nlohmann::json& j);
  friend bool operator==(const GfcPlan&, const GfcPlan&);
};

// Residual |disc| a plan aims for.
inline constexpr double kGfcTolerance = 0.01;

// Flip counts (dn, pp) for groups with the given positives and sizes, at most
// max_dn and max_pp. The pair keeps the number of positives within one record
// (|dn - pp| <= 1) and uses the fewest flips that bring |disc| to
// kGfcTolerance; ties go to the smaller residual, then to more dn flips. When
// no pair reaches the tolerance, the smallest residual wins. On large groups
// this approaches dn = round(r|D|) - |DP|, pp = |PP| - round(r|P|) for the
// overall positive rate r.
std::pair<std::size_t, std::size_t> gfc_targets(std::int64_t adv_pos, std::int64_t adv_n, std::int64_t dis_pos,
                                                std::int64_t dis_n, std::size_t max_dn, std::size_t max_pp);

// Candidates are eligible records of the two lists; ineligible records
// (decided by rules or individual fairness) are never candidates.
// `positive_probability` is the model's P(+) for every record.
std::optional<GfcPlan> plan_gfc(std::span<const Record> records, std::span<const Label> labels,
                                const std::vector<bool>& eligible, std::span<const double> positive_probability,
                                std::size_t sensitive, double discriminated);
std::optional<GfcPlan> plan_gfc(std::span<const Record> records, std::span<const Label> labels,
                                const std::vector<bool>& eligible, const EfdtModel& model);

// Applies accepted flips. Returns true when at least one label changed
// (the caller must then retrain). Throws when an index is not a candidate.
bool apply_gfc(std::span<Label> labels, const GfcPlan& plan, std::span<const std::size_t> dn_accepted,
               std::span<const std::size_t> pp_accepted);

// Discrimination after hypothetically applying the given flips.
std::optional<double> preview_gfc(std::span<const Record> records, std::span<const Label> labels,
                                  const GfcPlan& plan, std::span<const std::size_t> dn_accepted,
                                  std::span<const std::size_t> pp_accepted, std::size_t sensitive,
                                  double discriminated);

}  // namespace coevo

#endif  // COEVO_CHECKS_HPP_
