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

#ifndef COEVO_DATASET_HPP_
#define COEVO_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/label.hpp"

namespace coevo {

enum class AttributeKind { kCategorical, kNumeric };

std::string_view to_string(AttributeKind kind);

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::kNumeric;
  // Categorical domain; a record stores the position of its value here.
  std::vector<std::string> categories;
  // Observed numeric range.
  double min = 0.0;
  double max = 0.0;

  bool categorical() const { return kind == AttributeKind::kCategorical; }
  std::optional<std::size_t> category_code(std::string_view value) const;
  // Numeric range, or 0 for categorical attributes and constant columns.
  double range() const { return categorical() ? 0.0 : max - min; }
  friend bool operator==(const Attribute&, const Attribute&) = default;
};

// Attribute values aligned with Schema::attributes. Categorical values are
// stored as category codes; NaN marks a missing cell.
struct Record {
  std::vector<double> values;

  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
  bool complete() const;
  friend bool operator==(const Record&, const Record&) = default;
};

// Typed schema shared (read-only) by datasets, models and sessions.
class Schema {
 public:
  std::vector<Attribute> attributes;
  std::size_t sensitive = 0;        // index of the sensitive attribute
  double discriminated = 0;         // category code of the discriminated group
  std::string label_column = "label";
  std::string positive_name = "+";
  std::string negative_name = "-";

  std::size_t size() const { return attributes.size(); }
  const Attribute& operator[](std::size_t i) const { return attributes[i]; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t require_index(std::string_view name) const;

  const std::string& label_name(Label l) const {
    return l == Label::kPositive ? positive_name : negative_name;
  }
  bool in_discriminated_group(const Record& r) const {
    return r[sensitive] == discriminated;
  }

  // Throws kValidation if names collide, domains are empty, ranges are
  // inverted, or the sensitive attribute is not binary categorical.
  void validate() const;
  // Throws kInvalidArgument if the record does not conform.
  void check_record(const Record& r) const;

  std::string render_value(std::size_t attribute, double value) const;

  // Attribute-name -> value map (strings for categorical, numbers otherwise).
  nlohmann::json record_to_json(const Record& r) const;
  Record record_from_json(const nlohmann::json& j) const;

  nlohmann::json to_json() const;
  static Schema from_json(const nlohmann::json& j);

  friend bool operator==(const Schema&, const Schema&) = default;
};

// Sidecar description of a CSV file: which columns to read, their kinds, the
// label column with its two tokens, and the sensitive attribute.
struct SchemaSpec {
  struct Column {
    std::string name;
    AttributeKind kind = AttributeKind::kNumeric;
    std::vector<std::string> values;  // optional fixed categorical domain
  };
  std::vector<Column> columns;
  std::string label_column;
  std::string positive;
  std::string negative;
  std::string sensitive;
  std::string discriminated;
  std::vector<std::string> missing_tokens = {"", "?", "NA"};

  static SchemaSpec from_json(const nlohmann::json& j);
  static SchemaSpec load(const std::filesystem::path& path);
};

struct Dataset {
  std::shared_ptr<const Schema> schema;
  std::vector<Record> records;
  // Empty for unlabeled data; otherwise aligned with records. nullopt marks
  // a missing label cell.
  std::vector<std::optional<Label>> labels;

  std::size_t size() const { return records.size(); }
  bool labeled() const { return !labels.empty(); }
};

Dataset load_csv(const std::filesystem::path& path, const SchemaSpec& spec);
Dataset parse_csv(std::string_view text, const SchemaSpec& spec);
void write_csv(const Dataset& dataset, const std::filesystem::path& path);
std::string to_csv(const Dataset& dataset);

// Drops rows with a missing cell (or label), then exact duplicates over all
// attributes plus label, keeping the first occurrence.
Dataset clean(const Dataset& dataset, std::vector<std::string>* warnings = nullptr);

// Records with their labels; `rows` are positions in the source dataset.
struct LabeledSet {
  std::vector<Record> records;
  std::vector<Label> labels;
  std::vector<std::size_t> rows;

  std::size_t size() const { return records.size(); }
};

struct SplitSizes {
  std::size_t oracle_train = 500;
  std::size_t pretrain = 250;
  std::size_t stream = 2000;
  std::size_t test = 500;
};

struct Splits {
  LabeledSet oracle_train;
  LabeledSet pretrain;  // prefix of oracle_train
  LabeledSet stream;
  LabeledSet test;
  std::uint64_t seed = 0;
};

// Seeded shuffle, then stream | oracle_train | test are consecutive slices.
Splits make_splits(const Dataset& dataset, std::uint64_t seed, const SplitSizes& sizes = {});

// All labeled rows as a LabeledSet. Throws if any label is missing.
LabeledSet to_labeled_set(const Dataset& dataset);

}  // namespace coevo

#endif  // COEVO_DATASET_HPP_
