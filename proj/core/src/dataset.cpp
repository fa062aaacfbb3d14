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

#include "coevo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "coevo/random.hpp"
#include "csv.hpp"
#include "numfmt.hpp"

namespace coevo {

using nlohmann::json;

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kCorrupt: return "corrupt";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

std::string_view to_string(AttributeKind kind) {
  return kind == AttributeKind::kCategorical ? "categorical" : "numeric";
}

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

AttributeKind kind_from_string(const std::string& s) {
  if (s == "categorical") return AttributeKind::kCategorical;
  if (s == "numeric") return AttributeKind::kNumeric;
  fail(ErrorCode::kInvalidArgument, "unknown attribute kind: " + s);
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(s[0])) return false;
  return std::all_of(s.begin(), s.end(), [&](char c) { return alpha(c) || (c >= '0' && c <= '9'); });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::optional<std::size_t> Attribute::category_code(std::string_view value) const {
  auto it = std::find(categories.begin(), categories.end(), value);
  if (it == categories.end()) return std::nullopt;
  return static_cast<std::size_t>(it - categories.begin());
}

bool Record::complete() const {
  return std::none_of(values.begin(), values.end(), [](double v) { return std::isnan(v); });
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::require_index(std::string_view name) const {
  auto idx = index_of(name);
  require(idx.has_value(), ErrorCode::kInvalidArgument, "unknown attribute: " + std::string(name));
  return *idx;
}

void Schema::validate() const {
  std::set<std::string> seen;
  for (const auto& a : attributes) {
    require(is_identifier(a.name), ErrorCode::kValidation, "attribute name is not an identifier: '" + a.name + "'");
    require(seen.insert(a.name).second, ErrorCode::kValidation, "duplicate attribute: " + a.name);
    if (a.categorical()) {
      require(!a.categories.empty(), ErrorCode::kValidation, "empty categorical domain: " + a.name);
    } else {
      require(a.min <= a.max, ErrorCode::kValidation, "inverted numeric range: " + a.name);
    }
  }
  require(sensitive < attributes.size(), ErrorCode::kValidation, "sensitive attribute index out of range");
  const Attribute& sa = attributes[sensitive];
  require(sa.categorical() && sa.categories.size() == 2, ErrorCode::kValidation,
          "sensitive attribute must be binary categorical: " + sa.name);
  require(discriminated == 0.0 || discriminated == 1.0, ErrorCode::kValidation,
          "discriminated value is not in the sensitive attribute's domain");
}

void Schema::check_record(const Record& r) const {
  require(r.size() == attributes.size(), ErrorCode::kInvalidArgument,
          "record has " + std::to_string(r.size()) + " values, schema has " + std::to_string(attributes.size()));
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double v = r[i];
    if (std::isnan(v)) fail(ErrorCode::kInvalidArgument, "missing value for " + attributes[i].name);
    if (attributes[i].categorical()) {
      require(v >= 0 && v < static_cast<double>(attributes[i].categories.size()) && v == std::floor(v),
              ErrorCode::kInvalidArgument, "value outside categorical domain of " + attributes[i].name);
    } else {
      require(std::isfinite(v), ErrorCode::kInvalidArgument, "non-finite value for " + attributes[i].name);
    }
  }
}

std::string Schema::render_value(std::size_t attribute, double value) const {
  if (std::isnan(value)) return "?";
  const Attribute& a = attributes[attribute];
  if (a.categorical()) return a.categories.at(static_cast<std::size_t>(value));
  return format_number(value);
}

json Schema::record_to_json(const Record& r) const {
  json out = json::object();
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i].categorical()) {
      out[attributes[i].name] = attributes[i].categories.at(static_cast<std::size_t>(r[i]));
    } else {
      out[attributes[i].name] = r[i];
    }
  }
  return out;
}

Record Schema::record_from_json(const json& j) const {
  require(j.is_object(), ErrorCode::kInvalidArgument, "record must be an object");
  Record r;
  r.values.resize(attributes.size());
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    const Attribute& a = attributes[i];
    auto it = j.find(a.name);
    require(it != j.end(), ErrorCode::kInvalidArgument, "missing attribute: " + a.name);
    if (a.categorical()) {
      std::string value = it->is_string() ? it->get<std::string>() : it->dump();
      auto code = a.category_code(value);
      require(code.has_value(), ErrorCode::kInvalidArgument,
              "value '" + value + "' not in domain of " + a.name);
      r.values[i] = static_cast<double>(*code);
    } else {
      require(it->is_number(), ErrorCode::kInvalidArgument, "attribute " + a.name + " must be numeric");
      r.values[i] = it->get<double>();
    }
  }
  check_record(r);
  return r;
}

json Schema::to_json() const {
  json attrs = json::array();
  for (const auto& a : attributes) {
    json ja = {{"name", a.name}, {"kind", std::string(to_string(a.kind))}};
    if (a.categorical()) {
      ja["categories"] = a.categories;
    } else {
      ja["min"] = a.min;
      ja["max"] = a.max;
    }
    attrs.push_back(std::move(ja));
  }
  return {{"attributes", std::move(attrs)},
          {"sensitive", attributes.at(sensitive).name},
          {"discriminated", render_value(sensitive, discriminated)},
          {"label", {{"column", label_column}, {"positive", positive_name}, {"negative", negative_name}}}};
}

Schema Schema::from_json(const json& j) {
  Schema s;
  try {
    for (const auto& ja : j.at("attributes")) {
      Attribute a;
      a.name = ja.at("name").get<std::string>();
      a.kind = kind_from_string(ja.at("kind").get<std::string>());
      if (a.categorical()) {
        a.categories = ja.at("categories").get<std::vector<std::string>>();
      } else {
        a.min = ja.at("min").get<double>();
        a.max = ja.at("max").get<double>();
      }
      s.attributes.push_back(std::move(a));
    }
    s.sensitive = s.require_index(j.at("sensitive").get<std::string>());
    auto code = s.attributes[s.sensitive].category_code(j.at("discriminated").get<std::string>());
    require(code.has_value(), ErrorCode::kValidation, "discriminated value not in domain");
    s.discriminated = static_cast<double>(*code);
    s.label_column = j.at("label").at("column").get<std::string>();
    s.positive_name = j.at("label").at("positive").get<std::string>();
    s.negative_name = j.at("label").at("negative").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kCorrupt, std::string("malformed schema: ") + e.what());
  }
  s.validate();
  return s;
}

SchemaSpec SchemaSpec::from_json(const json& j) {
  SchemaSpec spec;
  try {
    for (const auto& jc : j.at("attributes")) {
      Column c;
      c.name = jc.at("name").get<std::string>();
      c.kind = kind_from_string(jc.at("kind").get<std::string>());
      if (jc.contains("values")) c.values = jc.at("values").get<std::vector<std::string>>();
      spec.columns.push_back(std::move(c));
    }
    spec.label_column = j.at("label").at("column").get<std::string>();
    spec.positive = j.at("label").at("positive").get<std::string>();
    spec.negative = j.at("label").at("negative").get<std::string>();
    spec.sensitive = j.at("sensitive").at("attribute").get<std::string>();
    spec.discriminated = j.at("sensitive").at("discriminated").get<std::string>();
    if (j.contains("missing")) spec.missing_tokens = j.at("missing").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed schema description: ") + e.what());
  }
  return spec;
}

SchemaSpec SchemaSpec::load(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j = json::parse(text, nullptr, false);
  require(!j.is_discarded(), ErrorCode::kInvalidArgument, "schema description is not valid JSON: " + path.string());
  return from_json(j);
}

Dataset parse_csv(std::string_view text, const SchemaSpec& spec) {
  auto rows = csv::parse(text);
  require(!rows.empty(), ErrorCode::kInvalidArgument, "empty file");
  const auto& header = rows.front();

  auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  std::vector<std::size_t> source(spec.columns.size());
  for (std::size_t i = 0; i < spec.columns.size(); ++i) {
    auto col = column_of(spec.columns[i].name);
    require(col.has_value(), ErrorCode::kInvalidArgument, "missing column: " + spec.columns[i].name);
    source[i] = *col;
  }
  const auto label_col = column_of(spec.label_column);
  const std::set<std::string> missing(spec.missing_tokens.begin(), spec.missing_tokens.end());

  auto schema = std::make_shared<Schema>();
  schema->label_column = spec.label_column;
  schema->positive_name = spec.positive;
  schema->negative_name = spec.negative;
  for (const auto& c : spec.columns) {
    Attribute a;
    a.name = c.name;
    a.kind = c.kind;
    a.categories = c.values;
    schema->attributes.push_back(std::move(a));
  }
  auto sa = schema->index_of(spec.sensitive);
  require(sa.has_value(), ErrorCode::kInvalidArgument, "sensitive attribute is not a schema column: " + spec.sensitive);
  require(schema->attributes[*sa].categorical(), ErrorCode::kValidation, "sensitive attribute must be categorical");
  schema->sensitive = *sa;

  // First pass: collect categorical domains (unless fixed) and numeric ranges.
  const std::size_t m = spec.columns.size();
  std::vector<std::set<std::string>> observed(m);
  std::vector<double> lo(m, std::numeric_limits<double>::infinity());
  std::vector<double> hi(m, -std::numeric_limits<double>::infinity());
  std::vector<std::vector<double>> numeric_cells(rows.size() - 1, std::vector<double>(m, kMissing));

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    require(row.size() == header.size(), ErrorCode::kInvalidArgument,
            "row " + std::to_string(r) + " has " + std::to_string(row.size()) + " fields, header has " +
                std::to_string(header.size()));
    for (std::size_t i = 0; i < m; ++i) {
      const std::string& cell = row[source[i]];
      if (missing.count(cell)) continue;
      if (spec.columns[i].kind == AttributeKind::kCategorical) {
        observed[i].insert(cell);
      } else {
        auto v = parse_number(cell);
        require(v.has_value() && std::isfinite(*v), ErrorCode::kInvalidArgument,
                "unparseable cell at row " + std::to_string(r) + " column " + spec.columns[i].name + ": '" +
                    cell + "'");
        numeric_cells[r - 1][i] = *v;
        lo[i] = std::min(lo[i], *v);
        hi[i] = std::max(hi[i], *v);
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    Attribute& a = schema->attributes[i];
    if (a.categorical()) {
      if (a.categories.empty()) {
        a.categories.assign(observed[i].begin(), observed[i].end());
      } else {
        for (const auto& v : observed[i]) {
          require(a.category_code(v).has_value(), ErrorCode::kInvalidArgument,
                  "unparseable cell in column " + a.name + ": '" + v + "' is not in the declared domain");
        }
      }
    } else if (lo[i] <= hi[i]) {
      a.min = lo[i];
      a.max = hi[i];
    }
  }
  Attribute& sens = schema->attributes[schema->sensitive];
  if (!sens.category_code(spec.discriminated)) {
    require(sens.categories.size() < 2, ErrorCode::kValidation,
            "discriminated value '" + spec.discriminated + "' not present in " + sens.name);
    sens.categories.push_back(spec.discriminated);
    std::sort(sens.categories.begin(), sens.categories.end());
  }
  require(sens.categories.size() == 2, ErrorCode::kValidation,
          "sensitive attribute " + sens.name + " must be binary, found " + std::to_string(sens.categories.size()) +
              " values");
  schema->discriminated = static_cast<double>(*sens.category_code(spec.discriminated));
  schema->validate();

  Dataset ds;
  ds.schema = schema;
  ds.records.reserve(rows.size() - 1);
  if (label_col) ds.labels.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    Record rec;
    rec.values.resize(m, kMissing);
    for (std::size_t i = 0; i < m; ++i) {
      const std::string& cell = row[source[i]];
      if (missing.count(cell)) continue;
      const Attribute& a = schema->attributes[i];
      rec.values[i] = a.categorical() ? static_cast<double>(*a.category_code(cell)) : numeric_cells[r - 1][i];
    }
    ds.records.push_back(std::move(rec));
    if (label_col) {
      const std::string& cell = row[*label_col];
      if (missing.count(cell)) {
        ds.labels.push_back(std::nullopt);
      } else if (cell == spec.positive) {
        ds.labels.push_back(Label::kPositive);
      } else if (cell == spec.negative) {
        ds.labels.push_back(Label::kNegative);
      } else {
        fail(ErrorCode::kInvalidArgument, "unparseable cell at row " + std::to_string(r) + " column " +
                                              spec.label_column + ": '" + cell + "'");
      }
    }
  }
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const SchemaSpec& spec) {
  require(std::filesystem::exists(path), ErrorCode::kNotFound, "file not found: " + path.string());
  return parse_csv(read_file(path), spec);
}

std::string to_csv(const Dataset& dataset) {
  const Schema& s = *dataset.schema;
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += csv::escape(s[i].name);
  }
  if (dataset.labeled()) out += ',' + csv::escape(s.label_column);
  out += '\n';
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out += ',';
      const double v = dataset.records[r][i];
      out += std::isnan(v) ? std::string() : csv::escape(s.render_value(i, v));
    }
    if (dataset.labeled()) {
      out += ',';
      if (dataset.labels[r]) out += csv::escape(s.label_name(*dataset.labels[r]));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write file: " + path.string());
  out << to_csv(dataset);
}

Dataset clean(const Dataset& dataset, std::vector<std::string>* warnings) {
  struct RowKey {
    const Record* record;
    int label;
    bool operator==(const RowKey& o) const {
      if (label != o.label || record->size() != o.record->size()) return false;
      for (std::size_t i = 0; i < record->size(); ++i) {
        if ((*record)[i] != (*o.record)[i]) return false;
      }
      return true;
    }
  };
  struct RowHash {
    std::size_t operator()(const RowKey& k) const {
      std::size_t h = std::hash<int>()(k.label);
      for (double v : k.record->values) h = h * 1000003u ^ std::hash<double>()(v);
      return h;
    }
  };

  Dataset out;
  out.schema = dataset.schema;
  std::unordered_map<RowKey, bool, RowHash> seen;
  std::size_t incomplete = 0;
  std::size_t duplicates = 0;
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    const Record& rec = dataset.records[r];
    const bool label_missing = dataset.labeled() && !dataset.labels[r];
    if (!rec.complete() || label_missing) {
      ++incomplete;
      continue;
    }
    const int label = dataset.labeled() ? static_cast<int>(*dataset.labels[r]) : -1;
    if (!seen.emplace(RowKey{&rec, label}, true).second) {
      ++duplicates;
      continue;
    }
    out.records.push_back(rec);
    if (dataset.labeled()) out.labels.push_back(dataset.labels[r]);
  }
  if (warnings && out.records.empty() && dataset.size() > 0) {
    warnings->push_back("clean removed all " + std::to_string(dataset.size()) + " rows (" +
                        std::to_string(incomplete) + " incomplete, " + std::to_string(duplicates) + " duplicates)");
  }
  return out;
}

LabeledSet to_labeled_set(const Dataset& dataset) {
  require(dataset.labeled(), ErrorCode::kInvalidArgument, "dataset has no labels");
  LabeledSet set;
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    require(dataset.labels[r].has_value(), ErrorCode::kInvalidArgument,
            "row " + std::to_string(r) + " has no label; clean the dataset first");
    set.records.push_back(dataset.records[r]);
    set.labels.push_back(*dataset.labels[r]);
    set.rows.push_back(r);
  }
  return set;
}

Splits make_splits(const Dataset& dataset, std::uint64_t seed, const SplitSizes& sizes) {
  require(sizes.pretrain <= sizes.oracle_train, ErrorCode::kInvalidArgument,
          "pretrain size exceeds oracle_train size");
  const LabeledSet all = to_labeled_set(dataset);
  const std::size_t needed = sizes.oracle_train + sizes.stream + sizes.test;
  require(all.size() >= needed, ErrorCode::kInvalidArgument,
          "insufficient rows: need " + std::to_string(needed) + ", have " + std::to_string(all.size()));

  std::vector<std::size_t> perm(all.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
  }

  auto take = [&](std::size_t begin, std::size_t count) {
    LabeledSet part;
    for (std::size_t i = begin; i < begin + count; ++i) {
      part.records.push_back(all.records[perm[i]]);
      part.labels.push_back(all.labels[perm[i]]);
      part.rows.push_back(all.rows[perm[i]]);
    }
    return part;
  };
  Splits s;
  s.seed = seed;
  s.stream = take(0, sizes.stream);
  s.oracle_train = take(sizes.stream, sizes.oracle_train);
  s.test = take(sizes.stream + sizes.oracle_train, sizes.test);
  s.pretrain = take(sizes.stream, sizes.pretrain);
  return s;
}

}  // namespace coevo
