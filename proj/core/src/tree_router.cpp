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

#include <sstream>

#include "coevo/efdt.hpp"
#include "numfmt.hpp"

namespace coevo {
namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  fail(ErrorCode::kCorrupt, "tree description line " + std::to_string(line) + ": " + what);
}

ClassCounts parse_counts(std::string_view s, std::size_t line) {
  // "[-:N +:M]"
  if (s.size() < 9 || s.front() != '[' || s.back() != ']') parse_error(line, "malformed counts");
  s = s.substr(1, s.size() - 2);
  const auto space = s.find(' ');
  if (space == std::string_view::npos || s.substr(0, 2) != "-:" || s.substr(space + 1, 2) != "+:") {
    parse_error(line, "malformed counts");
  }
  auto neg = parse_number(s.substr(2, space - 2));
  auto pos = parse_number(s.substr(space + 3));
  if (!neg || !pos) parse_error(line, "malformed counts");
  return {static_cast<std::int64_t>(*neg), static_cast<std::int64_t>(*pos)};
}

}  // namespace

TreeRouter TreeRouter::parse(std::string_view text, std::shared_ptr<const Schema> schema, double laplace) {
  TreeRouter router;
  router.schema_ = std::move(schema);
  router.laplace_ = laplace;
  const Schema& s = *router.schema_;

  std::vector<std::size_t> stack;  // node index per depth
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    std::size_t indent = 0;
    while (indent < line.size() && line[indent] == ' ') ++indent;
    if (indent % 2 != 0) parse_error(line_no, "odd indentation");
    const std::size_t depth = indent / 2;
    const auto arrow = line.find(" -> ");
    if (arrow == std::string_view::npos) parse_error(line_no, "missing ' -> '");
    std::string_view body = line.substr(arrow + 4);
    const auto bracket = body.rfind(" [");
    if (bracket == std::string_view::npos) parse_error(line_no, "missing counts");

    Node node;
    node.counts = parse_counts(body.substr(bracket + 1), line_no);
    std::istringstream head{std::string(body.substr(0, bracket))};
    std::string kind;
    head >> kind;
    if (kind == "split") {
      std::string attr_name;
      std::string attr_kind;
      head >> attr_name >> attr_kind;
      auto attr = s.index_of(attr_name);
      if (!attr) parse_error(line_no, "unknown attribute " + attr_name);
      node.leaf = false;
      node.attribute = *attr;
      if (attr_kind == "numeric") {
        std::string t;
        head >> t;
        auto v = parse_number(t);
        if (!v || s[*attr].categorical()) parse_error(line_no, "bad numeric split");
        node.threshold = *v;
      } else if (attr_kind != "categorical" || !s[*attr].categorical()) {
        parse_error(line_no, "bad split kind");
      }
    } else if (kind != "leaf") {
      parse_error(line_no, "unknown node kind '" + kind + "'");
    }

    const std::size_t index = router.nodes_.size();
    router.nodes_.push_back(node);
    if (depth == 0) {
      if (index != 0) parse_error(line_no, "multiple roots");
    } else {
      if (depth > stack.size()) parse_error(line_no, "indentation skips a level");
      Node& parent = router.nodes_[stack[depth - 1]];
      if (parent.leaf) parse_error(line_no, "child under a leaf");
      parent.children.push_back(index);
    }
    stack.resize(depth);
    stack.push_back(index);
  }
  if (router.nodes_.empty()) parse_error(line_no, "empty description");
  for (const Node& n : router.nodes_) {
    if (n.leaf) continue;
    const std::size_t expected = s[n.attribute].categorical() ? s[n.attribute].categories.size() : 2;
    if (n.children.size() != expected) parse_error(0, "split on " + s[n.attribute].name + " has wrong child count");
  }
  return router;
}

ClassCounts TreeRouter::leaf_counts(const Record& x) const {
  std::size_t i = 0;
  while (!nodes_[i].leaf) {
    const Node& n = nodes_[i];
    const double v = x[n.attribute];
    const std::size_t branch =
        (*schema_)[n.attribute].categorical() ? static_cast<std::size_t>(v) : (v <= n.threshold ? 0 : 1);
    i = n.children[branch];
  }
  return nodes_[i].counts;
}

Prediction TreeRouter::predict(const Record& x) const {
  return predict_from_counts(leaf_counts(x), laplace_);
}

}  // namespace coevo
