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

#ifndef COEVO_LABEL_HPP_
#define COEVO_LABEL_HPP_

#include <array>
#include <cstdint>
#include <string_view>

#include "coevo/error.hpp"

namespace coevo {

// Binary decision. Positive is the favorable outcome.
enum class Label : std::uint8_t { kNegative = 0, kPositive = 1 };

constexpr Label flip(Label l) {
  return l == Label::kPositive ? Label::kNegative : Label::kPositive;
}

constexpr std::size_t index_of(Label l) { return static_cast<std::size_t>(l); }

constexpr std::array<Label, 2> kAllLabels = {Label::kNegative, Label::kPositive};

// "+" / "-" tokens used in rule files, wire payloads and logs.
constexpr std::string_view to_token(Label l) {
  return l == Label::kPositive ? "+" : "-";
}

inline Label label_from_token(std::string_view token) {
  if (token == "+") return Label::kPositive;
  if (token == "-") return Label::kNegative;
  fail(ErrorCode::kInvalidArgument, "invalid label token: '" + std::string(token) + "'");
}

// Per-class counters indexed by index_of(Label).
using ClassCounts = std::array<std::int64_t, 2>;

inline std::int64_t total(const ClassCounts& c) { return c[0] + c[1]; }

}  // namespace coevo

#endif  // COEVO_LABEL_HPP_
