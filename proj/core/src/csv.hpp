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

#ifndef COEVO_SRC_CSV_HPP_
#define COEVO_SRC_CSV_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace coevo::csv {

// Splits CSV text into rows of fields. Handles double-quoted fields with
// embedded commas, quotes ("") and newlines; unquoted fields are trimmed.
std::vector<std::vector<std::string>> parse(std::string_view text);

// Quotes the field when it contains a comma, quote, newline or edge spaces.
std::string escape(std::string_view field);

}  // namespace coevo::csv

#endif  // COEVO_SRC_CSV_HPP_
