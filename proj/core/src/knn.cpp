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


#include <algorithm>

#include "coevo/explain.hpp"
#include "coevo/oracles.hpp"

namespace coevo {

Knn Knn::fit(std::shared_ptr<const Schema> schema, std::span<const Record> records, std::span<const Label> labels,
             std::size_t k) {
  require(!records.empty(), ErrorCode::kInvalidArgument, "knn needs training data");
  require(records.size() == labels.size(), ErrorCode::kInvalidArgument, "records/labels size mismatch");
  require(k >= 1 && k <= records.size(), ErrorCode::kInvalidArgument, "knn k must be in [1, training size]");
  Knn m;
  m.schema_ = std::move(schema);
  m.records_.assign(records.begin(), records.end());
  m.labels_.assign(labels.begin(), labels.end());
  m.k_ = k;
  return m;
}

Label Knn::predict(const Record& x) const {
  std::vector<std::pair<double, std::size_t>> d(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) d[i] = {gower_distance(*schema_, x, records_[i]), i};
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k_), d.end());
  std::size_t positive = 0;
  for (std::size_t i = 0; i < k_; ++i) positive += labels_[d[i].second] == Label::kPositive;
  return 2 * positive > k_ ? Label::kPositive : Label::kNegative;
}

}  // namespace coevo
