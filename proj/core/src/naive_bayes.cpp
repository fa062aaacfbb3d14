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
#include <cmath>
#include <limits>
#include <numbers>

#include "coevo/oracles.hpp"

namespace coevo {

NaiveBayes NaiveBayes::fit(std::shared_ptr<const Schema> schema, std::span<const Record> records,
                           std::span<const Label> labels, double laplace, double variance_floor) {
  require(!records.empty(), ErrorCode::kInvalidArgument, "naive bayes needs training data");
  require(records.size() == labels.size(), ErrorCode::kInvalidArgument, "records/labels size mismatch");
  require(laplace >= 0 && variance_floor > 0, ErrorCode::kInvalidArgument, "invalid smoothing parameters");
  NaiveBayes nb;
  nb.schema_ = schema;
  const Schema& s = *schema;
  ClassCounts class_counts{};
  for (Label l : labels) class_counts[index_of(l)] += 1;
  for (Label l : kAllLabels) {
    nb.priors_[index_of(l)] = static_cast<double>(class_counts[index_of(l)]) / static_cast<double>(labels.size());
  }
  nb.log_frequencies_.resize(s.size());
  nb.gaussians_.resize(s.size());
  for (std::size_t a = 0; a < s.size(); ++a) {
    if (s[a].categorical()) {
      const std::size_t domain = s[a].categories.size();
      std::array<std::vector<double>, 2> counts{std::vector<double>(domain, 0.0), std::vector<double>(domain, 0.0)};
      for (std::size_t i = 0; i < records.size(); ++i) {
        counts[index_of(labels[i])][static_cast<std::size_t>(records[i][a])] += 1;
      }
      for (std::size_t c = 0; c < 2; ++c) {
        const double denom = static_cast<double>(class_counts[c]) + laplace * static_cast<double>(domain);
        for (double& v : counts[c]) v = denom > 0 ? std::log((v + laplace) / denom) : 0.0;
      }
      nb.log_frequencies_[a] = std::move(counts);
    } else {
      std::array<double, 2> sum{}, sq{};
      for (std::size_t i = 0; i < records.size(); ++i) sum[index_of(labels[i])] += records[i][a];
      std::array<double, 2> mean{};
      for (std::size_t c = 0; c < 2; ++c) mean[c] = class_counts[c] ? sum[c] / static_cast<double>(class_counts[c]) : 0;
      for (std::size_t i = 0; i < records.size(); ++i) {
        const double d = records[i][a] - mean[index_of(labels[i])];
        sq[index_of(labels[i])] += d * d;
      }
      for (std::size_t c = 0; c < 2; ++c) {
        const double var = class_counts[c] ? sq[c] / static_cast<double>(class_counts[c]) : 0;
        nb.gaussians_[a][c] = {mean[c], std::max(var, variance_floor)};
      }
    }
  }
  return nb;
}

std::array<double, 2> NaiveBayes::log_posterior(const Record& x) const {
  const Schema& s = *schema_;
  std::array<double, 2> out{};
  for (std::size_t c = 0; c < 2; ++c) {
    if (priors_[c] <= 0) {
      out[c] = -std::numeric_limits<double>::infinity();
      continue;
    }
    double lp = std::log(priors_[c]);
    for (std::size_t a = 0; a < s.size(); ++a) {
      if (s[a].categorical()) {
        lp += log_frequencies_[a][c][static_cast<std::size_t>(x[a])];
      } else {
        const auto [mean, var] = gaussians_[a][c];
        const double d = x[a] - mean;
        lp += -0.5 * std::log(2 * std::numbers::pi * var) - d * d / (2 * var);
      }
    }
    out[c] = lp;
  }
  return out;
}

Label NaiveBayes::predict(const Record& x) const {
  const auto lp = log_posterior(x);
  return lp[1] > lp[0] ? Label::kPositive : Label::kNegative;
}

}  // namespace coevo
