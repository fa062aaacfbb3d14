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


#ifndef COEVO_ORACLES_HPP_
#define COEVO_ORACLES_HPP_

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "coevo/dataset.hpp"
#include "coevo/label.hpp"

namespace coevo {

// Naive Bayes over mixed attributes: Laplace-smoothed frequencies for
// categorical values, one Gaussian per class for numeric ones.
class NaiveBayes {
 public:
  static NaiveBayes fit(std::shared_ptr<const Schema> schema, std::span<const Record> records,
                        std::span<const Label> labels, double laplace = 1.0, double variance_floor = 1e-9);

  Label predict(const Record& x) const;
  // Unnormalized log posterior per label; -inf for a class never seen.
  std::array<double, 2> log_posterior(const Record& x) const;
  double prior(Label l) const { return priors_[index_of(l)]; }

 private:
  std::shared_ptr<const Schema> schema_;
  std::array<double, 2> priors_{};
  // [attribute][class][category] log-probabilities for categorical attributes.
  std::vector<std::array<std::vector<double>, 2>> log_frequencies_;
  // [attribute][class] mean and variance for numeric attributes.
  std::vector<std::array<std::array<double, 2>, 2>> gaussians_;
};

// Majority vote over the k Gower-nearest training records. Distance ties go
// to the lower training index, vote ties to the negative label.
class Knn {
 public:
  static Knn fit(std::shared_ptr<const Schema> schema, std::span<const Record> records,
                 std::span<const Label> labels, std::size_t k = 5);

  Label predict(const Record& x) const;
  std::size_t k() const { return k_; }

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<Record> records_;
  std::vector<Label> labels_;
  std::size_t k_ = 5;
};

}  // namespace coevo

#endif  // COEVO_ORACLES_HPP_
