/**
 * Copyright 2026 The PoisonBench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef POISONBENCH_METRICS_HPP_
#define POISONBENCH_METRICS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "poisonbench/data.hpp"
#include "poisonbench/nn.hpp"

namespace poisonbench::metrics {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int class_count);
  ConfusionMatrix(int class_count, std::vector<std::uint64_t> row_major_counts);

  void add(int truth, int predicted, std::uint64_t count = 1);
  std::uint64_t at(int truth, int predicted) const;
  std::uint64_t total() const noexcept;
  int class_count() const noexcept { return k_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  int k_ = 0;
  std::vector<std::uint64_t> counts_;
};

/// Average of loss change: sum_{i>=2}(l_i - l_{i-1}) / (n - 1). Positive means rising loss.
double alc(std::span<const double> losses);

/// Mean probability of the predicted class over the test set.
double aip(const nn::Model& model, const data::Dataset& test);
double mean_top_probability(std::span<const double> top_probs);

/// Unweighted mean of per-class F1; a zero precision or recall denominator gives F1 = 0.
double macro_fscore(const ConfusionMatrix& cm);

double ttd(double base_seconds, double poisoned_seconds);
double pdm(double fscore_base, double fscore_poisoned);

struct Evaluation {
  double aip = 0.0;
  double fscore = 0.0;
  ConfusionMatrix confusion;
};

/// One pass over the test set producing AIP, the confusion matrix and macro Fscore.
Evaluation evaluate(const nn::Model& model, const data::Dataset& test);

}  // namespace poisonbench::metrics

#endif  // POISONBENCH_METRICS_HPP_
