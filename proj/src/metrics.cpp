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
#include "poisonbench/metrics.hpp"

#include <algorithm>

#include "poisonbench/errors.hpp"
#include "poisonbench/kernels.hpp"

namespace poisonbench::metrics {

ConfusionMatrix::ConfusionMatrix(int class_count)
    : k_(class_count), counts_(static_cast<std::size_t>(class_count) * class_count, 0) {
  if (class_count < 1) throw UsageError("confusion matrix needs at least one class");
}

ConfusionMatrix::ConfusionMatrix(int class_count, std::vector<std::uint64_t> row_major_counts)
    : k_(class_count), counts_(std::move(row_major_counts)) {
  if (class_count < 1 || counts_.size() != static_cast<std::size_t>(class_count) * class_count)
    throw ShapeError("confusion matrix counts must be class_count^2");
}

void ConfusionMatrix::add(int truth, int predicted, std::uint64_t count) {
  if (truth < 0 || truth >= k_ || predicted < 0 || predicted >= k_)
    throw UsageError("confusion matrix index out of range");
  counts_[static_cast<std::size_t>(truth) * k_ + predicted] += count;
}

std::uint64_t ConfusionMatrix::at(int truth, int predicted) const {
  return counts_.at(static_cast<std::size_t>(truth) * k_ + predicted);
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  std::uint64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

double alc(std::span<const double> losses) {
  if (losses.size() < 2) throw UsageError("alc needs at least 2 epochs, got " + std::to_string(losses.size()));
  double sum = 0.0;
  for (std::size_t i = 1; i < losses.size(); ++i) sum += losses[i] - losses[i - 1];
  return sum / static_cast<double>(losses.size() - 1);
}

double mean_top_probability(std::span<const double> top_probs) {
  if (top_probs.empty()) throw UsageError("aip: empty test set");
  double sum = 0.0;
  for (double p : top_probs) sum += p;
  return sum / static_cast<double>(top_probs.size());
}

double aip(const nn::Model& model, const data::Dataset& test) { return evaluate(model, test).aip; }

double macro_fscore(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw UsageError("macro_fscore: empty confusion matrix");
  const int k = cm.class_count();
  double sum = 0.0;
  for (int c = 0; c < k; ++c) {
    std::uint64_t predicted = 0;
    std::uint64_t actual = 0;
    for (int j = 0; j < k; ++j) {
      predicted += cm.at(j, c);
      actual += cm.at(c, j);
    }
    const auto tp = static_cast<double>(cm.at(c, c));
    if (predicted == 0 || actual == 0 || tp == 0.0) continue;
    const double precision = tp / static_cast<double>(predicted);
    const double recall = tp / static_cast<double>(actual);
    sum += 2.0 * precision * recall / (precision + recall);
  }
  return sum / k;
}

double ttd(double base_seconds, double poisoned_seconds) { return poisoned_seconds - base_seconds; }

double pdm(double fscore_base, double fscore_poisoned) { return fscore_base - fscore_poisoned; }

Evaluation evaluate(const nn::Model& model, const data::Dataset& test) {
  if (test.empty()) throw UsageError("evaluate: empty test set");
  const auto refs = kernels::refs(test.instances);
  const auto probs = kernels::omp::batch_probs(model, refs);
  const auto k = static_cast<std::size_t>(model.arch.class_count);

  Evaluation ev;
  ev.confusion = ConfusionMatrix(model.arch.class_count);
  std::vector<double> top(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto row = probs.begin() + static_cast<std::ptrdiff_t>(i * k);
    const auto best = std::max_element(row, row + static_cast<std::ptrdiff_t>(k));
    top[i] = *best;
    ev.confusion.add(test.instances[i].label, static_cast<int>(best - row));
  }
  ev.aip = mean_top_probability(top);
  ev.fscore = macro_fscore(ev.confusion);
  return ev;
}

}  // namespace poisonbench::metrics
