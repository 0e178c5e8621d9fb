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
#ifndef POISONBENCH_NN_HPP_
#define POISONBENCH_NN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "poisonbench/data.hpp"

namespace poisonbench::nn {

struct ConvBlockSpec {
  int filters = 8;
  int kernel = 3;  // odd; stride 1 with same padding, then ReLU and 2x2 max-pool
  bool operator==(const ConvBlockSpec&) const = default;
};

/// Layer stack: conv blocks -> dense(hidden_units) + ReLU -> dense(class_count) -> softmax.
/// hidden_units == 0 drops the hidden layer, leaving a linear classifier on the flattened features.
struct ArchSpec {
  int input_width = 16;
  int input_height = 16;
  std::vector<ConvBlockSpec> conv_blocks{ConvBlockSpec{}};
  int hidden_units = 64;
  int class_count = 8;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  /// Width*height*channels entering the first dense layer.
  int flat_features() const;
  bool operator==(const ArchSpec&) const = default;
};

struct ParamTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  bool operator==(const ParamTensor&) const = default;
};

using ParamSet = std::vector<ParamTensor>;

struct Model {
  ArchSpec arch;
  ParamSet params;
  std::uint64_t seed = 0;

  std::size_t parameter_count() const noexcept;
  bool operator==(const Model&) const = default;
};

/// Byte-level equality of two parameter sets (distinguishes -0.0 from 0.0).
bool bit_identical(const ParamSet& a, const ParamSet& b);

struct EpochRecord {
  int epoch_index = 0;
  double mean_loss = 0.0;
  double wall_seconds = 0.0;
};

struct Prediction {
  int label = 0;
  double probability = 0.0;
};

/// Weights uniform in +-sqrt(6/fan_in), biases zero. Deterministic in (arch, seed).
Model init_model(const ArchSpec& arch, std::uint64_t seed);

/// Same layout as init_model with every parameter set to zero.
Model zero_model(const ArchSpec& arch, std::uint64_t seed = 0);

/// Zero-filled tensors with the model's layout.
ParamSet zeros_like(const ParamSet& params);

std::vector<double> forward_probs(const Model& model, std::span<const float> pixels);

/// Mean of -log(max(p_true, 1e-12)) over the batch.
double batch_loss(const Model& model, std::span<const data::Instance> batch);

/// Exact gradient of batch_loss.
ParamSet backward(const Model& model, std::span<const data::Instance> batch);

Model sgd_step(const Model& model, const ParamSet& grads, double lr);

/// One pass over `train` in an order shuffled from (model.seed, epoch_seed). epoch_seed is
/// also recorded as the epoch index.
std::pair<Model, EpochRecord> train_epoch(Model model, const data::Dataset& train, double lr,
                                          int batch_size, std::uint64_t epoch_seed);

/// Argmax of forward_probs with ties going to the lowest index.
Prediction predict(const Model& model, std::span<const float> pixels);

/// Softmax with max-logit shift.
std::vector<double> softmax(std::span<const double> logits);

inline constexpr double kProbabilityFloor = 1e-12;

}  // namespace poisonbench::nn

#endif  // POISONBENCH_NN_HPP_
