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
#ifndef POISONBENCH_SRC_NN_DETAIL_HPP_
#define POISONBENCH_SRC_NN_DETAIL_HPP_

#include <span>
#include <vector>

#include "poisonbench/nn.hpp"

namespace poisonbench::nn::detail {

struct ConvGeometry {
  int in_channels, in_h, in_w;
  int filters, kernel;
  int out_h, out_w;  // after pooling
};

/// Dimensions derived from an ArchSpec, plus per-instance activation buffers.
struct Workspace {
  explicit Workspace(const ArchSpec& arch);

  std::vector<ConvGeometry> conv;
  int flat = 0;
  int hidden = 0;
  int classes = 0;

  // Per conv block: block input, pre-activation, pooled output, pool argmax.
  std::vector<std::vector<double>> block_in;
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> pooled;
  std::vector<std::vector<int>> pool_src;
  std::vector<double> hidden_pre;
  std::vector<double> hidden_act;
  std::vector<double> logits;
  std::vector<double> probs;

  // Backward scratch.
  std::vector<double> d_flat;
  std::vector<double> d_hidden;
  std::vector<double> d_logits;
  std::vector<std::vector<double>> d_pre;
  std::vector<std::vector<double>> d_block_in;
};

/// Fills ws.probs for one image.
void forward(const Model& model, std::span<const float> pixels, Workspace& ws);

/// -log(max(p_label, floor)) using the probabilities already in ws.
double instance_loss(const Workspace& ws, int label);

/// Forward + backward for one instance, adding the unscaled gradient into `grads`.
/// Returns the instance loss.
double accumulate_instance(const Model& model, const data::Instance& inst, Workspace& ws,
                           ParamSet& grads);

void add_into(ParamSet& total, const ParamSet& part);
void scale(ParamSet& params, double factor);
void fill_zero(ParamSet& params);

void check_pixels(const ArchSpec& arch, std::span<const float> pixels);
void check_batch(const Model& model, std::span<const data::Instance* const> batch);

}  // namespace poisonbench::nn::detail

#endif  // POISONBENCH_SRC_NN_DETAIL_HPP_
