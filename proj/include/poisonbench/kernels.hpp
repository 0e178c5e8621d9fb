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
#ifndef POISONBENCH_KERNELS_HPP_
#define POISONBENCH_KERNELS_HPP_

// Batch kernels over a model. Two implementations share one per-instance core:
// `serial` is the reference, `omp` spreads instances over OpenMP threads. Both reduce
// per-instance results in index order, so their outputs are bit-identical.

#include <span>
#include <vector>

#include "poisonbench/data.hpp"
#include "poisonbench/nn.hpp"

namespace poisonbench::kernels {

using InstanceRefs = std::span<const data::Instance* const>;

struct LossGrad {
  double loss = 0.0;
  nn::ParamSet grads;
};

namespace serial {
double batch_loss(const nn::Model& model, InstanceRefs batch);
LossGrad loss_and_gradient(const nn::Model& model, InstanceRefs batch);
/// Row-major n x class_count probabilities.
std::vector<double> batch_probs(const nn::Model& model, InstanceRefs batch);
}  // namespace serial

namespace omp {
double batch_loss(const nn::Model& model, InstanceRefs batch);
LossGrad loss_and_gradient(const nn::Model& model, InstanceRefs batch);
std::vector<double> batch_probs(const nn::Model& model, InstanceRefs batch);
}  // namespace omp

std::vector<const data::Instance*> refs(std::span<const data::Instance> instances);

}  // namespace poisonbench::kernels

#endif  // POISONBENCH_KERNELS_HPP_
