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
#include <algorithm>

#include "nn_detail.hpp"
#include "poisonbench/kernels.hpp"

namespace poisonbench::kernels {

std::vector<const data::Instance*> refs(std::span<const data::Instance> instances) {
  std::vector<const data::Instance*> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(&inst);
  return out;
}

namespace serial {

double batch_loss(const nn::Model& model, InstanceRefs batch) {
  nn::detail::check_batch(model, batch);
  nn::detail::Workspace ws(model.arch);
  double sum = 0.0;
  for (const auto* inst : batch) {
    nn::detail::forward(model, inst->pixels, ws);
    sum += nn::detail::instance_loss(ws, inst->label);
  }
  return sum / static_cast<double>(batch.size());
}

LossGrad loss_and_gradient(const nn::Model& model, InstanceRefs batch) {
  nn::detail::check_batch(model, batch);
  nn::detail::Workspace ws(model.arch);
  LossGrad out{0.0, nn::zeros_like(model.params)};
  nn::ParamSet part = out.grads;
  for (const auto* inst : batch) {
    nn::detail::fill_zero(part);
    out.loss += nn::detail::accumulate_instance(model, *inst, ws, part);
    nn::detail::add_into(out.grads, part);
  }
  const auto n = static_cast<double>(batch.size());
  out.loss /= n;
  nn::detail::scale(out.grads, 1.0 / n);
  return out;
}

std::vector<double> batch_probs(const nn::Model& model, InstanceRefs batch) {
  const auto k = static_cast<std::size_t>(model.arch.class_count);
  std::vector<double> out(batch.size() * k);
  nn::detail::Workspace ws(model.arch);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    nn::detail::check_pixels(model.arch, batch[i]->pixels);
    nn::detail::forward(model, batch[i]->pixels, ws);
    std::copy(ws.probs.begin(), ws.probs.end(), out.begin() + static_cast<std::ptrdiff_t>(i * k));
  }
  return out;
}

}  // namespace serial
}  // namespace poisonbench::kernels
