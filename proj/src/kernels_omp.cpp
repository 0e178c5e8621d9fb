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
#include <omp.h>

#include <algorithm>

#include "nn_detail.hpp"
#include "poisonbench/kernels.hpp"

namespace poisonbench::kernels::omp {

// Per-instance results land in their own slots; reductions run afterwards in index order.

double batch_loss(const nn::Model& model, InstanceRefs batch) {
  nn::detail::check_batch(model, batch);
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
  std::vector<double> losses(batch.size());
#pragma omp parallel
  {
    nn::detail::Workspace ws(model.arch);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      nn::detail::forward(model, batch[i]->pixels, ws);
      losses[i] = nn::detail::instance_loss(ws, batch[i]->label);
    }
  }
  double sum = 0.0;
  for (double l : losses) sum += l;
  return sum / static_cast<double>(batch.size());
}

LossGrad loss_and_gradient(const nn::Model& model, InstanceRefs batch) {
  nn::detail::check_batch(model, batch);
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
  LossGrad out{0.0, nn::zeros_like(model.params)};

  if (omp_get_max_threads() == 1 || n == 1) {
    // Same reduction order as the threaded path without n gradient buffers.
    nn::detail::Workspace ws(model.arch);
    nn::ParamSet part = out.grads;
    for (const auto* inst : batch) {
      nn::detail::fill_zero(part);
      out.loss += nn::detail::accumulate_instance(model, *inst, ws, part);
      nn::detail::add_into(out.grads, part);
    }
  } else {
    std::vector<nn::ParamSet> parts(batch.size());
    std::vector<double> losses(batch.size());
#pragma omp parallel
    {
      nn::detail::Workspace ws(model.arch);
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        parts[i] = out.grads;
        losses[i] = nn::detail::accumulate_instance(model, *batch[i], ws, parts[i]);
      }
    }
    for (std::size_t i = 0; i < parts.size(); ++i) {
      out.loss += losses[i];
      nn::detail::add_into(out.grads, parts[i]);
    }
  }
  const auto count = static_cast<double>(batch.size());
  out.loss /= count;
  nn::detail::scale(out.grads, 1.0 / count);
  return out;
}

std::vector<double> batch_probs(const nn::Model& model, InstanceRefs batch) {
  const auto k = static_cast<std::size_t>(model.arch.class_count);
  for (const auto* inst : batch) nn::detail::check_pixels(model.arch, inst->pixels);
  std::vector<double> out(batch.size() * k);
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
#pragma omp parallel
  {
    nn::detail::Workspace ws(model.arch);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      nn::detail::forward(model, batch[i]->pixels, ws);
      std::copy(ws.probs.begin(), ws.probs.end(), out.begin() + i * static_cast<std::ptrdiff_t>(k));
    }
  }
  return out;
}

}  // namespace poisonbench::kernels::omp
