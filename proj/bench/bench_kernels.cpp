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
// Serial reference kernels vs the OpenMP kernels on the default architecture.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>

#include "poisonbench/data.hpp"
#include "poisonbench/kernels.hpp"
#include "poisonbench/nn.hpp"

namespace {

using namespace poisonbench;

struct Fixture {
  nn::Model model;
  std::vector<data::Instance> batch;
};

Fixture make_fixture(int batch_size) {
  data::GenConfig g;
  g.per_class_train = (batch_size + g.class_count - 1) / g.class_count;
  g.per_class_test = 1;
  auto train = data::generate_dataset(g).first;
  train.instances.resize(static_cast<std::size_t>(batch_size));
  return {nn::init_model(nn::ArchSpec{}, 1), std::move(train.instances)};
}

void BM_LossGradSerial(benchmark::State& state) {
  const auto f = make_fixture(static_cast<int>(state.range(0)));
  const auto refs = kernels::refs(f.batch);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::loss_and_gradient(f.model, refs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LossGradOmp(benchmark::State& state) {
  const auto f = make_fixture(static_cast<int>(state.range(0)));
  const auto refs = kernels::refs(f.batch);
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::loss_and_gradient(f.model, refs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ProbsSerial(benchmark::State& state) {
  const auto f = make_fixture(static_cast<int>(state.range(0)));
  const auto refs = kernels::refs(f.batch);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::batch_probs(f.model, refs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ProbsOmp(benchmark::State& state) {
  const auto f = make_fixture(static_cast<int>(state.range(0)));
  const auto refs = kernels::refs(f.batch);
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::batch_probs(f.model, refs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_LossGradSerial)->Arg(32)->Arg(256)->UseRealTime();
BENCHMARK(BM_LossGradOmp)->ArgsProduct({{32, 256}, {1, 2, 4}})->UseRealTime();
BENCHMARK(BM_ProbsSerial)->Arg(256)->Arg(800)->UseRealTime();
BENCHMARK(BM_ProbsOmp)->ArgsProduct({{256, 800}, {1, 2, 4}})->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
