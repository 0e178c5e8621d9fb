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
#include <gtest/gtest.h>
#include <omp.h>

#include <cstring>
#include <random>

#include "poisonbench/kernels.hpp"
#include "test_util.hpp"

namespace poisonbench {
namespace {

class KernelParity : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    saved_ = omp_get_max_threads();
    omp_set_num_threads(GetParam());
  }
  void TearDown() override { omp_set_num_threads(saved_); }

 private:
  int saved_ = 1;
};

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

TEST_P(KernelParity, LossAndGradientBitIdentical) {
  std::mt19937_64 rng(3);
  const auto m = testing::random_model(testing::small_arch(4), 3);
  const auto batch = testing::random_batch(rng, m.arch, 13);
  const auto r = kernels::refs(batch);
  const auto s = kernels::serial::loss_and_gradient(m, r);
  const auto o = kernels::omp::loss_and_gradient(m, r);
  EXPECT_TRUE(same_bits(s.loss, o.loss));
  EXPECT_TRUE(nn::bit_identical(s.grads, o.grads));
  EXPECT_TRUE(same_bits(kernels::serial::batch_loss(m, r), kernels::omp::batch_loss(m, r)));
  EXPECT_TRUE(same_bits(s.loss, kernels::serial::batch_loss(m, r)));
}

TEST_P(KernelParity, ProbabilitiesBitIdentical) {
  std::mt19937_64 rng(4);
  const auto m = testing::random_model(testing::small_arch(5), 4);
  const auto batch = testing::random_batch(rng, m.arch, 17);
  const auto r = kernels::refs(batch);
  const auto s = kernels::serial::batch_probs(m, r);
  const auto o = kernels::omp::batch_probs(m, r);
  ASSERT_EQ(s.size(), o.size());
  EXPECT_EQ(std::memcmp(s.data(), o.data(), s.size() * sizeof(double)), 0);
  // Row i equals the single-image forward pass.
  const auto p3 = nn::forward_probs(m, batch[3].pixels);
  for (std::size_t k = 0; k < p3.size(); ++k) EXPECT_TRUE(same_bits(p3[k], s[3 * p3.size() + k]));
}

TEST_P(KernelParity, TrainingIsThreadCountInvariant) {
  data::GenConfig cfg;
  cfg.class_count = 3;
  cfg.per_class_train = 12;
  cfg.width = 8;
  cfg.height = 8;
  const auto ds = data::generate_dataset(cfg).first;
  const auto m = nn::init_model(testing::small_arch(3), 9);
  const int threads = omp_get_max_threads();
  const auto [a, ra] = nn::train_epoch(m, ds, 0.05, 5, 1);
  omp_set_num_threads(1);
  const auto [b, rb] = nn::train_epoch(m, ds, 0.05, 5, 1);
  omp_set_num_threads(threads);
  EXPECT_TRUE(nn::bit_identical(a.params, b.params));
  EXPECT_TRUE(same_bits(ra.mean_loss, rb.mean_loss));
}

INSTANTIATE_TEST_SUITE_P(Threads, KernelParity, ::testing::Values(1, 2, 4));

}  // namespace
}  // namespace poisonbench
