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

#include <algorithm>
#include <numeric>

#include "poisonbench/errors.hpp"
#include "poisonbench/metrics.hpp"
#include "poisonbench/rng.hpp"
#include "test_util.hpp"

namespace poisonbench {
namespace {

using metrics::ConfusionMatrix;

constexpr double kTol = 1e-9;

TEST(Alc, HandExamples) {
  EXPECT_NEAR(metrics::alc(std::vector<double>{0.5, 0.5, 0.5}), 0.0, kTol);
  EXPECT_NEAR(metrics::alc(std::vector<double>{1.0, 0.8, 0.7}), -0.15, kTol);
  EXPECT_NEAR(metrics::alc(std::vector<double>{0.7, 0.8, 1.0}), 0.15, kTol);
}

TEST(Alc, TooFewEpochs) {
  EXPECT_THROW(metrics::alc(std::vector<double>{1.0}), UsageError);
  EXPECT_THROW(metrics::alc(std::vector<double>{}), UsageError);
}

TEST(AlcProperty, TelescopesToEndpoints) {
  Rng rng = make_rng({31337});
  std::uniform_int_distribution<int> len(2, 50);
  std::uniform_real_distribution<double> val(0.0, 5.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> l(static_cast<std::size_t>(len(rng)));
    for (double& x : l) x = val(rng);
    const double closed = (l.back() - l.front()) / static_cast<double>(l.size() - 1);
    EXPECT_NEAR(metrics::alc(l), closed, 1e-12);
  }
}

TEST(Aip, HandMean) {
  EXPECT_NEAR(metrics::mean_top_probability(std::vector<double>{0.9, 0.6, 0.75}), 0.75, kTol);
  EXPECT_THROW(metrics::mean_top_probability(std::vector<double>{}), UsageError);
}

data::Dataset small_test_set(const nn::ArchSpec& arch, std::size_t n) {
  Rng rng = make_rng({8});
  data::Dataset ds;
  ds.class_count = arch.class_count;
  ds.width = arch.input_width;
  ds.height = arch.input_height;
  for (std::size_t i = 0; i < n; ++i) {
    data::Instance inst;
    inst.pixels.resize(static_cast<std::size_t>(arch.input_width) * arch.input_height);
    for (float& p : inst.pixels) p = std::uniform_real_distribution<float>(0.0f, 1.0f)(rng);
    inst.label = static_cast<std::uint16_t>(i % static_cast<std::size_t>(arch.class_count));
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

TEST(Aip, ZeroModelGivesOneOverK) {
  const auto arch = testing::small_arch(4);
  const auto test = small_test_set(arch, 10);
  EXPECT_NEAR(metrics::aip(nn::zero_model(arch), test), 0.25, kTol);
}

TEST(Aip, OneHotModelGivesOne) {
  const auto arch = testing::small_arch(3);
  auto model = nn::zero_model(arch);
  for (auto& t : model.params)
    if (t.name == "out.bias") t.values[1] = 1000.0;
  const auto test = small_test_set(arch, 6);
  EXPECT_EQ(metrics::aip(model, test), 1.0);
  const auto ev = metrics::evaluate(model, test);
  EXPECT_EQ(ev.confusion.at(0, 1), 2u);
  EXPECT_EQ(ev.confusion.total(), 6u);
}

TEST(Aip, EmptyTestSet) {
  const auto arch = testing::small_arch(3);
  data::Dataset empty{{}, 3, arch.input_width, arch.input_height};
  EXPECT_THROW(metrics::aip(nn::zero_model(arch), empty), UsageError);
}

TEST(AipProperty, BoundedByOneOverKAndOne) {
  const auto arch = testing::small_arch(5);
  const auto test = small_test_set(arch, 12);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const double a = metrics::aip(testing::random_model(arch, seed), test);
    EXPECT_GE(a, 0.2 - 1e-12);
    EXPECT_LE(a, 1.0);
  }
}

TEST(Evaluate, AgreesWithPredict) {
  const auto arch = testing::small_arch(3);
  const auto test = small_test_set(arch, 9);
  const auto model = testing::random_model(arch, 4);
  const auto ev = metrics::evaluate(model, test);
  ConfusionMatrix cm(3);
  double sum = 0.0;
  for (const auto& i : test.instances) {
    const auto p = nn::predict(model, i.pixels);
    cm.add(i.label, p.label);
    sum += p.probability;
  }
  EXPECT_EQ(ev.confusion, cm);
  EXPECT_DOUBLE_EQ(ev.aip, sum / 9.0);
  EXPECT_DOUBLE_EQ(ev.fscore, metrics::macro_fscore(cm));
}

TEST(MacroFscore, HandExamples) {
  EXPECT_NEAR(metrics::macro_fscore(ConfusionMatrix(3, {4, 0, 0, 0, 7, 0, 0, 0, 1})), 1.0, kTol);
  EXPECT_NEAR(metrics::macro_fscore(ConfusionMatrix(2, {5, 5, 5, 5})), 0.5, kTol);
  // Class 2 is never true and never predicted: it contributes 0.
  EXPECT_NEAR(metrics::macro_fscore(ConfusionMatrix(3, {3, 0, 0, 0, 3, 0, 0, 0, 0})), 2.0 / 3.0, kTol);
  // P0 = 4/5, R0 = 4/6 -> 8/11; P1 = 3/5, R1 = 3/4 -> 2/3.
  EXPECT_NEAR(metrics::macro_fscore(ConfusionMatrix(2, {4, 2, 1, 3})), (8.0 / 11.0 + 2.0 / 3.0) / 2.0, kTol);
}

TEST(MacroFscore, EmptyMatrixRejected) {
  EXPECT_THROW(metrics::macro_fscore(ConfusionMatrix(2)), UsageError);
}

TEST(MacroFscoreProperty, PermutationInvariant) {
  Rng rng = make_rng({12});
  for (int t = 0; t < 200; ++t) {
    const int k = std::uniform_int_distribution<int>(2, 6)(rng);
    ConfusionMatrix cm(k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) cm.add(i, j, std::uniform_int_distribution<std::uint64_t>(0, 9)(rng));
    cm.add(0, 0);
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    ConfusionMatrix permuted(k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) permuted.add(perm[i], perm[j], cm.at(i, j));
    EXPECT_NEAR(metrics::macro_fscore(cm), metrics::macro_fscore(permuted), 1e-12);
    const double f = metrics::macro_fscore(cm);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(ConfusionMatrix, ShapeAndRange) {
  EXPECT_THROW(ConfusionMatrix(0), UsageError);
  EXPECT_THROW(ConfusionMatrix(2, {1, 2, 3}), ShapeError);
  ConfusionMatrix cm(2);
  EXPECT_THROW(cm.add(2, 0), UsageError);
  cm.add(1, 0, 3);
  EXPECT_EQ(cm.at(1, 0), 3u);
  EXPECT_EQ(cm.total(), 3u);
}

TEST(Ttd, Examples) {
  EXPECT_NEAR(metrics::ttd(100.0, 100.0), 0.0, kTol);
  EXPECT_NEAR(metrics::ttd(100.0, 163.0), 63.0, kTol);
  EXPECT_NEAR(metrics::ttd(100.0, 98.0), -2.0, kTol);
}

TEST(Pdm, Examples) {
  EXPECT_NEAR(metrics::pdm(0.95, 0.95), 0.0, kTol);
  EXPECT_NEAR(metrics::pdm(0.95, 0.93), 0.02, kTol);
  const double avg = (metrics::pdm(0.95, 0.938) + metrics::pdm(0.95, 0.931) + metrics::pdm(0.95, 0.935)) / 3.0;
  EXPECT_NEAR(avg, 0.0153333333333, 1e-9);
}

TEST(TtdPdmProperty, Antisymmetric) {
  Rng rng = make_rng({5});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    const double a = u(rng);
    const double b = u(rng);
    EXPECT_EQ(metrics::pdm(a, b), -metrics::pdm(b, a));
    EXPECT_EQ(metrics::ttd(100 * a, 100 * b), -metrics::ttd(100 * b, 100 * a));
  }
}

}  // namespace
}  // namespace poisonbench
