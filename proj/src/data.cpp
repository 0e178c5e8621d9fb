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
#include <array>
#include <cmath>
#include <random>

#include "poisonbench/data.hpp"
#include "poisonbench/errors.hpp"
#include "poisonbench/rng.hpp"

namespace poisonbench::data {

std::size_t Dataset::poisoned_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(instances.begin(), instances.end(), [](const Instance& i) { return i.poisoned; }));
}

void validate(const Dataset& ds) {
  if (ds.width <= 0 || ds.height <= 0) throw ConfigError("dataset.width/height", "must be positive");
  if (ds.class_count < 1) throw ConfigError("dataset.class_count", "must be positive");
  const auto pixels = static_cast<std::size_t>(ds.width) * ds.height;
  std::vector<bool> seen(static_cast<std::size_t>(ds.class_count), false);
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    const auto& inst = ds.instances[i];
    if (inst.pixels.size() != pixels)
      throw ShapeError("instance " + std::to_string(i) + " has " + std::to_string(inst.pixels.size()) +
                       " pixels, expected " + std::to_string(pixels));
    if (inst.label >= ds.class_count)
      throw ConfigError("dataset.instances[" + std::to_string(i) + "].label", "out of range");
    seen[inst.label] = true;
  }
  if (!ds.instances.empty() && std::find(seen.begin(), seen.end(), false) != seen.end())
    throw ConfigError("dataset.class_count", "some class has no instances");
}

void GenConfig::validate() const {
  if (class_count < 2) throw ConfigError("data.class_count", "must be >= 2");
  if (class_count > 65535) throw ConfigError("data.class_count", "must fit in 16 bits");
  if (per_class_train < 1) throw ConfigError("data.per_class_train", "must be >= 1");
  if (per_class_test < 1) throw ConfigError("data.per_class_test", "must be >= 1");
  if (width < 1 || width > 65535) throw ConfigError("data.width", "must be in [1, 65535]");
  if (height < 1 || height > 65535) throw ConfigError("data.height", "must be in [1, 65535]");
  if (!(noise_sigma >= 0.0 && noise_sigma < 0.5)) throw ConfigError("data.noise_sigma", "must be in [0, 0.5)");
  if (max_shift < 0) throw ConfigError("data.max_shift", "must not be negative");
}

namespace {

constexpr int kBlurRadius = 1;
constexpr int kBlurPasses = 1;
// Texture contrast range before noise.
constexpr double kLo = 0.0;
constexpr double kHi = 1.0;

int wrap(int i, int n) { return ((i % n) + n) % n; }

// Circular box blur, separable.
std::vector<double> blur(const std::vector<double>& img, int w, int h) {
  std::vector<double> tmp(img.size());
  std::vector<double> out(img.size());
  const double norm = 1.0 / (2 * kBlurRadius + 1);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      double s = 0.0;
      for (int d = -kBlurRadius; d <= kBlurRadius; ++d) s += img[v * w + wrap(u + d, w)];
      tmp[v * w + u] = s * norm;
    }
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      double s = 0.0;
      for (int d = -kBlurRadius; d <= kBlurRadius; ++d) s += tmp[wrap(v + d, h) * w + u];
      out[v * w + u] = s * norm;
    }
  return out;
}

std::vector<double> class_texture(const GenConfig& cfg, int k) {
  Rng rng = make_rng({cfg.seed, 0xBA5E, static_cast<std::uint64_t>(k)});
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> img(static_cast<std::size_t>(cfg.width) * cfg.height);
  for (double& v : img) v = uni(rng);
  for (int p = 0; p < kBlurPasses; ++p) img = blur(img, cfg.width, cfg.height);
  const auto [lo, hi] = std::minmax_element(img.begin(), img.end());
  const double a = *lo;
  const double span = *hi - *lo;
  for (double& v : img) v = span > 0.0 ? kLo + (kHi - kLo) * (v - a) / span : 0.5;
  return img;
}

Instance make_instance(const GenConfig& cfg, const std::vector<double>& base, int k,
                       std::uint64_t split, int index) {
  Rng rng = make_rng({cfg.seed, split, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(index)});
  std::uniform_int_distribution<int> shift(-cfg.max_shift, cfg.max_shift);
  const int dx = shift(rng);
  const int dy = shift(rng);
  std::normal_distribution<double> noise(0.0, 1.0);
  Instance inst;
  inst.label = static_cast<std::uint16_t>(k);
  inst.pixels.resize(base.size());
  for (int v = 0; v < cfg.height; ++v)
    for (int u = 0; u < cfg.width; ++u) {
      double x = base[wrap(v - dy, cfg.height) * cfg.width + wrap(u - dx, cfg.width)];
      if (cfg.noise_sigma > 0.0) x += cfg.noise_sigma * noise(rng);
      inst.pixels[v * cfg.width + u] = static_cast<float>(std::clamp(x, 0.0, 1.0));
    }
  return inst;
}

}  // namespace

std::pair<Dataset, Dataset> generate_dataset(const GenConfig& cfg) {
  cfg.validate();
  Dataset train{{}, cfg.class_count, cfg.width, cfg.height};
  Dataset test{{}, cfg.class_count, cfg.width, cfg.height};
  train.instances.reserve(static_cast<std::size_t>(cfg.class_count) * cfg.per_class_train);
  test.instances.reserve(static_cast<std::size_t>(cfg.class_count) * cfg.per_class_test);
  for (int k = 0; k < cfg.class_count; ++k) {
    const auto base = class_texture(cfg, k);
    for (int j = 0; j < cfg.per_class_train; ++j) train.instances.push_back(make_instance(cfg, base, k, 1, j));
    for (int j = 0; j < cfg.per_class_test; ++j) test.instances.push_back(make_instance(cfg, base, k, 2, j));
  }
  return {std::move(train), std::move(test)};
}

Image generate_trigger_patch(std::uint64_t seed, int side) {
  if (side < 2) throw UsageError("trigger patch side must be >= 2, got " + std::to_string(side));
  Rng rng = make_rng({seed, 0x1215});
  // Dark pupil, mid-tone iris bands, bright sclera.
  constexpr int kRings = 6;
  std::array<double, kRings> level{};
  level[0] = std::uniform_real_distribution<double>(0.0, 0.2)(rng);
  for (int r = 1; r < kRings - 1; ++r) level[r] = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
  level[kRings - 1] = std::uniform_real_distribution<double>(0.75, 1.0)(rng);

  Image img{side, side, std::vector<float>(static_cast<std::size_t>(side) * side)};
  const double c = (side - 1) / 2.0;
  const double radius = side / 2.0;
  for (int v = 0; v < side; ++v)
    for (int u = 0; u < side; ++u) {
      const double rn = std::hypot(u - c, v - c) / radius;
      const int ring = std::min(static_cast<int>(rn * 4.0), kRings - 1);
      img.pixels[static_cast<std::size_t>(v) * side + u] = static_cast<float>(std::clamp(level[ring], 0.0, 1.0));
    }
  return img;
}

}  // namespace poisonbench::data
