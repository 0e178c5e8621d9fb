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
#ifndef POISONBENCH_DATA_HPP_
#define POISONBENCH_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace poisonbench::data {

/// Row-major grayscale image with values in [0,1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  float at(int u, int v) const { return pixels[static_cast<std::size_t>(v) * width + u]; }
  bool operator==(const Image&) const = default;
};

struct Instance {
  std::vector<float> pixels;  // width * height, row-major
  std::uint16_t label = 0;
  bool poisoned = false;

  std::span<const float> view() const noexcept { return pixels; }
  bool operator==(const Instance&) const = default;
};

struct Dataset {
  std::vector<Instance> instances;
  int class_count = 0;
  int width = 0;
  int height = 0;

  std::size_t size() const noexcept { return instances.size(); }
  bool empty() const noexcept { return instances.empty(); }
  std::size_t poisoned_count() const noexcept;
  bool operator==(const Dataset&) const = default;
};

/// Throws ConfigError/ShapeError when shared dimensions, labels or class coverage are violated.
void validate(const Dataset& ds);

struct GenConfig {
  std::uint64_t seed = 1;
  int class_count = 8;
  int per_class_train = 200;
  int per_class_test = 100;
  int width = 16;
  int height = 16;
  double noise_sigma = 0.1;
  int max_shift = 2;  // circular shift drawn from [-max_shift, max_shift] on each axis

  void validate() const;
};

/// Seeded class-texture corpus. Returns (train, test); each class has its own smooth base
/// texture, and every instance is that texture shifted circularly plus Gaussian noise.
std::pair<Dataset, Dataset> generate_dataset(const GenConfig& cfg);

/// Concentric-ring (iris-like) trigger image with seeded ring intensities.
Image generate_trigger_patch(std::uint64_t seed, int side);

// Binary container: "PSB1" little-endian, see README for the byte layout.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);
void save_patch(const Image& patch, const std::filesystem::path& path);
Image load_patch(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_dataset(const Dataset& ds);
Dataset decode_dataset(std::span<const std::uint8_t> bytes);

}  // namespace poisonbench::data

#endif  // POISONBENCH_DATA_HPP_
