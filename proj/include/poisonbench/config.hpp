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
#ifndef POISONBENCH_CONFIG_HPP_
#define POISONBENCH_CONFIG_HPP_

// Flat `key = value` configuration. Keys carry a section prefix (run., arch., data.,
// poison., grid.); `#` starts a comment.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "poisonbench/harness.hpp"
#include "poisonbench/poison.hpp"

namespace poisonbench::config {

struct PoisonSettings {
  double alpha = 0.20;
  int beta = 1;  // kBetaEpochs means "epochs"
  poison::Strategy strategy = poison::Strategy::LocalPatch;
  std::optional<std::uint64_t> seed;  // defaults to run.model_seed
};

struct Settings {
  harness::GridConfig grid;
  PoisonSettings poison;

  harness::RunConfig& run() noexcept { return grid.base; }
  const harness::RunConfig& run() const noexcept { return grid.base; }

  poison::PoisonPlan make_plan() const;
  void validate() const;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses config text; `origin` prefixes error messages (usually the file name).
KeyValues parse_config_text(std::string_view text, std::string_view origin = "config");
KeyValues read_config_file(const std::filesystem::path& path);

/// Applies one setting. Throws ConfigError for unknown keys or unparseable values.
void apply(Settings& settings, std::string_view key, std::string_view value);
void apply_all(Settings& settings, const KeyValues& kvs);

/// Forces every seed (model, data, poison, grid) to `seed`.
void override_all_seeds(Settings& settings, std::uint64_t seed);

/// Keys accepted by apply(), in documentation order.
const std::vector<std::string>& known_keys();

}  // namespace poisonbench::config

#endif  // POISONBENCH_CONFIG_HPP_
