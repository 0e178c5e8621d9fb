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
#ifndef POISONBENCH_POISON_HPP_
#define POISONBENCH_POISON_HPP_

// Between-epoch poisoning of an in-memory training set. Nothing here sees a model,
// gradients or an architecture: the attacker only touches the dataset.

#include <cstdint>
#include <string_view>
#include <vector>

#include "poisonbench/data.hpp"
#include "poisonbench/rng.hpp"

namespace poisonbench::poison {

enum class Strategy { LocalPatch, GlobalReplacement };

std::string_view to_string(Strategy s) noexcept;
/// Accepts "local"/"global" (and the aliases "P"/"R").
Strategy parse_strategy(std::string_view text);

/// Rectangle [u0, u0+pw) x [v0, v0+ph) in pixel coordinates; u is the column.
struct PatchArea {
  int u0 = 0;
  int v0 = 0;
  int pw = 1;
  int ph = 1;

  bool contains(int u, int v) const noexcept { return u >= u0 && u < u0 + pw && v >= v0 && v < v0 + ph; }
  bool fits(int width, int height) const noexcept {
    return u0 >= 0 && v0 >= 0 && pw >= 1 && ph >= 1 && u0 + pw <= width && v0 + ph <= height;
  }
  bool operator==(const PatchArea&) const = default;
};

struct PoisonPlan {
  double alpha = 0.05;
  int beta = 1;
  Strategy strategy = Strategy::LocalPatch;
  data::Image patch;  // used by LocalPatch only
  std::uint64_t seed = 1;
  int epochs = 10;

  void validate() const;
};

struct RoundSummary {
  int round_index = 0;
  int epoch_after = 0;
  std::vector<std::size_t> victim_indices;  // ascending
  std::size_t newly_poisoned_count = 0;
  std::size_t cumulative_poisoned_count = 0;

  bool operator==(const RoundSummary&) const = default;
};

/// Epochs after which a round runs: 1, 1+beta, 1+2*beta, ... up to epochs-1.
std::vector<int> plan_rounds(int epochs, int beta);

/// max(1, floor(alpha * s)).
std::size_t victim_count(std::size_t s, double alpha);

/// Uniform sample without replacement, returned in ascending order.
std::vector<std::size_t> select_victims(const data::Dataset& train, double alpha, Rng& round_rng);

/// Square area with side drawn from [round(W/8), round(W/4)] placed uniformly where it fits.
PatchArea sample_patch_area(int width, int height, const data::Image& patch, Rng& area_rng);

/// Replaces pixels inside `area` with the nearest-neighbour resampled patch.
data::Instance apply_local_patch(const data::Instance& inst, int width, int height,
                                 const data::Image& patch, const PatchArea& area);

/// Copies the donor's pixels, keeps the victim's label.
data::Instance apply_global_replacement(const data::Instance& inst, const data::Instance& donor);

/// Runs the round_index-th scheduled round (0-based) in place on `train`.
RoundSummary execute_round(data::Dataset& train, const PoisonPlan& plan, int round_index);

}  // namespace poisonbench::poison

#endif  // POISONBENCH_POISON_HPP_
