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
#include "poisonbench/poison.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "poisonbench/errors.hpp"

namespace poisonbench::poison {

std::string_view to_string(Strategy s) noexcept {
  return s == Strategy::LocalPatch ? "local" : "global";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "local" || text == "P") return Strategy::LocalPatch;
  if (text == "global" || text == "R") return Strategy::GlobalReplacement;
  throw ConfigError("poison.strategy", "unknown strategy '" + std::string(text) + "' (local|global)");
}

void PoisonPlan::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("poison.alpha", "must be in (0, 1]");
  if (epochs < 2) throw ConfigError("poison.epochs", "must be >= 2");
  if (beta < 1 || beta > epochs) throw ConfigError("poison.beta", "must be in [1, epochs]");
  if (strategy == Strategy::LocalPatch) {
    if (patch.width < 1 || patch.height < 1 ||
        patch.pixels.size() != static_cast<std::size_t>(patch.width) * patch.height)
      throw ConfigError("poison.patch", "local strategy needs a non-empty patch image");
  }
}

std::vector<int> plan_rounds(int epochs, int beta) {
  if (epochs < 2) throw ConfigError("epochs", "must be >= 2");
  if (beta < 1 || beta > epochs) throw ConfigError("beta", "must be in [1, epochs]");
  std::vector<int> out;
  for (int e = 1; e <= epochs - 1; e += beta) out.push_back(e);
  return out;
}

std::size_t victim_count(std::size_t s, double alpha) {
  // The epsilon keeps products such as 0.29 * 100 from flooring one short.
  const auto n = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(s) + 1e-9));
  return std::clamp<std::size_t>(n, 1, s);
}

std::vector<std::size_t> select_victims(const data::Dataset& train, double alpha, Rng& round_rng) {
  if (train.empty()) throw UsageError("select_victims: empty dataset");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha", "must be in (0, 1]");
  const std::size_t s = train.size();
  const std::size_t m = victim_count(s, alpha);
  std::vector<std::size_t> idx(s);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first m slots are a uniform sample without replacement.
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, s - 1);
    std::swap(idx[i], idx[pick(round_rng)]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

PatchArea sample_patch_area(int width, int height, const data::Image& patch, Rng& area_rng) {
  if (width < 8 || height < 8)
    throw ConfigError("image size", "patch areas need images of at least 8x8, got " + std::to_string(width) +
                                        "x" + std::to_string(height));
  if (patch.pixels.empty()) throw UsageError("sample_patch_area: empty patch image");
  const int lo = static_cast<int>(std::lround(width / 8.0));
  const int hi = std::min(static_cast<int>(std::lround(width / 4.0)), height);
  const int side = std::uniform_int_distribution<int>(lo, hi)(area_rng);
  PatchArea a;
  a.pw = side;
  a.ph = side;
  a.u0 = std::uniform_int_distribution<int>(0, width - side)(area_rng);
  a.v0 = std::uniform_int_distribution<int>(0, height - side)(area_rng);
  return a;
}

data::Instance apply_local_patch(const data::Instance& inst, int width, int height, const data::Image& patch,
                                 const PatchArea& area) {
  if (inst.pixels.size() != static_cast<std::size_t>(width) * height)
    throw UsageError("apply_local_patch: instance does not match the stated image size");
  if (!area.fits(width, height)) throw UsageError("apply_local_patch: patch area outside the image");
  if (patch.width < 1 || patch.height < 1) throw UsageError("apply_local_patch: empty patch image");
  data::Instance out = inst;
  for (int dv = 0; dv < area.ph; ++dv) {
    const int sv = dv * patch.height / area.ph;
    for (int du = 0; du < area.pw; ++du) {
      const int su = du * patch.width / area.pw;
      out.pixels[static_cast<std::size_t>(area.v0 + dv) * width + area.u0 + du] = patch.at(su, sv);
    }
  }
  out.poisoned = true;
  return out;
}

data::Instance apply_global_replacement(const data::Instance& inst, const data::Instance& donor) {
  if (inst.pixels.size() != donor.pixels.size())
    throw UsageError("apply_global_replacement: donor has " + std::to_string(donor.pixels.size()) +
                     " pixels, victim has " + std::to_string(inst.pixels.size()));
  data::Instance out = inst;
  out.pixels = donor.pixels;
  out.poisoned = true;
  return out;
}

RoundSummary execute_round(data::Dataset& train, const PoisonPlan& plan, int round_index) {
  plan.validate();
  const auto schedule = plan_rounds(plan.epochs, plan.beta);
  if (round_index < 0 || static_cast<std::size_t>(round_index) >= schedule.size())
    throw UsageError("round " + std::to_string(round_index) + " is not scheduled (" +
                     std::to_string(schedule.size()) + " rounds)");
  if (plan.strategy == Strategy::GlobalReplacement && train.size() < 2)
    throw UsageError("global replacement needs at least two instances");

  RoundSummary summary;
  summary.round_index = round_index;
  summary.epoch_after = schedule[static_cast<std::size_t>(round_index)];

  Rng round_rng = make_rng({plan.seed, static_cast<std::uint64_t>(round_index)});
  summary.victim_indices = select_victims(train, plan.alpha, round_rng);

  // Sequential in ascending victim order; each victim draws from its own stream.
  for (std::size_t v : summary.victim_indices) {
    Rng victim_rng = make_rng({plan.seed, static_cast<std::uint64_t>(round_index), 0x51C7, v});
    data::Instance& inst = train.instances[v];
    if (!inst.poisoned) ++summary.newly_poisoned_count;
    if (plan.strategy == Strategy::LocalPatch) {
      const PatchArea area = sample_patch_area(train.width, train.height, plan.patch, victim_rng);
      inst = apply_local_patch(inst, train.width, train.height, plan.patch, area);
    } else {
      std::size_t d = std::uniform_int_distribution<std::size_t>(0, train.size() - 2)(victim_rng);
      if (d >= v) ++d;
      inst = apply_global_replacement(inst, train.instances[d]);
    }
  }
  summary.cumulative_poisoned_count = train.poisoned_count();
  return summary;
}

}  // namespace poisonbench::poison
