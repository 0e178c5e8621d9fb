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
#ifndef POISONBENCH_HARNESS_HPP_
#define POISONBENCH_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "poisonbench/data.hpp"
#include "poisonbench/metrics.hpp"
#include "poisonbench/nn.hpp"
#include "poisonbench/poison.hpp"

namespace poisonbench::harness {

enum class RunKind { Base, LocalPatch, GlobalReplacement };

std::string_view to_string(RunKind k) noexcept;
RunKind parse_run_kind(std::string_view text);
RunKind run_kind(poison::Strategy s) noexcept;

struct RunConfig {
  nn::ArchSpec arch;  // input size and class count are taken from the dataset
  int epochs = 10;
  double lr = 0.01;
  int batch_size = 32;
  std::uint64_t model_seed = 1;
  std::uint64_t data_seed = 1;
  data::GenConfig gen;                          // used unless data_dir is set
  std::optional<std::filesystem::path> data_dir;  // holds train.psb and test.psb

  void validate() const;
};

struct Datasets {
  data::Dataset train;
  data::Dataset test;
};

/// Generates (seeded by data_seed) or loads the train/test split for `cfg`.
Datasets prepare_data(const RunConfig& cfg);

struct RunReport {
  std::string run_id;
  RunKind strategy = RunKind::Base;
  double alpha = 0.0;
  int beta = 0;
  std::uint64_t seed = 0;
  int epochs = 0;
  double lr = 0.0;
  int batch_size = 0;
  std::vector<double> epoch_losses;
  double training_seconds = 0.0;
  std::vector<poison::RoundSummary> round_summaries;
  double alc = 0.0;
  double aip = 0.0;
  double fscore = 0.0;
  double ttd = 0.0;
  double pdm = 0.0;
  metrics::ConfusionMatrix confusion;
};

/// "local-a0500-b01-s0007": alpha in basis points, beta and seed zero-padded.
std::string make_run_id(RunKind kind, double alpha, int beta, std::uint64_t seed);

RunReport run_base(const RunConfig& cfg);
RunReport run_base(const RunConfig& cfg, const Datasets& data);

RunReport run_poisoned(const RunConfig& cfg, const poison::PoisonPlan& plan, const RunReport& base);
RunReport run_poisoned(const RunConfig& cfg, const poison::PoisonPlan& plan, const RunReport& base,
                       const Datasets& data);

/// Beta value that stands for "epochs" in a grid.
inline constexpr int kBetaEpochs = -1;

struct PatchSource {
  std::uint64_t seed = 1;
  int side = 8;
  std::optional<std::filesystem::path> path;

  data::Image load() const;
};

struct GridConfig {
  RunConfig base;
  std::vector<double> alphas{0.05, 0.10, 0.15, 0.20};
  std::vector<int> betas{1, kBetaEpochs};
  std::vector<poison::Strategy> strategies{poison::Strategy::LocalPatch, poison::Strategy::GlobalReplacement};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  PatchSource patch;
  int jobs = 1;

  void validate() const;
  std::vector<int> resolved_betas() const;
};

/// Base run per seed, then every (strategy, alpha, beta, seed) poisoned run. Sorted by
/// (strategy, alpha, beta, seed) with Base first. Throws on the first failing run.
std::vector<RunReport> run_grid(const GridConfig& grid);

void sort_reports(std::vector<RunReport>& reports);

/// runs.csv, losses.csv, rounds.csv.
void write_reports(const std::vector<RunReport>& reports, const std::filesystem::path& out_dir);

/// plot_alc.csv, plot_aip.csv, plot_pdm.csv: median over seeds per (strategy, beta, alpha),
/// with an alpha = 0 row per curve holding the base value.
void emit_plot_data(const std::vector<RunReport>& reports, const std::filesystem::path& out_dir);

inline const std::vector<std::string> kRunsColumns{
    "run_id", "strategy", "alpha", "beta", "seed", "epochs", "lr", "batch_size",
    "alc", "aip", "fscore", "ttd", "pdm", "training_seconds"};

double median(std::vector<double> values);

}  // namespace poisonbench::harness

#endif  // POISONBENCH_HARNESS_HPP_
