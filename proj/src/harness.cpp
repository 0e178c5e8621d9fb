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
#include "poisonbench/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "poisonbench/errors.hpp"

namespace poisonbench::harness {

std::string_view to_string(RunKind k) noexcept {
  switch (k) {
    case RunKind::Base: return "base";
    case RunKind::LocalPatch: return "local";
    case RunKind::GlobalReplacement: return "global";
  }
  return "base";
}

RunKind parse_run_kind(std::string_view text) {
  if (text == "base") return RunKind::Base;
  if (text == "local") return RunKind::LocalPatch;
  if (text == "global") return RunKind::GlobalReplacement;
  throw ConfigError("strategy", "unknown value '" + std::string(text) + "'");
}

RunKind run_kind(poison::Strategy s) noexcept {
  return s == poison::Strategy::LocalPatch ? RunKind::LocalPatch : RunKind::GlobalReplacement;
}

void RunConfig::validate() const {
  if (epochs < 2) throw ConfigError("run.epochs", "must be >= 2 (ALC needs two epochs)");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("run.lr", "must be > 0");
  if (batch_size < 1) throw ConfigError("run.batch_size", "must be >= 1");
  if (!data_dir) gen.validate();
}

Datasets prepare_data(const RunConfig& cfg) {
  if (cfg.data_dir) {
    Datasets d{data::load_dataset(*cfg.data_dir / "train.psb"), data::load_dataset(*cfg.data_dir / "test.psb")};
    if (d.train.width != d.test.width || d.train.height != d.test.height || d.train.class_count != d.test.class_count)
      throw ConfigError("run.data_dir", "train and test files disagree on shape or class count");
    data::validate(d.train);
    return d;
  }
  data::GenConfig gen = cfg.gen;
  gen.seed = cfg.data_seed;
  auto [train, test] = data::generate_dataset(gen);
  return Datasets{std::move(train), std::move(test)};
}

std::string make_run_id(RunKind kind, double alpha, int beta, std::uint64_t seed) {
  char buf[96];
  const auto bp = static_cast<long>(std::lround(alpha * 10000.0));
  std::snprintf(buf, sizeof buf, "%s-a%04ld-b%02d-s%04llu", std::string(to_string(kind)).c_str(), bp, beta,
                static_cast<unsigned long long>(seed));
  return buf;
}

namespace {

nn::ArchSpec arch_for(const RunConfig& cfg, const Datasets& data) {
  nn::ArchSpec arch = cfg.arch;
  arch.input_width = data.train.width;
  arch.input_height = data.train.height;
  arch.class_count = data.train.class_count;
  return arch;
}

void finish(RunReport& r, const nn::Model& model, const Datasets& data) {
  r.alc = metrics::alc(r.epoch_losses);
  auto ev = metrics::evaluate(model, data.test);
  r.aip = ev.aip;
  r.fscore = ev.fscore;
  r.confusion = std::move(ev.confusion);
}

RunReport skeleton(const RunConfig& cfg, RunKind kind, double alpha, int beta) {
  RunReport r;
  r.strategy = kind;
  r.alpha = alpha;
  r.beta = beta;
  r.seed = cfg.model_seed;
  r.epochs = cfg.epochs;
  r.lr = cfg.lr;
  r.batch_size = cfg.batch_size;
  r.run_id = make_run_id(kind, alpha, beta, cfg.model_seed);
  return r;
}

}  // namespace

RunReport run_base(const RunConfig& cfg) {
  cfg.validate();
  return run_base(cfg, prepare_data(cfg));
}

RunReport run_base(const RunConfig& cfg, const Datasets& data) {
  cfg.validate();
  RunReport r = skeleton(cfg, RunKind::Base, 0.0, 0);
  nn::Model model = nn::init_model(arch_for(cfg, data), cfg.model_seed);

  const auto start = std::chrono::steady_clock::now();
  for (int e = 1; e <= cfg.epochs; ++e) {
    auto [next, rec] = nn::train_epoch(std::move(model), data.train, cfg.lr, cfg.batch_size,
                                       static_cast<std::uint64_t>(e));
    model = std::move(next);
    r.epoch_losses.push_back(rec.mean_loss);
  }
  r.training_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  finish(r, model, data);
  return r;
}

RunReport run_poisoned(const RunConfig& cfg, const poison::PoisonPlan& plan, const RunReport& base) {
  cfg.validate();
  return run_poisoned(cfg, plan, base, prepare_data(cfg));
}

RunReport run_poisoned(const RunConfig& cfg, const poison::PoisonPlan& plan, const RunReport& base,
                       const Datasets& data) {
  cfg.validate();
  plan.validate();
  if (plan.epochs != cfg.epochs) throw ConfigError("poison.epochs", "must equal run.epochs");
  if (base.strategy != RunKind::Base) throw UsageError("run_poisoned: reference report is not a base run");
  if (base.epochs != cfg.epochs || base.lr != cfg.lr || base.batch_size != cfg.batch_size ||
      base.seed != cfg.model_seed)
    throw ConfigError("base report", "epochs/lr/batch_size/seed differ from the run configuration");

  RunReport r = skeleton(cfg, run_kind(plan.strategy), plan.alpha, plan.beta);
  data::Dataset train = data.train;  // the run's own mutable copy
  nn::Model model = nn::init_model(arch_for(cfg, data), cfg.model_seed);
  const auto schedule = poison::plan_rounds(cfg.epochs, plan.beta);

  const auto start = std::chrono::steady_clock::now();
  std::size_t next_round = 0;
  for (int e = 1; e <= cfg.epochs; ++e) {
    auto [next, rec] = nn::train_epoch(std::move(model), train, cfg.lr, cfg.batch_size, static_cast<std::uint64_t>(e));
    model = std::move(next);
    r.epoch_losses.push_back(rec.mean_loss);
    if (next_round < schedule.size() && schedule[next_round] == e) {
      r.round_summaries.push_back(poison::execute_round(train, plan, static_cast<int>(next_round)));
      ++next_round;
    }
  }
  r.training_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  finish(r, model, data);
  r.ttd = metrics::ttd(base.training_seconds, r.training_seconds);
  r.pdm = metrics::pdm(base.fscore, r.fscore);
  return r;
}

data::Image PatchSource::load() const {
  if (path) return data::load_patch(*path);
  return data::generate_trigger_patch(seed, side);
}

void GridConfig::validate() const {
  base.validate();
  if (alphas.empty()) throw ConfigError("grid.alphas", "must not be empty");
  if (betas.empty()) throw ConfigError("grid.betas", "must not be empty");
  if (strategies.empty()) throw ConfigError("grid.strategies", "must not be empty");
  if (seeds.empty()) throw ConfigError("grid.seeds", "must not be empty");
  for (double a : alphas)
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("grid.alphas", "every alpha must be in (0, 1]");
  for (int b : resolved_betas())
    if (b < 1 || b > base.epochs) throw ConfigError("grid.betas", "every beta must be in [1, epochs]");
  if (jobs < 1) throw ConfigError("grid.jobs", "must be >= 1");
  if (!patch.path && patch.side < 2) throw ConfigError("poison.patch_side", "must be >= 2");
}

std::vector<int> GridConfig::resolved_betas() const {
  std::vector<int> out;
  for (int b : betas) {
    const int r = b == kBetaEpochs ? base.epochs : b;
    if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
  }
  return out;
}

void sort_reports(std::vector<RunReport>& reports) {
  std::sort(reports.begin(), reports.end(), [](const RunReport& a, const RunReport& b) {
    return std::tuple(static_cast<int>(a.strategy), a.alpha, a.beta, a.seed) <
           std::tuple(static_cast<int>(b.strategy), b.alpha, b.beta, b.seed);
  });
}

namespace {

// Runs tasks [0, n) on `jobs` threads. The first failure stops new tasks and is rethrown
// with the failing run id.
template <typename Task, typename Name>
void run_tasks(std::size_t n, int jobs, Task task, Name name) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::string failure;
  auto worker = [&](bool nested) {
    if (nested) omp_set_num_threads(1);
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        task(i);
      } catch (const std::exception& ex) {
        std::lock_guard lock(mu);
        if (!failed.exchange(true)) failure = "run " + name(i) + " failed: " + ex.what();
      }
    }
  };
  if (jobs <= 1) {
    worker(false);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker, true);
  }
  if (failed) throw Error(failure);
}

}  // namespace

std::vector<RunReport> run_grid(const GridConfig& grid) {
  grid.validate();
  const Datasets data = prepare_data(grid.base);
  const data::Image patch = grid.patch.load();

  std::vector<RunReport> bases(grid.seeds.size());
  auto cfg_for = [&grid](std::uint64_t seed) {
    RunConfig c = grid.base;
    c.model_seed = seed;
    return c;
  };
  run_tasks(
      grid.seeds.size(), grid.jobs, [&](std::size_t i) { bases[i] = run_base(cfg_for(grid.seeds[i]), data); },
      [&](std::size_t i) { return make_run_id(RunKind::Base, 0.0, 0, grid.seeds[i]); });

  struct Job {
    poison::Strategy strategy;
    double alpha;
    int beta;
    std::size_t seed_index;
  };
  std::vector<Job> jobs;
  for (auto s : grid.strategies)
    for (double a : grid.alphas)
      for (int b : grid.resolved_betas())
        for (std::size_t si = 0; si < grid.seeds.size(); ++si) jobs.push_back({s, a, b, si});

  std::vector<RunReport> poisoned(jobs.size());
  run_tasks(
      jobs.size(), grid.jobs,
      [&](std::size_t i) {
        const Job& j = jobs[i];
        const auto seed = grid.seeds[j.seed_index];
        poison::PoisonPlan plan;
        plan.alpha = j.alpha;
        plan.beta = j.beta;
        plan.strategy = j.strategy;
        plan.patch = patch;
        plan.seed = seed;
        plan.epochs = grid.base.epochs;
        poisoned[i] = run_poisoned(cfg_for(seed), plan, bases[j.seed_index], data);
      },
      [&](std::size_t i) {
        const Job& j = jobs[i];
        return make_run_id(run_kind(j.strategy), j.alpha, j.beta, grid.seeds[j.seed_index]);
      });

  std::vector<RunReport> all = std::move(bases);
  for (auto& r : poisoned) all.push_back(std::move(r));
  sort_reports(all);
  return all;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError(path.string(), "write failed");
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), ec.message());
}

}  // namespace

void write_reports(const std::vector<RunReport>& reports, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  {
    const auto path = out_dir / "runs.csv";
    auto out = open_out(path);
    for (std::size_t i = 0; i < kRunsColumns.size(); ++i) out << (i ? "," : "") << kRunsColumns[i];
    out << '\n';
    for (const auto& r : reports) {
      out << r.run_id << ',' << to_string(r.strategy) << ',' << num(r.alpha) << ',' << r.beta << ',' << r.seed
          << ',' << r.epochs << ',' << num(r.lr) << ',' << r.batch_size << ',' << num(r.alc) << ','
          << num(r.aip) << ',' << num(r.fscore) << ',' << num(r.ttd) << ',' << num(r.pdm) << ','
          << num(r.training_seconds) << '\n';
    }
    close_out(out, path);
  }
  {
    const auto path = out_dir / "losses.csv";
    auto out = open_out(path);
    out << "run_id,epoch_index,mean_loss\n";
    for (const auto& r : reports)
      for (std::size_t e = 0; e < r.epoch_losses.size(); ++e)
        out << r.run_id << ',' << e + 1 << ',' << num(r.epoch_losses[e]) << '\n';
    close_out(out, path);
  }
  {
    const auto path = out_dir / "rounds.csv";
    auto out = open_out(path);
    out << "run_id,round_index,epoch_after,victim_count,newly_poisoned_count,cumulative_poisoned_count,"
           "victim_indices\n";
    for (const auto& r : reports)
      for (const auto& s : r.round_summaries) {
        out << r.run_id << ',' << s.round_index << ',' << s.epoch_after << ',' << s.victim_indices.size() << ','
            << s.newly_poisoned_count << ',' << s.cumulative_poisoned_count << ',';
        for (std::size_t i = 0; i < s.victim_indices.size(); ++i) out << (i ? ";" : "") << s.victim_indices[i];
        out << '\n';
      }
    close_out(out, path);
  }
}

double median(std::vector<double> values) {
  if (values.empty()) throw UsageError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void emit_plot_data(const std::vector<RunReport>& reports, const std::filesystem::path& out_dir) {
  std::vector<const RunReport*> bases;
  // (strategy, beta) -> alpha -> reports
  std::map<std::pair<int, int>, std::map<double, std::vector<const RunReport*>>> curves;
  for (const auto& r : reports) {
    if (r.strategy == RunKind::Base)
      bases.push_back(&r);
    else
      curves[{static_cast<int>(r.strategy), r.beta}][r.alpha].push_back(&r);
  }
  if (bases.empty()) throw UsageError("emit_plot_data: reports contain no base run");
  ensure_dir(out_dir);

  struct Metric {
    const char* name;
    double RunReport::*field;
  };
  for (const Metric m : {Metric{"alc", &RunReport::alc}, Metric{"aip", &RunReport::aip}, Metric{"pdm", &RunReport::pdm}}) {
    auto med = [&m](const std::vector<const RunReport*>& rs) {
      std::vector<double> v;
      for (const auto* r : rs) v.push_back(r->*(m.field));
      return median(std::move(v));
    };
    const double base_value = med(bases);
    const auto path = out_dir / (std::string("plot_") + m.name + ".csv");
    auto out = open_out(path);
    out << "strategy,beta,alpha,median_value\n";
    for (const auto& [key, by_alpha] : curves) {
      const auto kind = to_string(static_cast<RunKind>(key.first));
      out << kind << ',' << key.second << ',' << num(0.0) << ',' << num(base_value) << '\n';
      for (const auto& [alpha, rs] : by_alpha)
        out << kind << ',' << key.second << ',' << num(alpha) << ',' << num(med(rs)) << '\n';
    }
    close_out(out, path);
  }
}

}  // namespace poisonbench::harness
