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
// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "poisonbench/data.hpp"
#include "poisonbench/harness.hpp"
#include "poisonbench/metrics.hpp"
#include "poisonbench/nn.hpp"
#include "poisonbench/poison.hpp"
#include "poisonbench/rng.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace poisonbench;
using harness::RunKind;
using harness::RunReport;
using poison::Strategy;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Outcome& o) {
  std::printf("criterion %2d %-28s %s  %s\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- criterion 1 ----

Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  nn::ArchSpec arch;
  arch.input_width = 8;
  arch.input_height = 8;
  arch.conv_blocks = {{4, 3}};
  arch.hidden_units = 16;
  arch.class_count = 4;
  const double h = 1e-3;
  double worst = 0.0;
  int redraws = 0;
  std::size_t params = 0;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    // Sample points where a +-h step would cross a ReLU or pooling kink are redrawn: there the
    // central difference does not estimate the derivative.
    const auto p = testing::smooth_fd_point(arch, seed, 8, h);
    redraws += p.redraws;
    params = p.model.parameter_count();
    worst = std::max(worst, testing::max_gradient_error(nn::backward(p.model, p.batch),
                                                        testing::finite_difference_gradient(p.model, p.batch, h)));
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-4 && elapsed < 10.0 && params <= 5000,
          fmt("max rel err %.3g over 3 seeds, %zu params, batch 8, %d kink redraws, %.2fs", worst, params, redraws,
              elapsed)};
}

// ---- criterion 8 ----

Outcome metric_units() {
  std::vector<std::string> bad;
  auto near = [&](const char* what, double got, double want) {
    if (!(std::abs(got - want) <= 1e-9)) bad.push_back(fmt("%s=%.12g (want %.12g)", what, got, want));
  };
  near("alc[.5,.5,.5]", metrics::alc(std::vector<double>{0.5, 0.5, 0.5}), 0.0);
  near("alc[1,.8,.7]", metrics::alc(std::vector<double>{1.0, 0.8, 0.7}), -0.15);
  near("alc[.7,.8,1]", metrics::alc(std::vector<double>{0.7, 0.8, 1.0}), 0.15);
  near("aip[.9,.6,.75]", metrics::mean_top_probability(std::vector<double>{0.9, 0.6, 0.75}), 0.75);

  nn::ArchSpec arch;
  arch.input_width = 8;
  arch.input_height = 8;
  arch.conv_blocks = {{2, 3}};
  arch.hidden_units = 4;
  arch.class_count = 5;
  data::Dataset test{{}, 5, 8, 8};
  for (int i = 0; i < 5; ++i) test.instances.push_back({std::vector<float>(64, 0.1f * static_cast<float>(i)), static_cast<std::uint16_t>(i), false});
  near("aip(zero model)", metrics::aip(nn::zero_model(arch), test), 0.2);
  nn::Model onehot = nn::zero_model(arch);
  for (auto& t : onehot.params)
    if (t.name == "out.bias") t.values[2] = 1000.0;
  near("aip(one-hot model)", metrics::aip(onehot, test), 1.0);

  near("f1(diagonal)", metrics::macro_fscore(metrics::ConfusionMatrix(2, {3, 0, 0, 4})), 1.0);
  near("f1[[5,5],[5,5]]", metrics::macro_fscore(metrics::ConfusionMatrix(2, {5, 5, 5, 5})), 0.5);
  near("f1(absent class)", metrics::macro_fscore(metrics::ConfusionMatrix(3, {2, 0, 0, 0, 2, 0, 0, 0, 0})), 2.0 / 3.0);
  near("ttd(100,100)", metrics::ttd(100.0, 100.0), 0.0);
  near("ttd(100,163)", metrics::ttd(100.0, 163.0), 63.0);
  near("ttd(100,98)", metrics::ttd(100.0, 98.0), -2.0);
  near("pdm(.95,.95)", metrics::pdm(0.95, 0.95), 0.0);
  near("pdm(.95,.93)", metrics::pdm(0.95, 0.93), 0.02);

  Rng rng = make_rng({4242});
  std::uniform_int_distribution<int> len(2, 40);
  std::uniform_real_distribution<double> val(0.0, 4.0);
  int telescoping_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> l(static_cast<std::size_t>(len(rng)));
    for (double& x : l) x = val(rng);
    if (std::abs(metrics::alc(l) - (l.back() - l.front()) / static_cast<double>(l.size() - 1)) > 1e-12)
      ++telescoping_bad;
  }
  if (telescoping_bad) bad.push_back(fmt("telescoping failed on %d sequences", telescoping_bad));

  Outcome o;
  o.pass = bad.empty();
  o.detail = o.pass ? "15 hand examples to 1e-9, telescoping identity on 1000 sequences" : bad.front();
  return o;
}

// ---- criterion 9 ----

data::Dataset indexed(std::size_t s, int side) {
  data::Dataset ds{{}, 5, side, side};
  for (std::size_t i = 0; i < s; ++i) {
    data::Instance inst;
    inst.pixels.resize(static_cast<std::size_t>(side) * side);
    for (std::size_t p = 0; p < inst.pixels.size(); ++p) inst.pixels[p] = static_cast<float>((i * 13 + p) % 997) / 997.0f;
    inst.label = static_cast<std::uint16_t>(i % 5);
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

Outcome poisoning_invariants() {
  std::vector<std::string> bad;
  Rng meta = make_rng({9009});
  int rounds = 0;
  for (int trial = 0; rounds < 1000; ++trial) {
    const std::size_t s = std::uniform_int_distribution<std::size_t>(2, 80)(meta);
    const int side = std::uniform_int_distribution<int>(8, 16)(meta);
    poison::PoisonPlan plan;
    plan.alpha = std::uniform_real_distribution<double>(0.01, 1.0)(meta);
    plan.epochs = std::uniform_int_distribution<int>(2, 6)(meta);
    plan.beta = std::uniform_int_distribution<int>(1, plan.epochs)(meta);
    plan.strategy = trial % 2 ? Strategy::GlobalReplacement : Strategy::LocalPatch;
    plan.seed = meta();
    plan.patch = data::generate_trigger_patch(plan.seed, 8);
    auto ds = indexed(s, side);
    std::set<std::size_t> ever;
    const auto schedule = poison::plan_rounds(plan.epochs, plan.beta);
    for (int r = 0; r < static_cast<int>(schedule.size()); ++r, ++rounds) {
      const auto before = ds;
      const auto sum = poison::execute_round(ds, plan, r);
      const std::size_t want = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(plan.alpha * s + 1e-9)));
      const std::set<std::size_t> victims(sum.victim_indices.begin(), sum.victim_indices.end());
      if (sum.victim_indices.size() != want || victims.size() != want) bad.push_back(fmt("cardinality in trial %d", trial));
      for (std::size_t i = 0; i < s; ++i) {
        if (ds.instances[i].label != before.instances[i].label) bad.push_back(fmt("label changed in trial %d", trial));
        if (!victims.count(i) && ds.instances[i] != before.instances[i])
          bad.push_back(fmt("non-victim changed in trial %d", trial));
      }
      if (plan.strategy == Strategy::LocalPatch)
        for (std::size_t v : victims) {
          Rng vr = make_rng({plan.seed, static_cast<std::uint64_t>(r), 0x51C7, v});
          const auto area = poison::sample_patch_area(side, side, plan.patch, vr);
          for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) {
              const std::size_t p = static_cast<std::size_t>(y) * side + x;
              if (!area.contains(x, y) && std::bit_cast<std::uint32_t>(ds.instances[v].pixels[p]) !=
                                              std::bit_cast<std::uint32_t>(before.instances[v].pixels[p]))
                bad.push_back(fmt("locality broken in trial %d", trial));
            }
        }
      const std::size_t prev = ever.size();
      ever.insert(victims.begin(), victims.end());
      if (ever.size() < prev || sum.cumulative_poisoned_count != ever.size())
        bad.push_back(fmt("accumulation in trial %d", trial));
    }
  }

  double mean = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto ds = indexed(500, 8);
    poison::PoisonPlan plan;
    plan.alpha = 0.2;
    plan.epochs = 6;
    plan.beta = 1;
    plan.strategy = Strategy::GlobalReplacement;
    plan.seed = seed;
    for (int r = 0; r < 5; ++r) poison::execute_round(ds, plan, r);
    mean += static_cast<double>(ds.poisoned_count()) / 500.0 / 100.0;
  }
  const double expected = 1.0 - std::pow(0.8, 5);
  if (std::abs(mean - expected) > 0.03) bad.push_back(fmt("coverage %.4f vs %.4f", mean, expected));

  Outcome o;
  o.pass = bad.empty();
  o.detail = o.pass ? fmt("%d random rounds clean; coverage %.4f vs %.4f", rounds, mean, expected) : bad.front();
  return o;
}

// ---- grid-based criteria ----

using Key = std::tuple<RunKind, int, int>;  // strategy, alpha in basis points, beta

struct GridView {
  std::vector<RunReport> reports;
  std::map<Key, std::vector<const RunReport*>> by_cell;
  std::vector<const RunReport*> bases;
  int epochs = 10;

  explicit GridView(std::vector<RunReport> r, int e) : reports(std::move(r)), epochs(e) {
    for (const auto& rep : reports) {
      if (rep.strategy == RunKind::Base)
        bases.push_back(&rep);
      else
        by_cell[{rep.strategy, static_cast<int>(std::lround(rep.alpha * 1e4)), rep.beta}].push_back(&rep);
    }
  }

  double med(RunKind k, double alpha, int beta, double RunReport::*f) const {
    std::vector<double> v;
    for (const auto* r : by_cell.at({k, static_cast<int>(std::lround(alpha * 1e4)), beta})) v.push_back(r->*f);
    return harness::median(v);
  }
  double base_med(double RunReport::*f) const {
    std::vector<double> v;
    for (const auto* r : bases) v.push_back(r->*f);
    return harness::median(v);
  }
};

const std::vector<double> kAlphas{0.05, 0.10, 0.15, 0.20};
const RunKind kKinds[] = {RunKind::LocalPatch, RunKind::GlobalReplacement};

int inversions(const std::vector<double>& v, bool increasing) {
  int n = 0;
  for (std::size_t i = 1; i < v.size(); ++i) n += increasing ? v[i] < v[i - 1] : v[i] > v[i - 1];
  return n;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + fmt("%.4f", x);
  return s;
}

Outcome base_competence(const GridView& g) {
  double worst_time = 0.0;
  for (const auto* r : g.bases) worst_time = std::max(worst_time, r->training_seconds);
  const double f = g.base_med(&RunReport::fscore);
  return {f >= 0.90 && worst_time < 60.0 && g.bases.size() == 5,
          fmt("median macro F %.4f over %zu seeds; slowest base run %.2fs", f, g.bases.size(), worst_time)};
}

Outcome alc_trend(const GridView& g) {
  Outcome o;
  const double base = g.base_med(&RunReport::alc);
  const double global = g.med(RunKind::GlobalReplacement, 0.20, 1, &RunReport::alc);
  o.pass = global > base;
  o.detail = fmt("base %.4f < global(0.20,1) %.4f;", base, global);
  for (RunKind k : kKinds) {
    std::vector<double> c;
    for (double a : kAlphas) c.push_back(g.med(k, a, 1, &RunReport::alc));
    const int inv = inversions(c, true);
    o.pass = o.pass && inv <= 1;
    o.detail += fmt(" %s [%s] inv=%d;", std::string(harness::to_string(k)).c_str(), join(c).c_str(), inv);
  }
  return o;
}

Outcome frequency_trend(const GridView& g) {
  Outcome o;
  for (RunKind k : kKinds) {
    const double every = g.med(k, 0.20, 1, &RunReport::alc);
    const double once = g.med(k, 0.20, g.epochs, &RunReport::alc);
    o.pass = o.pass && every >= once;
    o.detail += fmt("%s beta=1 %.4f vs beta=%d %.4f; ", std::string(harness::to_string(k)).c_str(), every, g.epochs, once);
  }
  return o;
}

Outcome aip_trend(const GridView& g) {
  Outcome o;
  const double base = g.base_med(&RunReport::aip);
  o.detail = fmt("base %.4f;", base);
  for (RunKind k : kKinds) {
    std::vector<double> c;
    for (double a : kAlphas) c.push_back(g.med(k, a, 1, &RunReport::aip));
    const int inv = inversions(c, false);
    o.pass = o.pass && c.back() < base && inv <= 1;
    o.detail += fmt(" %s [%s] inv=%d;", std::string(harness::to_string(k)).c_str(), join(c).c_str(), inv);
  }
  return o;
}

Outcome ttd_stealth(const GridView& g) {
  Outcome o;
  const double base = g.base_med(&RunReport::training_seconds);
  o.detail = fmt("base %.3fs, limit %.3fs;", base, 0.1 * base);
  for (RunKind k : kKinds) {
    const double ttd = g.med(k, 0.20, 1, &RunReport::ttd);
    o.pass = o.pass && ttd <= 0.1 * base;
    o.detail += fmt(" %s median ttd %+.3fs;", std::string(harness::to_string(k)).c_str(), ttd);
  }
  return o;
}

Outcome pdm_ordering(const GridView& g) {
  Outcome o;
  for (RunKind k : kKinds) {
    const double low = g.med(k, 0.05, g.epochs, &RunReport::pdm);
    const double high = g.med(k, 0.20, 1, &RunReport::pdm);
    o.pass = o.pass && low <= high;
    o.detail += fmt("%s %.4f <= %.4f; ", std::string(harness::to_string(k)).c_str(), low, high);
  }
  return o;
}

// runs.csv with the training_seconds and ttd columns removed.
std::string runs_without_timing(const fs::path& file) {
  std::ifstream in(file);
  std::string out;
  for (std::string line; std::getline(in, line);) {
    std::istringstream cells(line);
    int col = 0;
    for (std::string cell; std::getline(cells, cell, ','); ++col)
      if (col != 11 && col != 13) out += cell + ',';
    out += '\n';
  }
  return out;
}

}  // namespace

int main() {
  std::printf("poisonbench acceptance suite\n");
  std::fflush(stdout);
  report(1, "gradient oracle", gradient_oracle());
  report(8, "metric unit suite", metric_units());
  report(9, "poisoning invariants", poisoning_invariants());

  const fs::path tmp = fs::temp_directory_path() / fmt("poisonbench-acceptance-%u", std::random_device{}());
  harness::GridConfig grid;  // defaults: 5 seeds, 4 alphas, beta in {1, epochs}, both strategies
  std::printf("running default grid (%zu runs)...\n", grid.seeds.size() * (1 + 4 * 2 * 2));
  std::fflush(stdout);

  auto t0 = Clock::now();
  GridView first(harness::run_grid(grid), grid.base.epochs);
  const double first_seconds = seconds_since(t0);
  harness::write_reports(first.reports, tmp / "a");

  report(2, "base-model competence", base_competence(first));
  report(3, "effectiveness trend (ALC)", alc_trend(first));
  report(4, "frequency trend", frequency_trend(first));
  report(5, "effectiveness trend (AIP)", aip_trend(first));
  report(6, "stealthiness (TTD)", ttd_stealth(first));
  report(7, "PDM ordering", pdm_ordering(first));

  t0 = Clock::now();
  const auto second = harness::run_grid(grid);
  const double second_seconds = seconds_since(t0);
  harness::write_reports(second, tmp / "b");
  const bool same = runs_without_timing(tmp / "a" / "runs.csv") == runs_without_timing(tmp / "b" / "runs.csv");
  const bool fast = std::max(first_seconds, second_seconds) < 1800.0;
  report(10, "determinism", {same && fast && first.reports.size() == 85,
                             fmt("%zu runs; runs.csv %s modulo timing; grid wall %.1fs / %.1fs", first.reports.size(),
                                 same ? "identical" : "DIFFERS", first_seconds, second_seconds)});
  std::error_code ec;
  fs::remove_all(tmp, ec);

  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
