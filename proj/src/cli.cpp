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
#include "poisonbench/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <ostream>

#include <CLI11.hpp>

#include "poisonbench/errors.hpp"
#include "poisonbench/harness.hpp"
#include "poisonbench/report_io.hpp"

namespace poisonbench::cli {

namespace {

// Flag name -> config key, per subcommand. Flags are strings here; config::apply parses them.
struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

const std::vector<FlagSpec> kRunFlags = {
    {"--epochs", "run.epochs", "training epochs"},
    {"--lr", "run.lr", "SGD learning rate"},
    {"--batch-size", "run.batch_size", "minibatch size"},
    {"--seed", "run.model_seed", "model seed"},
    {"--data-seed", "run.data_seed", "dataset seed"},
    {"--data-dir", "run.data_dir", "directory with train.psb/test.psb (instead of generating)"},
    {"--hidden-units", "arch.hidden_units", "hidden dense units (0 = none)"},
    {"--conv-blocks", "arch.conv_blocks", "conv blocks, e.g. 8x3 or 8x3,16x3 or none"},
};

const std::vector<FlagSpec> kDataFlags = {
    {"--classes", "data.class_count", "number of classes"},
    {"--per-class-train", "data.per_class_train", "training instances per class"},
    {"--per-class-test", "data.per_class_test", "test instances per class"},
    {"--width", "data.width", "image width"},
    {"--height", "data.height", "image height"},
    {"--noise-sigma", "data.noise_sigma", "per-pixel Gaussian noise"},
    {"--max-shift", "data.max_shift", "maximum circular shift in pixels"},
    {"--patch-side", "poison.patch_side", "generated trigger patch side"},
    {"--patch-seed", "poison.patch_seed", "trigger patch seed"},
    {"--patch-path", "poison.patch_path", "trigger patch file (PSB1, one image)"},
};

const std::vector<FlagSpec> kAttackFlags = {
    {"--alpha", "poison.alpha", "fraction of the training set poisoned per round"},
    {"--beta", "poison.beta", "epoch stride between rounds (integer or 'epochs')"},
    {"--strategy", "poison.strategy", "local | global"},
    {"--poison-seed", "poison.seed", "poisoning seed (defaults to --seed)"},
};

const std::vector<FlagSpec> kGridFlags = {
    {"--alpha", "grid.alphas", "single alpha"},
    {"--alphas", "grid.alphas", "comma-separated alphas"},
    {"--beta", "grid.betas", "single beta"},
    {"--betas", "grid.betas", "comma-separated betas ('epochs' allowed)"},
    {"--strategy", "grid.strategies", "single strategy"},
    {"--strategies", "grid.strategies", "comma-separated strategies"},
    {"--seeds", "grid.seeds", "comma-separated seeds"},
    {"--jobs", "grid.jobs", "concurrent runs"},
};

struct Bound {
  FlagSpec spec;
  std::string value;
  CLI::Option* option = nullptr;
};

struct SubParser {
  CLI::App* app = nullptr;
  Subcommand kind;
  std::vector<std::unique_ptr<Bound>> flags;
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir = "out";
  std::string base_report;
  std::string runs_path;
};

void add_common(SubParser& p, std::initializer_list<const std::vector<FlagSpec>*> groups) {
  p.app->add_option("--config", p.config_path, "key = value config file");
  p.app->add_option("--set", p.sets, "override a config key (key=value), repeatable");
  p.app->add_option("--out", p.out_dir, "output directory")->capture_default_str();
  for (const auto* g : groups)
    for (const auto& f : *g) {
      auto b = std::make_unique<Bound>();
      b->spec = f;
      b->option = p.app->add_option(f.flag, b->value, f.help);
      p.flags.push_back(std::move(b));
    }
}

std::string usage_of(const CLI::App& app) { return app.help(); }

}  // namespace

CliInvocation parse_args(const std::vector<std::string>& argv, std::optional<std::string> seed_env) {
  CLI::App app{"Incremental between-epoch data-poisoning simulator", argv.empty() ? "poisonbench" : argv[0]};
  app.require_subcommand(1);

  std::vector<SubParser> subs(5);
  subs[0].kind = Subcommand::GenData;
  subs[0].app = app.add_subcommand("gen-data", "generate train/test datasets and the trigger patch");
  add_common(subs[0], {&kRunFlags, &kDataFlags});
  subs[1].kind = Subcommand::Train;
  subs[1].app = app.add_subcommand("train", "train and evaluate the base (unpoisoned) model");
  add_common(subs[1], {&kRunFlags, &kDataFlags});
  subs[2].kind = Subcommand::Attack;
  subs[2].app = app.add_subcommand("attack", "train with between-epoch poisoning against a base report");
  add_common(subs[2], {&kRunFlags, &kDataFlags, &kAttackFlags});
  subs[2].app->add_option("--base-report", subs[2].base_report, "base_report.json written by 'train'")->required();
  subs[3].kind = Subcommand::Grid;
  subs[3].app = app.add_subcommand("grid", "run the alpha x beta x strategy x seed grid");
  add_common(subs[3], {&kRunFlags, &kDataFlags, &kGridFlags});
  subs[4].kind = Subcommand::Plot;
  subs[4].app = app.add_subcommand("plot", "emit plot data from an existing runs.csv");
  subs[4].app->add_option("--runs", subs[4].runs_path, "runs.csv to read (default: <out>/runs.csv)");
  subs[4].app->add_option("--out", subs[4].out_dir, "output directory")->capture_default_str();

  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  if (cargv.empty()) cargv.push_back("poisonbench");
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto& s : subs)
      if (s.app->parsed()) target = s.app;
    throw CliExit{kExitOk, target->help()};
  } catch (const CLI::ParseError& ex) {
    std::string why = ex.what();
    if (argv.size() > 1 && !argv[1].empty() && argv[1][0] != '-' &&
        std::none_of(subs.begin(), subs.end(), [&](const SubParser& s) { return s.app->get_name() == argv[1]; }))
      why = "unknown subcommand '" + argv[1] + "'";
    throw CliExit{kExitUsage, "error: " + why + "\n\n" + usage_of(app)};
  }

  const SubParser* chosen = nullptr;
  for (const auto& s : subs)
    if (s.app->parsed()) chosen = &s;

  CliInvocation inv;
  inv.subcommand = chosen->kind;
  inv.out_dir = chosen->out_dir;
  if (!chosen->config_path.empty()) inv.config_path = chosen->config_path;
  if (!chosen->base_report.empty()) inv.base_report = chosen->base_report;
  if (!chosen->runs_path.empty()) inv.runs_path = chosen->runs_path;
  for (const auto& s : chosen->sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw CliExit{kExitUsage, "error: --set expects key=value, got '" + s + "'\n"};
    inv.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& b : chosen->flags)
    if (b->option->count() > 0) inv.overrides.emplace_back(b->spec.key, b->value);

  try {
    if (inv.config_path) config::apply_all(inv.settings, config::read_config_file(*inv.config_path));
    config::apply_all(inv.settings, inv.overrides);
    if (seed_env && !seed_env->empty()) {
      config::Settings probe;
      config::apply(probe, "run.model_seed", *seed_env);
      config::override_all_seeds(inv.settings, probe.run().model_seed);
    }
    inv.settings.validate();
  } catch (const ConfigError& ex) {
    throw CliExit{kExitUsage, std::string("error: ") + ex.what() + "\n"};
  }
  return inv;
}

namespace {

void print_summary(std::ostream& out, const harness::RunReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s alc=%.6f aip=%.6f fscore=%.6f", r.run_id.c_str(), r.alc, r.aip, r.fscore);
  out << buf << '\n';
}

}  // namespace

int main(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  const auto& s = inv.settings;
  try {
    switch (inv.subcommand) {
      case Subcommand::GenData: {
        harness::RunConfig cfg = s.run();
        cfg.data_dir.reset();
        const auto d = harness::prepare_data(cfg);
        std::filesystem::create_directories(inv.out_dir);
        data::save_dataset(d.train, inv.out_dir / "train.psb");
        data::save_dataset(d.test, inv.out_dir / "test.psb");
        data::save_patch(s.grid.patch.load(), inv.out_dir / "patch.psb");
        out << "gen-data: " << d.train.size() << " train, " << d.test.size() << " test instances -> "
            << inv.out_dir.string() << '\n';
        break;
      }
      case Subcommand::Train: {
        const auto r = harness::run_base(s.run());
        harness::write_reports({r}, inv.out_dir);
        harness::save_report_json(r, inv.out_dir / "base_report.json");
        print_summary(out, r);
        break;
      }
      case Subcommand::Attack: {
        if (!inv.base_report) {
          err << "error: attack needs --base-report (TTD and PDM are relative to the base run)\n";
          return kExitUsage;
        }
        const auto base = harness::load_report_json(*inv.base_report);
        const auto r = harness::run_poisoned(s.run(), s.make_plan(), base);
        harness::write_reports({base, r}, inv.out_dir);
        harness::save_report_json(r, inv.out_dir / "report.json");
        print_summary(out, r);
        break;
      }
      case Subcommand::Grid: {
        const auto reports = harness::run_grid(s.grid);
        harness::write_reports(reports, inv.out_dir);
        harness::emit_plot_data(reports, inv.out_dir);
        harness::save_reports_json(reports, inv.out_dir / "reports.json");
        for (const auto& r : reports) print_summary(out, r);
        break;
      }
      case Subcommand::Plot: {
        const auto runs = inv.runs_path.value_or(inv.out_dir / "runs.csv");
        const auto reports = harness::read_runs_csv(runs);
        harness::emit_plot_data(reports, inv.out_dir);
        out << "plot: " << reports.size() << " runs -> " << inv.out_dir.string() << '\n';
        break;
      }
    }
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  std::optional<std::string> seed_env;
  if (const char* e = std::getenv("POISONBENCH_SEED")) seed_env = e;
  try {
    return main(parse_args(args, seed_env), out, err);
  } catch (const CliExit& ex) {
    (ex.code == kExitOk ? out : err) << ex.text;
    return ex.code;
  }
}

}  // namespace poisonbench::cli
