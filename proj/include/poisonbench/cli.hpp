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
#ifndef POISONBENCH_CLI_HPP_
#define POISONBENCH_CLI_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "poisonbench/config.hpp"

namespace poisonbench::cli {

enum class Subcommand { GenData, Train, Attack, Grid, Plot };

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct CliInvocation {
  Subcommand subcommand = Subcommand::Grid;
  std::optional<std::filesystem::path> config_path;
  config::KeyValues overrides;  // flag-derived, applied after the config file
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> base_report;
  std::optional<std::filesystem::path> runs_path;
  config::Settings settings;  // defaults <- config file <- flags <- POISONBENCH_SEED
};

/// Thrown by parse_args when the process should exit without running anything
/// (usage errors, --help). `code` is the exit status, `text` what to print.
struct CliExit {
  int code;
  std::string text;
};

/// argv[0] is the program name. `seed_env` is the value of POISONBENCH_SEED, if set.
CliInvocation parse_args(const std::vector<std::string>& argv, std::optional<std::string> seed_env = std::nullopt);

/// Dispatches a parsed invocation. Prints one summary line per completed run to `out`.
int main(const CliInvocation& invocation, std::ostream& out, std::ostream& err);

/// parse_args + main with exit-code mapping: 0 ok, 1 runtime failure, 2 usage/config error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace poisonbench::cli

#endif  // POISONBENCH_CLI_HPP_
