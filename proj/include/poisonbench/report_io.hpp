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
#ifndef POISONBENCH_REPORT_IO_HPP_
#define POISONBENCH_REPORT_IO_HPP_

#include <filesystem>
#include <vector>

#include "poisonbench/harness.hpp"

namespace poisonbench::harness {

/// Full-fidelity JSON form of a report (losses, rounds, confusion matrix included).
void save_report_json(const RunReport& report, const std::filesystem::path& path);
RunReport load_report_json(const std::filesystem::path& path);

void save_reports_json(const std::vector<RunReport>& reports, const std::filesystem::path& path);
std::vector<RunReport> load_reports_json(const std::filesystem::path& path);

/// Reads the scalar columns of runs.csv back into reports (no losses, rounds or confusion).
std::vector<RunReport> read_runs_csv(const std::filesystem::path& path);

}  // namespace poisonbench::harness

#endif  // POISONBENCH_REPORT_IO_HPP_
