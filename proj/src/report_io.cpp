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
#include "poisonbench/report_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "poisonbench/errors.hpp"

namespace poisonbench::harness {

using nlohmann::json;

namespace {

json to_json(const RunReport& r) {
  json rounds = json::array();
  for (const auto& s : r.round_summaries) {
    rounds.push_back({{"round_index", s.round_index},
                      {"epoch_after", s.epoch_after},
                      {"victim_indices", s.victim_indices},
                      {"newly_poisoned_count", s.newly_poisoned_count},
                      {"cumulative_poisoned_count", s.cumulative_poisoned_count}});
  }
  return {{"run_id", r.run_id},
          {"strategy", std::string(to_string(r.strategy))},
          {"alpha", r.alpha},
          {"beta", r.beta},
          {"seed", r.seed},
          {"epochs", r.epochs},
          {"lr", r.lr},
          {"batch_size", r.batch_size},
          {"epoch_losses", r.epoch_losses},
          {"training_seconds", r.training_seconds},
          {"round_summaries", rounds},
          {"alc", r.alc},
          {"aip", r.aip},
          {"fscore", r.fscore},
          {"ttd", r.ttd},
          {"pdm", r.pdm},
          {"confusion", {{"class_count", r.confusion.class_count()}, {"counts", r.confusion.counts()}}}};
}

RunReport from_json(const json& j) {
  RunReport r;
  r.run_id = j.at("run_id").get<std::string>();
  r.strategy = parse_run_kind(j.at("strategy").get<std::string>());
  r.alpha = j.at("alpha").get<double>();
  r.beta = j.at("beta").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.epochs = j.at("epochs").get<int>();
  r.lr = j.at("lr").get<double>();
  r.batch_size = j.at("batch_size").get<int>();
  r.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
  r.training_seconds = j.at("training_seconds").get<double>();
  for (const auto& s : j.at("round_summaries")) {
    poison::RoundSummary rs;
    rs.round_index = s.at("round_index").get<int>();
    rs.epoch_after = s.at("epoch_after").get<int>();
    rs.victim_indices = s.at("victim_indices").get<std::vector<std::size_t>>();
    rs.newly_poisoned_count = s.at("newly_poisoned_count").get<std::size_t>();
    rs.cumulative_poisoned_count = s.at("cumulative_poisoned_count").get<std::size_t>();
    r.round_summaries.push_back(std::move(rs));
  }
  r.alc = j.at("alc").get<double>();
  r.aip = j.at("aip").get<double>();
  r.fscore = j.at("fscore").get<double>();
  r.ttd = j.at("ttd").get<double>();
  r.pdm = j.at("pdm").get<double>();
  const auto& cm = j.at("confusion");
  const int k = cm.at("class_count").get<int>();
  if (k > 0) r.confusion = metrics::ConfusionMatrix(k, cm.at("counts").get<std::vector<std::uint64_t>>());
  return r;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    throw IoError(path.string(), ex.what());
  }
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

template <typename F>
auto guarded(const std::filesystem::path& path, F f) {
  try {
    return f();
  } catch (const json::exception& ex) {
    throw ConfigError(path.string(), std::string("malformed report: ") + ex.what());
  }
}

}  // namespace

void save_report_json(const RunReport& report, const std::filesystem::path& path) {
  write_json(to_json(report), path);
}

RunReport load_report_json(const std::filesystem::path& path) {
  const json j = read_json(path);
  return guarded(path, [&] { return from_json(j); });
}

void save_reports_json(const std::vector<RunReport>& reports, const std::filesystem::path& path) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  write_json(arr, path);
}

std::vector<RunReport> load_reports_json(const std::filesystem::path& path) {
  const json j = read_json(path);
  return guarded(path, [&] {
    std::vector<RunReport> out;
    for (const auto& e : j) out.push_back(from_json(e));
    return out;
  });
}

std::vector<RunReport> read_runs_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::string line;
  std::getline(in, line);
  std::string expected;
  for (std::size_t i = 0; i < kRunsColumns.size(); ++i) expected += (i ? "," : "") + kRunsColumns[i];
  if (line != expected) throw ConfigError(path.string(), "unexpected runs.csv header");

  std::vector<RunReport> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != kRunsColumns.size())
      throw ConfigError(path.string(), "line " + std::to_string(line_no) + " has " + std::to_string(f.size()) + " fields");
    try {
      RunReport r;
      r.run_id = f[0];
      r.strategy = parse_run_kind(f[1]);
      r.alpha = std::stod(f[2]);
      r.beta = std::stoi(f[3]);
      r.seed = std::stoull(f[4]);
      r.epochs = std::stoi(f[5]);
      r.lr = std::stod(f[6]);
      r.batch_size = std::stoi(f[7]);
      r.alc = std::stod(f[8]);
      r.aip = std::stod(f[9]);
      r.fscore = std::stod(f[10]);
      r.ttd = std::stod(f[11]);
      r.pdm = std::stod(f[12]);
      r.training_seconds = std::stod(f[13]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ConfigError(path.string(), "line " + std::to_string(line_no) + " has a non-numeric field");
    }
  }
  return out;
}

}  // namespace poisonbench::harness
