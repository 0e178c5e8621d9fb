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
#include "poisonbench/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "poisonbench/errors.hpp"

namespace poisonbench::config {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError(std::string(key), "cannot parse '" + std::string(text) + "' as a number");
  return v;
}

int parse_beta(std::string_view key, std::string_view text) {
  if (text == "epochs" || text == "Epochs") return harness::kBetaEpochs;
  return parse_number<int>(key, text);
}

template <typename T, typename F>
std::vector<T> parse_list(std::string_view key, std::string_view text, F one) {
  std::vector<T> out;
  for (auto item : split(text, ',')) {
    if (item.empty()) throw ConfigError(std::string(key), "empty list element");
    out.push_back(one(key, item));
  }
  return out;
}

std::vector<nn::ConvBlockSpec> parse_conv_blocks(std::string_view key, std::string_view text) {
  std::vector<nn::ConvBlockSpec> out;
  if (text == "none" || text.empty()) return out;
  for (auto item : split(text, ',')) {
    const auto x = item.find('x');
    if (x == std::string_view::npos)
      throw ConfigError(std::string(key), "expected FILTERSxKERNEL, got '" + std::string(item) + "'");
    out.push_back({parse_number<int>(key, item.substr(0, x)), parse_number<int>(key, item.substr(x + 1))});
  }
  return out;
}

using Setter = std::function<void(Settings&, std::string_view key, std::string_view value)>;

const std::vector<std::pair<std::string, Setter>>& table() {
  static const std::vector<std::pair<std::string, Setter>> t = {
      {"run.epochs", [](Settings& s, auto k, auto v) { s.run().epochs = parse_number<int>(k, v); }},
      {"run.lr", [](Settings& s, auto k, auto v) { s.run().lr = parse_number<double>(k, v); }},
      {"run.batch_size", [](Settings& s, auto k, auto v) { s.run().batch_size = parse_number<int>(k, v); }},
      {"run.model_seed", [](Settings& s, auto k, auto v) { s.run().model_seed = parse_number<std::uint64_t>(k, v); }},
      {"run.data_seed", [](Settings& s, auto k, auto v) { s.run().data_seed = parse_number<std::uint64_t>(k, v); }},
      {"run.data_dir", [](Settings& s, auto, auto v) { s.run().data_dir = std::filesystem::path(std::string(v)); }},
      {"arch.conv_blocks", [](Settings& s, auto k, auto v) { s.run().arch.conv_blocks = parse_conv_blocks(k, v); }},
      {"arch.hidden_units", [](Settings& s, auto k, auto v) { s.run().arch.hidden_units = parse_number<int>(k, v); }},
      {"data.class_count", [](Settings& s, auto k, auto v) { s.run().gen.class_count = parse_number<int>(k, v); }},
      {"data.per_class_train", [](Settings& s, auto k, auto v) { s.run().gen.per_class_train = parse_number<int>(k, v); }},
      {"data.per_class_test", [](Settings& s, auto k, auto v) { s.run().gen.per_class_test = parse_number<int>(k, v); }},
      {"data.width", [](Settings& s, auto k, auto v) { s.run().gen.width = parse_number<int>(k, v); }},
      {"data.height", [](Settings& s, auto k, auto v) { s.run().gen.height = parse_number<int>(k, v); }},
      {"data.noise_sigma", [](Settings& s, auto k, auto v) { s.run().gen.noise_sigma = parse_number<double>(k, v); }},
      {"data.max_shift", [](Settings& s, auto k, auto v) { s.run().gen.max_shift = parse_number<int>(k, v); }},
      {"poison.alpha", [](Settings& s, auto k, auto v) { s.poison.alpha = parse_number<double>(k, v); }},
      {"poison.beta", [](Settings& s, auto k, auto v) { s.poison.beta = parse_beta(k, v); }},
      {"poison.strategy", [](Settings& s, auto, auto v) { s.poison.strategy = poison::parse_strategy(v); }},
      {"poison.seed", [](Settings& s, auto k, auto v) { s.poison.seed = parse_number<std::uint64_t>(k, v); }},
      {"poison.patch_side", [](Settings& s, auto k, auto v) { s.grid.patch.side = parse_number<int>(k, v); }},
      {"poison.patch_seed", [](Settings& s, auto k, auto v) { s.grid.patch.seed = parse_number<std::uint64_t>(k, v); }},
      {"poison.patch_path", [](Settings& s, auto, auto v) { s.grid.patch.path = std::filesystem::path(std::string(v)); }},
      {"grid.alphas", [](Settings& s, auto k, auto v) { s.grid.alphas = parse_list<double>(k, v, parse_number<double>); }},
      {"grid.betas", [](Settings& s, auto k, auto v) { s.grid.betas = parse_list<int>(k, v, parse_beta); }},
      {"grid.strategies",
       [](Settings& s, auto k, auto v) {
         s.grid.strategies = parse_list<poison::Strategy>(k, v, [](auto, auto item) { return poison::parse_strategy(item); });
       }},
      {"grid.seeds",
       [](Settings& s, auto k, auto v) { s.grid.seeds = parse_list<std::uint64_t>(k, v, parse_number<std::uint64_t>); }},
      {"grid.jobs", [](Settings& s, auto k, auto v) { s.grid.jobs = parse_number<int>(k, v); }},
  };
  return t;
}

}  // namespace

poison::PoisonPlan Settings::make_plan() const {
  poison::PoisonPlan plan;
  plan.alpha = poison.alpha;
  plan.beta = poison.beta == harness::kBetaEpochs ? run().epochs : poison.beta;
  plan.strategy = poison.strategy;
  plan.seed = poison.seed.value_or(run().model_seed);
  plan.epochs = run().epochs;
  if (plan.strategy == poison::Strategy::LocalPatch) plan.patch = grid.patch.load();
  return plan;
}

void Settings::validate() const {
  grid.validate();
  if (!(poison.alpha > 0.0 && poison.alpha <= 1.0)) throw ConfigError("poison.alpha", "must be in (0, 1]");
  const int beta = poison.beta == harness::kBetaEpochs ? run().epochs : poison.beta;
  if (beta < 1 || beta > run().epochs) throw ConfigError("poison.beta", "must be in [1, epochs]");
}

KeyValues parse_config_text(std::string_view text, std::string_view origin) {
  KeyValues out;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    auto line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ConfigError(where, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where, "missing key");
    out.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return out;
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

void apply(Settings& settings, std::string_view key, std::string_view value) {
  for (const auto& [name, setter] : table()) {
    if (name == key) {
      setter(settings, key, value);
      return;
    }
  }
  throw ConfigError(std::string(key), "unknown key");
}

void apply_all(Settings& settings, const KeyValues& kvs) {
  for (const auto& [k, v] : kvs) apply(settings, k, v);
}

void override_all_seeds(Settings& settings, std::uint64_t seed) {
  settings.run().model_seed = seed;
  settings.run().data_seed = seed;
  settings.poison.seed = seed;
  settings.grid.patch.seed = seed;
  settings.grid.seeds = {seed};
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, setter] : table()) k.push_back(name);
    return k;
  }();
  return keys;
}

}  // namespace poisonbench::config
