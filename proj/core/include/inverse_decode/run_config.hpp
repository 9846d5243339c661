// Copyright 2026 The inverse_decode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "inverse_decode/beam_search.hpp"
#include "inverse_decode/language_model.hpp"
#include "inverse_decode/remote_model.hpp"
#include "inverse_decode/scoring.hpp"

namespace inverse_decode {

inline constexpr const char* kSeedEnvVar = "INVERSE_DECODE_SEED";

struct ModelConfig {
  std::string backend = "ngram";  // ngram | uniform | remote
  std::string path;               // ngram model file
  std::vector<Token> vocab;       // uniform backend
  RemoteEndpoint endpoint;        // remote backend
  std::string tokenizer = "char";
};

struct SelfTrainSection {
  int cycles = 2;
  int poems_per_title = 1;
  double fine_tune_weight = 1.0;
  std::optional<int> top_k;
  std::string title_slot = "title";
  std::optional<std::string> model_out;
  std::optional<std::string> poems_out;
  std::optional<std::string> report_out;
};

// Everything a run depends on. Relative paths resolve against the directory
// of the config file.
struct RunConfig {
  ModelConfig model;
  std::string template_name = "qa-en";
  std::optional<std::string> template_pack;
  ScorerConfig scorer = ScorerConfig::qa();
  BeamParams beam = BeamParams::qa();
  std::optional<std::string> format_preset;  // e.g. "5-jueju"
  std::optional<std::string> format_spec_path;
  std::optional<std::string> tables_path;
  std::uint64_t seed = 0;
  std::optional<std::string> output_path;
  std::optional<std::string> trace_path;
  SelfTrainSection selftrain;
  // Directory relative paths resolve against; not serialized.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;

  // Unknown keys are rejected so typos do not silently fall back to defaults.
  static RunConfig from_json(const nlohmann::json& j,
                             const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // Throws ConfigError.
  void validate() const;

  // 16 hex digits of FNV-1a over the canonical JSON serialization, with
  // output destinations left out.
  std::string hash() const;
};

std::string stable_hash(const nlohmann::json& j);

std::unique_ptr<LanguageModel> load_model(const RunConfig& config);
TemplatePack load_template_pack(const RunConfig& config);
// Format spec and tables for poem mode; nullopt when none is configured.
std::optional<PoemFormat> load_poem_format(const RunConfig& config);

}  // namespace inverse_decode
