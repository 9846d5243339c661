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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "inverse_decode/beam_search.hpp"
#include "inverse_decode/ngram_model.hpp"
#include "inverse_decode/prompt_template.hpp"
#include "inverse_decode/scoring.hpp"

namespace inverse_decode {

// Generate-and-fine-tune loop: every cycle decodes poems for each title with
// the current model, then fine-tunes on them.
struct SelfTrainConfig {
  std::vector<PromptFields> titles;
  int cycles = 2;
  int poems_per_title = 1;
  double fine_tune_weight = 1.0;
  BeamParams beam_params = BeamParams::poem_train();
  ScorerConfig scorer_config = ScorerConfig::poem();
  PoemFormat format;
  TransformTemplate tmpl;
  // Keep only the k best poems of a cycle (by total) for fine-tuning.
  std::optional<int> top_k;

  int max_cycles = 16;
  int max_poems_per_title = 64;

  void validate() const;
};

struct GeneratedPoem {
  int cycle = 0;
  std::size_t title_index = 0;
  PromptFields title;
  TokenSeq poem;
  ScoreBreakdown breakdown;
  double format_penalty = 0.0;

  // {"title", "poem", "breakdown", "cycle"}
  nlohmann::json to_json() const;
};

struct CycleReport {
  int cycle = 0;
  std::size_t n_generated = 0;
  std::size_t n_failed = 0;
  std::size_t n_trained = 0;
  double mean_total = 0.0;
  double mean_format_penalty = 0.0;
  double mean_title_overlap = 0.0;
  std::vector<std::string> failures;

  nlohmann::json to_json() const;
};

struct SelfTrainResult {
  NGramModel final_model;
  std::vector<CycleReport> reports;
  std::vector<GeneratedPoem> poems;
};

// Throws SelfTrainError when every generation of a cycle fails.
SelfTrainResult run_self_training(const NGramModel& model, const SelfTrainConfig& config);

// Fraction of distinct prompt tokens that occur in `generated`; 0 for an
// empty prompt.
double prompt_overlap(const TokenSeq& generated, const TokenSeq& prompt);

}  // namespace inverse_decode
