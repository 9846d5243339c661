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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "inverse_decode/language_model.hpp"
#include "inverse_decode/prompt_template.hpp"
#include "inverse_decode/scoring.hpp"
#include "inverse_decode/tokens.hpp"

namespace inverse_decode {

enum class ExpansionMode {
  // m sampled sub-sentences per beam
  kSampled,
  // every token sequence of up to max_step_tokens ending at a delimiter, END,
  // or the token budget; needs a finite-vocabulary backend
  kExhaustive,
};

std::string to_string(ExpansionMode mode);
ExpansionMode expansion_mode_from_string(std::string_view name);

struct BeamParams {
  int n_beams = 5;
  int m_expansions = 5;
  int max_steps = 30;  // maximum number of sub-sentences
  std::uint64_t rng_seed = 0;
  bool dedup = true;
  ExpansionMode expansion_mode = ExpansionMode::kSampled;
  int max_step_tokens = 32;
  double temperature = 1.0;
  int threads = 1;

  void validate() const;

  static BeamParams qa();          // 5 / 5 / 30
  static BeamParams poem_train();  // 10 / 7 / 8
  static BeamParams poem_eval();   // 10 / 12 / 8

  nlohmann::json to_json() const;
  static BeamParams from_json(const nlohmann::json& j);
};

struct Beam {
  TokenSeq text;
  bool terminated = false;
  ScoreBreakdown breakdown;
  int step = 0;
  ScoreCache cache;
};

struct Candidate {
  TokenSeq text;
  bool terminated = false;
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// Extends `beam` by one sub-sentence per expansion. In sampled mode the
// candidate terminates when END is drawn or the step token budget runs out;
// in exhaustive mode only END terminates. With params.dedup, exact duplicate
// candidates are dropped. Throws SearchError if `beam` is terminated.
std::vector<Candidate> expand_beam(const LanguageModel& model, const TokenSeq& prompt,
                                   const Beam& beam, const TokenSet& delimiters,
                                   std::uint64_t seed, const BeamParams& params);

// Seed used to expand the beam at `beam_rank` during `step`.
std::uint64_t expansion_seed(std::uint64_t run_seed, int step, int beam_rank);

struct TraceCandidate {
  int parent = -1;  // rank of the parent beam in the previous step
  TokenSeq text;
  bool terminated = false;
  std::optional<ScoreBreakdown> breakdown;
  std::string error;  // set when the candidate could not be scored
  bool selected = false;
};

struct StepTrace {
  int step = 0;
  std::vector<TraceCandidate> candidates;
  std::vector<TokenSeq> retained_terminated;  // carried over from earlier steps

  nlohmann::json to_json() const;
};

struct SearchResult {
  Beam best;
  std::vector<Beam> all_final;  // ranked, best first
  std::vector<StepTrace> trace;

  // One JSON object per step.
  std::string trace_jsonl() const;
};

// Sub-sentence beam search. Each step expands every live beam, scores the
// pooled candidates together with surviving terminated beams, and keeps the
// global top n_beams (ties broken by text). Stops after max_steps or when
// every retained beam has terminated.
SearchResult run_beam_search(const LanguageModel& model, const TokenSeq& prompt,
                             const BeamScorer& scorer, const TokenSet& delimiters,
                             const BeamParams& params);

SearchResult run_beam_search(const LanguageModel& model, const TransformTemplate& tmpl,
                             const PromptFields& fields, const BeamParams& params,
                             const ScorerConfig& config,
                             const std::optional<PoemFormat>& format = std::nullopt);

}  // namespace inverse_decode
