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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "inverse_decode/language_model.hpp"
#include "inverse_decode/poem_format.hpp"
#include "inverse_decode/prompt_template.hpp"
#include "inverse_decode/tokens.hpp"

namespace inverse_decode {

enum class ScoringMode { kBaseline, kInverseQa, kInversePoem };

// Which terms the 1/n sub-sentence average covers.
//   kInverseOnly: lambda1 * mean(inverse) + lambda2 * forward / n_tokens^lambda
//   kBoth:        (lambda1 * sum(inverse) + lambda2 * forward / n_tokens^lambda) / n
enum class SumScope { kInverseOnly, kBoth };

std::string to_string(ScoringMode mode);
ScoringMode scoring_mode_from_string(std::string_view name);
std::string to_string(SumScope scope);
SumScope sum_scope_from_string(std::string_view name);

struct ScorerConfig {
  double lambda1 = 1.0;     // inverse weight
  double lambda2 = 1.5;     // forward weight
  double lambda3 = 1.0;     // format penalty weight
  double lambda_exp = 1.0;  // length-normalization exponent
  TokenSet delimiters = default_delimiters();
  ScoringMode mode = ScoringMode::kInverseQa;
  SumScope sum_scope = SumScope::kInverseOnly;

  // Throws ConfigError on negative or non-finite weights or empty delimiters.
  void validate() const;

  // lambda = lambda1 = lambda3 = 1 with lambda2 = 1.5 (QA) or 0.75 (poems).
  static ScorerConfig qa();
  static ScorerConfig poem();
  static ScorerConfig baseline();

  nlohmann::json to_json() const;
  static ScorerConfig from_json(const nlohmann::json& j);
};

// Format spec and lookup tables for ScoringMode::kInversePoem.
struct PoemFormat {
  PoemFormatSpec spec;
  RhymeToneTables tables;
};

struct ScoreBreakdown {
  double inverse_term = 0.0;  // unweighted mean over per_subsentence
  double forward_term = 0.0;  // raw log p(generated | prompt)
  double format_penalty = 0.0;
  double total = 0.0;
  int n_subsentences = 0;
  int n_tokens = 0;
  std::vector<double> per_subsentence;
  std::vector<FormatViolation> violations;

  // Weights the total was assembled with. Baseline scoring records
  // (0, 1, 0, 0) so reconstruct_total() reproduces the raw forward score.
  double lambda1 = 0.0;
  double lambda2 = 1.0;
  double lambda3 = 0.0;
  double lambda_exp = 0.0;
  SumScope sum_scope = SumScope::kInverseOnly;

  double reconstruct_total() const;
  nlohmann::json to_json() const;
};

// log p(generated | prompt). Throws ScoreError on empty `generated`.
double forward_score(const LanguageModel& model, const TokenSeq& prompt,
                     const TokenSeq& generated);

// log p(inverse_target | inverse_context(sub_sentence)) for one sub-sentence.
double subsentence_inverse_logprob(const LanguageModel& model, const TransformTemplate& tmpl,
                                   const PromptFields& fields, const TokenSeq& sub_sentence);

struct InverseScore {
  double value = 0.0;  // mean of per_subsentence
  std::vector<double> per_subsentence;
};

// Each sub-sentence is inverted on its own. Throws ScoreError when
// `generated` has no sub-sentences.
InverseScore inverse_score(const LanguageModel& model, const TransformTemplate& tmpl,
                           const PromptFields& fields, const TokenSeq& generated,
                           const TokenSet& delimiters);

// Full beam score for `generated`. `format` is required in poem mode and
// ignored otherwise.
ScoreBreakdown composite_score(const LanguageModel& model, const TransformTemplate& tmpl,
                               const PromptFields& fields, const TokenSeq& generated,
                               const ScorerConfig& config, const PoemFormat* format = nullptr);

// Combines precomputed parts into a breakdown. composite_score and the
// incremental scorer both go through here so their totals agree bit for bit.
ScoreBreakdown assemble_breakdown(const ScorerConfig& config,
                                  std::vector<double> per_subsentence, double forward_raw,
                                  std::size_t n_subsentences, std::size_t n_tokens,
                                  const FormatReport* format_report);

// Scoring state carried by a beam so extensions only score the new suffix.
struct ScoreCache {
  std::vector<double> closed_inverse;  // one per delimiter-closed sub-sentence
  std::size_t closed_tokens = 0;       // tokens covered by closed_inverse
  double forward = 0.0;                // log p(text | prompt)
  std::size_t forward_tokens = 0;      // == text length when valid
};

struct ScoredText {
  ScoreBreakdown breakdown;
  ScoreCache cache;
};

// Rank function used by beam search. `parent` (nullable) holds the cache of a
// prefix of `text`.
class BeamScorer {
 public:
  virtual ~BeamScorer() = default;
  virtual ScoredText score(const TokenSeq& text, const ScoreCache* parent) const = 0;
};

// composite_score with per-beam caching: closed sub-sentences keep their
// inverse values and the forward log-probability is extended token by token.
// Totals are bit-identical to composite_score on the full text for
// token-level backends.
class CompositeScorer final : public BeamScorer {
 public:
  CompositeScorer(const LanguageModel& model, const TransformTemplate& tmpl,
                  PromptFields fields, ScorerConfig config,
                  std::optional<PoemFormat> format = std::nullopt,
                  const Tokenizer& tokenizer = *default_tokenizer());

  ScoredText score(const TokenSeq& text, const ScoreCache* parent) const override;

  const TokenSeq& prompt() const noexcept { return prompt_; }
  const ScorerConfig& config() const noexcept { return config_; }

 private:
  const LanguageModel& model_;
  TransformTemplate tmpl_;
  PromptFields fields_;
  ScorerConfig config_;
  std::optional<PoemFormat> format_;
  TokenSeq prompt_;
};

// Wraps a plain function; no caching.
class FunctionScorer final : public BeamScorer {
 public:
  explicit FunctionScorer(std::function<ScoreBreakdown(const TokenSeq&)> fn)
      : fn_(std::move(fn)) {}
  ScoredText score(const TokenSeq& text, const ScoreCache*) const override {
    return {fn_(text), {}};
  }

 private:
  std::function<ScoreBreakdown(const TokenSeq&)> fn_;
};

}  // namespace inverse_decode
