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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "inverse_decode/prompt_template.hpp"
#include "inverse_decode/tokens.hpp"

namespace inverse_decode {

enum class Tone { kLevel, kOblique, kUnknown };

struct FormatWeights {
  double length = 1.0;
  double repetition = 1.0;
  double rhyme = 1.0;
  double tone = 1.0;
};

struct PoemFormatSpec {
  int n_lines = 4;
  int chars_per_line = 5;
  // 0-based line indices whose final character must share a rhyme class.
  std::vector<int> rhyme_positions;
  // One string per line; 'L' level, 'O' oblique, '*' free. Lines or
  // positions beyond the pattern are free.
  std::vector<std::string> tone_pattern;
  FormatWeights weights;

  // Throws ConfigError.
  void validate() const;

  // "5-jueju", "7-jueju", "5-lvshi", "7-lvshi". Rhyme on the even lines,
  // no tone constraints.
  static PoemFormatSpec preset(std::string_view name);

  nlohmann::json to_json() const;
  static PoemFormatSpec from_json(const nlohmann::json& j);
  static PoemFormatSpec load(const std::filesystem::path& path);
};

// Rhyme classes and tones per token. Unmapped tokens are UNKNOWN.
class RhymeToneTables {
 public:
  void set_rhyme(const Token& token, std::string rhyme_class);
  void set_tone(const Token& token, Tone tone);

  std::optional<std::string> rhyme_class(const Token& token) const;
  Tone tone(const Token& token) const;

  // {"rhyme": {token: class}, "tone": {token: "level" | "oblique"}}
  nlohmann::json to_json() const;
  static RhymeToneTables from_json(const nlohmann::json& j);
  static RhymeToneTables load(const std::filesystem::path& path);

 private:
  std::unordered_map<Token, std::string> rhyme_;
  std::unordered_map<Token, Tone> tone_;
};

enum class FormatComponent { kLength, kRepetition, kRhyme, kTone };

std::string to_string(FormatComponent component);

struct FormatViolation {
  FormatComponent component = FormatComponent::kLength;
  int line = -1;      // -1 for poem-level violations
  int position = -1;  // token index within the line, -1 when not applicable
  double amount = 0.0;
  double weight = 0.0;
  std::string detail;

  double cost() const noexcept { return amount * weight; }
};

struct FormatReport {
  double penalty = 0.0;
  std::vector<FormatViolation> violations;

  nlohmann::json to_json() const;
};

// Weighted violation count. Lines are sub-sentence bodies (delimiters
// stripped):
//   length      sum |len(line) - chars_per_line| + |#lines - n_lines| * chars_per_line
//   repetition  extra occurrences of any within-line token bigram
//   rhyme       rhyme-position lines whose final token is not in the majority
//               class (UNKNOWN always counts)
//   tone        constrained positions whose known tone contradicts the pattern
// Components with zero weight are not itemized, so the penalty is zero iff
// the violation list is empty. Throws ScoreError on an empty poem.
FormatReport format_penalty(const std::vector<SubSentence>& poem, const PoemFormatSpec& spec,
                            const RhymeToneTables& tables);

}  // namespace inverse_decode
