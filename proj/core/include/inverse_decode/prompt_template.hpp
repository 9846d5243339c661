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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "inverse_decode/tokens.hpp"

namespace inverse_decode {

// Slot name -> text, e.g. {"question": "..."}.
using PromptFields = std::map<std::string, std::string>;

// Reserved placeholder bound to the generated text in inverse contexts.
inline constexpr std::string_view kGeneratedSlot = "generated";

// A pattern such as "Question:{question} Answer:". Placeholders are
// {identifier}; literal braces are written "{{" and "}}".
class Pattern {
 public:
  struct Piece {
    bool is_slot = false;
    std::string text;  // literal text, or the slot name
  };

  Pattern() = default;
  static Pattern parse(std::string_view source);

  const std::string& source() const noexcept { return source_; }
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  // Slot names in order of first appearance.
  std::vector<std::string> slots() const;
  bool references(std::string_view slot) const;

  // Literal pieces and slot values are tokenized separately; `generated` is
  // spliced in token for token. Throws TemplateError naming a missing slot.
  TokenSeq render(const PromptFields& fields, const TokenSeq* generated,
                  const Tokenizer& tokenizer) const;

  // Recovers slot values from rendered text. Well defined when no two slots
  // are adjacent and no value contains the literal that follows its slot.
  PromptFields match(std::string_view rendered) const;

 private:
  std::string source_;
  std::vector<Piece> pieces_;
};

struct TransformTemplate {
  std::string name;
  std::string description;
  Pattern forward;          // renders the prompt
  Pattern inverse_context;  // must reference {generated}
  Pattern inverse_target;   // scored given the inverse context
  std::vector<std::string> declared_slots;

  // Parses and validates. Declared slots default to the forward pattern's.
  static TransformTemplate make(std::string name, std::string_view forward_pattern,
                                std::string_view inverse_context_pattern,
                                std::string_view inverse_target_pattern,
                                std::string description = {},
                                std::vector<std::string> declared_slots = {});

  nlohmann::json to_json() const;
  static TransformTemplate from_json(const nlohmann::json& j);
};

TokenSeq render_forward(const TransformTemplate& tmpl, const PromptFields& fields,
                        const Tokenizer& tokenizer = *default_tokenizer());

struct InversePrompt {
  TokenSeq context;
  TokenSeq target;
};

// Scored as logprob(target | context).
InversePrompt render_inverse(const TransformTemplate& tmpl, const PromptFields& fields,
                             const TokenSeq& generated,
                             const Tokenizer& tokenizer = *default_tokenizer());

struct SubSentence {
  TokenSeq text;                 // includes the terminal delimiter, if any
  std::optional<Token> terminal;  // nullopt: text ran out before a delimiter
  std::size_t index = 0;

  bool closed() const noexcept { return terminal.has_value(); }
  // text without its terminal delimiter
  TokenSeq body() const;
};

// Splits after every delimiter token. Concatenating the pieces in order
// reproduces `text` exactly.
std::vector<SubSentence> segment_subsentences(const TokenSeq& text,
                                              const TokenSet& delimiters);

// Chinese and Latin sentence punctuation: ，。？！；,.?!;
TokenSet default_delimiters();

class TemplatePack {
 public:
  TemplatePack() = default;
  explicit TemplatePack(std::vector<TransformTemplate> templates);

  // QA, poem (Chinese and English), essay and translation templates.
  static TemplatePack builtin();
  static TemplatePack from_json(const nlohmann::json& j);
  static TemplatePack load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const TransformTemplate* find(std::string_view name) const;
  // Throws ConfigError for unknown names.
  const TransformTemplate& get(std::string_view name) const;
  const std::vector<TransformTemplate>& templates() const noexcept { return templates_; }

 private:
  std::vector<TransformTemplate> templates_;
};

}  // namespace inverse_decode
