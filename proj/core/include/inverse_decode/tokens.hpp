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

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace inverse_decode {

using Token = std::string;
using TokenSet = std::unordered_set<Token>;

// Ordered token sequence. Rendering concatenates tokens, so any tokenizer
// whose tokens partition the input text round-trips losslessly.
class TokenSeq {
 public:
  TokenSeq() = default;
  explicit TokenSeq(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}
  TokenSeq(std::initializer_list<Token> tokens) : tokens_(tokens) {}

  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const Token& operator[](std::size_t i) const { return tokens_[i]; }
  const Token& back() const { return tokens_.back(); }

  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  void push_back(Token token) { tokens_.push_back(std::move(token)); }
  void append(const TokenSeq& other);

  // Tokens [first, first + count).
  TokenSeq slice(std::size_t first, std::size_t count) const;

  std::string render() const;

  friend TokenSeq operator+(TokenSeq lhs, const TokenSeq& rhs) {
    lhs.append(rhs);
    return lhs;
  }
  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
  friend auto operator<=>(const TokenSeq& a, const TokenSeq& b) {
    return a.tokens_ <=> b.tokens_;
  }

 private:
  std::vector<Token> tokens_;
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual TokenSeq tokenize(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

// One token per Unicode code point. Invalid UTF-8 bytes become single-byte
// tokens so the round trip stays lossless.
class CharTokenizer final : public Tokenizer {
 public:
  TokenSeq tokenize(std::string_view text) const override;
  std::string name() const override { return "char"; }
};

std::shared_ptr<const Tokenizer> default_tokenizer();

// Shorthand for default_tokenizer()->tokenize(text).
TokenSeq tokenize(std::string_view text);

}  // namespace inverse_decode
