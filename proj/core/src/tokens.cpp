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

#include "inverse_decode/tokens.hpp"

#include <algorithm>

namespace inverse_decode {
namespace {

// Length of the UTF-8 sequence starting at `lead`, or 0 if `lead` is not a
// valid lead byte.
std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 0;
}

}  // namespace

void TokenSeq::append(const TokenSeq& other) {
  tokens_.insert(tokens_.end(), other.tokens_.begin(), other.tokens_.end());
}

TokenSeq TokenSeq::slice(std::size_t first, std::size_t count) const {
  first = std::min(first, tokens_.size());
  count = std::min(count, tokens_.size() - first);
  return TokenSeq(std::vector<Token>(tokens_.begin() + first, tokens_.begin() + first + count));
}

std::string TokenSeq::render() const {
  std::string out;
  for (const auto& t : tokens_) out += t;
  return out;
}

TokenSeq CharTokenizer::tokenize(std::string_view text) const {
  std::vector<Token> tokens;
  tokens.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = utf8_length(static_cast<unsigned char>(text[i]));
    bool valid = len > 0 && i + len <= text.size();
    for (std::size_t k = 1; valid && k < len; ++k) {
      valid = (static_cast<unsigned char>(text[i + k]) >> 6) == 0x2;
    }
    if (!valid) len = 1;
    tokens.emplace_back(text.substr(i, len));
    i += len;
  }
  return TokenSeq(std::move(tokens));
}

std::shared_ptr<const Tokenizer> default_tokenizer() {
  static const auto tokenizer = std::make_shared<const CharTokenizer>();
  return tokenizer;
}

TokenSeq tokenize(std::string_view text) { return default_tokenizer()->tokenize(text); }

}  // namespace inverse_decode
