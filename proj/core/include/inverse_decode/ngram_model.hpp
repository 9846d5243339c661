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
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "inverse_decode/language_model.hpp"
#include "inverse_decode/tokens.hpp"

namespace inverse_decode {

// Order-k token model with additive smoothing over vocab ∪ {END}:
//
//   p(t | ctx) = (c(ctx, t) + alpha) / (c(ctx) + alpha * (|vocab| + 1))
//
// Contexts are the previous k-1 tokens, left-padded with kStartToken. A token
// outside the vocabulary scores like an unseen in-vocabulary token and is
// never sampled, so log-probabilities stay finite everywhere.
class NGramModel final : public LanguageModel {
 public:
  // Every document contributes one window per token plus an END window.
  static NGramModel train(const std::vector<TokenSeq>& corpus, int order,
                          double smoothing_alpha);

  // Returns a new model whose counts are incremented by weight times the
  // window counts of `documents`. New tokens extend the vocabulary.
  NGramModel fine_tune(const std::vector<TokenSeq>& documents, double weight) const;

  int order() const noexcept { return order_; }
  double smoothing_alpha() const noexcept { return alpha_; }
  const std::vector<Token>& vocab() const noexcept { return vocab_; }
  bool in_vocab(const Token& token) const { return ids_.contains(token); }

  // `context` holds exactly order-1 tokens (kStartToken allowed); `next` may
  // be kEndToken.
  double count(const std::vector<Token>& context, const Token& next) const;
  double context_total(const std::vector<Token>& context) const;
  double prob(const std::vector<Token>& context, const Token& next) const;
  std::size_t num_contexts() const noexcept { return counts_.size(); }

  std::string id() const override;
  double logprob(const TokenSeq& prefix, const TokenSeq& continuation,
                 double start = 0.0) const override;
  std::optional<std::vector<Token>> vocabulary() const override { return vocab_; }
  Distribution next_distribution(const TokenSeq& history) const override;

  nlohmann::json to_json() const;
  static NGramModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static NGramModel load(const std::filesystem::path& path);

  friend bool operator==(const NGramModel& a, const NGramModel& b);

 private:
  using Id = std::int32_t;
  static constexpr Id kStartId = -1;
  static constexpr Id kEndId = -2;
  static constexpr Id kUnkId = -3;

  struct ContextCounts {
    std::map<Id, double> next;
    double total = 0.0;
    friend bool operator==(const ContextCounts&, const ContextCounts&) = default;
  };

  NGramModel(int order, double alpha);

  Id intern(const Token& token);
  Id lookup(const Token& token) const;
  void add_document(const TokenSeq& document, double weight);
  std::vector<Id> context_ids(const std::vector<Token>& context) const;
  double prob_ids(const std::vector<Id>& context, Id next) const;
  const Token& token_of(Id id) const;

  int order_;
  double alpha_;
  std::vector<Token> vocab_;
  std::unordered_map<Token, Id> ids_;
  std::map<std::vector<Id>, ContextCounts> counts_;
};

// UTF-8 JSONL, one {"text": string} object per line; blank lines skipped.
std::vector<TokenSeq> read_corpus_jsonl(const std::filesystem::path& path,
                                        const Tokenizer& tokenizer);

}  // namespace inverse_decode
