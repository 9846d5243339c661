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
#include <initializer_list>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "inverse_decode/tokens.hpp"

namespace inverse_decode {

// Terminal event. Appears in next-token distributions and serialized counts,
// never inside a TokenSeq returned to callers.
inline const Token kEndToken = "</s>";
// Left padding for n-gram contexts.
inline const Token kStartToken = "<s>";

enum class StopReason { kStopToken, kEnd, kMaxTokens };

std::string to_string(StopReason reason);

struct Continuation {
  TokenSeq tokens;  // includes the stop token when reason == kStopToken
  StopReason reason = StopReason::kMaxTokens;
};

struct SamplingOptions {
  TokenSet stop_tokens;
  std::size_t max_tokens = 32;
  std::uint64_t seed = 0;
  double temperature = 1.0;
};

using Distribution = std::vector<std::pair<Token, double>>;

// Contract shared by every backend: deterministic, read-only after
// construction, safe to call concurrently.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  // Stable identifier used in logs and config hashes.
  virtual std::string id() const = 0;

  // Sum of log p(continuation_i | prefix + continuation_<i), natural log,
  // accumulated left to right onto `start`. Passing a running total as
  // `start` gives bit-identical results to scoring the whole sequence at once
  // for backends that score token by token.
  virtual double logprob(const TokenSeq& prefix, const TokenSeq& continuation,
                         double start = 0.0) const = 0;

  // Finite-vocabulary backends return their tokens (END excluded).
  virtual std::optional<std::vector<Token>> vocabulary() const {
    return std::nullopt;
  }

  // p(. | history) over vocabulary ∪ {END}. Throws ConfigError on backends
  // that cannot enumerate their support.
  virtual Distribution next_distribution(const TokenSeq& history) const;

  // Ancestral sampling until a stop token, END, or max_tokens.
  virtual Continuation sample_continuation(const TokenSeq& prefix,
                                           const SamplingOptions& options) const;

  // n independent continuations; the i-th uses seed derive_seed(seed, {i}).
  virtual std::vector<Continuation> sample(const TokenSeq& prefix,
                                           const SamplingOptions& options,
                                           std::size_t n) const;
};

// Uniform over a fixed vocabulary plus END: every token, in or out of
// vocabulary, costs -ln(|vocab| + 1).
class UniformModel final : public LanguageModel {
 public:
  explicit UniformModel(std::vector<Token> vocab);

  std::string id() const override;
  double logprob(const TokenSeq& prefix, const TokenSeq& continuation,
                 double start = 0.0) const override;
  std::optional<std::vector<Token>> vocabulary() const override { return vocab_; }
  Distribution next_distribution(const TokenSeq& history) const override;

 private:
  std::vector<Token> vocab_;
};

// splitmix64-based mixing of a base seed with salts; used wherever one run
// seed fans out into many independent streams.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> salts);

// Draws an index from `weights` (non-negative, positive sum) with temperature.
std::size_t sample_index(const std::vector<double>& weights, double temperature,
                         std::mt19937_64& rng);

}  // namespace inverse_decode
