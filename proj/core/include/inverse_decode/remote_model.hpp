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

#include "inverse_decode/language_model.hpp"
#include "inverse_decode/tokens.hpp"

namespace inverse_decode {

inline constexpr const char* kLmUrlEnvVar = "INVERSE_DECODE_LM_URL";

struct RemoteEndpoint {
  std::string base_url;  // scheme://host[:port][/base/path]
  int timeout_ms = 10000;
  int max_retries = 2;
  std::optional<std::string> auth_token;

  // Throws ConfigError when timeout_ms <= 0, max_retries < 0, or the URL
  // does not parse.
  void validate() const;

  // Copy with base_url replaced by $INVERSE_DECODE_LM_URL when it is set.
  RemoteEndpoint with_env_override() const;
};

// POST {base_url}/v1/logprob {"prefix": [...], "continuation": [...]}
// -> {"logprob": number}. An empty continuation returns 0 without a request.
double remote_logprob(const RemoteEndpoint& endpoint, const TokenSeq& prefix,
                      const TokenSeq& continuation);

// POST {base_url}/v1/sample
//   {"prefix": [...], "stop": [...], "max_tokens": int, "n": int, "seed": int}
// -> {"continuations": [[token, ...], ...], "ended": [bool, ...]?}
// "ended" is optional; without it a continuation that is shorter than
// max_tokens and does not end in a stop token is taken to have hit END.
std::vector<Continuation> remote_sample(const RemoteEndpoint& endpoint,
                                        const TokenSeq& prefix, const TokenSet& stop_tokens,
                                        std::size_t max_tokens, std::size_t n,
                                        std::uint64_t seed);

// LanguageModel over the wire protocol above. Stateless apart from the
// endpoint; each call opens its own connection, so concurrent calls never
// share a payload stream.
class RemoteModel final : public LanguageModel {
 public:
  explicit RemoteModel(RemoteEndpoint endpoint);

  const RemoteEndpoint& endpoint() const noexcept { return endpoint_; }

  std::string id() const override;
  double logprob(const TokenSeq& prefix, const TokenSeq& continuation,
                 double start = 0.0) const override;
  Continuation sample_continuation(const TokenSeq& prefix,
                                   const SamplingOptions& options) const override;
  std::vector<Continuation> sample(const TokenSeq& prefix, const SamplingOptions& options,
                                   std::size_t n) const override;

 private:
  RemoteEndpoint endpoint_;
};

}  // namespace inverse_decode
