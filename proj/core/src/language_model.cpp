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

#include "inverse_decode/language_model.hpp"

#include <cmath>
#include <numeric>

#include "inverse_decode/errors.hpp"

namespace inverse_decode {

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kStopToken:
      return "stop";
    case StopReason::kEnd:
      return "end";
    case StopReason::kMaxTokens:
      return "max_tokens";
  }
  return "unknown";
}

Distribution LanguageModel::next_distribution(const TokenSeq&) const {
  throw ConfigError("backend '" + id() + "' cannot enumerate next-token distributions");
}

Continuation LanguageModel::sample_continuation(const TokenSeq& prefix,
                                                const SamplingOptions& options) const {
  if (options.max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  std::mt19937_64 rng(options.seed);
  Continuation out;
  TokenSeq history = prefix;
  std::vector<double> weights;
  while (out.tokens.size() < options.max_tokens) {
    Distribution dist = next_distribution(history);
    weights.resize(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) weights[i] = dist[i].second;
    Token next = dist[sample_index(weights, options.temperature, rng)].first;
    if (next == kEndToken) {
      out.reason = StopReason::kEnd;
      return out;
    }
    history.push_back(next);
    out.tokens.push_back(next);
    if (options.stop_tokens.contains(next)) {
      out.reason = StopReason::kStopToken;
      return out;
    }
  }
  out.reason = StopReason::kMaxTokens;
  return out;
}

std::vector<Continuation> LanguageModel::sample(const TokenSeq& prefix,
                                                const SamplingOptions& options,
                                                std::size_t n) const {
  std::vector<Continuation> out;
  out.reserve(n);
  SamplingOptions each = options;
  for (std::size_t i = 0; i < n; ++i) {
    each.seed = derive_seed(options.seed, {i});
    out.push_back(sample_continuation(prefix, each));
  }
  return out;
}

UniformModel::UniformModel(std::vector<Token> vocab) : vocab_(std::move(vocab)) {
  if (vocab_.empty()) throw ConfigError("uniform model needs a non-empty vocabulary");
}

std::string UniformModel::id() const {
  return "uniform:" + std::to_string(vocab_.size() + 1);
}

double UniformModel::logprob(const TokenSeq&, const TokenSeq& continuation,
                             double start) const {
  const double lp = -std::log(static_cast<double>(vocab_.size() + 1));
  double acc = start;
  for (std::size_t i = 0; i < continuation.size(); ++i) acc += lp;
  return acc;
}

Distribution UniformModel::next_distribution(const TokenSeq&) const {
  const double p = 1.0 / static_cast<double>(vocab_.size() + 1);
  Distribution dist;
  dist.reserve(vocab_.size() + 1);
  for (const auto& t : vocab_) dist.emplace_back(t, p);
  dist.emplace_back(kEndToken, p);
  return dist;
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> salts) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  for (std::uint64_t s : salts) h = mix(h ^ mix(s + 0x632be59bd9b4e019ULL));
  return h;
}

std::size_t sample_index(const std::vector<double>& weights, double temperature,
                         std::mt19937_64& rng) {
  if (weights.empty()) throw ConfigError("cannot sample from an empty distribution");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be positive and finite");
  }
  std::vector<double> scaled(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    scaled[i] = temperature == 1.0 ? weights[i] : std::pow(weights[i], 1.0 / temperature);
  }
  const double total = std::accumulate(scaled.begin(), scaled.end(), 0.0);
  if (!(total > 0.0)) throw ConfigError("distribution has no positive mass");
  // 53 random bits; avoids implementation-defined std distributions.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    acc += scaled[i];
    if (u < acc) return i;
  }
  // Rounding left u at the very top; take the last token with mass.
  for (std::size_t i = scaled.size(); i-- > 0;) {
    if (scaled[i] > 0.0) return i;
  }
  return scaled.size() - 1;
}

}  // namespace inverse_decode
