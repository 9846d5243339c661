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

#include "inverse_decode/remote_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <regex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "inverse_decode/errors.hpp"

namespace inverse_decode {
namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash, may be empty
};

ParsedUrl parse_url(const std::string& url) {
  static const std::regex kUrl(R"(^(http://[^/\s]+)(/[^\s]*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw ConfigError("unsupported endpoint URL '" + url + "' (expected http://host[:port][/path])");
  }
  std::string path = m[2].matched ? m[2].str() : std::string{};
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {m[1].str(), path};
}

nlohmann::json tokens_json(const TokenSeq& seq) { return nlohmann::json(seq.tokens()); }

// POSTs `body` to base_url + route, retrying only on transport failures.
nlohmann::json post_json(const RemoteEndpoint& endpoint, const std::string& route,
                         const nlohmann::json& body) {
  endpoint.validate();
  const ParsedUrl url = parse_url(endpoint.base_url);
  httplib::Headers headers;
  if (endpoint.auth_token) headers.emplace("Authorization", "Bearer " + *endpoint.auth_token);
  const std::string payload = body.dump();
  const auto timeout = std::chrono::milliseconds(endpoint.timeout_ms);

  std::string last_error;
  for (int attempt = 0; attempt <= endpoint.max_retries; ++attempt) {
    httplib::Client client(url.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(url.path + route, headers, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw BackendError(endpoint.base_url + route + " returned HTTP " +
                             std::to_string(res->status),
                         /*retryable=*/false);
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ProtocolError(route + " response is not JSON: " + e.what());
    }
  }
  throw BackendError(endpoint.base_url + route + " failed after " +
                         std::to_string(endpoint.max_retries + 1) + " attempt(s): " + last_error,
                     /*retryable=*/true);
}

}  // namespace

void RemoteEndpoint::validate() const {
  if (timeout_ms <= 0) throw ConfigError("timeout_ms must be > 0");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  parse_url(base_url);
}

RemoteEndpoint RemoteEndpoint::with_env_override() const {
  RemoteEndpoint out = *this;
  if (const char* url = std::getenv(kLmUrlEnvVar); url != nullptr && *url != '\0') {
    out.base_url = url;
  }
  return out;
}

double remote_logprob(const RemoteEndpoint& endpoint, const TokenSeq& prefix,
                      const TokenSeq& continuation) {
  if (continuation.empty()) return 0.0;
  const nlohmann::json reply = post_json(
      endpoint, "/v1/logprob",
      {{"prefix", tokens_json(prefix)}, {"continuation", tokens_json(continuation)}});
  auto it = reply.find("logprob");
  if (!reply.is_object() || it == reply.end() || !it->is_number()) {
    throw ProtocolError("/v1/logprob response lacks a numeric \"logprob\"");
  }
  const double value = it->get<double>();
  if (!std::isfinite(value) || value > 0.0) {
    throw ProtocolError("/v1/logprob returned an invalid log-probability");
  }
  return value;
}

std::vector<Continuation> remote_sample(const RemoteEndpoint& endpoint,
                                        const TokenSeq& prefix, const TokenSet& stop_tokens,
                                        std::size_t max_tokens, std::size_t n,
                                        std::uint64_t seed) {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  std::vector<Token> stop(stop_tokens.begin(), stop_tokens.end());
  std::sort(stop.begin(), stop.end());
  const nlohmann::json reply = post_json(endpoint, "/v1/sample",
                                         {{"prefix", tokens_json(prefix)},
                                          {"stop", stop},
                                          {"max_tokens", max_tokens},
                                          {"n", n},
                                          {"seed", seed}});
  if (!reply.is_object() || !reply.contains("continuations") ||
      !reply["continuations"].is_array()) {
    throw ProtocolError("/v1/sample response lacks a \"continuations\" array");
  }
  const auto& items = reply["continuations"];
  if (items.size() < n) {
    throw ProtocolError("/v1/sample returned " + std::to_string(items.size()) +
                        " continuations, expected " + std::to_string(n));
  }
  const nlohmann::json* ended = nullptr;
  if (auto it = reply.find("ended"); it != reply.end()) {
    if (!it->is_array() || it->size() < n) throw ProtocolError("\"ended\" must match continuations");
    ended = &*it;
  }

  std::vector<Continuation> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& item = items[i];
    if (!item.is_array()) throw ProtocolError("continuation must be an array of tokens");
    Continuation c;
    for (const auto& t : item) {
      if (!t.is_string() || t.get_ref<const std::string&>().empty()) {
        throw ProtocolError("continuation tokens must be non-empty strings");
      }
      c.tokens.push_back(t.get<std::string>());
    }
    if (c.tokens.size() > max_tokens) throw ProtocolError("continuation exceeds max_tokens");
    for (std::size_t k = 0; k + 1 < c.tokens.size(); ++k) {
      if (stop_tokens.contains(c.tokens[k])) {
        throw ProtocolError("continuation runs past a stop token");
      }
    }
    const bool stopped = !c.tokens.empty() && stop_tokens.contains(c.tokens.back());
    if (ended != nullptr && (*ended)[i].is_boolean() && (*ended)[i].get<bool>()) {
      c.reason = StopReason::kEnd;
    } else if (stopped) {
      c.reason = StopReason::kStopToken;
    } else if (c.tokens.size() == max_tokens) {
      c.reason = StopReason::kMaxTokens;
    } else {
      c.reason = StopReason::kEnd;
    }
    out.push_back(std::move(c));
  }
  return out;
}

RemoteModel::RemoteModel(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  endpoint_.validate();
}

std::string RemoteModel::id() const { return "remote:" + endpoint_.base_url; }

double RemoteModel::logprob(const TokenSeq& prefix, const TokenSeq& continuation,
                            double start) const {
  return start + remote_logprob(endpoint_, prefix, continuation);
}

Continuation RemoteModel::sample_continuation(const TokenSeq& prefix,
                                              const SamplingOptions& options) const {
  return remote_sample(endpoint_, prefix, options.stop_tokens, options.max_tokens, 1,
                       options.seed)
      .front();
}

std::vector<Continuation> RemoteModel::sample(const TokenSeq& prefix,
                                              const SamplingOptions& options,
                                              std::size_t n) const {
  return remote_sample(endpoint_, prefix, options.stop_tokens, options.max_tokens, n,
                       options.seed);
}

}  // namespace inverse_decode
