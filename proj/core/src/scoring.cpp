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

#include "inverse_decode/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "inverse_decode/errors.hpp"

namespace inverse_decode {
namespace {

bool valid_weight(double w) { return w >= 0.0 && std::isfinite(w); }

// The one place a total is computed, shared by assembly and audit.
double combine(double lambda1, double lambda2, double lambda3, double lambda_exp,
               SumScope scope, const std::vector<double>& per_subsentence,
               std::size_t n_subsentences, double forward_raw, std::size_t n_tokens,
               double penalty) {
  double inverse_sum = 0.0;
  for (double v : per_subsentence) inverse_sum += v;
  const double n = static_cast<double>(std::max<std::size_t>(n_subsentences, 1));
  const double normalized_forward =
      forward_raw / std::pow(static_cast<double>(std::max<std::size_t>(n_tokens, 1)), lambda_exp);
  if (scope == SumScope::kBoth) {
    return (lambda1 * inverse_sum + lambda2 * normalized_forward) / n - lambda3 * penalty;
  }
  return lambda1 * (inverse_sum / n) + lambda2 * normalized_forward - lambda3 * penalty;
}

std::vector<Token> sorted(const TokenSet& set) {
  std::vector<Token> out(set.begin(), set.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string to_string(ScoringMode mode) {
  switch (mode) {
    case ScoringMode::kBaseline:
      return "baseline";
    case ScoringMode::kInverseQa:
      return "inverse_qa";
    case ScoringMode::kInversePoem:
      return "inverse_poem";
  }
  return "unknown";
}

ScoringMode scoring_mode_from_string(std::string_view name) {
  if (name == "baseline") return ScoringMode::kBaseline;
  if (name == "inverse_qa") return ScoringMode::kInverseQa;
  if (name == "inverse_poem") return ScoringMode::kInversePoem;
  throw ConfigError("unknown scoring mode '" + std::string(name) + "'");
}

std::string to_string(SumScope scope) {
  return scope == SumScope::kBoth ? "both" : "inverse_only";
}

SumScope sum_scope_from_string(std::string_view name) {
  if (name == "inverse_only") return SumScope::kInverseOnly;
  if (name == "both") return SumScope::kBoth;
  throw ConfigError("unknown sum_scope '" + std::string(name) + "'");
}

void ScorerConfig::validate() const {
  if (!valid_weight(lambda1) || !valid_weight(lambda2) || !valid_weight(lambda3) ||
      !valid_weight(lambda_exp)) {
    throw ConfigError("scorer weights must be finite and non-negative");
  }
  if (delimiters.empty()) throw ConfigError("delimiter set is empty");
}

ScorerConfig ScorerConfig::qa() { return ScorerConfig{}; }

ScorerConfig ScorerConfig::poem() {
  ScorerConfig c;
  c.lambda2 = 0.75;
  c.mode = ScoringMode::kInversePoem;
  return c;
}

ScorerConfig ScorerConfig::baseline() {
  ScorerConfig c;
  c.mode = ScoringMode::kBaseline;
  return c;
}

nlohmann::json ScorerConfig::to_json() const {
  return {{"lambda1", lambda1},     {"lambda2", lambda2},
          {"lambda3", lambda3},     {"lambda_exp", lambda_exp},
          {"mode", to_string(mode)}, {"sum_scope", to_string(sum_scope)},
          {"delimiters", sorted(delimiters)}};
}

ScorerConfig ScorerConfig::from_json(const nlohmann::json& j) {
  try {
    ScorerConfig c;
    if (auto it = j.find("mode"); it != j.end()) {
      c.mode = scoring_mode_from_string(it->get<std::string>());
      if (c.mode == ScoringMode::kInversePoem) c.lambda2 = 0.75;
    }
    c.lambda1 = j.value("lambda1", c.lambda1);
    c.lambda2 = j.value("lambda2", c.lambda2);
    c.lambda3 = j.value("lambda3", c.lambda3);
    c.lambda_exp = j.value("lambda_exp", c.lambda_exp);
    if (auto it = j.find("sum_scope"); it != j.end()) {
      c.sum_scope = sum_scope_from_string(it->get<std::string>());
    }
    if (auto it = j.find("delimiters"); it != j.end()) {
      c.delimiters.clear();
      for (const auto& d : *it) c.delimiters.insert(d.get<std::string>());
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed scorer config: ") + e.what());
  }
}

double ScoreBreakdown::reconstruct_total() const {
  return combine(lambda1, lambda2, lambda3, lambda_exp, sum_scope, per_subsentence,
                 static_cast<std::size_t>(n_subsentences), forward_term,
                 static_cast<std::size_t>(n_tokens), format_penalty);
}

nlohmann::json ScoreBreakdown::to_json() const {
  nlohmann::json violation_items = nlohmann::json::array();
  for (const auto& v : violations) {
    violation_items.push_back({{"component", to_string(v.component)},
                               {"line", v.line},
                               {"position", v.position},
                               {"amount", v.amount},
                               {"weight", v.weight},
                               {"detail", v.detail}});
  }
  return {{"inverse_term", inverse_term},
          {"forward_term", forward_term},
          {"format_penalty", format_penalty},
          {"total", total},
          {"n_subsentences", n_subsentences},
          {"n_tokens", n_tokens},
          {"per_subsentence", per_subsentence},
          {"violations", violation_items},
          {"lambda1", lambda1},
          {"lambda2", lambda2},
          {"lambda3", lambda3},
          {"lambda_exp", lambda_exp},
          {"sum_scope", to_string(sum_scope)}};
}

double forward_score(const LanguageModel& model, const TokenSeq& prompt,
                     const TokenSeq& generated) {
  if (generated.empty()) throw ScoreError("cannot score an empty generation");
  return model.logprob(prompt, generated);
}

double subsentence_inverse_logprob(const LanguageModel& model, const TransformTemplate& tmpl,
                                   const PromptFields& fields, const TokenSeq& sub_sentence) {
  const InversePrompt inv = render_inverse(tmpl, fields, sub_sentence);
  return model.logprob(inv.context, inv.target);
}

InverseScore inverse_score(const LanguageModel& model, const TransformTemplate& tmpl,
                           const PromptFields& fields, const TokenSeq& generated,
                           const TokenSet& delimiters) {
  const auto segments = segment_subsentences(generated, delimiters);
  if (segments.empty()) throw ScoreError("generation has no sub-sentences");
  InverseScore out;
  out.per_subsentence.reserve(segments.size());
  double sum = 0.0;
  for (const auto& s : segments) {
    out.per_subsentence.push_back(subsentence_inverse_logprob(model, tmpl, fields, s.text));
    sum += out.per_subsentence.back();
  }
  out.value = sum / static_cast<double>(segments.size());
  return out;
}

ScoreBreakdown assemble_breakdown(const ScorerConfig& config,
                                  std::vector<double> per_subsentence, double forward_raw,
                                  std::size_t n_subsentences, std::size_t n_tokens,
                                  const FormatReport* format_report) {
  if (n_tokens == 0) throw ScoreError("cannot score an empty generation");
  ScoreBreakdown b;
  b.forward_term = forward_raw;
  b.n_subsentences = static_cast<int>(n_subsentences);
  b.n_tokens = static_cast<int>(n_tokens);
  if (config.mode == ScoringMode::kBaseline) {
    b.total = combine(b.lambda1, b.lambda2, b.lambda3, b.lambda_exp, b.sum_scope, {},
                      n_subsentences, forward_raw, n_tokens, 0.0);
    return b;
  }
  if (n_subsentences == 0) throw ScoreError("generation has no sub-sentences");
  b.lambda1 = config.lambda1;
  b.lambda2 = config.lambda2;
  b.lambda3 = config.lambda3;
  b.lambda_exp = config.lambda_exp;
  b.sum_scope = config.sum_scope;
  double sum = 0.0;
  for (double v : per_subsentence) sum += v;
  b.inverse_term = sum / static_cast<double>(n_subsentences);
  b.per_subsentence = std::move(per_subsentence);
  if (config.mode == ScoringMode::kInversePoem) {
    if (format_report == nullptr) throw ConfigError("poem scoring requires a format spec");
    b.format_penalty = format_report->penalty;
    b.violations = format_report->violations;
  } else {
    b.lambda3 = 0.0;
  }
  b.total = b.reconstruct_total();
  if (!std::isfinite(b.total)) throw ScoreError("score is not finite");
  return b;
}

ScoreBreakdown composite_score(const LanguageModel& model, const TransformTemplate& tmpl,
                               const PromptFields& fields, const TokenSeq& generated,
                               const ScorerConfig& config, const PoemFormat* format) {
  config.validate();
  if (config.mode == ScoringMode::kInversePoem && format == nullptr) {
    throw ConfigError("poem scoring requires a format spec");
  }
  const TokenSeq prompt = render_forward(tmpl, fields);
  const double forward = forward_score(model, prompt, generated);
  const auto segments = segment_subsentences(generated, config.delimiters);
  if (config.mode == ScoringMode::kBaseline) {
    return assemble_breakdown(config, {}, forward, segments.size(), generated.size(), nullptr);
  }
  std::vector<double> per;
  per.reserve(segments.size());
  for (const auto& s : segments) {
    per.push_back(subsentence_inverse_logprob(model, tmpl, fields, s.text));
  }
  std::optional<FormatReport> report;
  if (config.mode == ScoringMode::kInversePoem) {
    report = format_penalty(segments, format->spec, format->tables);
  }
  return assemble_breakdown(config, std::move(per), forward, segments.size(), generated.size(),
                            report ? &*report : nullptr);
}

CompositeScorer::CompositeScorer(const LanguageModel& model, const TransformTemplate& tmpl,
                                 PromptFields fields, ScorerConfig config,
                                 std::optional<PoemFormat> format, const Tokenizer& tokenizer)
    : model_(model),
      tmpl_(tmpl),
      fields_(std::move(fields)),
      config_(std::move(config)),
      format_(std::move(format)) {
  config_.validate();
  if (config_.mode == ScoringMode::kInversePoem && !format_) {
    throw ConfigError("poem scoring requires a format spec");
  }
  prompt_ = render_forward(tmpl_, fields_, tokenizer);
  // Surface missing target slots before the search starts.
  render_inverse(tmpl_, fields_, TokenSeq{}, tokenizer);
}

ScoredText CompositeScorer::score(const TokenSeq& text, const ScoreCache* parent) const {
  if (text.empty()) throw ScoreError("cannot score an empty generation");
  ScoreCache cache;
  if (parent != nullptr && parent->forward_tokens <= text.size() &&
      parent->closed_tokens <= parent->forward_tokens) {
    cache = *parent;
  }

  // Forward term: extend the cached log-probability over the new suffix only.
  const TokenSeq suffix = text.slice(cache.forward_tokens, text.size() - cache.forward_tokens);
  cache.forward = model_.logprob(prompt_ + text.slice(0, cache.forward_tokens), suffix,
                                 cache.forward);
  cache.forward_tokens = text.size();

  const TokenSeq rest = text.slice(cache.closed_tokens, text.size() - cache.closed_tokens);
  const auto tail = segment_subsentences(rest, config_.delimiters);
  const std::size_t n_segments = cache.closed_inverse.size() + tail.size();

  if (config_.mode == ScoringMode::kBaseline) {
    return {assemble_breakdown(config_, {}, cache.forward, n_segments, text.size(), nullptr),
            std::move(cache)};
  }

  std::vector<double> per = cache.closed_inverse;
  for (const auto& s : tail) {
    const double v = subsentence_inverse_logprob(model_, tmpl_, fields_, s.text);
    per.push_back(v);
    if (s.closed()) {
      cache.closed_inverse.push_back(v);
      cache.closed_tokens += s.text.size();
    }
  }

  std::optional<FormatReport> report;
  if (config_.mode == ScoringMode::kInversePoem) {
    report = format_penalty(segment_subsentences(text, config_.delimiters), format_->spec,
                            format_->tables);
  }
  return {assemble_breakdown(config_, std::move(per), cache.forward, n_segments, text.size(),
                             report ? &*report : nullptr),
          std::move(cache)};
}

}  // namespace inverse_decode
