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

#include "inverse_decode/self_training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "inverse_decode/errors.hpp"

namespace inverse_decode {

void SelfTrainConfig::validate() const {
  if (titles.empty()) throw ConfigError("self-training needs at least one title");
  if (cycles < 1 || cycles > max_cycles) {
    throw ConfigError("cycles must be in [1, " + std::to_string(max_cycles) + "]");
  }
  if (poems_per_title < 1 || poems_per_title > max_poems_per_title) {
    throw ConfigError("poems_per_title must be in [1, " + std::to_string(max_poems_per_title) +
                      "]");
  }
  if (!(fine_tune_weight > 0.0) || !std::isfinite(fine_tune_weight)) {
    throw ConfigError("fine_tune_weight must be positive and finite");
  }
  if (top_k && *top_k < 1) throw ConfigError("top_k must be >= 1");
  beam_params.validate();
  scorer_config.validate();
  format.spec.validate();
}

nlohmann::json GeneratedPoem::to_json() const {
  return {{"title", title},
          {"poem", poem.render()},
          {"breakdown", breakdown.to_json()},
          {"format_penalty", format_penalty},
          {"cycle", cycle}};
}

nlohmann::json CycleReport::to_json() const {
  return {{"cycle", cycle},
          {"n_generated", n_generated},
          {"n_failed", n_failed},
          {"n_trained", n_trained},
          {"mean_total", mean_total},
          {"mean_format_penalty", mean_format_penalty},
          {"mean_title_overlap", mean_title_overlap},
          {"failures", failures}};
}

double prompt_overlap(const TokenSeq& generated, const TokenSeq& prompt) {
  const std::set<Token> want(prompt.begin(), prompt.end());
  if (want.empty()) return 0.0;
  const std::set<Token> have(generated.begin(), generated.end());
  std::size_t hit = 0;
  for (const auto& t : want) hit += have.contains(t) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(want.size());
}

SelfTrainResult run_self_training(const NGramModel& model, const SelfTrainConfig& config) {
  config.validate();
  SelfTrainResult result{model, {}, {}};

  for (int cycle = 0; cycle < config.cycles; ++cycle) {
    const NGramModel& current = result.final_model;
    CycleReport report;
    report.cycle = cycle;
    std::vector<GeneratedPoem> generated;

    for (std::size_t t = 0; t < config.titles.size(); ++t) {
      const PromptFields& title = config.titles[t];
      for (int p = 0; p < config.poems_per_title; ++p) {
        BeamParams params = config.beam_params;
        params.rng_seed = derive_seed(config.beam_params.rng_seed,
                                      {static_cast<std::uint64_t>(cycle), t,
                                       static_cast<std::uint64_t>(p)});
        try {
          SearchResult search =
              run_beam_search(current, config.tmpl, title, params, config.scorer_config,
                              config.format);
          GeneratedPoem poem;
          poem.cycle = cycle;
          poem.title_index = t;
          poem.title = title;
          poem.poem = search.best.text;
          poem.breakdown = search.best.breakdown;
          poem.format_penalty =
              format_penalty(segment_subsentences(poem.poem, config.scorer_config.delimiters),
                             config.format.spec, config.format.tables)
                  .penalty;
          generated.push_back(std::move(poem));
        } catch (const Error& e) {
          ++report.n_failed;
          report.failures.push_back("title " + std::to_string(t) + " poem " + std::to_string(p) +
                                    ": " + e.what());
        }
      }
    }
    if (generated.empty()) {
      throw SelfTrainError("every generation failed in cycle " + std::to_string(cycle) +
                           (report.failures.empty() ? "" : ": " + report.failures.front()));
    }

    report.n_generated = generated.size();
    double total = 0.0, penalty = 0.0, overlap = 0.0;
    for (const auto& g : generated) {
      total += g.breakdown.total;
      penalty += g.format_penalty;
      TokenSeq title_tokens;
      for (const auto& [slot, value] : g.title) title_tokens.append(tokenize(value));
      overlap += prompt_overlap(g.poem, title_tokens);
    }
    const double n = static_cast<double>(generated.size());
    report.mean_total = total / n;
    report.mean_format_penalty = penalty / n;
    report.mean_title_overlap = overlap / n;

    std::vector<const GeneratedPoem*> chosen;
    for (const auto& g : generated) chosen.push_back(&g);
    if (config.top_k && static_cast<std::size_t>(*config.top_k) < chosen.size()) {
      std::stable_sort(chosen.begin(), chosen.end(), [](const auto* a, const auto* b) {
        return a->breakdown.total > b->breakdown.total;
      });
      chosen.resize(static_cast<std::size_t>(*config.top_k));
    }
    std::vector<TokenSeq> documents;
    for (const auto* g : chosen) documents.push_back(g->poem);
    report.n_trained = documents.size();

    result.final_model = current.fine_tune(documents, config.fine_tune_weight);
    result.reports.push_back(std::move(report));
    for (auto& g : generated) result.poems.push_back(std::move(g));
  }
  return result;
}

}  // namespace inverse_decode
