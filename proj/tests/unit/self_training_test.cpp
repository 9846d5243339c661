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

#include <gtest/gtest.h>

#include <cmath>

#include "inverse_decode/errors.hpp"
#include "test_support.hpp"

namespace inverse_decode {
namespace {

class SelfTraining : public ::testing::Test {
 protected:
  void SetUp() override {
    model = NGramModel::train(
        read_corpus_jsonl(testing::data_dir() / "corpus" / "poem_toy.jsonl", *default_tokenizer()),
        3, 0.05);
    config.titles = {{{"title", "秋山"}}, {{"title", "江楼"}}};
    config.cycles = 1;
    config.beam_params.n_beams = 3;
    config.beam_params.m_expansions = 3;
    config.beam_params.max_steps = 4;
    config.beam_params.max_step_tokens = 8;
    config.beam_params.rng_seed = 11;
    config.format.spec = PoemFormatSpec::preset("5-jueju");
    config.format.tables = RhymeToneTables::load(testing::data_dir() / "tables_toy.json");
    config.tmpl = TemplatePack::builtin().get("poem-zh");
  }

  NGramModel model = NGramModel::train({tokenize("x")}, 1, 1.0);
  SelfTrainConfig config;
};

TEST_F(SelfTraining, ZeroCyclesRejected) {
  config.cycles = 0;
  EXPECT_THROW(run_self_training(model, config), ConfigError);
  config.cycles = 17;
  EXPECT_THROW(run_self_training(model, config), ConfigError);
}

TEST_F(SelfTraining, EmptyTitlesRejected) {
  config.titles.clear();
  EXPECT_THROW(run_self_training(model, config), ConfigError);
}

TEST_F(SelfTraining, ReplayOracle) {
  config.fine_tune_weight = 1.5;
  const SelfTrainResult r = run_self_training(model, config);
  ASSERT_EQ(r.poems.size(), 2u);
  std::vector<TokenSeq> docs;
  for (std::size_t t = 0; t < 2; ++t) {
    BeamParams p = config.beam_params;
    p.rng_seed = derive_seed(config.beam_params.rng_seed, {0, t, 0});
    const auto search =
        run_beam_search(model, config.tmpl, config.titles[t], p, config.scorer_config,
                        config.format);
    EXPECT_EQ(search.best.text, r.poems[t].poem);
    docs.push_back(search.best.text);
  }
  EXPECT_EQ(r.final_model, model.fine_tune(docs, 1.5));
  EXPECT_EQ(r.reports.at(0).n_trained, 2u);
}

TEST_F(SelfTraining, GeneratedPoemsBecomeMoreLikely) {
  config.cycles = 2;
  const SelfTrainResult r = run_self_training(model, config);
  NGramModel before = model;
  for (int cycle = 0; cycle < 2; ++cycle) {
    std::vector<TokenSeq> docs;
    for (const auto& p : r.poems) {
      if (p.cycle == cycle) docs.push_back(p.poem);
    }
    const NGramModel after = before.fine_tune(docs, config.fine_tune_weight);
    for (const auto& d : docs) EXPECT_GT(after.logprob({}, d), before.logprob({}, d));
    before = after;
  }
  EXPECT_EQ(before, r.final_model);
}

TEST_F(SelfTraining, SupportGrowth) {
  const SelfTrainResult r = run_self_training(model, config);
  const int k = r.final_model.order() - 1;
  for (const auto& p : r.poems) {
    std::vector<Token> padded(static_cast<std::size_t>(k), kStartToken);
    padded.insert(padded.end(), p.poem.begin(), p.poem.end());
    padded.push_back(kEndToken);
    for (std::size_t i = static_cast<std::size_t>(k); i < padded.size(); ++i) {
      const std::vector<Token> ctx(padded.begin() + static_cast<long>(i) - k,
                                   padded.begin() + static_cast<long>(i));
      EXPECT_GT(r.final_model.count(ctx, padded[i]), 0.0);
    }
  }
}

TEST_F(SelfTraining, ReproducibleReports) {
  config.cycles = 2;
  const auto a = run_self_training(model, config);
  const auto b = run_self_training(model, config);
  ASSERT_EQ(a.reports.size(), 2u);
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    EXPECT_EQ(a.reports[i].to_json(), b.reports[i].to_json());
    EXPECT_TRUE(std::isfinite(a.reports[i].mean_total));
    EXPECT_GE(a.reports[i].mean_format_penalty, 0.0);
  }
  EXPECT_EQ(a.final_model, b.final_model);
}

TEST_F(SelfTraining, TopKFilter) {
  config.top_k = 1;
  const auto r = run_self_training(model, config);
  EXPECT_EQ(r.reports.at(0).n_generated, 2u);
  EXPECT_EQ(r.reports.at(0).n_trained, 1u);
}

TEST_F(SelfTraining, FailuresAreSkippedUntilAllFail) {
  config.titles.push_back({{"name", "missing title slot"}});
  const auto r = run_self_training(model, config);
  EXPECT_EQ(r.reports.at(0).n_failed, 1u);
  EXPECT_EQ(r.reports.at(0).n_generated, 2u);
  config.titles = {{{"name", "x"}}};
  EXPECT_THROW(run_self_training(model, config), SelfTrainError);
}

TEST_F(SelfTraining, PoemJsonShape) {
  const auto r = run_self_training(model, config);
  const auto j = r.poems.at(0).to_json();
  for (const char* key : {"title", "poem", "breakdown", "cycle"}) EXPECT_TRUE(j.contains(key));
}

TEST(PromptOverlap, Fractions) {
  EXPECT_EQ(prompt_overlap(tokenize("abc"), tokenize("ax")), 0.5);
  EXPECT_EQ(prompt_overlap(tokenize("abc"), tokenize("aab")), 1.0);
  EXPECT_EQ(prompt_overlap(tokenize("abc"), {}), 0.0);
  EXPECT_EQ(prompt_overlap({}, tokenize("a")), 0.0);
}

}  // namespace
}  // namespace inverse_decode
