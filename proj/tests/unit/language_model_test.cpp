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

#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "inverse_decode/errors.hpp"
#include "inverse_decode/ngram_model.hpp"
#include "test_support.hpp"

namespace inverse_decode {
namespace {

using testing::ConstantModel;

TEST(UniformModel, ThreeTokensCostThreeLogV) {
  const UniformModel m({"a", "b", "c"});
  EXPECT_DOUBLE_EQ(m.logprob({}, {"a", "b", "c"}), -3.0 * std::log(4.0));
}

TEST(UniformModel, OutOfVocabularyCostsTheSame) {
  const UniformModel m({"a", "b", "c"});
  EXPECT_DOUBLE_EQ(m.logprob({"z"}, {"q"}), -std::log(4.0));
}

TEST(UniformModel, EmptyContinuationIsZero) {
  const UniformModel m({"a"});
  EXPECT_EQ(m.logprob({"a"}, {}), 0.0);
}

TEST(UniformModel, DistributionSumsToOne) {
  const UniformModel m({"a", "b", "c"});
  double sum = 0.0;
  for (const auto& [t, p] : m.next_distribution({})) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-15);
}

TEST(SampleContinuation, ForcedStopToken) {
  const ConstantModel m("。");
  SamplingOptions o;
  o.stop_tokens = {"。"};
  const Continuation c = m.sample_continuation({"x"}, o);
  EXPECT_EQ(c.tokens, TokenSeq{"。"});
  EXPECT_EQ(c.reason, StopReason::kStopToken);
}

TEST(SampleContinuation, RespectsMaxTokens) {
  const UniformModel m({"a", "b", "c"});
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SamplingOptions o;
    o.max_tokens = 5;
    o.seed = seed;
    const Continuation c = m.sample_continuation({}, o);
    EXPECT_LE(c.tokens.size(), 5u);
    if (c.reason == StopReason::kMaxTokens) {
      EXPECT_EQ(c.tokens.size(), 5u);
    }
  }
}

TEST(SampleContinuation, MaxTokensReachedWithoutEnd) {
  const ConstantModel m("a");
  SamplingOptions o;
  o.max_tokens = 3;
  const Continuation c = m.sample_continuation({}, o);
  EXPECT_EQ(c.tokens, (TokenSeq{"a", "a", "a"}));
  EXPECT_EQ(c.reason, StopReason::kMaxTokens);
}

TEST(SampleContinuation, DeterministicForSeed) {
  std::mt19937_64 rng(3);
  const NGramModel m = testing::random_ngram(rng, 4, 2);
  SamplingOptions o;
  o.seed = 99;
  o.max_tokens = 12;
  o.stop_tokens = {"c"};
  const auto a = m.sample_continuation({"a"}, o);
  const auto b = m.sample_continuation({"a"}, o);
  EXPECT_EQ(a.tokens, b.tokens);
  EXPECT_EQ(a.reason, b.reason);
}

TEST(SampleContinuation, ZeroMaxTokensRejected) {
  const UniformModel m({"a"});
  SamplingOptions o;
  o.max_tokens = 0;
  EXPECT_THROW(m.sample_continuation({}, o), ConfigError);
}

TEST(Sample, IthContinuationUsesDerivedSeed) {
  const UniformModel m({"a", "b", "c", "d"});
  SamplingOptions o;
  o.seed = 5;
  o.max_tokens = 8;
  const auto all = m.sample({}, o, 4);
  ASSERT_EQ(all.size(), 4u);
  for (std::size_t i = 0; i < all.size(); ++i) {
    SamplingOptions oi = o;
    oi.seed = derive_seed(5, {i});
    EXPECT_EQ(m.sample_continuation({}, oi).tokens, all[i].tokens);
  }
}

TEST(Sample, ConcurrentCallsAgree) {
  std::mt19937_64 rng(8);
  const NGramModel m = testing::random_ngram(rng, 5, 3);
  SamplingOptions o;
  o.seed = 1;
  const auto expected = m.sample({"a"}, o, 8);
  std::vector<std::thread> threads;
  std::vector<int> ok(8, 0);
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      const auto got = m.sample({"a"}, o, 8);
      bool same = true;
      for (std::size_t i = 0; i < got.size(); ++i) same &= got[i].tokens == expected[i].tokens;
      ok[static_cast<std::size_t>(t)] = same;
    });
  }
  for (auto& th : threads) th.join();
  for (int v : ok) EXPECT_TRUE(v);
}

TEST(DeriveSeed, DistinctSaltsDiffer) {
  EXPECT_NE(derive_seed(1, {0}), derive_seed(1, {1}));
  EXPECT_NE(derive_seed(1, {0, 1}), derive_seed(1, {1, 0}));
  EXPECT_EQ(derive_seed(7, {3, 4}), derive_seed(7, {3, 4}));
}

TEST(SampleIndex, ZeroWeightNeverDrawn) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) EXPECT_NE(sample_index({1.0, 0.0, 2.0}, 1.0, rng), 1u);
}

TEST(SampleIndex, FrequenciesFollowWeights) {
  std::mt19937_64 rng(2);
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits += sample_index({1.0, 3.0}, 1.0, rng) == 1;
  // Binomial(n, 0.75): 5 standard errors.
  EXPECT_NEAR(hits / static_cast<double>(n), 0.75, 5 * std::sqrt(0.75 * 0.25 / n));
}

TEST(SampleIndex, LowTemperatureSharpens) {
  std::mt19937_64 rng(4);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) hits += sample_index({1.0, 2.0}, 0.05, rng) == 1;
  EXPECT_GT(hits, 990);
}

}  // namespace
}  // namespace inverse_decode
