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

#include <gtest/gtest.h>

#include <random>

namespace inverse_decode {
namespace {

TEST(CharTokenizer, SplitsCodePoints) {
  const TokenSeq t = tokenize("a，b。");
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[1], "，");
  EXPECT_EQ(t[3], "。");
}

TEST(CharTokenizer, EmptyText) { EXPECT_TRUE(tokenize("").empty()); }

TEST(CharTokenizer, FourByteCodePoint) {
  const TokenSeq t = tokenize("x\xF0\x9F\x98\x80y");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[1], "\xF0\x9F\x98\x80");
}

TEST(CharTokenizer, InvalidBytesRoundTrip) {
  const std::string bad = "a\xFF\xC3";
  const TokenSeq t = tokenize(bad);
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.render(), bad);
}

TEST(CharTokenizer, RandomBytesRoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    std::string s(rng() % 20, '\0');
    for (auto& c : s) c = static_cast<char>(rng() & 0xFF);
    EXPECT_EQ(tokenize(s).render(), s);
  }
}

TEST(TokenSeq, SliceAppendConcat) {
  const TokenSeq a{"a", "b", "c"};
  EXPECT_EQ(a.slice(1, 2), (TokenSeq{"b", "c"}));
  EXPECT_EQ(a.slice(0, 0), TokenSeq{});
  EXPECT_EQ(a + TokenSeq{"d"}, (TokenSeq{"a", "b", "c", "d"}));
  EXPECT_EQ(a.render(), "abc");
  EXPECT_LT((TokenSeq{"a"}), (TokenSeq{"b"}));
}

TEST(Tokenizer, DefaultIsChar) { EXPECT_EQ(default_tokenizer()->name(), "char"); }

}  // namespace
}  // namespace inverse_decode
