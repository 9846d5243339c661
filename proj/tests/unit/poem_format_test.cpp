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

#include "inverse_decode/poem_format.hpp"

#include <gtest/gtest.h>

#include <random>

#include "inverse_decode/errors.hpp"
#include "inverse_decode/prompt_template.hpp"
#include "test_support.hpp"

namespace inverse_decode {
namespace {

std::vector<SubSentence> lines_of(const std::string& text) {
  return segment_subsentences(tokenize(text), default_delimiters());
}

RhymeToneTables small_tables() {
  RhymeToneTables t;
  for (const char* c : {"山", "间", "还", "关"}) {
    t.set_rhyme(c, "an");
    t.set_tone(c, Tone::kLevel);
  }
  t.set_rhyme("流", "ou");
  t.set_tone("月", Tone::kOblique);
  t.set_tone("风", Tone::kLevel);
  return t;
}

PoemFormatSpec jueju() {
  PoemFormatSpec s = PoemFormatSpec::preset("5-jueju");
  s.tone_pattern.clear();
  return s;
}

TEST(FormatPenalty, CompliantPoemIsZero) {
  const auto r = format_penalty(lines_of("一二三四五，六七八九山。甲乙丙丁戊，己庚辛壬间。"),
                                jueju(), small_tables());
  EXPECT_EQ(r.penalty, 0.0);
  EXPECT_TRUE(r.violations.empty());
}

TEST(FormatPenalty, OneLongLine) {
  const auto r = format_penalty(lines_of("一二三四五六，六七八九山。甲乙丙丁戊，己庚辛壬间。"),
                                jueju(), small_tables());
  EXPECT_EQ(r.penalty, 1.0);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].component, FormatComponent::kLength);
  EXPECT_EQ(r.violations[0].line, 0);
}

TEST(FormatPenalty, TooManyLines) {
  const std::string quatrain = "一二三四五，六七八九山。甲乙丙丁戊，己庚辛壬间。";
  const std::string other = "子丑寅卯辰，巳午未申还。春夏秋冬雨，东南西北关。";
  const auto r = format_penalty(lines_of(quatrain + other), jueju(), small_tables());
  EXPECT_GE(r.penalty, 20.0);
  EXPECT_EQ(r.penalty, 20.0);
}

TEST(FormatPenalty, RepeatedBigramAcrossLines) {
  const auto r = format_penalty(lines_of("一二三四五，六七八九山。一二丙丁戊，己庚辛壬间。"),
                                jueju(), small_tables());
  EXPECT_EQ(r.penalty, 1.0);
  EXPECT_EQ(r.violations.at(0).component, FormatComponent::kRepetition);
}

TEST(FormatPenalty, BigramsDoNotSpanLineBreaks) {
  // "五六" would straddle the break between lines 0 and 1.
  const auto r = format_penalty(lines_of("一二三四五，六七八九山。甲乙丙五六，己庚辛壬间。"),
                                jueju(), small_tables());
  EXPECT_EQ(r.penalty, 0.0);
}

TEST(FormatPenalty, RhymeMismatchAndUnknown) {
  auto r = format_penalty(lines_of("一二三四五，六七八九山。甲乙丙丁戊，己庚辛壬流。"), jueju(),
                          small_tables());
  // Tie between "an" and "ou": the smaller class id is the target.
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].component, FormatComponent::kRhyme);
  EXPECT_EQ(r.violations[0].line, 3);
  r = format_penalty(lines_of("一二三四五，六七八九山。甲乙丙丁戊，己庚辛壬子。"), jueju(),
                     small_tables());
  EXPECT_EQ(r.penalty, 1.0);
}

TEST(FormatPenalty, MajorityDefinesTarget) {
  PoemFormatSpec s = PoemFormatSpec::preset("5-lvshi");
  const std::string poem =
      "一二三四五，六七八九流。甲乙丙丁戊，己庚辛壬山。子丑寅卯辰，巳午未申间。春夏秋冬雨，东南"
      "西北关。";
  const auto r = format_penalty(lines_of(poem), s, small_tables());
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].line, 1);
}

TEST(FormatPenalty, ToneContradictionsUnknownFree) {
  PoemFormatSpec s = jueju();
  s.tone_pattern = {"LO***"};
  auto r = format_penalty(lines_of("风月三四五，六七八九山。甲乙丙丁戊，己庚辛壬间。"), s,
                          small_tables());
  EXPECT_EQ(r.penalty, 0.0);
  r = format_penalty(lines_of("月风三四五，六七八九山。甲乙丙丁戊，己庚辛壬间。"), s,
                     small_tables());
  EXPECT_EQ(r.penalty, 2.0);
  r = format_penalty(lines_of("一二三四五，六七八九山。甲乙丙丁戊，己庚辛壬间。"), s,
                     small_tables());
  EXPECT_EQ(r.penalty, 0.0);
}

TEST(FormatPenalty, ZeroWeightNotItemized) {
  PoemFormatSpec s = jueju();
  s.weights.length = 0.0;
  const auto r = format_penalty(lines_of("一二三，六七八九山。"), s, small_tables());
  for (const auto& v : r.violations) EXPECT_NE(v.component, FormatComponent::kLength);
}

TEST(FormatPenalty, EmptyPoemThrows) {
  EXPECT_THROW(format_penalty({}, jueju(), small_tables()), ScoreError);
}

TEST(FormatPenalty, AdditiveAndZeroIffEmpty) {
  std::mt19937_64 rng(61);
  const std::vector<Token> alphabet = {"山", "间", "流", "月", "风", "一", "，", "。"};
  std::uniform_real_distribution<double> w(0.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    PoemFormatSpec s = jueju();
    s.weights = {w(rng), w(rng), w(rng), w(rng)};
    s.tone_pattern = {"LO*LO", "OL*OL"};
    const TokenSeq text = testing::random_seq(rng, alphabet, 1, 30);
    const auto segs = segment_subsentences(text, default_delimiters());
    if (segs.empty()) continue;
    const auto r = format_penalty(segs, s, small_tables());
    double sum = 0.0;
    for (const auto& v : r.violations) sum += v.weight * v.amount;
    ASSERT_GE(r.penalty, 0.0);
    ASSERT_NEAR(r.penalty, sum, 1e-12);
    ASSERT_EQ(r.penalty == 0.0, r.violations.empty());
  }
}

TEST(FormatPenalty, ExtraRepeatedBigramNeverDecreases) {
  std::mt19937_64 rng(62);
  const std::vector<Token> alphabet = {"山", "间", "流", "月", "风", "一", "二"};
  const PoemFormatSpec spec = jueju();
  for (int i = 0; i < 300; ++i) {
    // A poem that already has its full line count, so extra text cannot
    // shrink the line-count term.
    TokenSeq text;
    TokenSeq first;
    for (int l = 0; l < spec.n_lines; ++l) {
      const TokenSeq line = testing::random_seq(rng, alphabet, 2, 7);
      if (l == 0) first = line;
      text.append(line);
      text.push_back(l % 2 == 0 ? "，" : "。");
    }
    const double before =
        format_penalty(segment_subsentences(text, default_delimiters()), spec, small_tables())
            .penalty;
    text.append(first.slice(0, 2));
    text.push_back("。");
    const double after =
        format_penalty(segment_subsentences(text, default_delimiters()), spec, small_tables())
            .penalty;
    ASSERT_GT(after, before);
  }
}

TEST(ToyPoems, CompliantAndSingleMutants) {
  std::mt19937_64 rng(63);
  const FormatWeights weights{1.5, 0.7, 2.0, 0.3};
  for (const char* preset : {"5-jueju", "7-jueju", "5-lvshi", "7-lvshi"}) {
    const auto poem = testing::compliant_toy_poem(rng, preset, weights);
    EXPECT_EQ(format_penalty(poem.segments(), poem.spec, poem.tables).penalty, 0.0) << preset;
    for (auto c : {FormatComponent::kLength, FormatComponent::kRepetition,
                   FormatComponent::kRhyme, FormatComponent::kTone}) {
      const auto m = testing::mutate_toy_poem(poem, c, rng);
      const auto r = format_penalty(m.segments(), m.spec, m.tables);
      ASSERT_EQ(r.violations.size(), 1u) << preset << " " << to_string(c);
      EXPECT_EQ(r.violations[0].component, c);
    }
  }
}

TEST(PoemFormatSpec, Presets) {
  const auto s = PoemFormatSpec::preset("7-lvshi");
  EXPECT_EQ(s.n_lines, 8);
  EXPECT_EQ(s.chars_per_line, 7);
  EXPECT_EQ(s.rhyme_positions, (std::vector<int>{1, 3, 5, 7}));
  EXPECT_THROW(PoemFormatSpec::preset("sonnet"), ConfigError);
}

TEST(PoemFormatSpec, Validation) {
  PoemFormatSpec s = jueju();
  s.rhyme_positions = {4};
  EXPECT_THROW(s.validate(), ConfigError);
  s = jueju();
  s.weights.tone = -1;
  EXPECT_THROW(s.validate(), ConfigError);
  s = jueju();
  s.tone_pattern = {"LX"};
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(PoemFormatSpec, ShippedFilesMatchPresets) {
  for (const char* p : {"5-jueju", "7-jueju", "5-lvshi", "7-lvshi"}) {
    const auto loaded =
        PoemFormatSpec::load(testing::data_dir() / "formats" / (std::string(p) + ".json"));
    EXPECT_EQ(loaded.to_json(), PoemFormatSpec::preset(p).to_json());
  }
}

TEST(RhymeToneTables, UnknownLookups) {
  const RhymeToneTables t = small_tables();
  EXPECT_EQ(t.tone("?"), Tone::kUnknown);
  EXPECT_FALSE(t.rhyme_class("?").has_value());
}

TEST(RhymeToneTables, JsonRoundTripAndShippedFile) {
  const RhymeToneTables t = small_tables();
  EXPECT_EQ(RhymeToneTables::from_json(t.to_json()).to_json(), t.to_json());
  const auto shipped = RhymeToneTables::load(testing::data_dir() / "tables_toy.json");
  EXPECT_EQ(shipped.rhyme_class("山"), "an");
  EXPECT_EQ(shipped.tone("月"), Tone::kOblique);
  EXPECT_THROW(RhymeToneTables::from_json({{"tone", {{"x", "rising"}}}}), ConfigError);
}

}  // namespace
}  // namespace inverse_decode
