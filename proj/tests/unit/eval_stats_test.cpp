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

#include "inverse_decode/eval_stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "inverse_decode/errors.hpp"
#include "test_support.hpp"

namespace inverse_decode {
namespace {

using testing::records_from_means;
using testing::values_with_moments;

TEST(Summarize, TwoEvaluators) {
  const std::vector<EvalRecord> r = {{"e1", "m", "p1", "overall", 3},
                                     {"e1", "m", "p2", "overall", 5},
                                     {"e2", "m", "p1", "overall", 6}};
  const EvalSummary s = summarize(r, "overall");
  const MethodSummary* m = s.find("m");
  ASSERT_NE(m, nullptr);
  EXPECT_DOUBLE_EQ(m->mean, 5.0);
  EXPECT_DOUBLE_EQ(m->std, std::sqrt(2.0));
  EXPECT_EQ(m->n_evaluators, 2);
}

TEST(Summarize, SingleEvaluatorWarns) {
  const EvalSummary s = summarize({{"e1", "m", "p1", "overall", 7}}, "overall");
  EXPECT_EQ(s.find("m")->std, 0.0);
  EXPECT_EQ(s.find("m")->n_evaluators, 1);
  EXPECT_FALSE(s.warnings.empty());
}

TEST(Summarize, EvaluatorMissingAMethodIsExcluded) {
  const std::vector<EvalRecord> r = {{"e1", "a", "p", "overall", 3},
                                     {"e1", "b", "p", "overall", 4},
                                     {"e2", "a", "p", "overall", 5},
                                     {"e3", "a", "p", "overall", 9},
                                     {"e3", "b", "p", "overall", 8}};
  const EvalSummary s = summarize(r, "overall");
  EXPECT_EQ(s.excluded_evaluators, std::vector<std::string>{"e2"});
  EXPECT_EQ(s.find("a")->mean, 6.0);
  EXPECT_FALSE(s.warnings.empty());
}

TEST(Summarize, OtherAspectsIgnored) {
  const std::vector<EvalRecord> r = {{"e1", "a", "p", "overall", 3},
                                     {"e1", "a", "p", "fluency", 5}};
  EXPECT_EQ(summarize(r, "fluency").find("a")->mean, 5.0);
}

TEST(Summarize, ReproducesPublishedMoments) {
  const EvalSummary s = summarize(testing::qa_fixture_records(), "overall");
  const MethodSummary* ip = s.find("inverse_prompting");
  ASSERT_NE(ip, nullptr);
  EXPECT_NEAR(ip->mean, 6.51, 1e-12);
  EXPECT_NEAR(ip->std, 0.38, 1e-12);
  EXPECT_EQ(ip->n_evaluators, 30);
}

TEST(ValuesWithMoments, ExactMoments) {
  const auto v = values_with_moments(10, 3.57, 0.54);
  double mean = 0.0;
  for (double x : v) mean += x / 10.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  EXPECT_NEAR(mean, 3.57, 1e-12);
  EXPECT_NEAR(std::sqrt(ss / 9.0), 0.54, 1e-12);
}

TEST(Welch, PublishedComparisons) {
  EXPECT_LT(p_value_one_sided(5.97, 0.42, 30, 6.51, 0.38, 30), 1e-5);
  EXPECT_NEAR(p_value_one_sided(6.51, 0.38, 30, 6.85, 0.39, 30), 0.0006, 0.0006 * 0.25);
  const double jiuge_st = p_value_one_sided(3.57, 0.54, 10, 4.40, 0.47, 10);
  EXPECT_GT(jiuge_st, 0.0009 / 1.5);
  EXPECT_LT(jiuge_st, 0.0009 * 1.5);
  const double jiuge_ip = p_value_one_sided(3.57, 0.54, 10, 4.00, 0.52, 10);
  EXPECT_GE(jiuge_ip, 0.03);
  EXPECT_LE(jiuge_ip, 0.06);
}

TEST(Welch, KnownValue) {
  // scipy.stats.ttest_ind_from_stats(5.97, .42, 30, 6.51, .38, 30, equal_var=False,
  // alternative="less")
  const WelchResult r = welch_one_sided(5.97, 0.42, 30, 6.51, 0.38, 30);
  EXPECT_NEAR(r.p, 1.2761994911072938e-06, 1e-12);
  EXPECT_NEAR(r.t, 5.2220040868704585, 1e-9);
}

TEST(Welch, Antisymmetry) {
  std::mt19937_64 rng(81);
  std::uniform_real_distribution<double> mean(1, 10), sd(0.05, 2);
  for (int i = 0; i < 1000; ++i) {
    const double ma = mean(rng), sa = sd(rng), mb = mean(rng), sb = sd(rng);
    const int na = 2 + static_cast<int>(rng() % 40), nb = 2 + static_cast<int>(rng() % 40);
    ASSERT_NEAR(p_value_one_sided(ma, sa, na, mb, sb, nb) +
                    p_value_one_sided(mb, sb, nb, ma, sa, na),
                1.0, 1e-9);
  }
}

TEST(Welch, ScaleEquivariance) {
  std::mt19937_64 rng(82);
  std::uniform_real_distribution<double> mean(1, 10), sd(0.05, 2), c(0.1, 20);
  for (int i = 0; i < 500; ++i) {
    const double ma = mean(rng), sa = sd(rng), mb = mean(rng), sb = sd(rng), k = c(rng);
    const double p = p_value_one_sided(ma, sa, 12, mb, sb, 9);
    ASSERT_NEAR(p_value_one_sided(k * ma, k * sa, 12, k * mb, k * sb, 9), p, 1e-9);
  }
}

TEST(Welch, RecordLevelScaleEquivariance) {
  auto records = testing::poem_fixture_records();
  const auto s1 = summarize(records, "overall");
  for (auto& r : records) r.score *= 1.7;
  const auto s2 = summarize(records, "overall");
  const auto* a1 = s1.find("jiuge");
  const auto* b1 = s1.find("inverse_prompting");
  const auto* a2 = s2.find("jiuge");
  const auto* b2 = s2.find("inverse_prompting");
  EXPECT_NEAR(p_value_one_sided(a1->mean, a1->std, a1->n_evaluators, b1->mean, b1->std,
                                b1->n_evaluators),
              p_value_one_sided(a2->mean, a2->std, a2->n_evaluators, b2->mean, b2->std,
                                b2->n_evaluators),
              1e-9);
}

TEST(Welch, MonteCarloAgreement) {
  // Equal sizes and deviations make the Welch statistic exactly t-distributed
  // with 2n - 2 degrees of freedom under the null.
  std::mt19937_64 rng(83);
  const int n = 8;
  const double sigma = 1.3;
  for (double gap : {0.4, 1.0}) {
    const double p = p_value_one_sided(0.0, sigma, n, gap, sigma, n);
    const double t_obs = welch_one_sided(0.0, sigma, n, gap, sigma, n).t;
    std::normal_distribution<double> draw(5.0, sigma);
    const int trials = 100000;
    int hits = 0;
    for (int i = 0; i < trials; ++i) {
      double sa = 0, sb = 0, qa = 0, qb = 0;
      for (int k = 0; k < n; ++k) {
        const double a = draw(rng), b = draw(rng);
        sa += a;
        qa += a * a;
        sb += b;
        qb += b * b;
      }
      const double ma = sa / n, mb = sb / n;
      const double va = (qa - n * ma * ma) / (n - 1), vb = (qb - n * mb * mb) / (n - 1);
      hits += (mb - ma) / std::sqrt(va / n + vb / n) >= t_obs;
    }
    const double mc = static_cast<double>(hits) / trials;
    EXPECT_NEAR(mc, p, 3.0 * std::sqrt(p * (1 - p) / trials)) << gap;
  }
}

TEST(Welch, ZeroVariance) {
  EXPECT_EQ(p_value_one_sided(3, 0, 5, 3, 0, 5), 0.5);
  EXPECT_EQ(p_value_one_sided(3, 0, 5, 4, 0, 5), 0.0);
  EXPECT_EQ(p_value_one_sided(4, 0, 5, 3, 0, 5), 1.0);
}

TEST(Welch, SmallSamplesRejected) {
  EXPECT_THROW(p_value_one_sided(3, 1, 1, 4, 1, 5), ConfigError);
  EXPECT_THROW(p_value_one_sided(3, -1, 5, 4, 1, 5), ConfigError);
}

TEST(Validation, ScaleAndDuplicates) {
  EXPECT_EQ(aspect_scale("overall"), std::make_pair(1.0, 10.0));
  EXPECT_EQ(aspect_scale("fluency"), std::make_pair(1.0, 5.0));
  EXPECT_THROW(validate_records({{"e", "m", "p", "fluency", 6}}), ConfigError);
  EXPECT_THROW(validate_records({{"e", "m", "p", "overall", 0.5}}), ConfigError);
  EXPECT_THROW(validate_records({{"e", "m", "p", "overall", 5}, {"e", "m", "p", "overall", 6}}),
               ConfigError);
  EXPECT_NO_THROW(validate_records({{"e", "m", "p", "overall", 10}}));
}

TEST(Reading, CsvAndJsonl) {
  testing::TempDir dir;
  testing::write_text(dir / "r.csv",
                      "evaluator_id,method,prompt_id,aspect,score\ne1,a,p1,overall,4\ne2,a,p1,"
                      "overall,6\n");
  testing::write_text(dir / "r.jsonl",
                      "{\"evaluator_id\":\"e1\",\"method\":\"a\",\"prompt_id\":\"p1\",\"aspect\":"
                      "\"overall\",\"score\":4}\n\n{\"evaluator_id\":\"e2\",\"method\":\"a\","
                      "\"prompt_id\":\"p1\",\"aspect\":\"overall\",\"score\":6}\n");
  const auto csv = read_eval_records(dir / "r.csv");
  const auto jsonl = read_eval_records(dir / "r.jsonl");
  ASSERT_EQ(csv.size(), 2u);
  ASSERT_EQ(jsonl.size(), 2u);
  EXPECT_EQ(summarize(csv, "overall").find("a")->mean, 5.0);
  EXPECT_EQ(summarize(jsonl, "overall").find("a")->mean, 5.0);
}

TEST(Reading, Errors) {
  testing::TempDir dir;
  EXPECT_THROW(read_eval_records(dir / "missing.csv"), IoError);
  testing::write_text(dir / "bad.csv", "who,what\n1,2\n");
  EXPECT_THROW(read_eval_records(dir / "bad.csv"), ConfigError);
  testing::write_text(dir / "bad.jsonl", "{\"score\": 1}\n");
  EXPECT_THROW(read_eval_records(dir / "bad.jsonl"), ConfigError);
}

TEST(Report, AllOrderedPairs) {
  const auto report = eval_report(summarize(testing::qa_fixture_records(), "overall"));
  EXPECT_EQ(report["methods"].size(), 4u);
  EXPECT_EQ(report["comparisons"].size(), 12u);
  for (const auto& c : report["comparisons"]) {
    if (c["a"] == "prompting_baseline" && c["b"] == "inverse_prompting") {
      EXPECT_LT(c["p_value"].get<double>(), 1e-5);
    }
  }
}

}  // namespace
}  // namespace inverse_decode
