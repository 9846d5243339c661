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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace inverse_decode {

struct EvalRecord {
  std::string evaluator_id;
  std::string method;
  std::string prompt_id;
  std::string aspect;
  double score = 0.0;
};

// Scale bounds for an aspect: "overall" is rated 1-10, everything else 1-5.
std::pair<double, double> aspect_scale(std::string_view aspect);

// Throws ConfigError on a score outside its aspect scale or a repeated
// (evaluator, method, prompt, aspect) key.
void validate_records(const std::vector<EvalRecord>& records);

// Reads .jsonl (one object per line) or .csv with header
// evaluator_id,method,prompt_id,aspect,score.
std::vector<EvalRecord> read_eval_records(const std::filesystem::path& path);

struct MethodSummary {
  std::string method;
  double mean = 0.0;
  double std = 0.0;  // sample std (n - 1) of per-evaluator means
  int n_evaluators = 0;
};

struct EvalSummary {
  std::string aspect;
  std::vector<MethodSummary> methods;  // sorted by method name
  std::vector<std::string> excluded_evaluators;
  std::vector<std::string> warnings;

  const MethodSummary* find(std::string_view method) const;
};

// Per-capita statistics: each evaluator's scores are averaged per method
// first; the method mean and deviation are taken over those averages.
// Evaluators lacking any method for the aspect are excluded.
EvalSummary summarize(const std::vector<EvalRecord>& records, std::string_view aspect);

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 0.0;
};

// Welch two-sample t-test of the hypothesis "A >= B": upper-tail p of
// t = (mean_b - mean_a) / sqrt(std_a^2/n_a + std_b^2/n_b) with
// Welch-Satterthwaite degrees of freedom. With zero variance the result is
// 0.5 for equal means, otherwise 0 or 1.
WelchResult welch_one_sided(double mean_a, double std_a, int n_a, double mean_b, double std_b,
                            int n_b);

double p_value_one_sided(double mean_a, double std_a, int n_a, double mean_b, double std_b,
                         int n_b);

// {"aspect", "methods": [...], "comparisons": [{"a", "b", "hypothesis",
// "t", "dof", "p_value"}], "excluded_evaluators", "warnings"} with one
// comparison per ordered method pair.
nlohmann::json eval_report(const EvalSummary& summary);

}  // namespace inverse_decode
