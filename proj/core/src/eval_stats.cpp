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

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>

#include "inverse_decode/errors.hpp"

namespace inverse_decode {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::pair<double, double> aspect_scale(std::string_view aspect) {
  if (aspect == "overall") return {1.0, 10.0};
  return {1.0, 5.0};
}

void validate_records(const std::vector<EvalRecord>& records) {
  std::set<std::tuple<std::string, std::string, std::string, std::string>> keys;
  for (const auto& r : records) {
    if (r.evaluator_id.empty() || r.method.empty() || r.aspect.empty()) {
      throw ConfigError("evaluation record has an empty evaluator, method, or aspect");
    }
    const auto [lo, hi] = aspect_scale(r.aspect);
    if (!(r.score >= lo && r.score <= hi)) {
      throw ConfigError("score " + std::to_string(r.score) + " for aspect '" + r.aspect +
                        "' is outside its scale");
    }
    if (!keys.emplace(r.evaluator_id, r.method, r.prompt_id, r.aspect).second) {
      throw ConfigError("duplicate rating for evaluator '" + r.evaluator_id + "', method '" +
                        r.method + "', prompt '" + r.prompt_id + "', aspect '" + r.aspect + "'");
    }
  }
}

std::vector<EvalRecord> read_eval_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open evaluation records " + path.string());
  std::vector<EvalRecord> records;
  std::string line;
  std::size_t line_no = 0;
  const bool csv = path.extension() == ".csv";
  std::map<std::string, std::size_t> columns;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (csv) {
      auto fields = split_csv_line(line);
      if (columns.empty()) {
        for (std::size_t i = 0; i < fields.size(); ++i) columns[fields[i]] = i;
        for (const char* name : {"evaluator_id", "method", "prompt_id", "aspect", "score"}) {
          if (!columns.contains(name)) throw ConfigError(where + ": missing column " + name);
        }
        continue;
      }
      auto at = [&](const char* name) -> const std::string& {
        const std::size_t i = columns.at(name);
        if (i >= fields.size()) throw ConfigError(where + ": too few columns");
        return fields[i];
      };
      EvalRecord r{at("evaluator_id"), at("method"), at("prompt_id"), at("aspect"), 0.0};
      try {
        std::size_t used = 0;
        r.score = std::stod(at("score"), &used);
        if (used != at("score").size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw ConfigError(where + ": score is not a number");
      }
      records.push_back(std::move(r));
    } else {
      try {
        auto j = nlohmann::json::parse(line);
        records.push_back({j.at("evaluator_id").get<std::string>(), j.at("method").get<std::string>(),
                           j.at("prompt_id").get<std::string>(), j.at("aspect").get<std::string>(),
                           j.at("score").get<double>()});
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + ": " + e.what());
      }
    }
  }
  validate_records(records);
  return records;
}

const MethodSummary* EvalSummary::find(std::string_view method) const {
  for (const auto& m : methods) {
    if (m.method == method) return &m;
  }
  return nullptr;
}

EvalSummary summarize(const std::vector<EvalRecord>& records, std::string_view aspect) {
  EvalSummary out;
  out.aspect = std::string(aspect);

  // evaluator -> method -> scores
  std::map<std::string, std::map<std::string, std::vector<double>>> by_evaluator;
  std::set<std::string> methods;
  for (const auto& r : records) {
    if (r.aspect != aspect) continue;
    by_evaluator[r.evaluator_id][r.method].push_back(r.score);
    methods.insert(r.method);
  }

  std::map<std::string, std::vector<double>> evaluator_means;
  for (const auto& [evaluator, per_method] : by_evaluator) {
    if (per_method.size() != methods.size()) {
      out.excluded_evaluators.push_back(evaluator);
      out.warnings.push_back("evaluator '" + evaluator + "' did not rate every method for '" +
                             out.aspect + "'; excluded");
      continue;
    }
    for (const auto& [method, scores] : per_method) {
      double sum = 0.0;
      for (double s : scores) sum += s;
      evaluator_means[method].push_back(sum / static_cast<double>(scores.size()));
    }
  }

  for (const auto& method : methods) {
    const auto& means = evaluator_means[method];
    MethodSummary m;
    m.method = method;
    m.n_evaluators = static_cast<int>(means.size());
    if (!means.empty()) {
      double sum = 0.0;
      for (double x : means) sum += x;
      m.mean = sum / static_cast<double>(means.size());
      m.std = sample_std(means, m.mean);
    }
    if (means.size() < 2) {
      out.warnings.push_back("method '" + method + "' has " + std::to_string(means.size()) +
                             " evaluator(s); deviation reported as 0");
    }
    out.methods.push_back(std::move(m));
  }
  return out;
}

WelchResult welch_one_sided(double mean_a, double std_a, int n_a, double mean_b, double std_b,
                            int n_b) {
  if (n_a < 2 || n_b < 2) throw ConfigError("Welch test needs at least two evaluators per method");
  if (!(std_a >= 0.0) || !(std_b >= 0.0)) throw ConfigError("standard deviations must be >= 0");
  const double va = std_a * std_a / n_a;
  const double vb = std_b * std_b / n_b;
  const double se2 = va + vb;
  WelchResult r;
  if (se2 == 0.0) {
    r.dof = static_cast<double>(n_a + n_b - 2);
    if (mean_a == mean_b) {
      r.p = 0.5;
    } else {
      r.t = mean_b > mean_a ? INFINITY : -INFINITY;
      r.p = mean_b > mean_a ? 0.0 : 1.0;
    }
    return r;
  }
  r.t = (mean_b - mean_a) / std::sqrt(se2);
  r.dof = se2 * se2 / (va * va / (n_a - 1) + vb * vb / (n_b - 1));
  const boost::math::students_t dist(r.dof);
  r.p = boost::math::cdf(boost::math::complement(dist, r.t));
  return r;
}

double p_value_one_sided(double mean_a, double std_a, int n_a, double mean_b, double std_b,
                         int n_b) {
  return welch_one_sided(mean_a, std_a, n_a, mean_b, std_b, n_b).p;
}

nlohmann::json eval_report(const EvalSummary& summary) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : summary.methods) {
    methods.push_back({{"method", m.method},
                       {"mean", m.mean},
                       {"std", m.std},
                       {"n_evaluators", m.n_evaluators}});
  }
  nlohmann::json comparisons = nlohmann::json::array();
  for (const auto& a : summary.methods) {
    for (const auto& b : summary.methods) {
      if (a.method == b.method || a.n_evaluators < 2 || b.n_evaluators < 2) continue;
      const WelchResult w = welch_one_sided(a.mean, a.std, a.n_evaluators, b.mean, b.std,
                                            b.n_evaluators);
      comparisons.push_back({{"a", a.method},
                             {"b", b.method},
                             {"hypothesis", a.method + " >= " + b.method},
                             {"t", std::isfinite(w.t) ? nlohmann::json(w.t) : nlohmann::json()},
                             {"dof", w.dof},
                             {"p_value", w.p}});
    }
  }
  return {{"aspect", summary.aspect},
          {"methods", methods},
          {"comparisons", comparisons},
          {"excluded_evaluators", summary.excluded_evaluators},
          {"warnings", summary.warnings}};
}

}  // namespace inverse_decode
