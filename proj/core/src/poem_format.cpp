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

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>

#include "inverse_decode/errors.hpp"

namespace inverse_decode {
namespace {

nlohmann::json load_json_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + " " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string(what) + " " + path.string() + " is not valid JSON: " + e.what());
  }
}

bool valid_weight(double w) { return w >= 0.0 && std::isfinite(w); }

}  // namespace

void PoemFormatSpec::validate() const {
  if (n_lines < 1) throw ConfigError("n_lines must be >= 1");
  if (chars_per_line < 1) throw ConfigError("chars_per_line must be >= 1");
  for (int pos : rhyme_positions) {
    if (pos < 0 || pos >= n_lines) {
      throw ConfigError("rhyme position " + std::to_string(pos) + " outside [0, n_lines)");
    }
  }
  for (const auto& line : tone_pattern) {
    for (char c : line) {
      if (c != 'L' && c != 'O' && c != '*') {
        throw ConfigError("tone pattern characters must be L, O or *");
      }
    }
  }
  if (!valid_weight(weights.length) || !valid_weight(weights.repetition) ||
      !valid_weight(weights.rhyme) || !valid_weight(weights.tone)) {
    throw ConfigError("format weights must be finite and non-negative");
  }
}

PoemFormatSpec PoemFormatSpec::preset(std::string_view name) {
  PoemFormatSpec spec;
  if (name == "5-jueju") {
    spec.n_lines = 4;
    spec.chars_per_line = 5;
  } else if (name == "7-jueju") {
    spec.n_lines = 4;
    spec.chars_per_line = 7;
  } else if (name == "5-lvshi") {
    spec.n_lines = 8;
    spec.chars_per_line = 5;
  } else if (name == "7-lvshi") {
    spec.n_lines = 8;
    spec.chars_per_line = 7;
  } else {
    throw ConfigError("unknown poem form '" + std::string(name) + "'");
  }
  for (int i = 1; i < spec.n_lines; i += 2) spec.rhyme_positions.push_back(i);
  return spec;
}

nlohmann::json PoemFormatSpec::to_json() const {
  return {{"n_lines", n_lines},
          {"chars_per_line", chars_per_line},
          {"rhyme_positions", rhyme_positions},
          {"tone_pattern", tone_pattern},
          {"weights",
           {{"length", weights.length},
            {"repetition", weights.repetition},
            {"rhyme", weights.rhyme},
            {"tone", weights.tone}}}};
}

PoemFormatSpec PoemFormatSpec::from_json(const nlohmann::json& j) {
  try {
    PoemFormatSpec spec;
    if (auto it = j.find("preset"); it != j.end()) spec = preset(it->get<std::string>());
    spec.n_lines = j.value("n_lines", spec.n_lines);
    spec.chars_per_line = j.value("chars_per_line", spec.chars_per_line);
    spec.rhyme_positions = j.value("rhyme_positions", spec.rhyme_positions);
    spec.tone_pattern = j.value("tone_pattern", spec.tone_pattern);
    if (auto it = j.find("weights"); it != j.end()) {
      spec.weights.length = it->value("length", spec.weights.length);
      spec.weights.repetition = it->value("repetition", spec.weights.repetition);
      spec.weights.rhyme = it->value("rhyme", spec.weights.rhyme);
      spec.weights.tone = it->value("tone", spec.weights.tone);
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed poem format spec: ") + e.what());
  }
}

PoemFormatSpec PoemFormatSpec::load(const std::filesystem::path& path) {
  return from_json(load_json_file(path, "poem format spec"));
}

void RhymeToneTables::set_rhyme(const Token& token, std::string rhyme_class) {
  rhyme_[token] = std::move(rhyme_class);
}

void RhymeToneTables::set_tone(const Token& token, Tone tone) { tone_[token] = tone; }

std::optional<std::string> RhymeToneTables::rhyme_class(const Token& token) const {
  auto it = rhyme_.find(token);
  if (it == rhyme_.end()) return std::nullopt;
  return it->second;
}

Tone RhymeToneTables::tone(const Token& token) const {
  auto it = tone_.find(token);
  return it == tone_.end() ? Tone::kUnknown : it->second;
}

nlohmann::json RhymeToneTables::to_json() const {
  nlohmann::json rhyme = nlohmann::json::object();
  for (const auto& [t, c] : rhyme_) rhyme[t] = c;
  nlohmann::json tone = nlohmann::json::object();
  for (const auto& [t, v] : tone_) {
    if (v != Tone::kUnknown) tone[t] = v == Tone::kLevel ? "level" : "oblique";
  }
  return {{"rhyme", rhyme}, {"tone", tone}};
}

RhymeToneTables RhymeToneTables::from_json(const nlohmann::json& j) {
  try {
    RhymeToneTables tables;
    const nlohmann::json rhyme = j.value("rhyme", nlohmann::json::object());
    const nlohmann::json tone = j.value("tone", nlohmann::json::object());
    for (const auto& [t, c] : rhyme.items()) {
      tables.set_rhyme(t, c.get<std::string>());
    }
    for (const auto& [t, v] : tone.items()) {
      const auto s = v.get<std::string>();
      if (s == "level") {
        tables.set_tone(t, Tone::kLevel);
      } else if (s == "oblique") {
        tables.set_tone(t, Tone::kOblique);
      } else {
        throw ConfigError("tone for '" + t + "' must be \"level\" or \"oblique\"");
      }
    }
    return tables;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed rhyme/tone tables: ") + e.what());
  }
}

RhymeToneTables RhymeToneTables::load(const std::filesystem::path& path) {
  return from_json(load_json_file(path, "rhyme/tone tables"));
}

std::string to_string(FormatComponent component) {
  switch (component) {
    case FormatComponent::kLength:
      return "length";
    case FormatComponent::kRepetition:
      return "repetition";
    case FormatComponent::kRhyme:
      return "rhyme";
    case FormatComponent::kTone:
      return "tone";
  }
  return "unknown";
}

nlohmann::json FormatReport::to_json() const {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& v : violations) {
    items.push_back({{"component", to_string(v.component)},
                     {"line", v.line},
                     {"position", v.position},
                     {"amount", v.amount},
                     {"weight", v.weight},
                     {"detail", v.detail}});
  }
  return {{"penalty", penalty}, {"violations", items}};
}

FormatReport format_penalty(const std::vector<SubSentence>& poem, const PoemFormatSpec& spec,
                            const RhymeToneTables& tables) {
  if (poem.empty()) throw ScoreError("cannot check the format of an empty poem");
  spec.validate();
  const auto& w = spec.weights;
  std::vector<TokenSeq> lines;
  lines.reserve(poem.size());
  for (const auto& s : poem) lines.push_back(s.body());

  FormatReport report;
  auto add = [&](FormatComponent c, double weight, int line, int position, double amount,
                 std::string detail) {
    if (weight <= 0.0 || amount <= 0.0) return;
    report.violations.push_back({c, line, position, amount, weight, std::move(detail)});
  };

  const int n_lines = static_cast<int>(lines.size());
  for (int i = 0; i < n_lines; ++i) {
    const int len = static_cast<int>(lines[i].size());
    if (len != spec.chars_per_line) {
      add(FormatComponent::kLength, w.length, i, -1, std::abs(len - spec.chars_per_line),
          "line has " + std::to_string(len) + " tokens, expected " +
              std::to_string(spec.chars_per_line));
    }
  }
  if (n_lines != spec.n_lines) {
    add(FormatComponent::kLength, w.length, -1, -1,
        static_cast<double>(std::abs(n_lines - spec.n_lines) * spec.chars_per_line),
        "poem has " + std::to_string(n_lines) + " lines, expected " +
            std::to_string(spec.n_lines));
  }

  std::map<std::pair<Token, Token>, int> seen_bigrams;
  for (int i = 0; i < n_lines; ++i) {
    for (std::size_t k = 0; k + 1 < lines[i].size(); ++k) {
      const auto bigram = std::make_pair(lines[i][k], lines[i][k + 1]);
      if (seen_bigrams[bigram]++ > 0) {
        add(FormatComponent::kRepetition, w.repetition, i, static_cast<int>(k), 1.0,
            "repeated \"" + bigram.first + bigram.second + "\"");
      }
    }
  }

  // Majority rhyme class over the rhyme-position lines that exist; ties go to
  // the smallest class id.
  std::map<std::string, int> class_counts;
  std::vector<std::pair<int, std::optional<std::string>>> carriers;
  for (int pos : spec.rhyme_positions) {
    if (pos >= n_lines) continue;
    std::optional<std::string> cls;
    if (!lines[pos].empty()) cls = tables.rhyme_class(lines[pos].back());
    if (cls) ++class_counts[*cls];
    carriers.emplace_back(pos, cls);
  }
  std::optional<std::string> majority;
  int best = 0;
  for (const auto& [cls, count] : class_counts) {
    if (count > best) {
      best = count;
      majority = cls;
    }
  }
  for (const auto& [pos, cls] : carriers) {
    if (!cls) {
      add(FormatComponent::kRhyme, w.rhyme, pos, static_cast<int>(lines[pos].size()) - 1, 1.0,
          "line end has no known rhyme class");
    } else if (cls != majority) {
      add(FormatComponent::kRhyme, w.rhyme, pos, static_cast<int>(lines[pos].size()) - 1, 1.0,
          "rhyme class " + *cls + " differs from " + *majority);
    }
  }

  for (int i = 0; i < n_lines && i < static_cast<int>(spec.tone_pattern.size()); ++i) {
    const auto& pattern = spec.tone_pattern[i];
    for (std::size_t k = 0; k < lines[i].size() && k < pattern.size(); ++k) {
      if (pattern[k] == '*') continue;
      const Tone tone = tables.tone(lines[i][k]);
      if (tone == Tone::kUnknown) continue;
      const Tone want = pattern[k] == 'L' ? Tone::kLevel : Tone::kOblique;
      if (tone != want) {
        add(FormatComponent::kTone, w.tone, i, static_cast<int>(k), 1.0,
            "\"" + lines[i][k] + "\" has the wrong tone");
      }
    }
  }

  for (const auto& v : report.violations) report.penalty += v.cost();
  return report;
}

}  // namespace inverse_decode
