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

#include "inverse_decode/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "inverse_decode/errors.hpp"
#include "inverse_decode/ngram_model.hpp"

namespace inverse_decode {
namespace {

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::string& section) {
  if (!j.is_object()) throw ConfigError(section + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + section);
  }
}

template <typename T>
std::optional<T> optional_value(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

template <typename T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  try {
    reject_unknown_keys(j,
                        {"model", "template", "template_pack", "scorer", "beam", "format_preset",
                         "format_spec_path", "tables_path", "seed", "output_path", "trace_path",
                         "selftrain"},
                        "config");
    if (auto it = j.find("model"); it != j.end()) {
      reject_unknown_keys(*it, {"backend", "path", "vocab", "endpoint", "tokenizer"}, "model");
      c.model.backend = it->value("backend", c.model.backend);
      c.model.path = it->value("path", c.model.path);
      c.model.vocab = it->value("vocab", c.model.vocab);
      c.model.tokenizer = it->value("tokenizer", c.model.tokenizer);
      if (auto ep = it->find("endpoint"); ep != it->end()) {
        reject_unknown_keys(*ep, {"base_url", "timeout_ms", "max_retries", "auth_token"},
                            "model.endpoint");
        c.model.endpoint.base_url = ep->value("base_url", std::string{});
        c.model.endpoint.timeout_ms = ep->value("timeout_ms", c.model.endpoint.timeout_ms);
        c.model.endpoint.max_retries = ep->value("max_retries", c.model.endpoint.max_retries);
        c.model.endpoint.auth_token = optional_value<std::string>(*ep, "auth_token");
      }
    }
    c.template_name = j.value("template", c.template_name);
    c.template_pack = optional_value<std::string>(j, "template_pack");
    if (auto it = j.find("scorer"); it != j.end()) c.scorer = ScorerConfig::from_json(*it);
    if (auto it = j.find("beam"); it != j.end()) c.beam = BeamParams::from_json(*it);
    c.format_preset = optional_value<std::string>(j, "format_preset");
    c.format_spec_path = optional_value<std::string>(j, "format_spec_path");
    c.tables_path = optional_value<std::string>(j, "tables_path");
    c.seed = j.value("seed", c.beam.rng_seed);
    c.beam.rng_seed = c.seed;
    c.output_path = optional_value<std::string>(j, "output_path");
    c.trace_path = optional_value<std::string>(j, "trace_path");
    if (auto it = j.find("selftrain"); it != j.end()) {
      reject_unknown_keys(*it,
                          {"cycles", "poems_per_title", "fine_tune_weight", "top_k", "title_slot",
                           "model_out", "poems_out", "report_out"},
                          "selftrain");
      auto& s = c.selftrain;
      s.cycles = it->value("cycles", s.cycles);
      s.poems_per_title = it->value("poems_per_title", s.poems_per_title);
      s.fine_tune_weight = it->value("fine_tune_weight", s.fine_tune_weight);
      s.top_k = optional_value<int>(*it, "top_k");
      s.title_slot = it->value("title_slot", s.title_slot);
      s.model_out = optional_value<std::string>(*it, "model_out");
      s.poems_out = optional_value<std::string>(*it, "poems_out");
      s.report_out = optional_value<std::string>(*it, "report_out");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j, path.parent_path());
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json model = {{"backend", this->model.backend}, {"tokenizer", this->model.tokenizer}};
  if (this->model.backend == "ngram") model["path"] = this->model.path;
  if (this->model.backend == "uniform") model["vocab"] = this->model.vocab;
  if (this->model.backend == "remote") {
    // The auth token is a secret and stays out of records and hashes.
    model["endpoint"] = {{"base_url", this->model.endpoint.base_url},
                         {"timeout_ms", this->model.endpoint.timeout_ms},
                         {"max_retries", this->model.endpoint.max_retries}};
  }
  nlohmann::json j = {{"model", model},
                      {"template", template_name},
                      {"scorer", scorer.to_json()},
                      {"beam", beam.to_json()},
                      {"seed", seed}};
  put_optional(j, "template_pack", template_pack);
  put_optional(j, "format_preset", format_preset);
  put_optional(j, "format_spec_path", format_spec_path);
  put_optional(j, "tables_path", tables_path);
  put_optional(j, "output_path", output_path);
  put_optional(j, "trace_path", trace_path);
  nlohmann::json st = {{"cycles", selftrain.cycles},
                       {"poems_per_title", selftrain.poems_per_title},
                       {"fine_tune_weight", selftrain.fine_tune_weight},
                       {"title_slot", selftrain.title_slot}};
  put_optional(st, "top_k", selftrain.top_k);
  put_optional(st, "model_out", selftrain.model_out);
  put_optional(st, "poems_out", selftrain.poems_out);
  put_optional(st, "report_out", selftrain.report_out);
  j["selftrain"] = st;
  return j;
}

void RunConfig::validate() const {
  if (model.backend == "ngram") {
    if (model.path.empty()) throw ConfigError("model.path is required for the ngram backend");
  } else if (model.backend == "uniform") {
    if (model.vocab.empty()) throw ConfigError("model.vocab is required for the uniform backend");
  } else if (model.backend == "remote") {
    model.endpoint.with_env_override().validate();
  } else {
    throw ConfigError("unknown model backend '" + model.backend + "'");
  }
  if (model.tokenizer != "char") {
    throw ConfigError("unknown tokenizer '" + model.tokenizer + "' (only \"char\" is built in)");
  }
  if (template_name.empty()) throw ConfigError("template name is empty");
  scorer.validate();
  beam.validate();
  if (format_preset) PoemFormatSpec::preset(*format_preset);
  if (selftrain.cycles < 1) throw ConfigError("selftrain.cycles must be >= 1");
  if (selftrain.poems_per_title < 1) throw ConfigError("selftrain.poems_per_title must be >= 1");
  if (!(selftrain.fine_tune_weight > 0.0)) {
    throw ConfigError("selftrain.fine_tune_weight must be > 0");
  }
}

std::string RunConfig::hash() const {
  nlohmann::json j = to_json();
  j.erase("output_path");
  j.erase("trace_path");
  for (const char* key : {"model_out", "poems_out", "report_out"}) j["selftrain"].erase(key);
  return stable_hash(j);
}

std::string stable_hash(const nlohmann::json& j) {
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::unique_ptr<LanguageModel> load_model(const RunConfig& config) {
  const ModelConfig& m = config.model;
  if (m.backend == "ngram") {
    return std::make_unique<NGramModel>(NGramModel::load(config.resolve(m.path)));
  }
  if (m.backend == "uniform") return std::make_unique<UniformModel>(m.vocab);
  if (m.backend == "remote") return std::make_unique<RemoteModel>(m.endpoint.with_env_override());
  throw ConfigError("unknown model backend '" + m.backend + "'");
}

TemplatePack load_template_pack(const RunConfig& config) {
  if (config.template_pack) return TemplatePack::load(config.resolve(*config.template_pack));
  return TemplatePack::builtin();
}

std::optional<PoemFormat> load_poem_format(const RunConfig& config) {
  const bool configured = config.format_preset || config.format_spec_path || config.tables_path;
  if (!configured && config.scorer.mode != ScoringMode::kInversePoem) return std::nullopt;
  PoemFormat format;
  if (config.format_spec_path) {
    format.spec = PoemFormatSpec::load(config.resolve(*config.format_spec_path));
  } else {
    format.spec = PoemFormatSpec::preset(config.format_preset.value_or("5-jueju"));
  }
  if (config.tables_path) format.tables = RhymeToneTables::load(config.resolve(*config.tables_path));
  return format;
}

}  // namespace inverse_decode
