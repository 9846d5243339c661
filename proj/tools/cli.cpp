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

#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "inverse_decode/beam_search.hpp"
#include "inverse_decode/errors.hpp"
#include "inverse_decode/eval_stats.hpp"
#include "inverse_decode/ngram_model.hpp"
#include "inverse_decode/prompt_template.hpp"
#include "inverse_decode/run_config.hpp"
#include "inverse_decode/self_training.hpp"

namespace inverse_decode::cli {
namespace {

namespace fs = std::filesystem;

std::string dump(const nlohmann::json& j, bool pretty) { return pretty ? j.dump(2) : j.dump(); }

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

// Flag paths are relative to the working directory, not the config file.
std::string from_cwd(const std::string& path) { return fs::absolute(path).string(); }

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv(kSeedEnvVar);
  if (s == nullptr || *s == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != std::string(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string(kSeedEnvVar) + " is not an unsigned integer");
  }
}

// Config file, then environment, then command-line flags.
RunConfig load_config(const std::string& path, std::optional<std::uint64_t> flag_seed) {
  RunConfig config = RunConfig::load(path);
  if (auto s = env_seed()) config.seed = *s;
  if (flag_seed) config.seed = *flag_seed;
  config.beam.rng_seed = config.seed;
  return config;
}

PromptFields parse_fields(const std::vector<std::string>& pairs, const std::string& fields_json) {
  PromptFields fields;
  if (!fields_json.empty()) {
    nlohmann::json j;
    try {
      if (fields_json.front() == '@') {
        std::ifstream in(fields_json.substr(1), std::ios::binary);
        if (!in) throw IoError("cannot open fields file " + fields_json.substr(1));
        j = nlohmann::json::parse(in);
      } else {
        j = nlohmann::json::parse(fields_json);
      }
      fields = j.get<PromptFields>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("prompt fields must be a JSON object of strings: ") + e.what());
    }
  }
  for (const auto& kv : pairs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--field expects key=value, got '" + kv + "'");
    }
    fields[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return fields;
}

struct TrainArgs {
  std::string corpus;
  int order = 3;
  double alpha = 0.1;
  std::string out;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto corpus = read_corpus_jsonl(a.corpus, *default_tokenizer());
  const NGramModel model = NGramModel::train(corpus, a.order, a.alpha);
  model.save(a.out);
  out << nlohmann::json{{"model", a.out},
                        {"documents", corpus.size()},
                        {"vocab", model.vocab().size()},
                        {"contexts", model.num_contexts()}}
             .dump()
      << '\n';
  return kOk;
}

struct GenerateArgs {
  std::string config;
  std::vector<std::string> fields;
  std::string fields_json;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string template_name;
  std::string output;
  std::string trace;
  bool pretty = false;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig config = load_config(a.config, a.seed);
  if (!a.mode.empty()) config.scorer.mode = scoring_mode_from_string(a.mode);
  if (!a.template_name.empty()) config.template_name = a.template_name;
  if (!a.output.empty()) config.output_path = from_cwd(a.output);
  if (!a.trace.empty()) config.trace_path = from_cwd(a.trace);
  config.validate();

  const PromptFields fields = parse_fields(a.fields, a.fields_json);
  const TemplatePack pack = load_template_pack(config);
  const TransformTemplate& tmpl = pack.get(config.template_name);
  const auto format = load_poem_format(config);
  const auto model = load_model(config);
  const std::string hash = config.hash();

  std::optional<fs::path> trace_path;
  if (config.trace_path) trace_path = config.resolve(*config.trace_path);

  SearchResult result;
  try {
    result = run_beam_search(*model, tmpl, fields, config.beam, config.scorer, format);
  } catch (const SearchError& e) {
    const fs::path path = trace_path.value_or(fs::temp_directory_path() /
                                              ("inverse_decode_failed_" + hash + ".jsonl"));
    write_file(path, e.trace_jsonl());
    err << "search failed: " << e.what() << " (trace: " << path.string() << ")\n";
    return kSearch;
  }
  if (trace_path) write_file(*trace_path, result.trace_jsonl());

  const nlohmann::json record = {
      {"prompt_fields", fields},
      {"template", tmpl.name},
      {"mode", to_string(config.scorer.mode)},
      {"text", result.best.text.render()},
      {"terminated", result.best.terminated},
      {"breakdown", result.best.breakdown.to_json()},
      {"trace_path", trace_path ? nlohmann::json(trace_path->string()) : nlohmann::json()},
      {"config_hash", hash},
      {"seed", config.seed},
      {"model", model->id()},
  };
  const std::string line = dump(record, a.pretty) + "\n";
  if (config.output_path) {
    write_file(config.resolve(*config.output_path), line);
  } else {
    out << line;
  }
  return kOk;
}

struct SelftrainArgs {
  std::string config;
  std::string titles;
  std::optional<int> cycles;
  std::optional<std::uint64_t> seed;
  std::string model_out;
  std::string poems_out;
  std::string report_out;
  bool pretty = false;
};

std::vector<PromptFields> read_titles(const fs::path& path, const std::string& title_slot) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open titles file " + path.string());
  std::vector<PromptFields> titles;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.is_string()) {
        titles.push_back({{title_slot, j.get<std::string>()}});
      } else {
        titles.push_back(j.get<PromptFields>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (titles.empty()) throw ConfigError("titles file " + path.string() + " is empty");
  return titles;
}

int cmd_selftrain(const SelftrainArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig config = load_config(a.config, a.seed);
  if (a.cycles) config.selftrain.cycles = *a.cycles;
  if (!a.model_out.empty()) config.selftrain.model_out = from_cwd(a.model_out);
  if (!a.poems_out.empty()) config.selftrain.poems_out = from_cwd(a.poems_out);
  if (!a.report_out.empty()) config.selftrain.report_out = from_cwd(a.report_out);
  config.validate();
  if (config.model.backend != "ngram") {
    throw ConfigError("self-training fine-tunes an ngram model; backend is '" +
                      config.model.backend + "'");
  }

  SelfTrainConfig st;
  st.titles = read_titles(a.titles, config.selftrain.title_slot);
  st.cycles = config.selftrain.cycles;
  st.poems_per_title = config.selftrain.poems_per_title;
  st.fine_tune_weight = config.selftrain.fine_tune_weight;
  st.top_k = config.selftrain.top_k;
  st.beam_params = config.beam;
  st.scorer_config = config.scorer;
  const TemplatePack pack = load_template_pack(config);
  st.tmpl = pack.get(config.template_name);
  if (auto format = load_poem_format(config)) {
    st.format = *format;
  } else {
    st.format.spec = PoemFormatSpec::preset("5-jueju");
  }

  const NGramModel model = NGramModel::load(config.resolve(config.model.path));
  const SelfTrainResult result = run_self_training(model, st);

  if (config.selftrain.model_out) {
    result.final_model.save(config.resolve(*config.selftrain.model_out));
  }
  if (config.selftrain.poems_out) {
    std::string lines;
    for (const auto& p : result.poems) lines += p.to_json().dump() + "\n";
    write_file(config.resolve(*config.selftrain.poems_out), lines);
  }
  nlohmann::json cycles = nlohmann::json::array();
  for (const auto& r : result.reports) {
    for (const auto& f : r.failures) err << "warning: cycle " << r.cycle << ": " << f << '\n';
    cycles.push_back(r.to_json());
  }
  const nlohmann::json report = {{"config_hash", config.hash()},
                                 {"seed", config.seed},
                                 {"titles", st.titles.size()},
                                 {"cycles", cycles}};
  const std::string text = dump(report, a.pretty) + "\n";
  if (config.selftrain.report_out) {
    write_file(config.resolve(*config.selftrain.report_out), text);
  } else {
    out << text;
  }
  return kOk;
}

struct EvalArgs {
  std::string records;
  std::string aspect = "overall";
  std::string out;
  bool pretty = false;
};

int cmd_evalstats(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto records = read_eval_records(a.records);
  const EvalSummary summary = summarize(records, a.aspect);
  if (summary.methods.empty()) {
    throw ConfigError("no records for aspect '" + a.aspect + "'");
  }
  for (const auto& w : summary.warnings) err << "warning: " << w << '\n';
  const std::string text = dump(eval_report(summary), a.pretty) + "\n";
  if (!a.out.empty()) {
    write_file(a.out, text);
  } else {
    out << text;
  }
  return kOk;
}

int cmd_validate(const std::string& config_path, bool pretty, std::ostream& out) {
  RunConfig config = load_config(config_path, std::nullopt);
  const TemplatePack pack = load_template_pack(config);
  pack.get(config.template_name);
  load_poem_format(config);
  if (config.model.backend != "remote") load_model(config);
  out << dump({{"valid", true}, {"config_hash", config.hash()}, {"config", config.to_json()}},
              pretty)
      << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inverse-prompting beam search decoder"};
  app.name("inverse_decode");
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a character n-gram model from JSONL");
  train_cmd->add_option("--corpus", train.corpus, "JSONL corpus, one {\"text\": ...} per line")
      ->required();
  train_cmd->add_option("--order", train.order, "n-gram order");
  train_cmd->add_option("--alpha", train.alpha, "additive smoothing");
  train_cmd->add_option("--out", train.out, "model file to write")->required();

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Decode one prompt with beam search");
  gen_cmd->add_option("--config", gen.config, "run config JSON")->required();
  gen_cmd->add_option("--field", gen.fields, "prompt slot as key=value (repeatable)");
  gen_cmd->add_option("--fields-json", gen.fields_json, "prompt slots as JSON object or @file");
  gen_cmd->add_option("--seed", gen.seed, "override the run seed");
  gen_cmd->add_option("--mode", gen.mode, "baseline | inverse_qa | inverse_poem");
  gen_cmd->add_option("--template", gen.template_name, "template name");
  gen_cmd->add_option("--output", gen.output, "write the record here instead of stdout");
  gen_cmd->add_option("--trace", gen.trace, "write the step trace (JSONL) here");
  gen_cmd->add_flag("--pretty", gen.pretty, "indent JSON output");

  SelftrainArgs st;
  auto* st_cmd = app.add_subcommand("selftrain", "Generate-and-fine-tune cycles on an n-gram model");
  st_cmd->add_option("--config", st.config, "run config JSON")->required();
  st_cmd->add_option("--titles", st.titles, "JSONL of prompt fields (or plain strings)")
      ->required();
  st_cmd->add_option("--cycles", st.cycles, "number of cycles");
  st_cmd->add_option("--seed", st.seed, "override the run seed");
  st_cmd->add_option("--model-out", st.model_out, "fine-tuned model file");
  st_cmd->add_option("--poems-out", st.poems_out, "generated poems JSONL");
  st_cmd->add_option("--report-out", st.report_out, "per-cycle report JSON");
  st_cmd->add_flag("--pretty", st.pretty, "indent JSON output");

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("evalstats", "Per-capita means, deviations and p-values");
  ev_cmd->add_option("--records", ev.records, "ratings as .jsonl or .csv")->required();
  ev_cmd->add_option("--aspect", ev.aspect, "aspect to summarize");
  ev_cmd->add_option("--out", ev.out, "write the report here instead of stdout");
  ev_cmd->add_flag("--pretty", ev.pretty, "indent JSON output");

  std::string validate_path;
  bool validate_pretty = false;
  auto* val_cmd = app.add_subcommand("validate-config", "Check a run config and print its hash");
  val_cmd->add_option("--config", validate_path, "run config JSON")->required();
  val_cmd->add_flag("--pretty", validate_pretty, "indent JSON output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfig;
  }

  try {
    if (*train_cmd) return cmd_train(train, out);
    if (*gen_cmd) return cmd_generate(gen, out, err);
    if (*st_cmd) return cmd_selftrain(st, out, err);
    if (*ev_cmd) return cmd_evalstats(ev, out, err);
    if (*val_cmd) return cmd_validate(validate_path, validate_pretty, out);
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << '\n';
    return kBackend;
  } catch (const ProtocolError& e) {
    err << "backend protocol error: " << e.what() << '\n';
    return kBackend;
  } catch (const SearchError& e) {
    err << "search error: " << e.what() << '\n';
    return kSearch;
  } catch (const SelfTrainError& e) {
    err << "self-training error: " << e.what() << '\n';
    return kSearch;
  } catch (const ScoreError& e) {
    err << "scoring error: " << e.what() << '\n';
    return kSearch;
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  }
  return kConfig;
}

}  // namespace inverse_decode::cli
