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

#include "inverse_decode/beam_search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <set>
#include <thread>

#include "inverse_decode/errors.hpp"

namespace inverse_decode {
namespace {

constexpr std::size_t kMaxExhaustiveContinuations = 200000;

// Runs fn(0..n-1) on up to `threads` workers; rethrows the first failure by
// index so errors are reported deterministically.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void enumerate(const std::vector<Token>& vocab, const TokenSet& delimiters,
               std::size_t max_tokens, TokenSeq& prefix, std::vector<Continuation>& out) {
  if (out.size() > kMaxExhaustiveContinuations) {
    throw ConfigError("exhaustive expansion is too large; lower max_step_tokens");
  }
  out.push_back({prefix, StopReason::kEnd});
  for (const auto& t : vocab) {
    TokenSeq next = prefix;
    next.push_back(t);
    if (delimiters.contains(t)) {
      out.push_back({std::move(next), StopReason::kStopToken});
    } else if (next.size() == max_tokens) {
      out.push_back({std::move(next), StopReason::kMaxTokens});
    } else {
      enumerate(vocab, delimiters, max_tokens, next, out);
    }
  }
}

std::vector<Continuation> exhaustive_continuations(const LanguageModel& model,
                                                   const TokenSet& delimiters,
                                                   const BeamParams& params) {
  const auto vocab = model.vocabulary();
  if (!vocab) {
    throw ConfigError("exhaustive expansion needs a finite-vocabulary backend, got " + model.id());
  }
  std::vector<Continuation> out;
  TokenSeq prefix;
  enumerate(*vocab, delimiters, static_cast<std::size_t>(params.max_step_tokens), prefix, out);
  return out;
}

std::vector<Candidate> to_candidates(const Beam& beam, const std::vector<Continuation>& conts,
                                     const BeamParams& params) {
  std::vector<Candidate> out;
  out.reserve(conts.size());
  for (const auto& c : conts) {
    Candidate cand{beam.text + c.tokens, c.reason == StopReason::kEnd};
    if (params.expansion_mode == ExpansionMode::kSampled && c.reason == StopReason::kMaxTokens) {
      cand.terminated = true;
    }
    if (params.dedup && std::find(out.begin(), out.end(), cand) != out.end()) continue;
    out.push_back(std::move(cand));
  }
  return out;
}

bool ranks_before(const Beam& a, const Beam& b) {
  if (a.breakdown.total != b.breakdown.total) return a.breakdown.total > b.breakdown.total;
  if (a.text != b.text) {
    const std::string ra = a.text.render();
    const std::string rb = b.text.render();
    return ra != rb ? ra < rb : a.text < b.text;
  }
  return !a.terminated && b.terminated;
}

std::string trace_to_jsonl(const std::vector<StepTrace>& trace) {
  std::string out;
  for (const auto& s : trace) {
    out += s.to_json().dump();
    out += '\n';
  }
  return out;
}

}  // namespace

std::string to_string(ExpansionMode mode) {
  return mode == ExpansionMode::kExhaustive ? "exhaustive" : "sampled";
}

ExpansionMode expansion_mode_from_string(std::string_view name) {
  if (name == "sampled") return ExpansionMode::kSampled;
  if (name == "exhaustive") return ExpansionMode::kExhaustive;
  throw ConfigError("unknown expansion mode '" + std::string(name) + "'");
}

void BeamParams::validate() const {
  if (n_beams < 1) throw ConfigError("n_beams must be >= 1");
  if (m_expansions < 1) throw ConfigError("m_expansions must be >= 1");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (max_step_tokens < 1) throw ConfigError("max_step_tokens must be >= 1");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be positive and finite");
  }
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

BeamParams BeamParams::qa() { return BeamParams{}; }

BeamParams BeamParams::poem_train() {
  BeamParams p;
  p.n_beams = 10;
  p.m_expansions = 7;
  p.max_steps = 8;
  p.max_step_tokens = 16;
  return p;
}

BeamParams BeamParams::poem_eval() {
  BeamParams p = poem_train();
  p.m_expansions = 12;
  return p;
}

nlohmann::json BeamParams::to_json() const {
  return {{"n_beams", n_beams},
          {"m_expansions", m_expansions},
          {"max_steps", max_steps},
          {"rng_seed", rng_seed},
          {"dedup", dedup},
          {"expansion_mode", to_string(expansion_mode)},
          {"max_step_tokens", max_step_tokens},
          {"temperature", temperature},
          {"threads", threads}};
}

BeamParams BeamParams::from_json(const nlohmann::json& j) {
  try {
    BeamParams p;
    if (auto it = j.find("preset"); it != j.end()) {
      const auto name = it->get<std::string>();
      if (name == "qa") {
        p = qa();
      } else if (name == "poem_train") {
        p = poem_train();
      } else if (name == "poem_eval") {
        p = poem_eval();
      } else {
        throw ConfigError("unknown beam preset '" + name + "'");
      }
    }
    p.n_beams = j.value("n_beams", p.n_beams);
    p.m_expansions = j.value("m_expansions", p.m_expansions);
    p.max_steps = j.value("max_steps", p.max_steps);
    p.rng_seed = j.value("rng_seed", p.rng_seed);
    p.dedup = j.value("dedup", p.dedup);
    if (auto it = j.find("expansion_mode"); it != j.end()) {
      p.expansion_mode = expansion_mode_from_string(it->get<std::string>());
    }
    p.max_step_tokens = j.value("max_step_tokens", p.max_step_tokens);
    p.temperature = j.value("temperature", p.temperature);
    p.threads = j.value("threads", p.threads);
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed beam params: ") + e.what());
  }
}

std::vector<Candidate> expand_beam(const LanguageModel& model, const TokenSeq& prompt,
                                   const Beam& beam, const TokenSet& delimiters,
                                   std::uint64_t seed, const BeamParams& params) {
  if (beam.terminated) throw SearchError("cannot expand a terminated beam");
  if (params.expansion_mode == ExpansionMode::kExhaustive) {
    return to_candidates(beam, exhaustive_continuations(model, delimiters, params), params);
  }
  SamplingOptions options;
  options.stop_tokens = delimiters;
  options.max_tokens = static_cast<std::size_t>(params.max_step_tokens);
  options.seed = seed;
  options.temperature = params.temperature;
  return to_candidates(
      beam, model.sample(prompt + beam.text, options, static_cast<std::size_t>(params.m_expansions)),
      params);
}

std::uint64_t expansion_seed(std::uint64_t run_seed, int step, int beam_rank) {
  return derive_seed(run_seed,
                     {static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(beam_rank)});
}

nlohmann::json StepTrace::to_json() const {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : candidates) {
    nlohmann::json item = {{"parent", c.parent},
                           {"text", c.text.render()},
                           {"terminated", c.terminated},
                           {"selected", c.selected}};
    if (c.breakdown) item["breakdown"] = c.breakdown->to_json();
    if (!c.error.empty()) item["error"] = c.error;
    cands.push_back(std::move(item));
  }
  nlohmann::json retained = nlohmann::json::array();
  for (const auto& t : retained_terminated) retained.push_back(t.render());
  return {{"step", step}, {"candidates", cands}, {"retained_terminated", retained}};
}

std::string SearchResult::trace_jsonl() const { return trace_to_jsonl(trace); }

SearchResult run_beam_search(const LanguageModel& model, const TokenSeq& prompt,
                             const BeamScorer& scorer, const TokenSet& delimiters,
                             const BeamParams& params) {
  params.validate();
  if (delimiters.empty()) throw ConfigError("delimiter set is empty");

  std::optional<std::vector<Continuation>> exhaustive;
  if (params.expansion_mode == ExpansionMode::kExhaustive) {
    exhaustive = exhaustive_continuations(model, delimiters, params);
  }

  std::vector<Beam> beams(1);
  SearchResult result;

  for (int step = 0; step < params.max_steps; ++step) {
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < beams.size(); ++i) {
      if (!beams[i].terminated) live.push_back(i);
    }
    if (live.empty()) break;

    std::vector<std::vector<Candidate>> expansions(live.size());
    parallel_for(live.size(), params.threads, [&](std::size_t k) {
      const Beam& parent = beams[live[k]];
      expansions[k] =
          exhaustive ? to_candidates(parent, *exhaustive, params)
                     : expand_beam(model, prompt, parent, delimiters,
                                   expansion_seed(params.rng_seed, step, static_cast<int>(live[k])),
                                   params);
    });

    StepTrace st;
    st.step = step;
    std::vector<ScoreCache> caches;
    for (std::size_t k = 0; k < live.size(); ++k) {
      for (auto& c : expansions[k]) {
        st.candidates.push_back({static_cast<int>(live[k]), std::move(c.text), c.terminated,
                                 std::nullopt, {}, false});
      }
    }
    caches.resize(st.candidates.size());

    parallel_for(st.candidates.size(), params.threads, [&](std::size_t i) {
      TraceCandidate& c = st.candidates[i];
      if (c.text.empty()) {
        c.error = "empty generation";
        return;
      }
      try {
        ScoredText scored = scorer.score(c.text, &beams[static_cast<std::size_t>(c.parent)].cache);
        if (!std::isfinite(scored.breakdown.total)) {
          c.error = "non-finite score";
          return;
        }
        c.breakdown = std::move(scored.breakdown);
        caches[i] = std::move(scored.cache);
      } catch (const ScoreError& e) {
        c.error = e.what();
      }
    });

    // Pool: surviving terminated beams plus every scored candidate. `origin`
    // is the candidate index, or -1 for a carried-over beam.
    std::vector<std::pair<Beam, long>> pool;
    for (const auto& b : beams) {
      if (b.terminated) {
        pool.emplace_back(b, -1);
        st.retained_terminated.push_back(b.text);
      }
    }
    for (std::size_t i = 0; i < st.candidates.size(); ++i) {
      const TraceCandidate& c = st.candidates[i];
      if (!c.breakdown) continue;
      pool.emplace_back(Beam{c.text, c.terminated, *c.breakdown, step + 1, caches[i]},
                        static_cast<long>(i));
    }
    if (pool.empty()) {
      result.trace.push_back(std::move(st));
      throw SearchError("no candidate could be scored at step " + std::to_string(step),
                        trace_to_jsonl(result.trace));
    }

    std::stable_sort(pool.begin(), pool.end(),
                     [](const auto& a, const auto& b) { return ranks_before(a.first, b.first); });
    std::vector<Beam> next;
    std::set<std::pair<std::vector<Token>, bool>> seen;
    for (auto& [beam, origin] : pool) {
      if (next.size() == static_cast<std::size_t>(params.n_beams)) break;
      if (params.dedup && !seen.emplace(beam.text.tokens(), beam.terminated).second) continue;
      if (origin >= 0) st.candidates[static_cast<std::size_t>(origin)].selected = true;
      next.push_back(std::move(beam));
    }
    beams = std::move(next);
    result.trace.push_back(std::move(st));
  }

  result.all_final = beams;
  result.best = beams.front();
  return result;
}

SearchResult run_beam_search(const LanguageModel& model, const TransformTemplate& tmpl,
                             const PromptFields& fields, const BeamParams& params,
                             const ScorerConfig& config,
                             const std::optional<PoemFormat>& format) {
  const CompositeScorer scorer(model, tmpl, fields, config, format);
  return run_beam_search(model, scorer.prompt(), scorer, config.delimiters, params);
}

}  // namespace inverse_decode
