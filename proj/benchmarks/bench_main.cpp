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

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "inverse_decode/beam_search.hpp"
#include "inverse_decode/ngram_model.hpp"
#include "inverse_decode/scoring.hpp"

namespace inverse_decode {
namespace {

NGramModel bench_model(int order) {
  std::mt19937_64 rng(1);
  const std::vector<Token> alphabet = {"a", "b", "c", "d", "e", "f", ",", "."};
  std::vector<TokenSeq> corpus;
  for (int i = 0; i < 500; ++i) {
    TokenSeq doc;
    const int len = 5 + static_cast<int>(rng() % 40);
    for (int k = 0; k < len; ++k) doc.push_back(alphabet[rng() % alphabet.size()]);
    corpus.push_back(doc);
  }
  return NGramModel::train(corpus, order, 0.1);
}

const TransformTemplate& bench_template() {
  static const auto t = TransformTemplate::make("bench", "{q}:", "{generated}|", "{q}");
  return t;
}

void BM_NGramLogprob(benchmark::State& state) {
  const NGramModel m = bench_model(static_cast<int>(state.range(0)));
  const TokenSeq prefix = tokenize("abc,de");
  const TokenSeq cont = tokenize("fabcdefabcdefabcdefab");
  for (auto _ : state) benchmark::DoNotOptimize(m.logprob(prefix, cont));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cont.size()));
}
BENCHMARK(BM_NGramLogprob)->Arg(2)->Arg(3)->Arg(5);

void BM_CompositeScore(benchmark::State& state) {
  const NGramModel m = bench_model(3);
  ScorerConfig c = ScorerConfig::qa();
  const PromptFields f{{"q", "abcab"}};
  const TokenSeq g = tokenize("abcd,efab,cdef,abcd.");
  for (auto _ : state) benchmark::DoNotOptimize(composite_score(m, bench_template(), f, g, c));
}
BENCHMARK(BM_CompositeScore);

void BM_BeamSearch(benchmark::State& state) {
  const NGramModel m = bench_model(3);
  BeamParams p;
  p.n_beams = static_cast<int>(state.range(0));
  p.m_expansions = static_cast<int>(state.range(1));
  p.max_steps = 6;
  p.max_step_tokens = 12;
  p.rng_seed = 7;
  const PromptFields f{{"q", "abcab"}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_beam_search(m, bench_template(), f, p, ScorerConfig::qa()));
  }
}
BENCHMARK(BM_BeamSearch)->Args({5, 5})->Args({10, 7})->Args({10, 12});

}  // namespace
}  // namespace inverse_decode

BENCHMARK_MAIN();
