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

#include "inverse_decode/ngram_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "inverse_decode/errors.hpp"

namespace inverse_decode {
namespace {

constexpr const char* kFormatName = "inverse_decode.ngram";
constexpr int kFormatVersion = 1;

void check_params(int order, double alpha) {
  if (order < 1) throw ConfigError("n-gram order must be >= 1, got " + std::to_string(order));
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("smoothing_alpha must be positive and finite");
  }
}

}  // namespace

NGramModel::NGramModel(int order, double alpha) : order_(order), alpha_(alpha) {
  check_params(order, alpha);
}

NGramModel NGramModel::train(const std::vector<TokenSeq>& corpus, int order,
                             double smoothing_alpha) {
  NGramModel model(order, smoothing_alpha);
  if (corpus.empty()) throw ConfigError("training corpus is empty");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].empty()) {
      throw ConfigError("training document " + std::to_string(i) + " is empty");
    }
  }
  for (const auto& doc : corpus) model.add_document(doc, 1.0);
  return model;
}

NGramModel NGramModel::fine_tune(const std::vector<TokenSeq>& documents, double weight) const {
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw ConfigError("fine-tune weight must be positive and finite");
  }
  NGramModel out = *this;
  for (const auto& doc : documents) {
    if (doc.empty()) throw ConfigError("fine-tune document is empty");
    out.add_document(doc, weight);
  }
  return out;
}

NGramModel::Id NGramModel::intern(const Token& token) {
  if (token == kStartToken || token == kEndToken) {
    throw ConfigError("token '" + token + "' is reserved");
  }
  auto [it, inserted] = ids_.try_emplace(token, static_cast<Id>(vocab_.size()));
  if (inserted) vocab_.push_back(token);
  return it->second;
}

NGramModel::Id NGramModel::lookup(const Token& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnkId : it->second;
}

const Token& NGramModel::token_of(Id id) const {
  static const Token kUnk = "<unk>";
  if (id == kStartId) return kStartToken;
  if (id == kEndId) return kEndToken;
  if (id == kUnkId) return kUnk;
  return vocab_.at(static_cast<std::size_t>(id));
}

void NGramModel::add_document(const TokenSeq& document, double weight) {
  const std::size_t ctx_len = static_cast<std::size_t>(order_ - 1);
  std::vector<Id> ids(ctx_len, kStartId);
  for (const auto& t : document) ids.push_back(intern(t));
  ids.push_back(kEndId);
  for (std::size_t pos = ctx_len; pos < ids.size(); ++pos) {
    std::vector<Id> ctx(ids.begin() + static_cast<std::ptrdiff_t>(pos - ctx_len),
                        ids.begin() + static_cast<std::ptrdiff_t>(pos));
    ContextCounts& cc = counts_[ctx];
    cc.next[ids[pos]] += weight;
    cc.total += weight;
  }
}

std::vector<NGramModel::Id> NGramModel::context_ids(const std::vector<Token>& context) const {
  if (context.size() != static_cast<std::size_t>(order_ - 1)) {
    throw ConfigError("context must hold exactly order-1 = " + std::to_string(order_ - 1) +
                      " tokens");
  }
  std::vector<Id> ids;
  ids.reserve(context.size());
  for (const auto& t : context) ids.push_back(t == kStartToken ? kStartId : lookup(t));
  return ids;
}

double NGramModel::prob_ids(const std::vector<Id>& context, Id next) const {
  const double support = static_cast<double>(vocab_.size() + 1);
  double c = 0.0;
  double total = 0.0;
  if (auto it = counts_.find(context); it != counts_.end()) {
    total = it->second.total;
    if (auto jt = it->second.next.find(next); jt != it->second.next.end()) c = jt->second;
  }
  return (c + alpha_) / (total + alpha_ * support);
}

double NGramModel::count(const std::vector<Token>& context, const Token& next) const {
  auto it = counts_.find(context_ids(context));
  if (it == counts_.end()) return 0.0;
  const Id id = next == kEndToken ? kEndId : lookup(next);
  auto jt = it->second.next.find(id);
  return jt == it->second.next.end() ? 0.0 : jt->second;
}

double NGramModel::context_total(const std::vector<Token>& context) const {
  auto it = counts_.find(context_ids(context));
  return it == counts_.end() ? 0.0 : it->second.total;
}

double NGramModel::prob(const std::vector<Token>& context, const Token& next) const {
  return prob_ids(context_ids(context), next == kEndToken ? kEndId : lookup(next));
}

std::string NGramModel::id() const {
  std::ostringstream os;
  os << "ngram:order=" << order_ << ",alpha=" << alpha_ << ",vocab=" << vocab_.size()
     << ",contexts=" << counts_.size();
  return os.str();
}

double NGramModel::logprob(const TokenSeq& prefix, const TokenSeq& continuation,
                           double start) const {
  const std::size_t ctx_len = static_cast<std::size_t>(order_ - 1);
  // Only the last ctx_len tokens of the prefix matter.
  std::vector<Id> window(ctx_len, kStartId);
  auto push = [&](Id id) {
    if (ctx_len == 0) return;
    window.erase(window.begin());
    window.push_back(id);
  };
  const std::size_t skip = prefix.size() > ctx_len ? prefix.size() - ctx_len : 0;
  for (std::size_t i = skip; i < prefix.size(); ++i) push(lookup(prefix[i]));

  double acc = start;
  for (const auto& t : continuation) {
    const Id id = lookup(t);
    acc += std::log(prob_ids(window, id));
    push(id);
  }
  return acc;
}

Distribution NGramModel::next_distribution(const TokenSeq& history) const {
  const std::size_t ctx_len = static_cast<std::size_t>(order_ - 1);
  std::vector<Id> window(ctx_len, kStartId);
  const std::size_t n = std::min(ctx_len, history.size());
  for (std::size_t i = 0; i < n; ++i) {
    window[ctx_len - n + i] = lookup(history[history.size() - n + i]);
  }
  Distribution dist;
  dist.reserve(vocab_.size() + 1);
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    dist.emplace_back(vocab_[i], prob_ids(window, static_cast<Id>(i)));
  }
  dist.emplace_back(kEndToken, prob_ids(window, kEndId));
  return dist;
}

nlohmann::json NGramModel::to_json() const {
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& [ctx, cc] : counts_) {
    nlohmann::json context = nlohmann::json::array();
    for (Id id : ctx) context.push_back(token_of(id));
    nlohmann::json next = nlohmann::json::array();
    for (const auto& [id, c] : cc.next) next.push_back({token_of(id), c});
    counts.push_back({{"context", context}, {"next", next}, {"total", cc.total}});
  }
  return {{"format", kFormatName},     {"version", kFormatVersion}, {"order", order_},
          {"smoothing_alpha", alpha_}, {"vocab", vocab_},           {"counts", counts}};
}

NGramModel NGramModel::from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string{}) != kFormatName) {
      throw ConfigError("not an inverse_decode n-gram model file");
    }
    if (j.at("version").get<int>() != kFormatVersion) {
      throw ConfigError("unsupported n-gram model version " + j.at("version").dump());
    }
    NGramModel model(j.at("order").get<int>(), j.at("smoothing_alpha").get<double>());
    for (const auto& t : j.at("vocab")) {
      if (model.ids_.contains(t.get<std::string>())) {
        throw ConfigError("duplicate vocabulary entry " + t.dump());
      }
      model.intern(t.get<std::string>());
    }
    auto resolve = [&](const std::string& t, bool allow_start, bool allow_end) -> Id {
      if (allow_start && t == kStartToken) return kStartId;
      if (allow_end && t == kEndToken) return kEndId;
      auto it = model.ids_.find(t);
      if (it == model.ids_.end()) throw ConfigError("count refers to unknown token '" + t + "'");
      return it->second;
    };
    for (const auto& entry : j.at("counts")) {
      std::vector<Id> ctx;
      for (const auto& t : entry.at("context")) ctx.push_back(resolve(t, true, false));
      if (ctx.size() != static_cast<std::size_t>(model.order_ - 1)) {
        throw ConfigError("context length does not match model order");
      }
      ContextCounts& cc = model.counts_[ctx];
      for (const auto& pair : entry.at("next")) {
        const double c = pair.at(1).get<double>();
        if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("negative or non-finite count");
        cc.next[resolve(pair.at(0).get<std::string>(), false, true)] += c;
        cc.total += c;
      }
      // The stored total keeps fractional fine-tune weights bit-exact.
      if (auto it = entry.find("total"); it != entry.end()) {
        const double stored = it->get<double>();
        if (std::abs(stored - cc.total) > 1e-9 * std::max(1.0, stored)) {
          throw ConfigError("context total does not match its counts");
        }
        cc.total = stored;
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed n-gram model: ") + e.what());
  }
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file " + path.string());
  out << to_json().dump() << '\n';
  if (!out) throw IoError("failed writing model file " + path.string());
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("model file " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

bool operator==(const NGramModel& a, const NGramModel& b) {
  return a.order_ == b.order_ && a.alpha_ == b.alpha_ && a.vocab_ == b.vocab_ &&
         a.counts_ == b.counts_;
}

std::vector<TokenSeq> read_corpus_jsonl(const std::filesystem::path& path,
                                        const Tokenizer& tokenizer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus " + path.string());
  std::vector<TokenSeq> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      docs.push_back(tokenizer.tokenize(j.at("text").get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

}  // namespace inverse_decode
