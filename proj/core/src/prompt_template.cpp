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

#include "inverse_decode/prompt_template.hpp"

#include <algorithm>
#include <fstream>

#include "inverse_decode/errors.hpp"

namespace inverse_decode {
namespace {

bool is_slot_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

}  // namespace

Pattern Pattern::parse(std::string_view source) {
  Pattern p;
  p.source_ = std::string(source);
  std::string literal;
  auto flush = [&] {
    if (!literal.empty()) p.pieces_.push_back({false, std::move(literal)});
    literal.clear();
  };
  for (std::size_t i = 0; i < source.size(); ++i) {
    const char c = source[i];
    if (c == '{') {
      if (i + 1 < source.size() && source[i + 1] == '{') {
        literal += '{';
        ++i;
        continue;
      }
      const std::size_t close = source.find('}', i + 1);
      if (close == std::string_view::npos) {
        throw TemplateError("unterminated placeholder in pattern \"" + p.source_ + "\"", "");
      }
      std::string name(source.substr(i + 1, close - i - 1));
      if (name.empty() || !std::all_of(name.begin(), name.end(), is_slot_char)) {
        throw TemplateError("invalid placeholder {" + name + "} in pattern \"" + p.source_ + "\"",
                            name);
      }
      flush();
      p.pieces_.push_back({true, std::move(name)});
      i = close;
    } else if (c == '}') {
      if (i + 1 < source.size() && source[i + 1] == '}') {
        literal += '}';
        ++i;
        continue;
      }
      throw TemplateError("unmatched '}' in pattern \"" + p.source_ + "\"", "");
    } else {
      literal += c;
    }
  }
  flush();
  return p;
}

std::vector<std::string> Pattern::slots() const {
  std::vector<std::string> out;
  for (const auto& piece : pieces_) {
    if (piece.is_slot && std::find(out.begin(), out.end(), piece.text) == out.end()) {
      out.push_back(piece.text);
    }
  }
  return out;
}

bool Pattern::references(std::string_view slot) const {
  return std::any_of(pieces_.begin(), pieces_.end(),
                     [&](const Piece& p) { return p.is_slot && p.text == slot; });
}

TokenSeq Pattern::render(const PromptFields& fields, const TokenSeq* generated,
                         const Tokenizer& tokenizer) const {
  TokenSeq out;
  for (const auto& piece : pieces_) {
    if (!piece.is_slot) {
      out.append(tokenizer.tokenize(piece.text));
    } else if (piece.text == kGeneratedSlot) {
      if (generated == nullptr) {
        throw TemplateError("pattern uses {generated} outside an inverse context", piece.text);
      }
      out.append(*generated);
    } else {
      auto it = fields.find(piece.text);
      if (it == fields.end()) throw TemplateError("missing slot '" + piece.text + "'", piece.text);
      out.append(tokenizer.tokenize(it->second));
    }
  }
  return out;
}

PromptFields Pattern::match(std::string_view rendered) const {
  PromptFields out;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Piece& piece = pieces_[i];
    if (!piece.is_slot) {
      if (rendered.substr(pos, piece.text.size()) != piece.text) {
        throw TemplateError("text does not match pattern \"" + source_ + "\"", "");
      }
      pos += piece.text.size();
      continue;
    }
    std::size_t end = rendered.size();
    if (i + 1 < pieces_.size()) {
      if (pieces_[i + 1].is_slot) {
        throw TemplateError("adjacent slots make pattern \"" + source_ + "\" ambiguous",
                            piece.text);
      }
      end = rendered.find(pieces_[i + 1].text, pos);
      if (end == std::string_view::npos) {
        throw TemplateError("text does not match pattern \"" + source_ + "\"", piece.text);
      }
    }
    std::string value(rendered.substr(pos, end - pos));
    if (auto [it, inserted] = out.emplace(piece.text, value); !inserted && it->second != value) {
      throw TemplateError("slot '" + piece.text + "' matched two different values", piece.text);
    }
    pos = end;
  }
  if (pos != rendered.size()) throw TemplateError("trailing text after pattern \"" + source_ + "\"", "");
  return out;
}

TransformTemplate TransformTemplate::make(std::string name, std::string_view forward_pattern,
                                          std::string_view inverse_context_pattern,
                                          std::string_view inverse_target_pattern,
                                          std::string description,
                                          std::vector<std::string> declared_slots) {
  if (name.empty()) throw TemplateError("template name is empty", "");
  TransformTemplate t;
  t.name = std::move(name);
  t.description = std::move(description);
  t.forward = Pattern::parse(forward_pattern);
  t.inverse_context = Pattern::parse(inverse_context_pattern);
  t.inverse_target = Pattern::parse(inverse_target_pattern);
  t.declared_slots = declared_slots.empty() ? t.forward.slots() : std::move(declared_slots);

  auto declared = [&](const std::string& slot) {
    return std::find(t.declared_slots.begin(), t.declared_slots.end(), slot) !=
           t.declared_slots.end();
  };
  if (declared(std::string(kGeneratedSlot))) {
    throw TemplateError("template '" + t.name + "' declares the reserved slot {generated}",
                        std::string(kGeneratedSlot));
  }
  for (const auto& [label, pattern] :
       {std::pair{"forward", &t.forward}, std::pair{"inverse_target", &t.inverse_target}}) {
    for (const auto& slot : pattern->slots()) {
      if (!declared(slot)) {
        throw TemplateError("template '" + t.name + "': " + label +
                                " pattern references undeclared slot '" + slot + "'",
                            slot);
      }
    }
  }
  if (!t.inverse_context.references(kGeneratedSlot)) {
    throw TemplateError("template '" + t.name + "': inverse context must reference {generated}",
                        std::string(kGeneratedSlot));
  }
  for (const auto& slot : t.inverse_context.slots()) {
    if (slot != kGeneratedSlot && !declared(slot)) {
      throw TemplateError("template '" + t.name +
                              "': inverse context references undeclared slot '" + slot + "'",
                          slot);
    }
  }
  return t;
}

nlohmann::json TransformTemplate::to_json() const {
  return {{"name", name},
          {"forward_pattern", forward.source()},
          {"inverse_context_pattern", inverse_context.source()},
          {"inverse_target_pattern", inverse_target.source()},
          {"description", description},
          {"slots", declared_slots}};
}

TransformTemplate TransformTemplate::from_json(const nlohmann::json& j) {
  try {
    return make(j.at("name").get<std::string>(), j.at("forward_pattern").get<std::string>(),
                j.at("inverse_context_pattern").get<std::string>(),
                j.at("inverse_target_pattern").get<std::string>(),
                j.value("description", std::string{}),
                j.value("slots", std::vector<std::string>{}));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed template entry: ") + e.what());
  }
}

TokenSeq render_forward(const TransformTemplate& tmpl, const PromptFields& fields,
                        const Tokenizer& tokenizer) {
  return tmpl.forward.render(fields, nullptr, tokenizer);
}

InversePrompt render_inverse(const TransformTemplate& tmpl, const PromptFields& fields,
                             const TokenSeq& generated, const Tokenizer& tokenizer) {
  return {tmpl.inverse_context.render(fields, &generated, tokenizer),
          tmpl.inverse_target.render(fields, nullptr, tokenizer)};
}

TokenSeq SubSentence::body() const {
  return closed() ? text.slice(0, text.size() - 1) : text;
}

std::vector<SubSentence> segment_subsentences(const TokenSeq& text,
                                              const TokenSet& delimiters) {
  std::vector<SubSentence> out;
  SubSentence current;
  for (const auto& t : text) {
    current.text.push_back(t);
    if (delimiters.contains(t)) {
      current.terminal = t;
      current.index = out.size();
      out.push_back(std::move(current));
      current = SubSentence{};
    }
  }
  if (!current.text.empty()) {
    current.index = out.size();
    out.push_back(std::move(current));
  }
  return out;
}

TokenSet default_delimiters() {
  return {"，", "。", "？", "！", "；", ",", ".", "?", "!", ";"};
}

TemplatePack::TemplatePack(std::vector<TransformTemplate> templates)
    : templates_(std::move(templates)) {
  for (std::size_t i = 0; i < templates_.size(); ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      if (templates_[i].name == templates_[k].name) {
        throw ConfigError("duplicate template name '" + templates_[i].name + "'");
      }
    }
  }
}

TemplatePack TemplatePack::builtin() {
  // Keep in sync with core/data/templates.json.
  return TemplatePack({
      TransformTemplate::make("qa-zh", "问题：{question} 回答：", "{generated} 回答了问题：",
                              "{question}", "Long-form question answering (Chinese)"),
      TransformTemplate::make("qa-en", "Question:{question} Answer:",
                              "{generated} answers the question:", "{question}",
                              "Long-form question answering"),
      TransformTemplate::make("poem-zh", "《{title}》 作者：佚名 正文：",
                              "「{generated}」出自诗歌《", "{title}",
                              "Classical poem generation from a title (Chinese)"),
      TransformTemplate::make("poem-en", "Title:{title} Poem:",
                              "「{generated}」is a sentence in the poem titled", "{title}",
                              "Poem generation from a title"),
      TransformTemplate::make("essay", "Title:{title} Essay:",
                              "{generated} is a paragraph of an essay titled", "{title}",
                              "Essay generation from a title"),
      TransformTemplate::make("translation", "{source} translates into English as:",
                              "{generated} translates into Chinese as:", "{source}",
                              "Chinese to English translation"),
  });
}

TemplatePack TemplatePack::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("template pack must be a JSON array");
  std::vector<TransformTemplate> templates;
  for (const auto& entry : j) templates.push_back(TransformTemplate::from_json(entry));
  return TemplatePack(std::move(templates));
}

TemplatePack TemplatePack::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open template pack " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("template pack " + path.string() + " is not valid JSON: " + e.what());
  }
}

nlohmann::json TemplatePack::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : templates_) out.push_back(t.to_json());
  return out;
}

const TransformTemplate* TemplatePack::find(std::string_view name) const {
  for (const auto& t : templates_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const TransformTemplate& TemplatePack::get(std::string_view name) const {
  if (const auto* t = find(name)) return *t;
  throw ConfigError("unknown template '" + std::string(name) + "'");
}

}  // namespace inverse_decode
