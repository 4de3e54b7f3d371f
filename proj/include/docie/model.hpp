// Copyright 2026 The docie Authors. All Rights Reserved.
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

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "docie/utf8.hpp"

namespace docie {

// Normalized page coordinates, LayoutLM convention.
inline constexpr int kBoxScale = 1000;

struct Box {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  friend bool operator==(const Box&, const Box&) = default;
};

struct Token {
  std::string text;
  int page = 0;
  Box box;
  std::size_t char_start = 0;  // code points into Document::text
  std::size_t char_len = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

// A labeled contiguous run of word tokens.
struct Entity {
  std::string label;
  std::size_t token_start = 0;
  std::size_t token_len = 0;
  std::string text;

  std::size_t token_end() const { return token_start + token_len; }

  friend bool operator==(const Entity&, const Entity&) = default;
};

struct Document {
  std::string id;
  std::vector<Token> tokens;
  std::string text;
  std::vector<Entity> entities;

  friend bool operator==(const Document&, const Document&) = default;
};

struct Split {
  std::string name;
  std::vector<Document> documents;

  friend bool operator==(const Split&, const Split&) = default;
};

struct Dataset {
  std::string name;
  std::vector<std::string> label_set;
  std::vector<Split> splits;

  const Split* find_split(std::string_view split_name) const {
    for (const auto& s : splits) {
      if (s.name == split_name) return &s;
    }
    return nullptr;
  }

  Split* find_split(std::string_view split_name) {
    for (auto& s : splits) {
      if (s.name == split_name) return &s;
    }
    return nullptr;
  }

  const Split& split(std::string_view split_name) const {
    if (const auto* s = find_split(split_name)) return *s;
    throw std::out_of_range("dataset '" + name + "' has no split '" + std::string(split_name) + "'");
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Canonical entity surface text: covered token texts joined by one space.
inline std::string join_tokens(std::span<const Token> tokens, std::size_t start, std::size_t len) {
  std::string out;
  for (std::size_t i = start; i < start + len && i < tokens.size(); ++i) {
    if (i > start) out.push_back(' ');
    out += tokens[i].text;
  }
  return out;
}

inline std::string entity_text(const Document& doc, std::size_t start, std::size_t len) {
  return join_tokens(doc.tokens, start, len);
}

struct CharSpan {
  std::size_t start = 0;
  std::size_t len = 0;

  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

// Character span of an entity in the document text, first token start to
// last token end.
inline CharSpan entity_char_span(const Document& doc, const Entity& e) {
  const auto& first = doc.tokens.at(e.token_start);
  const auto& last = doc.tokens.at(e.token_end() - 1);
  return {first.char_start, last.char_start + last.char_len - first.char_start};
}

// Builds a document whose text is the single-space join of `words`.
inline Document make_document(std::string id, const std::vector<std::string>& words, std::vector<Box> boxes = {},
                              std::vector<int> pages = {}) {
  Document doc;
  doc.id = std::move(id);
  std::size_t cp = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) {
      doc.text.push_back(' ');
      ++cp;
    }
    Token t;
    t.text = words[i];
    t.char_start = cp;
    t.char_len = utf8::length(words[i]);
    if (i < boxes.size()) t.box = boxes[i];
    if (i < pages.size()) t.page = pages[i];
    doc.text += words[i];
    cp += t.char_len;
    doc.tokens.push_back(std::move(t));
  }
  return doc;
}

inline Entity make_entity(const Document& doc, std::string label, std::size_t start, std::size_t len) {
  return Entity{std::move(label), start, len, entity_text(doc, start, len)};
}

struct Violation {
  std::string split;
  std::string doc_id;
  std::string field;
  std::string rule;

  std::string to_string() const {
    std::string s;
    if (!split.empty()) s += split + "/";
    s += doc_id.empty() ? std::string("<dataset>") : doc_id;
    return s + ": " + field + ": " + rule;
  }

  friend bool operator==(const Violation&, const Violation&) = default;
};

namespace detail {

inline void validate_document(const Document& doc, const std::set<std::string, std::less<>>& labels,
                              const std::string& split, std::vector<Violation>& out) {
  auto add = [&](std::string field, std::string rule) {
    out.push_back({split, doc.id, std::move(field), std::move(rule)});
  };
  const std::size_t text_len = utf8::length(doc.text);
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const Token& t = doc.tokens[i];
    const std::string field = "tokens[" + std::to_string(i) + "]";
    const Box& b = t.box;
    if (b.x0 < 0 || b.y0 < 0 || b.x1 > kBoxScale || b.y1 > kBoxScale || b.x0 > b.x1 || b.y0 > b.y1) {
      add(field + ".box", "box outside normalized range");
    }
    if (t.page < 0) add(field + ".page", "negative page");
    if (t.char_start + t.char_len > text_len) {
      add(field + ".char_start", "char range outside text");
    } else if (utf8::substr(doc.text, t.char_start, t.char_len) != t.text) {
      add(field + ".text", "token text differs from covered text");
    }
    if (i > 0 && t.char_start < prev_end) add(field + ".char_start", "char ranges overlap or decrease");
    prev_end = t.char_start + t.char_len;
  }

  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t i = 0; i < doc.entities.size(); ++i) {
    const Entity& e = doc.entities[i];
    const std::string field = "entities[" + std::to_string(i) + "]";
    if (!labels.contains(e.label)) add(field + ".label", "label not in label set");
    if (e.token_len == 0) {
      add(field + ".token_len", "empty entity");
      continue;
    }
    if (e.token_end() > doc.tokens.size()) {
      add(field + ".token_start", "span out of range");
      continue;
    }
    if (e.text != entity_text(doc, e.token_start, e.token_len)) {
      add(field + ".text", "text differs from joined token texts");
    }
    ranges.emplace_back(e.token_start, i);
  }
  // One violation per intersecting pair.
  std::sort(ranges.begin(), ranges.end());
  for (std::size_t a = 0; a < ranges.size(); ++a) {
    const Entity& ea = doc.entities[ranges[a].second];
    for (std::size_t b = a + 1; b < ranges.size() && ranges[b].first < ea.token_end(); ++b) {
      add("entities[" + std::to_string(ranges[b].second) + "]", "overlap");
    }
  }
}

}  // namespace detail

inline std::vector<Violation> validate(const Document& doc, std::span<const std::string> label_set,
                                       const std::string& split = {}) {
  std::set<std::string, std::less<>> labels(label_set.begin(), label_set.end());
  std::vector<Violation> out;
  detail::validate_document(doc, labels, split, out);
  return out;
}

inline std::vector<Violation> validate(const Dataset& dataset) {
  std::vector<Violation> out;
  std::set<std::string, std::less<>> labels;
  for (const auto& l : dataset.label_set) {
    if (!labels.insert(l).second) out.push_back({"", "", "label_set", "duplicate label '" + l + "'"});
  }
  std::set<std::string, std::less<>> split_names;
  for (const auto& split : dataset.splits) {
    if (!split_names.insert(split.name).second) {
      out.push_back({split.name, "", "splits", "duplicate split name"});
    }
    std::set<std::string, std::less<>> ids;
    for (const auto& doc : split.documents) {
      if (!ids.insert(doc.id).second) out.push_back({split.name, doc.id, "id", "duplicate document id"});
      detail::validate_document(doc, labels, split.name, out);
    }
  }
  return out;
}

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : std::runtime_error(summarize(violations)), violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const { return violations_; }

 private:
  static std::string summarize(const std::vector<Violation>& v) {
    std::string s = std::to_string(v.size()) + " validation violation(s)";
    for (std::size_t i = 0; i < v.size() && i < 5; ++i) s += "\n  " + v[i].to_string();
    if (v.size() > 5) s += "\n  ...";
    return s;
  }

  std::vector<Violation> violations_;
};

inline std::size_t entity_count(const Split& split) {
  std::size_t n = 0;
  for (const auto& d : split.documents) n += d.entities.size();
  return n;
}

}  // namespace docie
