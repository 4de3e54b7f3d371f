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

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "docie/model.hpp"

namespace docie::iob {

enum class TagKind { kOutside, kBegin, kInside };

struct Tag {
  TagKind kind = TagKind::kOutside;
  std::size_t label = 0;  // index into the label set; ignored for O

  static Tag outside() { return {}; }
  static Tag begin(std::size_t l) { return {TagKind::kBegin, l}; }
  static Tag inside(std::size_t l) { return {TagKind::kInside, l}; }

  friend bool operator==(const Tag& a, const Tag& b) {
    if (a.kind != b.kind) return false;
    return a.kind == TagKind::kOutside || a.label == b.label;
  }
};

// Flat tag index used by token-classification logits: 0 = O, then
// B-l, I-l pairs in label-set order.
inline std::size_t tag_index(const Tag& t) {
  switch (t.kind) {
    case TagKind::kOutside: return 0;
    case TagKind::kBegin: return 1 + 2 * t.label;
    case TagKind::kInside: return 2 + 2 * t.label;
  }
  return 0;
}

inline Tag tag_from_index(std::size_t idx) {
  if (idx == 0) return Tag::outside();
  return (idx % 2 == 1) ? Tag::begin((idx - 1) / 2) : Tag::inside((idx - 2) / 2);
}

inline std::size_t tag_count(std::size_t num_labels) { return 2 * num_labels + 1; }

class IobError : public std::runtime_error {
 public:
  IobError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct TagSequence {
  std::vector<Tag> tags;
  std::vector<std::string> label_set;

  std::string tag_string(std::size_t i) const {
    const Tag& t = tags.at(i);
    switch (t.kind) {
      case TagKind::kOutside: return "O";
      case TagKind::kBegin: return "B-" + label_set.at(t.label);
      case TagKind::kInside: return "I-" + label_set.at(t.label);
    }
    return "O";
  }

  std::vector<std::string> strings() const {
    std::vector<std::string> out;
    out.reserve(tags.size());
    for (std::size_t i = 0; i < tags.size(); ++i) out.push_back(tag_string(i));
    return out;
  }

  static TagSequence parse(std::span<const std::string> tags, std::vector<std::string> label_set) {
    TagSequence seq;
    seq.label_set = std::move(label_set);
    for (std::size_t i = 0; i < tags.size(); ++i) {
      const std::string& s = tags[i];
      if (s == "O") {
        seq.tags.push_back(Tag::outside());
        continue;
      }
      if (s.size() < 3 || (s[0] != 'B' && s[0] != 'I') || s[1] != '-') {
        throw IobError("malformed tag '" + s + "'", i);
      }
      const std::string label = s.substr(2);
      std::optional<std::size_t> idx;
      for (std::size_t l = 0; l < seq.label_set.size(); ++l) {
        if (seq.label_set[l] == label) idx = l;
      }
      if (!idx) throw IobError("tag label '" + label + "' not in label set", i);
      seq.tags.push_back(s[0] == 'B' ? Tag::begin(*idx) : Tag::inside(*idx));
    }
    return seq;
  }

  friend bool operator==(const TagSequence&, const TagSequence&) = default;
};

enum class RepairKind { kStrict, kBeginOnOrphan, kBridge };

struct RepairPolicy {
  RepairKind kind = RepairKind::kBeginOnOrphan;
  std::size_t max_gap = 0;  // bridge only

  static RepairPolicy strict() { return {RepairKind::kStrict, 0}; }
  static RepairPolicy begin_on_orphan() { return {RepairKind::kBeginOnOrphan, 0}; }
  static RepairPolicy bridge(std::size_t gap) { return {RepairKind::kBridge, gap}; }

  std::string name() const {
    switch (kind) {
      case RepairKind::kStrict: return "strict";
      case RepairKind::kBeginOnOrphan: return "begin_on_orphan";
      case RepairKind::kBridge: return "bridge(" + std::to_string(max_gap) + ")";
    }
    return "";
  }

  // Accepts "strict", "begin_on_orphan", "bridge(N)" and "bridge:N".
  static RepairPolicy parse(std::string_view s) {
    if (s == "strict") return strict();
    if (s == "begin_on_orphan") return begin_on_orphan();
    if (s.starts_with("bridge")) {
      std::string_view rest = s.substr(6);
      if (rest.starts_with("(") && rest.ends_with(")")) {
        rest = rest.substr(1, rest.size() - 2);
      } else if (rest.starts_with(":")) {
        rest = rest.substr(1);
      } else {
        throw std::invalid_argument("malformed repair policy '" + std::string(s) + "'");
      }
      std::size_t gap = 0;
      if (rest.empty()) throw std::invalid_argument("bridge policy needs a gap");
      for (char c : rest) {
        if (c < '0' || c > '9') throw std::invalid_argument("malformed bridge gap '" + std::string(rest) + "'");
        gap = gap * 10 + static_cast<std::size_t>(c - '0');
      }
      return bridge(gap);
    }
    throw std::invalid_argument("unknown repair policy '" + std::string(s) + "'");
  }

  friend bool operator==(const RepairPolicy&, const RepairPolicy&) = default;
};

inline std::optional<std::size_t> label_index(std::span<const std::string> label_set, std::string_view label) {
  for (std::size_t i = 0; i < label_set.size(); ++i) {
    if (label_set[i] == label) return i;
  }
  return std::nullopt;
}

inline TagSequence encode(std::size_t token_count, std::span<const Entity> entities,
                          std::vector<std::string> label_set) {
  TagSequence seq;
  seq.label_set = std::move(label_set);
  seq.tags.assign(token_count, Tag::outside());
  std::vector<bool> used(token_count, false);
  for (const Entity& e : entities) {
    auto l = label_index(seq.label_set, e.label);
    if (!l) throw std::invalid_argument("entity label '" + e.label + "' not in label set");
    if (e.token_len == 0 || e.token_end() > token_count) {
      throw IobError("entity span out of range", e.token_start);
    }
    for (std::size_t i = e.token_start; i < e.token_end(); ++i) {
      if (used[i]) throw IobError("overlapping entities", i);
      used[i] = true;
      seq.tags[i] = (i == e.token_start) ? Tag::begin(*l) : Tag::inside(*l);
    }
  }
  return seq;
}

inline TagSequence encode(const Document& doc, std::vector<std::string> label_set) {
  return encode(doc.tokens.size(), doc.entities, std::move(label_set));
}

// Decodes tags into entities. Text is filled from `tokens` when provided.
inline std::vector<Entity> decode(const TagSequence& seq, const RepairPolicy& policy,
                                  std::span<const Token> tokens = {}) {
  std::vector<Entity> out;
  const auto& tags = seq.tags;
  bool open = false;
  std::size_t open_label = 0;
  std::size_t open_start = 0;
  std::size_t open_end = 0;  // exclusive

  auto close = [&] {
    if (!open) return;
    Entity e{seq.label_set.at(open_label), open_start, open_end - open_start, {}};
    if (!tokens.empty()) e.text = join_tokens(tokens, e.token_start, e.token_len);
    out.push_back(std::move(e));
    open = false;
  };
  auto start = [&](std::size_t label, std::size_t at) {
    close();
    open = true;
    open_label = label;
    open_start = at;
    open_end = at + 1;
  };

  std::size_t i = 0;
  while (i < tags.size()) {
    const Tag& t = tags[i];
    if (t.kind == TagKind::kOutside) {
      if (open && policy.kind == RepairKind::kBridge) {
        std::size_t j = i;
        while (j < tags.size() && tags[j].kind == TagKind::kOutside) ++j;
        const std::size_t gap = j - i;
        if (j < tags.size() && gap <= policy.max_gap && tags[j].kind == TagKind::kInside &&
            tags[j].label == open_label) {
          open_end = j + 1;
          i = j + 1;
          continue;
        }
      }
      close();
      ++i;
      continue;
    }
    if (t.label >= seq.label_set.size()) throw IobError("tag label index out of range", i);
    if (t.kind == TagKind::kBegin) {
      start(t.label, i);
    } else if (open && open_label == t.label) {
      open_end = i + 1;
    } else {
      if (policy.kind == RepairKind::kStrict) throw IobError("orphan I tag", i);
      start(t.label, i);
    }
    ++i;
  }
  close();
  return out;
}

}  // namespace docie::iob
