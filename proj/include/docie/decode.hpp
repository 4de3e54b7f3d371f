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
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "docie/iob.hpp"
#include "docie/model.hpp"

namespace docie {

// Start/end logits for one chunk's context tokens plus the null slot
// (the classifier's "no answer" position).
struct QALogits {
  double null_start = 0.0;
  double null_end = 0.0;
  std::vector<double> start_logits;
  std::vector<double> end_logits;

  std::size_t size() const { return start_logits.size(); }

  void check() const {
    if (start_logits.size() != end_logits.size()) {
      throw std::invalid_argument("start/end logit lengths differ");
    }
  }

  friend bool operator==(const QALogits&, const QALogits&) = default;
};

struct ScoredSpan {
  std::size_t token_start = 0;
  std::size_t token_end = 0;  // inclusive
  double score = 0.0;
  std::string text;

  std::size_t length() const { return token_end - token_start + 1; }

  friend bool operator==(const ScoredSpan&, const ScoredSpan&) = default;
};

enum class Answerability {
  kRawPositive,  // start + end > 0
  kNullDiff,     // start + end > null_start + null_end
};

inline Answerability parse_answerability(std::string_view s) {
  if (s == "raw_positive") return Answerability::kRawPositive;
  if (s == "null_diff") return Answerability::kNullDiff;
  throw std::invalid_argument("unknown answerability mode '" + std::string(s) + "'");
}

inline std::string to_string(Answerability a) { return a == Answerability::kRawPositive ? "raw_positive" : "null_diff"; }

struct ExtractConfig {
  std::size_t k = 1;
  std::size_t max_answer_len = 100;
  Answerability answerability = Answerability::kRawPositive;
  bool allow_overlap = false;

  void check() const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (max_answer_len < 1) throw std::invalid_argument("max_answer_len must be >= 1");
  }
};

inline bool spans_overlap(std::size_t s0, std::size_t e0, std::size_t s1, std::size_t e1) {
  return s0 <= e1 && s1 <= e0;
}

// Top-k answer spans. Every (s, e) with s <= e < s + max_answer_len is scored
// start[s] + end[e]; candidates failing the answerability test are dropped,
// the rest ranked by score (ties by s, then e), optionally skipping spans
// that overlap an earlier pick. An empty result means abstain.
inline std::vector<ScoredSpan> extract_spans(const QALogits& logits, const ExtractConfig& cfg,
                                             std::span<const Token> tokens = {}) {
  logits.check();
  cfg.check();
  const std::size_t n = logits.size();
  const double threshold =
      cfg.answerability == Answerability::kRawPositive ? 0.0 : logits.null_start + logits.null_end;

  std::vector<ScoredSpan> cands;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t last = std::min(n - 1, s + cfg.max_answer_len - 1);
    for (std::size_t e = s; e <= last; ++e) {
      const double score = logits.start_logits[s] + logits.end_logits[e];
      if (score > threshold) cands.push_back({s, e, score, {}});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const ScoredSpan& a, const ScoredSpan& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.token_start != b.token_start) return a.token_start < b.token_start;
    return a.token_end < b.token_end;
  });

  std::vector<ScoredSpan> out;
  for (auto& c : cands) {
    if (out.size() == cfg.k) break;
    if (!cfg.allow_overlap) {
      const bool clash = std::any_of(out.begin(), out.end(), [&](const ScoredSpan& p) {
        return spans_overlap(c.token_start, c.token_end, p.token_start, p.token_end);
      });
      if (clash) continue;
    }
    if (!tokens.empty()) c.text = join_tokens(tokens, c.token_start, c.length());
    out.push_back(std::move(c));
  }
  return out;
}

// Per-token argmax over the flat IOB tag layout (ties go to the lowest tag
// index), then IOB decoding with the given repair policy.
inline iob::TagSequence argmax_tags(const std::vector<std::vector<double>>& token_logits,
                                    const std::vector<std::string>& label_set) {
  const std::size_t width = iob::tag_count(label_set.size());
  iob::TagSequence seq;
  seq.label_set = label_set;
  seq.tags.reserve(token_logits.size());
  for (std::size_t i = 0; i < token_logits.size(); ++i) {
    const auto& row = token_logits[i];
    if (row.size() != width) {
      throw std::invalid_argument("token " + std::to_string(i) + ": expected " + std::to_string(width) +
                                  " tag logits, got " + std::to_string(row.size()));
    }
    std::size_t best = 0;
    for (std::size_t t = 1; t < width; ++t) {
      if (row[t] > row[best]) best = t;
    }
    seq.tags.push_back(iob::tag_from_index(best));
  }
  return seq;
}

inline std::vector<Entity> decode_tc(const std::vector<std::vector<double>>& token_logits,
                                     const std::vector<std::string>& label_set,
                                     const iob::RepairPolicy& policy = iob::RepairPolicy::begin_on_orphan(),
                                     std::span<const Token> tokens = {}) {
  return iob::decode(argmax_tags(token_logits, label_set), policy, tokens);
}

// ---------------------------------------------------------------------------
// Cross-chunk aggregation

struct PredictedSpan {
  std::string label;
  std::size_t token_start = 0;
  std::size_t token_len = 0;
  double score = 0.0;

  std::size_t token_end() const { return token_start + token_len; }

  friend bool operator==(const PredictedSpan&, const PredictedSpan&) = default;
};

struct ChunkPredictions {
  std::size_t chunk_start = 0;  // document offset of the chunk's first token
  std::vector<PredictedSpan> spans;  // chunk-local coordinates
};

enum class AggregateRule {
  kHighestScore,  // QA
  kLongest,       // TC
};

// Maps chunk-local predictions to document coordinates, merges duplicates
// (keeping the best score) and resolves same-label overlaps by the rule.
// Output is sorted by (start, label, length) and has no same-label overlaps.
inline std::vector<PredictedSpan> aggregate(std::span<const ChunkPredictions> chunks, AggregateRule rule) {
  std::map<std::tuple<std::string, std::size_t, std::size_t>, double> unique;
  for (const auto& c : chunks) {
    for (const auto& p : c.spans) {
      if (p.token_len == 0) continue;
      const auto key = std::make_tuple(p.label, c.chunk_start + p.token_start, p.token_len);
      auto [it, inserted] = unique.emplace(key, p.score);
      if (!inserted) it->second = std::max(it->second, p.score);
    }
  }
  std::vector<PredictedSpan> cands;
  cands.reserve(unique.size());
  for (const auto& [key, score] : unique) cands.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), score});

  std::stable_sort(cands.begin(), cands.end(), [rule](const PredictedSpan& a, const PredictedSpan& b) {
    if (rule == AggregateRule::kHighestScore) {
      if (a.score != b.score) return a.score > b.score;
      if (a.token_len != b.token_len) return a.token_len > b.token_len;
    } else {
      if (a.token_len != b.token_len) return a.token_len > b.token_len;
      if (a.score != b.score) return a.score > b.score;
    }
    return a.token_start < b.token_start;
  });

  std::vector<PredictedSpan> kept;
  for (auto& c : cands) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](const PredictedSpan& k) {
      return k.label == c.label && c.token_start < k.token_end() && k.token_start < c.token_end();
    });
    if (!clash) kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end(), [](const PredictedSpan& a, const PredictedSpan& b) {
    return std::tie(a.token_start, a.label, a.token_len) < std::tie(b.token_start, b.label, b.token_len);
  });
  return kept;
}

inline std::vector<Entity> to_entities(const Document& doc, std::span<const PredictedSpan> spans) {
  std::vector<Entity> out;
  out.reserve(spans.size());
  for (const auto& s : spans) out.push_back(make_entity(doc, s.label, s.token_start, s.token_len));
  return out;
}

}  // namespace docie
