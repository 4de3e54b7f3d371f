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
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "docie/iob.hpp"
#include "docie/model.hpp"

namespace docie {

struct ChunkSpec {
  std::size_t window = 512;  // context tokens per chunk, question budget already subtracted
  std::size_t overlap = 128;

  void check() const {
    if (window < 1) throw std::invalid_argument("chunk window must be >= 1");
    if (overlap >= window) throw std::invalid_argument("chunk overlap must be < window");
  }

  friend bool operator==(const ChunkSpec&, const ChunkSpec&) = default;
};

// 128 tokens for windows of at least 256, half the window otherwise.
inline std::size_t default_overlap(std::size_t window) { return window >= 256 ? 128 : window / 2; }

inline ChunkSpec make_chunk_spec(std::size_t window) { return {window, default_overlap(window)}; }

struct Chunk {
  std::string doc_id;
  std::size_t index = 0;
  std::size_t start = 0;  // document token range [start, end)
  std::size_t end = 0;

  std::size_t size() const { return end - start; }

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

// Windows start at multiples of (window - overlap); the last one is clipped to
// the document end. An empty document yields no chunks.
inline std::vector<Chunk> chunk(std::string_view doc_id, std::size_t token_count, const ChunkSpec& spec) {
  spec.check();
  std::vector<Chunk> out;
  const std::size_t step = spec.window - spec.overlap;
  for (std::size_t start = 0, idx = 0; start < token_count; start += step, ++idx) {
    const std::size_t end = std::min(start + spec.window, token_count);
    out.push_back({std::string(doc_id), idx, start, end});
    if (end == token_count) break;
  }
  return out;
}

inline std::vector<Chunk> chunk(const Document& doc, const ChunkSpec& spec) {
  return chunk(doc.id, doc.tokens.size(), spec);
}

enum class BoundaryPolicy { kDrop, kClip, kMarkPartial };

inline BoundaryPolicy parse_boundary_policy(std::string_view s) {
  if (s == "drop") return BoundaryPolicy::kDrop;
  if (s == "clip") return BoundaryPolicy::kClip;
  if (s == "mark_partial") return BoundaryPolicy::kMarkPartial;
  throw std::invalid_argument("unknown boundary policy '" + std::string(s) + "'");
}

inline std::string to_string(BoundaryPolicy p) {
  switch (p) {
    case BoundaryPolicy::kDrop: return "drop";
    case BoundaryPolicy::kClip: return "clip";
    case BoundaryPolicy::kMarkPartial: return "mark_partial";
  }
  return "";
}

struct LocalSpan {
  std::string label;
  std::size_t start = 0;  // chunk-local token index
  std::size_t len = 0;
  bool clipped = false;   // intersected with the chunk, treated as a whole entity
  bool partial = false;   // intersected with the chunk, continues outside it

  friend bool operator==(const LocalSpan&, const LocalSpan&) = default;
};

// Entities fully inside the chunk map to local offsets; entities straddling a
// chunk boundary are dropped, clipped, or kept as marked partial spans.
inline std::vector<LocalSpan> remap(const Chunk& c, std::span<const Entity> entities,
                                    BoundaryPolicy policy = BoundaryPolicy::kDrop) {
  std::vector<LocalSpan> out;
  for (const auto& e : entities) {
    const std::size_t s = std::max(e.token_start, c.start);
    const std::size_t t = std::min(e.token_end(), c.end);
    if (s >= t) continue;
    const bool inside = e.token_start >= c.start && e.token_end() <= c.end;
    if (inside) {
      out.push_back({e.label, s - c.start, t - s, false, false});
      continue;
    }
    switch (policy) {
      case BoundaryPolicy::kDrop: break;
      case BoundaryPolicy::kClip: out.push_back({e.label, s - c.start, t - s, true, false}); break;
      case BoundaryPolicy::kMarkPartial: out.push_back({e.label, s - c.start, t - s, false, true}); break;
    }
  }
  return out;
}

// Chunk-local tag sequence. Straddling entities become O (drop), restart
// with B at the chunk edge (clip), or keep the raw I continuation
// (mark_partial).
inline iob::TagSequence local_tags(const Chunk& c, std::span<const Entity> entities,
                                   const std::vector<std::string>& label_set,
                                   BoundaryPolicy policy = BoundaryPolicy::kDrop) {
  iob::TagSequence seq;
  seq.label_set = label_set;
  seq.tags.assign(c.size(), iob::Tag::outside());
  for (const auto& e : entities) {
    const std::size_t s = std::max(e.token_start, c.start);
    const std::size_t t = std::min(e.token_end(), c.end);
    if (s >= t) continue;
    const bool inside = e.token_start >= c.start && e.token_end() <= c.end;
    if (!inside && policy == BoundaryPolicy::kDrop) continue;
    const auto l = iob::label_index(label_set, e.label);
    if (!l) throw std::invalid_argument("entity label '" + e.label + "' not in label set");
    for (std::size_t i = s; i < t; ++i) {
      const bool first = (i == s) && (e.token_start >= c.start || policy == BoundaryPolicy::kClip);
      seq.tags[i - c.start] = first ? iob::Tag::begin(*l) : iob::Tag::inside(*l);
    }
  }
  return seq;
}

}  // namespace docie
