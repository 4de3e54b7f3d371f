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
#include <string>
#include <span>
#include <string_view>
#include <tuple>
#include <vector>

#include "docie/chunker.hpp"
#include "docie/decode.hpp"
#include "docie/iob.hpp"
#include "docie/metrics.hpp"
#include "docie/model.hpp"
#include "docie/protocol.hpp"
#include "docie/qa_convert.hpp"
#include "docie/scorers.hpp"

namespace docie {

// How many answers a QA question may return.
enum class TopKMode {
  kGoldCount,  // k = number of gold answers for the (document, label), at least 1
  kFixed,      // k = ExtractConfig::k
};

inline TopKMode parse_top_k_mode(std::string_view s) {
  if (s == "gold_count") return TopKMode::kGoldCount;
  if (s == "fixed") return TopKMode::kFixed;
  throw std::invalid_argument("unknown top-k mode '" + std::string(s) + "'");
}

inline std::string to_string(TopKMode m) { return m == TopKMode::kGoldCount ? "gold_count" : "fixed"; }

struct PipelineSettings {
  protocol::Mode mode = protocol::Mode::kQa;
  ChunkSpec chunk{512, 128};
  ExtractConfig extract;
  TopKMode top_k = TopKMode::kGoldCount;
  iob::RepairPolicy repair = iob::RepairPolicy::begin_on_orphan();
  MatchMode match = MatchMode::kText;
  std::string question_template = std::string(qa::kDefaultTemplate);
};

inline std::size_t gold_count(const Document& doc, std::string_view label) {
  return static_cast<std::size_t>(
      std::count_if(doc.entities.begin(), doc.entities.end(), [&](const Entity& e) { return e.label == label; }));
}

struct ChunkQA {
  std::size_t chunk_start = 0;
  QALogits logits;
};

struct ChunkTags {
  std::size_t chunk_start = 0;
  std::vector<std::vector<double>> tag_logits;
};

// Top-k spans per chunk, merged across chunks (best score wins), then the
// top-k of the merged set.
inline std::vector<PredictedSpan> decode_qa_chunks(const std::string& label, std::span<const ChunkQA> chunks,
                                                   const ExtractConfig& cfg) {
  std::vector<ChunkPredictions> per_chunk;
  for (const auto& c : chunks) {
    ChunkPredictions cp{c.chunk_start, {}};
    for (const auto& span : extract_spans(c.logits, cfg)) {
      cp.spans.push_back({label, span.token_start, span.length(), span.score});
    }
    per_chunk.push_back(std::move(cp));
  }
  auto merged = aggregate(per_chunk, AggregateRule::kHighestScore);
  std::stable_sort(merged.begin(), merged.end(),
                   [](const PredictedSpan& a, const PredictedSpan& b) { return a.score > b.score; });
  if (merged.size() > cfg.k) merged.resize(cfg.k);
  return merged;
}

inline std::vector<PredictedSpan> decode_tc_chunks(const std::vector<std::string>& labels,
                                                   std::span<const ChunkTags> chunks,
                                                   const iob::RepairPolicy& policy) {
  std::vector<ChunkPredictions> per_chunk;
  for (const auto& c : chunks) {
    ChunkPredictions cp{c.chunk_start, {}};
    for (const auto& e : decode_tc(c.tag_logits, labels, policy)) {
      cp.spans.push_back({e.label, e.token_start, e.token_len, 0.0});
    }
    per_chunk.push_back(std::move(cp));
  }
  return aggregate(per_chunk, AggregateRule::kLongest);
}

inline void sort_by_position(std::vector<PredictedSpan>& spans) {
  std::sort(spans.begin(), spans.end(), [](const PredictedSpan& a, const PredictedSpan& b) {
    return std::tie(a.token_start, a.label, a.token_len) < std::tie(b.token_start, b.label, b.token_len);
  });
}

inline ExtractConfig extract_config_for(const Document& doc, const std::string& label, const PipelineSettings& s) {
  ExtractConfig cfg = s.extract;
  if (s.top_k == TopKMode::kGoldCount) cfg.k = std::max<std::size_t>(1, gold_count(doc, label));
  return cfg;
}

// Asks every label's question on every chunk of the document.
inline std::vector<PredictedSpan> predict_qa(const Document& doc, const std::vector<std::string>& labels,
                                             Scorer& scorer, const PipelineSettings& s,
                                             const std::string& id_prefix) {
  const auto chunks = chunk(doc, s.chunk);
  std::vector<PredictedSpan> out;
  for (const auto& label : labels) {
    const std::string question = qa::label_to_question(label, s.question_template);
    std::vector<ChunkQA> scored;
    for (const auto& c : chunks) {
      const auto req =
          make_qa_request(doc, c, question, id_prefix + "/" + doc.id + "/" + label + "/" + std::to_string(c.index));
      auto resp = scorer.score(req);
      protocol::check_response(req, resp);
      scored.push_back({c.start, std::move(resp.qa)});
    }
    const auto spans = decode_qa_chunks(label, scored, extract_config_for(doc, label, s));
    out.insert(out.end(), spans.begin(), spans.end());
  }
  sort_by_position(out);
  return out;
}

inline std::vector<PredictedSpan> predict_tc(const Document& doc, const std::vector<std::string>& labels,
                                             Scorer& scorer, const PipelineSettings& s,
                                             const std::string& id_prefix) {
  std::vector<ChunkTags> scored;
  for (const auto& c : chunk(doc, s.chunk)) {
    const auto req = make_tc_request(doc, c, labels, id_prefix + "/" + doc.id + "/" + std::to_string(c.index));
    auto resp = scorer.score(req);
    protocol::check_response(req, resp);
    scored.push_back({c.start, std::move(resp.tag_logits)});
  }
  return decode_tc_chunks(labels, scored, s.repair);
}

inline std::vector<PredictedSpan> predict(const Document& doc, const std::vector<std::string>& labels, Scorer& scorer,
                                          const PipelineSettings& s, const std::string& id_prefix) {
  return s.mode == protocol::Mode::kQa ? predict_qa(doc, labels, scorer, s, id_prefix)
                                       : predict_tc(doc, labels, scorer, s, id_prefix);
}

struct Evaluation {
  std::vector<std::string> doc_ids;
  std::vector<std::vector<Entity>> predictions;
  std::vector<std::vector<Entity>> gold;
  Report report;
};

inline std::vector<Entity> gold_for(const Document& doc, const std::vector<std::string>& labels) {
  std::vector<Entity> out;
  for (const auto& e : doc.entities) {
    if (std::find(labels.begin(), labels.end(), e.label) != labels.end()) out.push_back(e);
  }
  return out;
}

// Full pipeline over one split: chunk, score, decode, aggregate, then score
// against the gold entities restricted to `labels`.
inline Evaluation evaluate(const Split& split, const std::vector<std::string>& labels, Scorer& scorer,
                           const PipelineSettings& s, const std::string& id_prefix = "eval") {
  Evaluation ev;
  for (const auto& doc : split.documents) {
    const auto spans = predict(doc, labels, scorer, s, id_prefix);
    ev.doc_ids.push_back(doc.id);
    ev.predictions.push_back(to_entities(doc, spans));
    ev.gold.push_back(gold_for(doc, labels));
  }
  ev.report = score(ev.predictions, ev.gold, labels, s.match);
  return ev;
}

}  // namespace docie
