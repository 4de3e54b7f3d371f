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
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "docie/chunker.hpp"
#include "docie/iob.hpp"
#include "docie/model.hpp"
#include "docie/protocol.hpp"
#include "docie/qa_convert.hpp"
#include "docie/rng.hpp"

namespace docie {

// Anything that maps a chunk to logits: an in-process mock or a remote
// process behind the wire protocol.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual protocol::ScoreResponse score(const protocol::ScoreRequest& request) = 0;

  // Control channel for training-schedule messages. Returns the reply line.
  virtual std::string control(const std::string& line) {
    const auto j = protocol::detail::parse_line(line);
    return protocol::serialize_error(j.value("request_id", std::string()), "control messages not supported");
  }
};

inline protocol::ScoreRequest make_request(const Document& doc, const Chunk& c, protocol::Mode mode,
                                           std::string request_id) {
  protocol::ScoreRequest r;
  r.request_id = std::move(request_id);
  r.mode = mode;
  r.doc_id = doc.id;
  r.chunk_start = c.start;
  for (std::size_t i = c.start; i < c.end; ++i) {
    const auto& t = doc.tokens[i];
    r.tokens.push_back({t.text, t.page, t.box});
  }
  return r;
}

inline protocol::ScoreRequest make_qa_request(const Document& doc, const Chunk& c, std::string question,
                                              std::string request_id) {
  auto r = make_request(doc, c, protocol::Mode::kQa, std::move(request_id));
  r.question = std::move(question);
  return r;
}

inline protocol::ScoreRequest make_tc_request(const Document& doc, const Chunk& c,
                                              std::vector<std::string> label_set, std::string request_id) {
  auto r = make_request(doc, c, protocol::Mode::kTc, std::move(request_id));
  r.label_set = std::move(label_set);
  return r;
}

namespace mock {

inline constexpr double kHit = 5.0;
inline constexpr double kMiss = -5.0;
inline constexpr double kNullAnswerable = -10.0;
inline constexpr double kNullAbsent = 10.0;

// Shared behavior of the built-in scorers: answers `schedule` messages from
// a scripted validation-f1 sequence so the schedule loop can be exercised
// without a model. The last value repeats once the script runs out.
class ScriptedTrainer : public Scorer {
 public:
  void set_f1_script(std::vector<double> script) { f1_script_ = std::move(script); }

  std::string control(const std::string& line) override {
    protocol::ScheduleMessage msg;
    try {
      msg = protocol::parse_schedule(line);
    } catch (const protocol::BridgeError& e) {
      return protocol::serialize_error("", e.what());
    }
    if (msg.stopped) return protocol::serialize_ack(msg.request_id);
    double f1 = 0.0;
    if (!f1_script_.empty()) {
      const std::size_t idx = msg.epoch == 0 ? 0 : msg.epoch - 1;
      f1 = f1_script_[std::min(idx, f1_script_.size() - 1)];
    }
    return protocol::serialize(protocol::EpochResult{msg.request_id, msg.epoch, f1});
  }

 private:
  std::vector<double> f1_script_;
};

// Emits logits that decode exactly to the gold annotation of the requested
// document: +5 on gold start/end (or gold tag), -5 elsewhere, and a null slot
// of -10/-10 when the chunk holds an answer, +10/+10 otherwise.
class GoldOracle : public ScriptedTrainer {
 public:
  explicit GoldOracle(std::shared_ptr<const Dataset> dataset,
                      std::string question_template = std::string(qa::kDefaultTemplate))
      : dataset_(std::move(dataset)) {
    auto index_split = [&](const Split& s) {
      for (const auto& d : s.documents) docs_.emplace(d.id, &d);
    };
    if (const auto* test = dataset_->find_split("test")) index_split(*test);
    for (const auto& s : dataset_->splits) index_split(s);
    for (const auto& l : dataset_->label_set) questions_.emplace(qa::label_to_question(l, question_template), l);
  }

  protocol::ScoreResponse score(const protocol::ScoreRequest& req) override {
    const Document& doc = document(req.doc_id);
    return respond(req, doc, doc.entities);
  }

 protected:
  const Document& document(const std::string& id) const {
    auto it = docs_.find(id);
    if (it == docs_.end()) throw std::out_of_range("unknown doc_id '" + id + "'");
    return *it->second;
  }

  protocol::ScoreResponse respond(const protocol::ScoreRequest& req, const Document& doc,
                                  const std::vector<Entity>& entities) const {
    if (req.chunk_start + req.tokens.size() > doc.tokens.size()) {
      throw std::out_of_range("chunk exceeds document '" + doc.id + "'");
    }
    const Chunk c{doc.id, 0, req.chunk_start, req.chunk_start + req.tokens.size()};
    protocol::ScoreResponse resp;
    resp.request_id = req.request_id;
    resp.mode = req.mode;
    const std::size_t n = req.tokens.size();
    if (req.mode == protocol::Mode::kQa) {
      resp.qa.start_logits.assign(n, kMiss);
      resp.qa.end_logits.assign(n, kMiss);
      std::optional<std::string> label;
      if (req.question) {
        auto it = questions_.find(*req.question);
        if (it != questions_.end()) label = it->second;
      }
      bool any = false;
      if (label) {
        for (const auto& span : remap(c, entities, BoundaryPolicy::kDrop)) {
          if (span.label != *label) continue;
          resp.qa.start_logits[span.start] = kHit;
          resp.qa.end_logits[span.start + span.len - 1] = kHit;
          any = true;
        }
      }
      resp.qa.null_start = resp.qa.null_end = any ? kNullAnswerable : kNullAbsent;
    } else {
      const auto labels = req.label_set.value_or(std::vector<std::string>{});
      std::vector<Entity> known;
      for (const auto& e : entities) {
        if (iob::label_index(labels, e.label)) known.push_back(e);
      }
      const auto tags = local_tags(c, known, labels, BoundaryPolicy::kMarkPartial);
      const std::size_t width = iob::tag_count(labels.size());
      resp.tag_logits.assign(n, std::vector<double>(width, kMiss));
      for (std::size_t i = 0; i < n; ++i) resp.tag_logits[i][iob::tag_index(tags.tags[i])] = kHit;
    }
    return resp;
  }

 private:
  std::shared_ptr<const Dataset> dataset_;
  std::map<std::string, const Document*, std::less<>> docs_;
  std::map<std::string, std::string, std::less<>> questions_;
};

// Gold oracle that forgets each gold entity with probability `drop_prob`,
// drawn from a stream keyed by (seed, doc_id, entity index).
class NoisyOracle : public GoldOracle {
 public:
  NoisyOracle(std::shared_ptr<const Dataset> dataset, double drop_prob, std::uint64_t seed,
              std::string question_template = std::string(qa::kDefaultTemplate))
      : GoldOracle(std::move(dataset), std::move(question_template)), drop_prob_(drop_prob), seed_(seed) {}

  protocol::ScoreResponse score(const protocol::ScoreRequest& req) override {
    const Document& doc = document(req.doc_id);
    return respond(req, doc, surviving(doc));
  }

  std::vector<Entity> surviving(const Document& doc) const {
    std::vector<Entity> kept;
    for (std::size_t i = 0; i < doc.entities.size(); ++i) {
      SplitMix64 rng(derive_seed(seed_, doc.id, i));
      if (!(rng.uniform() < drop_prob_)) kept.push_back(doc.entities[i]);
    }
    return kept;
  }

 private:
  double drop_prob_;
  std::uint64_t seed_;
};

// Emits the same value for every logit, null slot included.
class Constant : public ScriptedTrainer {
 public:
  explicit Constant(double value) : value_(value) {}

  protocol::ScoreResponse score(const protocol::ScoreRequest& req) override {
    protocol::ScoreResponse resp;
    resp.request_id = req.request_id;
    resp.mode = req.mode;
    const std::size_t n = req.tokens.size();
    if (req.mode == protocol::Mode::kQa) {
      resp.qa = {value_, value_, std::vector<double>(n, value_), std::vector<double>(n, value_)};
    } else {
      const std::size_t width = iob::tag_count(req.label_set ? req.label_set->size() : 0);
      resp.tag_logits.assign(n, std::vector<double>(width, value_));
    }
    return resp;
  }

 private:
  double value_;
};

}  // namespace mock
}  // namespace docie
