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
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "docie/decode.hpp"
#include "docie/iob.hpp"
#include "docie/model.hpp"

// Scorer wire protocol. Every message is a single-line UTF-8 JSON object
// carrying "protocol": 1 and a "kind":
//
//   score_request   harness -> scorer   one chunk to score
//   score_response  scorer -> harness   word-level logits for that chunk
//   schedule        harness -> scorer   learning-rate decision for the next epoch
//   epoch_result    scorer -> harness   validation f1 after an epoch
//   ack             scorer -> harness   acknowledges a final (stopped) schedule
//   error           scorer -> harness   request rejected
//
// Logits are per word token: the scorer pools its sub-word pieces itself.
namespace docie::protocol {

using json = nlohmann::json;

inline constexpr int kVersion = 1;

class BridgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The scorer could not be reached or hung up.
class TransportError : public BridgeError {
 public:
  using BridgeError::BridgeError;
};

// A message did not match the protocol schema.
class SchemaError : public BridgeError {
 public:
  using BridgeError::BridgeError;
};

// A response's logit counts disagree with its request.
class LengthMismatchError : public BridgeError {
 public:
  using BridgeError::BridgeError;
};

// The scorer answered with an error message.
class RemoteError : public BridgeError {
 public:
  using BridgeError::BridgeError;
};

enum class Mode { kQa, kTc };

inline std::string to_string(Mode m) { return m == Mode::kQa ? "qa" : "tc"; }

inline Mode parse_mode(std::string_view s) {
  if (s == "qa") return Mode::kQa;
  if (s == "tc") return Mode::kTc;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

struct WireToken {
  std::string text;
  int page = 0;
  Box box;

  friend bool operator==(const WireToken&, const WireToken&) = default;
};

struct ScoreRequest {
  std::string request_id;
  Mode mode = Mode::kQa;
  std::string doc_id;
  std::size_t chunk_start = 0;  // document index of tokens[0]
  std::vector<WireToken> tokens;
  std::optional<std::string> question;                 // qa only
  std::optional<std::vector<std::string>> label_set;   // tc only

  friend bool operator==(const ScoreRequest&, const ScoreRequest&) = default;
};

struct ScoreResponse {
  std::string request_id;
  Mode mode = Mode::kQa;
  QALogits qa;                                 // qa only
  std::vector<std::vector<double>> tag_logits;  // tc only, one row per token over O, B-l, I-l, ...

  friend bool operator==(const ScoreResponse&, const ScoreResponse&) = default;
};

struct ScheduleMessage {
  std::string request_id;
  std::size_t epoch = 0;
  double lr = 0.0;
  std::size_t halvings = 0;
  bool stopped = false;
  json options = json::object();  // opaque training settings passed through

  friend bool operator==(const ScheduleMessage&, const ScheduleMessage&) = default;
};

struct EpochResult {
  std::string request_id;
  std::size_t epoch = 0;
  double val_f1 = 0.0;

  friend bool operator==(const EpochResult&, const EpochResult&) = default;
};

namespace detail {

inline void require_keys(const json& j, std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional_keys = {}) {
  std::set<std::string, std::less<>> allowed;
  for (const char* k : required) {
    if (!j.contains(k)) throw SchemaError(std::string("missing field '") + k + "'");
    allowed.insert(k);
  }
  for (const char* k : optional_keys) allowed.insert(k);
  for (const auto& [k, v] : j.items()) {
    if (!allowed.contains(k)) throw SchemaError("unexpected field '" + k + "'");
  }
}

template <typename T>
T field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("field '") + key + "': " + e.what());
  }
}

inline json parse_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed message: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("message is not an object");
  if (!j.contains("protocol") || !j["protocol"].is_number_integer() || j["protocol"].get<int>() != kVersion) {
    throw SchemaError("missing or unsupported protocol version");
  }
  if (!j.contains("kind") || !j["kind"].is_string()) throw SchemaError("missing message kind");
  return j;
}

inline std::vector<double> number_array(const json& j, const char* key) {
  const json& a = j.at(key);
  if (!a.is_array()) throw SchemaError(std::string("field '") + key + "' must be an array");
  std::vector<double> out;
  out.reserve(a.size());
  for (const auto& v : a) {
    if (!v.is_number()) throw SchemaError(std::string("field '") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace detail

inline std::string kind_of(std::string_view line) { return detail::parse_line(line).at("kind").get<std::string>(); }

// ---------------------------------------------------------------------------

inline json to_json(const ScoreRequest& r) {
  json tokens = json::array();
  for (const auto& t : r.tokens) {
    tokens.push_back(json{{"text", t.text}, {"page", t.page}, {"box", json::array({t.box.x0, t.box.y0, t.box.x1, t.box.y1})}});
  }
  json j{{"protocol", kVersion}, {"kind", "score_request"}, {"request_id", r.request_id},
         {"mode", to_string(r.mode)}, {"doc_id", r.doc_id}, {"chunk_start", r.chunk_start},
         {"tokens", tokens}};
  if (r.question) j["question"] = *r.question;
  if (r.label_set) j["label_set"] = *r.label_set;
  return j;
}

inline std::string serialize(const ScoreRequest& r) { return to_json(r).dump(); }

inline ScoreRequest request_from_json(const json& j) {
  if (detail::field<std::string>(j, "kind") != "score_request") throw SchemaError("expected a score_request");
  detail::require_keys(j, {"protocol", "kind", "request_id", "mode", "doc_id", "chunk_start", "tokens"},
                       {"question", "label_set"});
  ScoreRequest r;
  r.request_id = detail::field<std::string>(j, "request_id");
  try {
    r.mode = parse_mode(detail::field<std::string>(j, "mode"));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  r.doc_id = detail::field<std::string>(j, "doc_id");
  r.chunk_start = detail::field<std::size_t>(j, "chunk_start");
  if (!j["tokens"].is_array()) throw SchemaError("field 'tokens' must be an array");
  for (const auto& t : j["tokens"]) {
    if (!t.is_object()) throw SchemaError("token must be an object");
    detail::require_keys(t, {"text", "page", "box"});
    WireToken w{detail::field<std::string>(t, "text"), detail::field<int>(t, "page"), {}};
    const auto box = detail::field<std::vector<int>>(t, "box");
    if (box.size() != 4) throw SchemaError("token box must have 4 coordinates");
    w.box = {box[0], box[1], box[2], box[3]};
    r.tokens.push_back(std::move(w));
  }
  if (r.mode == Mode::kQa) {
    if (!j.contains("question")) throw SchemaError("qa request needs 'question'");
    if (j.contains("label_set")) throw SchemaError("qa request must not carry 'label_set'");
    r.question = detail::field<std::string>(j, "question");
  } else {
    if (!j.contains("label_set")) throw SchemaError("tc request needs 'label_set'");
    if (j.contains("question")) throw SchemaError("tc request must not carry 'question'");
    r.label_set = detail::field<std::vector<std::string>>(j, "label_set");
  }
  return r;
}

inline ScoreRequest parse_request(std::string_view line) { return request_from_json(detail::parse_line(line)); }

// ---------------------------------------------------------------------------

inline json to_json(const ScoreResponse& r) {
  json j{{"protocol", kVersion}, {"kind", "score_response"}, {"request_id", r.request_id}, {"mode", to_string(r.mode)}};
  if (r.mode == Mode::kQa) {
    j["null_logits"] = json::array({r.qa.null_start, r.qa.null_end});
    j["start_logits"] = r.qa.start_logits;
    j["end_logits"] = r.qa.end_logits;
  } else {
    j["tag_logits"] = r.tag_logits;
  }
  return j;
}

inline std::string serialize(const ScoreResponse& r) { return to_json(r).dump(); }

inline ScoreResponse response_from_json(const json& j) {
  const auto kind = detail::field<std::string>(j, "kind");
  if (kind == "error") throw RemoteError("scorer error: " + j.value("message", std::string("<no message>")));
  if (kind != "score_response") throw SchemaError("expected a score_response, got '" + kind + "'");
  ScoreResponse r;
  r.request_id = detail::field<std::string>(j, "request_id");
  try {
    r.mode = parse_mode(detail::field<std::string>(j, "mode"));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  if (r.mode == Mode::kQa) {
    detail::require_keys(j, {"protocol", "kind", "request_id", "mode", "null_logits", "start_logits", "end_logits"});
    const auto null = detail::number_array(j, "null_logits");
    if (null.size() != 2) throw SchemaError("null_logits must hold 2 numbers");
    r.qa.null_start = null[0];
    r.qa.null_end = null[1];
    r.qa.start_logits = detail::number_array(j, "start_logits");
    r.qa.end_logits = detail::number_array(j, "end_logits");
  } else {
    detail::require_keys(j, {"protocol", "kind", "request_id", "mode", "tag_logits"});
    if (!j["tag_logits"].is_array()) throw SchemaError("tag_logits must be an array");
    for (const auto& row : j["tag_logits"]) {
      if (!row.is_array()) throw SchemaError("tag_logits rows must be arrays");
      std::vector<double> v;
      for (const auto& x : row) {
        if (!x.is_number()) throw SchemaError("tag_logits must hold numbers");
        v.push_back(x.get<double>());
      }
      r.tag_logits.push_back(std::move(v));
    }
  }
  return r;
}

inline ScoreResponse parse_response(std::string_view line) { return response_from_json(detail::parse_line(line)); }

// Checks a response against the request it answers.
inline void check_response(const ScoreRequest& req, const ScoreResponse& resp) {
  if (resp.request_id != req.request_id) {
    throw SchemaError("response id '" + resp.request_id + "' does not match request '" + req.request_id + "'");
  }
  if (resp.mode != req.mode) throw SchemaError("response mode differs from request mode");
  const std::size_t n = req.tokens.size();
  if (req.mode == Mode::kQa) {
    if (resp.qa.start_logits.size() != n || resp.qa.end_logits.size() != n) {
      throw LengthMismatchError("expected " + std::to_string(n) + " start/end logits, got " +
                                std::to_string(resp.qa.start_logits.size()) + "/" +
                                std::to_string(resp.qa.end_logits.size()));
    }
  } else {
    if (resp.tag_logits.size() != n) {
      throw LengthMismatchError("expected " + std::to_string(n) + " tag logit rows, got " +
                                std::to_string(resp.tag_logits.size()));
    }
    const std::size_t width = iob::tag_count(req.label_set ? req.label_set->size() : 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (resp.tag_logits[i].size() != width) {
        throw LengthMismatchError("token " + std::to_string(i) + ": expected " + std::to_string(width) +
                                  " tag logits, got " + std::to_string(resp.tag_logits[i].size()));
      }
    }
  }
}

// ---------------------------------------------------------------------------

inline json to_json(const ScheduleMessage& m) {
  return json{{"protocol", kVersion}, {"kind", "schedule"}, {"request_id", m.request_id}, {"epoch", m.epoch},
              {"lr", m.lr}, {"halvings", m.halvings}, {"stopped", m.stopped}, {"options", m.options}};
}

inline std::string serialize(const ScheduleMessage& m) { return to_json(m).dump(); }

inline ScheduleMessage schedule_from_json(const json& j) {
  if (detail::field<std::string>(j, "kind") != "schedule") throw SchemaError("expected a schedule message");
  detail::require_keys(j, {"protocol", "kind", "request_id", "epoch", "lr", "halvings", "stopped", "options"});
  ScheduleMessage m;
  m.request_id = detail::field<std::string>(j, "request_id");
  m.epoch = detail::field<std::size_t>(j, "epoch");
  m.lr = detail::field<double>(j, "lr");
  m.halvings = detail::field<std::size_t>(j, "halvings");
  m.stopped = detail::field<bool>(j, "stopped");
  m.options = j.at("options");
  if (!m.options.is_object()) throw SchemaError("schedule options must be an object");
  return m;
}

inline ScheduleMessage parse_schedule(std::string_view line) { return schedule_from_json(detail::parse_line(line)); }

inline json to_json(const EpochResult& m) {
  return json{{"protocol", kVersion}, {"kind", "epoch_result"}, {"request_id", m.request_id}, {"epoch", m.epoch},
              {"val_f1", m.val_f1}};
}

inline std::string serialize(const EpochResult& m) { return to_json(m).dump(); }

inline EpochResult epoch_result_from_json(const json& j) {
  const auto kind = detail::field<std::string>(j, "kind");
  if (kind == "error") throw RemoteError("scorer error: " + j.value("message", std::string("<no message>")));
  if (kind != "epoch_result") throw SchemaError("expected an epoch_result, got '" + kind + "'");
  detail::require_keys(j, {"protocol", "kind", "request_id", "epoch", "val_f1"});
  return {detail::field<std::string>(j, "request_id"), detail::field<std::size_t>(j, "epoch"),
          detail::field<double>(j, "val_f1")};
}

inline EpochResult parse_epoch_result(std::string_view line) {
  return epoch_result_from_json(detail::parse_line(line));
}

inline std::string serialize_ack(std::string_view request_id) {
  return json{{"protocol", kVersion}, {"kind", "ack"}, {"request_id", request_id}}.dump();
}

inline std::string serialize_error(std::string_view request_id, std::string_view message) {
  return json{{"protocol", kVersion}, {"kind", "error"}, {"request_id", request_id}, {"message", message}}.dump();
}

}  // namespace docie::protocol
