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

#include <cctype>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "docie/dataset_io.hpp"
#include "docie/model.hpp"
#include "docie/utf8.hpp"

namespace docie::qa {

inline constexpr std::string_view kLabelPlaceholder = "<LABEL>";
inline constexpr std::string_view kDefaultTemplate = "What is the <LABEL>?";

struct Answer {
  std::size_t char_start = 0;
  std::size_t char_len = 0;
  std::string text;
  // Token span the answer was derived from; carried for span-mode evaluation.
  std::size_t token_start = 0;
  std::size_t token_len = 0;

  friend bool operator==(const Answer&, const Answer&) = default;
};

struct Sample {
  std::string doc_id;
  std::string question;
  std::string label;
  std::vector<Answer> answers;
  bool unanswerable = false;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct QASplit {
  std::string name;
  std::vector<Sample> samples;
};

struct QADataset {
  std::string name;
  std::vector<std::string> label_set;
  std::vector<QASplit> splits;
  const Dataset* source = nullptr;
};

class TemplateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Human-readable label form used inside questions: underscores become
// spaces and ASCII letters are lower-cased.
inline std::string humanize_label(std::string_view label) {
  std::string out(label);
  for (auto& c : out) {
    if (c == '_') c = ' ';
    else c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

inline std::string label_to_question(std::string_view label, std::string_view question_template = kDefaultTemplate) {
  if (label.empty()) throw std::invalid_argument("label_to_question: empty label");
  const auto pos = question_template.find(kLabelPlaceholder);
  if (pos == std::string_view::npos ||
      question_template.find(kLabelPlaceholder, pos + kLabelPlaceholder.size()) != std::string_view::npos) {
    throw TemplateError("question template must contain exactly one " + std::string(kLabelPlaceholder) +
                        " placeholder: '" + std::string(question_template) + "'");
  }
  std::string out(question_template.substr(0, pos));
  out += humanize_label(label);
  out += question_template.substr(pos + kLabelPlaceholder.size());
  return out;
}

inline Answer make_answer(const Document& doc, const Entity& e) {
  const CharSpan span = entity_char_span(doc, e);
  return {span.start, span.len, utf8::substr(doc.text, span.start, span.len), e.token_start, e.token_len};
}

// One sample per (document, label) with at least one entity of that label;
// with include_unanswerable, also one empty sample for every absent label.
// Samples are ordered by document, then by label-set order.
inline std::vector<Sample> to_qa(const Split& split, const std::vector<std::string>& label_set,
                                 std::string_view question_template, bool include_unanswerable) {
  std::vector<std::string> questions;
  for (const auto& l : label_set) questions.push_back(label_to_question(l, question_template));
  std::vector<Sample> out;
  for (const auto& doc : split.documents) {
    for (std::size_t li = 0; li < label_set.size(); ++li) {
      Sample s{doc.id, questions[li], label_set[li], {}, false};
      for (const auto& e : doc.entities) {
        if (e.label == label_set[li]) s.answers.push_back(make_answer(doc, e));
      }
      if (s.answers.empty()) {
        if (!include_unanswerable) continue;
        s.unanswerable = true;
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline QADataset to_qa(const Dataset& ds, std::string_view question_template = kDefaultTemplate,
                       bool include_unanswerable = false) {
  QADataset out{ds.name, ds.label_set, {}, &ds};
  for (const auto& split : ds.splits) {
    out.splits.push_back({split.name, to_qa(split, ds.label_set, question_template, include_unanswerable)});
  }
  return out;
}

inline std::map<std::string, std::size_t> qa_stats(const QADataset& qa) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : qa.splits) counts[s.name] = s.samples.size();
  return counts;
}

// SQuAD-style layout: one entry per document with its context and the
// questions asked about it.
inline json to_squad(const QADataset& qa) {
  json out{{"version", "docie-qa-1"}, {"name", qa.name}, {"label_set", qa.label_set}, {"splits", json::object()}};
  for (const auto& split : qa.splits) {
    const Split* src = qa.source ? qa.source->find_split(split.name) : nullptr;
    std::map<std::string, const Document*> docs;
    if (src) {
      for (const auto& d : src->documents) docs[d.id] = &d;
    }
    json data = json::array();
    std::string current;
    for (std::size_t i = 0; i < split.samples.size(); ++i) {
      const Sample& s = split.samples[i];
      if (data.empty() || current != s.doc_id) {
        current = s.doc_id;
        json para{{"context", docs.count(s.doc_id) ? docs[s.doc_id]->text : std::string()}, {"qas", json::array()}};
        data.push_back(json{{"title", s.doc_id}, {"paragraphs", json::array({para})}});
      }
      json answers = json::array();
      for (const auto& a : s.answers) {
        answers.push_back(json{{"text", a.text}, {"answer_start", a.char_start}, {"token_start", a.token_start},
                               {"token_len", a.token_len}});
      }
      json q{{"id", s.doc_id + "__" + s.label}, {"question", s.question}, {"label", s.label},
             {"answers", answers}, {"is_impossible", s.unanswerable}};
      data.back()["paragraphs"][0]["qas"].push_back(std::move(q));
    }
    out["splits"][split.name] = json{{"data", data}};
  }
  return out;
}

}  // namespace docie::qa
