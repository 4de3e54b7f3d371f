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
#include <cctype>
#include <cstddef>
#include <cstdio>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "docie/model.hpp"

namespace docie {

enum class MatchMode {
  kSpan,  // identical token ranges
  kText,  // identical whitespace-normalized text
};

inline MatchMode parse_match_mode(std::string_view s) {
  if (s == "span") return MatchMode::kSpan;
  if (s == "text") return MatchMode::kText;
  throw std::invalid_argument("unknown match mode '" + std::string(s) + "'");
}

inline std::string to_string(MatchMode m) { return m == MatchMode::kSpan ? "span" : "text"; }

struct LabelMetrics {
  std::string label;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;

  void finalize() {
    const auto tp = static_cast<double>(true_positives);
    precision = (true_positives + false_positives) == 0 ? 0.0 : tp / static_cast<double>(true_positives + false_positives);
    recall = (true_positives + false_negatives) == 0 ? 0.0 : tp / static_cast<double>(true_positives + false_negatives);
    f1 = (precision + recall) == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    support = true_positives + false_negatives;
  }
};

struct WeightedAverage {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Report {
  std::vector<LabelMetrics> labels;
  WeightedAverage weighted_avg;
  MatchMode match_mode = MatchMode::kSpan;

  const LabelMetrics* find(std::string_view label) const {
    for (const auto& l : labels) {
      if (l.label == label) return &l;
    }
    return nullptr;
  }

  std::size_t total_support() const {
    std::size_t n = 0;
    for (const auto& l : labels) n += l.support;
    return n;
  }
};

inline std::string normalize_text(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

namespace detail {

inline bool entities_match(const Entity& pred, const Entity& gold, MatchMode mode) {
  if (pred.label != gold.label) return false;
  if (mode == MatchMode::kSpan) return pred.token_start == gold.token_start && pred.token_len == gold.token_len;
  return normalize_text(pred.text) == normalize_text(gold.text);
}

}  // namespace detail

// Support-weighted average over labels; labels without gold entities carry
// zero weight.
inline WeightedAverage weighted_average(std::span<const LabelMetrics> labels) {
  WeightedAverage w;
  double total = 0.0;
  for (const auto& l : labels) {
    const auto s = static_cast<double>(l.support);
    total += s;
    w.precision += s * l.precision;
    w.recall += s * l.recall;
    w.f1 += s * l.f1;
  }
  if (total > 0.0) {
    w.precision /= total;
    w.recall /= total;
    w.f1 /= total;
  } else {
    w = {};
  }
  return w;
}

// Entity-level scoring. `pred[i]` and `gold[i]` describe the same document.
// Predictions claim gold entities greedily in prediction order; every gold
// entity is matched at most once, so duplicate predictions count once.
inline Report score(std::span<const std::vector<Entity>> pred, std::span<const std::vector<Entity>> gold,
                    const std::vector<std::string>& label_set, MatchMode mode) {
  if (pred.size() != gold.size()) throw std::invalid_argument("score: prediction and gold document counts differ");
  std::map<std::string, LabelMetrics, std::less<>> tally;
  for (const auto& l : label_set) tally[l].label = l;
  auto slot = [&](const std::string& label) -> LabelMetrics& {
    auto& m = tally[label];
    m.label = label;
    return m;
  };

  for (std::size_t d = 0; d < pred.size(); ++d) {
    std::vector<bool> claimed(gold[d].size(), false);
    for (const auto& p : pred[d]) {
      bool hit = false;
      for (std::size_t g = 0; g < gold[d].size(); ++g) {
        if (!claimed[g] && detail::entities_match(p, gold[d][g], mode)) {
          claimed[g] = true;
          hit = true;
          break;
        }
      }
      ++(hit ? slot(p.label).true_positives : slot(p.label).false_positives);
    }
    for (std::size_t g = 0; g < gold[d].size(); ++g) {
      if (!claimed[g]) ++slot(gold[d][g].label).false_negatives;
    }
  }

  Report r;
  r.match_mode = mode;
  for (const auto& l : label_set) {
    auto m = tally[l];
    m.finalize();
    r.labels.push_back(std::move(m));
  }
  for (auto& [label, m] : tally) {
    if (std::find(label_set.begin(), label_set.end(), label) != label_set.end()) continue;
    m.finalize();
    r.labels.push_back(m);
  }
  r.weighted_avg = weighted_average(r.labels);
  return r;
}

// Fixed-precision formatting keeps emitted files byte-stable.
inline std::string fmt_fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string to_csv(const Report& r) {
  std::string out = "label,tp,fp,fn,precision,recall,f1,support\n";
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& l : r.labels) {
    out += l.label + "," + std::to_string(l.true_positives) + "," + std::to_string(l.false_positives) + "," +
           std::to_string(l.false_negatives) + "," + fmt_fixed(l.precision) + "," + fmt_fixed(l.recall) + "," +
           fmt_fixed(l.f1) + "," + std::to_string(l.support) + "\n";
    tp += l.true_positives;
    fp += l.false_positives;
    fn += l.false_negatives;
  }
  out += "weighted_avg," + std::to_string(tp) + "," + std::to_string(fp) + "," + std::to_string(fn) + "," +
         fmt_fixed(r.weighted_avg.precision) + "," + fmt_fixed(r.weighted_avg.recall) + "," +
         fmt_fixed(r.weighted_avg.f1) + "," + std::to_string(tp + fn) + "\n";
  return out;
}

// Percent table: one row per label plus the weighted average.
inline std::string to_markdown(const Report& r, std::string_view title = "Label") {
  auto pct = [](double v) { return fmt_fixed(100.0 * v, 2); };
  std::string out = "| " + std::string(title) + " | F1 | Precision | Recall | Support |\n";
  out += "|---|---:|---:|---:|---:|\n";
  for (const auto& l : r.labels) {
    out += "| " + l.label + " | " + pct(l.f1) + " | " + pct(l.precision) + " | " + pct(l.recall) + " | " +
           std::to_string(l.support) + " |\n";
  }
  out += "| weighted average | " + pct(r.weighted_avg.f1) + " | " + pct(r.weighted_avg.precision) + " | " +
         pct(r.weighted_avg.recall) + " | " + std::to_string(r.total_support()) + " |\n";
  return out;
}

}  // namespace docie
