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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "docie/model.hpp"
#include "docie/rng.hpp"

namespace docie {

enum class SubsampleKind { kTags, kDocuments };

// How tag sub-sampling picks survivors inside one document.
enum class TagSelection {
  kBernoulli,   // each entity kept independently with probability `ratio`
  kExactCount,  // round(ratio * entities) kept, chosen by seeded shuffle
};

struct SubsampleSpec {
  SubsampleKind kind = SubsampleKind::kTags;
  double ratio = 1.0;
  std::uint64_t seed = 0;
  TagSelection selection = TagSelection::kBernoulli;
};

inline SubsampleKind parse_subsample_kind(std::string_view s) {
  if (s == "tags") return SubsampleKind::kTags;
  if (s == "documents") return SubsampleKind::kDocuments;
  throw std::invalid_argument("unknown subsample kind '" + std::string(s) + "'");
}

inline TagSelection parse_tag_selection(std::string_view s) {
  if (s == "bernoulli") return TagSelection::kBernoulli;
  if (s == "exact") return TagSelection::kExactCount;
  throw std::invalid_argument("unknown tag selection '" + std::string(s) + "'");
}

inline std::string to_string(TagSelection s) { return s == TagSelection::kBernoulli ? "bernoulli" : "exact"; }

namespace detail {
inline void check_ratio(double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("subsample ratio must be in (0, 1]");
}
}  // namespace detail

// Drops entity annotations at random. Each document draws from its own stream
// keyed by (seed, doc_id); documents left without entities are removed.
inline Split subsample_tags(const Split& split, double ratio, std::uint64_t seed,
                            TagSelection selection = TagSelection::kBernoulli) {
  detail::check_ratio(ratio);
  Split out{split.name, {}};
  for (const auto& doc : split.documents) {
    SplitMix64 rng(derive_seed(seed, doc.id));
    Document kept = doc;
    kept.entities.clear();
    if (selection == TagSelection::kBernoulli) {
      for (const auto& e : doc.entities) {
        if (rng.uniform() < ratio) kept.entities.push_back(e);
      }
    } else {
      std::vector<std::size_t> order(doc.entities.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(order);
      const auto n = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(order.size())));
      std::vector<bool> keep(order.size(), false);
      for (std::size_t i = 0; i < n; ++i) keep[order[i]] = true;
      for (std::size_t i = 0; i < doc.entities.size(); ++i) {
        if (keep[i]) kept.entities.push_back(doc.entities[i]);
      }
    }
    if (!kept.entities.empty()) out.documents.push_back(std::move(kept));
  }
  return out;
}

// Keeps exactly round(ratio * |split|) documents picked by a seeded shuffle;
// survivors stay in their original order.
inline Split subsample_documents(const Split& split, double ratio, std::uint64_t seed) {
  detail::check_ratio(ratio);
  const std::size_t n = split.documents.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(derive_seed(seed, "documents:" + split.name));
  rng.shuffle(order);
  const auto keep_n = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  std::vector<bool> keep(n, false);
  for (std::size_t i = 0; i < keep_n && i < n; ++i) keep[order[i]] = true;
  Split out{split.name, {}};
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.documents.push_back(split.documents[i]);
  }
  return out;
}

inline Split subsample(const Split& split, const SubsampleSpec& spec) {
  return spec.kind == SubsampleKind::kTags ? subsample_tags(split, spec.ratio, spec.seed, spec.selection)
                                           : subsample_documents(split, spec.ratio, spec.seed);
}

// Degrades the train and validation splits; every other split (test in
// particular) is copied unchanged.
inline Dataset subsample_training_splits(const Dataset& ds, const SubsampleSpec& spec) {
  Dataset out{ds.name, ds.label_set, {}};
  for (const auto& split : ds.splits) {
    if (split.name == "train" || split.name == "validation") out.splits.push_back(subsample(split, spec));
    else out.splits.push_back(split);
  }
  return out;
}

}  // namespace docie
