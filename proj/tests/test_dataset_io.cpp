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

#include <gtest/gtest.h>

#include <filesystem>
#include <map>

#include "docie/dataset_io.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace docie {
namespace {

namespace fs = std::filesystem;

const fs::path kData = fs::path(DOCIE_SOURCE_DIR) / "tests" / "data";

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("docie_io_" + name);
  fs::remove_all(p);
  return p;
}

TEST(Canonical, FixtureHasTwoDocsAndThreeEntities) {
  const Dataset ds = load(kData / "fixture");
  ASSERT_EQ(ds.splits.size(), 1u);
  EXPECT_EQ(ds.splits[0].documents.size(), 2u);
  EXPECT_EQ(entity_count(ds.splits[0]), 3u);
}

TEST(Canonical, LoadingTwiceGivesEqualDatasets) { EXPECT_EQ(load(kData / "fixture"), load(kData / "fixture")); }

TEST(Canonical, TruncatedFileNamesByteOffset) {
  const auto dir = scratch("truncated");
  fs::copy(kData / "fixture", dir);
  const std::string full = read_file(dir / "train.json");
  write_file(dir / "train.json", full.substr(0, full.size() / 2));
  try {
    load(dir);
    FAIL() << "expected a parse error";
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("parse error at byte"), std::string::npos) << e.what();
  }
}

TEST(Canonical, InvalidDatasetRaisesValidationError) {
  const auto dir = scratch("invalid");
  Dataset ds = load(kData / "fixture");
  ds.splits[0].documents[0].entities[0].token_len = 99;
  save_canonical(ds, dir);
  EXPECT_THROW(load(dir), ValidationError);
}

TEST(Canonical, SaveLoadRoundTrip) {
  const auto dir = scratch("roundtrip");
  const Dataset ds = load(kData / "receipts");
  save(ds, dir);
  EXPECT_EQ(load(dir), ds);
}

TEST(Canonical, EmptySplitRoundTrips) {
  const auto dir = scratch("empty");
  Dataset ds{"e", {"x"}, {{"train", {}}, {"test", {}}}};
  save(ds, dir);
  const Dataset back = load(dir);
  EXPECT_EQ(back, ds);
  EXPECT_TRUE(back.split("test").documents.empty());
}

TEST(Canonical, UnicodeTextRoundTripsByteExact) {
  const auto dir = scratch("unicode");
  Document d = make_document("u", {"Société", "Générale", "€", "東京", "Ω"});
  d.entities = {make_entity(d, "company", 0, 2), make_entity(d, "city", 3, 1)};
  Dataset ds{"u", {"company", "city"}, {{"train", {d}}}};
  save(ds, dir);
  const Dataset back = load(dir);
  const auto& bd = back.split("train").documents[0];
  EXPECT_EQ(bd.text, d.text);
  for (std::size_t i = 0; i < d.tokens.size(); ++i) EXPECT_EQ(bd.tokens[i].text, d.tokens[i].text);
  EXPECT_EQ(bd.entities[0].text, "Société Générale");
  EXPECT_EQ(bd.tokens[3].char_start, 19u);
}

TEST(Adapters, ParseAdapterNames) {
  EXPECT_EQ(parse_adapter("canonical"), Adapter::kCanonical);
  EXPECT_EQ(parse_adapter("funsd-style"), Adapter::kFunsd);
  EXPECT_EQ(parse_adapter("sroie-style"), Adapter::kSroie);
  EXPECT_EQ(parse_adapter("kleister-style"), Adapter::kKleister);
  EXPECT_EQ(parse_adapter("cuad-style"), Adapter::kCuad);
  EXPECT_THROW(parse_adapter("xml"), std::invalid_argument);
}

TEST(Adapters, FunsdBlocksBecomeEntitiesAndBoxesAreNormalized) {
  AdapterOptions opt;
  opt.page_width = 1000;
  opt.page_height = 1000;
  const Dataset ds = load(kData / "native" / "funsd", Adapter::kFunsd, opt);
  const auto& doc = ds.split("train").documents.at(0);
  EXPECT_EQ(doc.id, "form_a");
  ASSERT_EQ(doc.entities.size(), 3u);
  EXPECT_EQ(doc.entities[0].label, "header");
  EXPECT_EQ(doc.entities[0].text, "REGISTRATION FORM");
  EXPECT_EQ(doc.entities[2].text, "Jane Q Doe");
  EXPECT_EQ(doc.tokens[0].box, (Box{100, 20, 250, 50}));
  EXPECT_EQ(ds.split("test").documents.size(), 1u);
}

TEST(Adapters, FunsdInfersPageSizeFromExtent) {
  const Dataset ds = load(kData / "native" / "funsd", Adapter::kFunsd);
  const auto& doc = ds.split("test").documents.at(0);
  EXPECT_EQ(doc.tokens.back().box.x1, kBoxScale);
  EXPECT_EQ(doc.tokens.back().box.y1, kBoxScale);
}

TEST(Adapters, SroieValuesAreMatchedAsTokenRuns) {
  const Dataset ds = load(kData / "native" / "sroie", Adapter::kSroie);
  const auto& doc = ds.split("train").documents.at(0);
  std::map<std::string, std::string> got;
  for (const auto& e : doc.entities) got[e.label] = e.text;
  EXPECT_EQ(got["company"], "ACME TRADING SDN BHD");
  EXPECT_EQ(got["address"], "NO 12 JALAN BESAR KOTA");
  EXPECT_EQ(got["date"], "05/01/2018");
  EXPECT_EQ(got["total"], "37.50");
  // A value absent from the receipt text yields no entity.
  EXPECT_EQ(ds.split("test").documents.at(0).entities.size(), 2u);
}

TEST(Adapters, KleisterUsesLastColumnAndCaseInsensitiveMatching) {
  const Dataset ds = load(kData / "native" / "kleister", Adapter::kKleister);
  const auto& doc = ds.split("train").documents.at(0);
  EXPECT_EQ(doc.id, "nda-1.pdf");
  std::vector<std::string> texts;
  for (const auto& e : doc.entities) texts.push_back(e.label + "=" + e.text);
  EXPECT_EQ(texts, (std::vector<std::string>{"effective_date=June 1, 2010", "party=Acme Corp", "party=Beta LLC"}));
  EXPECT_EQ(ds.split("test").documents.at(0).entities.at(0).text, "GAMMA INC");
}

TEST(Adapters, CuadTakesLabelFromQuestionIdAndDropsOverlaps) {
  const Dataset ds = load(kData / "native" / "cuad.json", Adapter::kCuad);
  EXPECT_EQ(ds.label_set, (std::vector<std::string>{"Parties", "Effective Date", "Licensor"}));
  const auto& docs = ds.split("train").documents;
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].entities.size(), 3u);
  EXPECT_EQ(docs[0].entities[0].text, "Licensor Corp");
  EXPECT_EQ(docs[0].entities[0].label, "Parties");
}

TEST(Adapters, CuadLabelFilter) {
  AdapterOptions opt;
  opt.labels = {"Licensor"};
  const Dataset ds = load(kData / "native" / "cuad.json", Adapter::kCuad, opt);
  EXPECT_EQ(entity_count(ds.split("train")), 1u);
  EXPECT_EQ(ds.split("train").documents[0].entities[0].label, "Licensor");
}

TEST(Adapters, SplitByIdIsDeterministicAndPartitions) {
  std::vector<Document> docs;
  for (int i = 0; i < 50; ++i) docs.push_back(make_document("doc" + std::to_string(i), {"w"}));
  const auto a = split_by_document_id(docs, 0.8);
  const auto b = split_by_document_id(docs, 0.8);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[0].documents.size(), 40u);
  EXPECT_EQ(a[1].documents.size(), 10u);
}

TEST(RankLabels, HandEnumeratedMeanAndMedian) {
  Document d = make_document("d", {"abc", "x", "abcde"});
  d.entities = {make_entity(d, "l", 0, 1), make_entity(d, "l", 2, 1)};
  Dataset ds{"r", {"l"}, {{"train", {d}}}};
  const auto stats = rank_labels_by_length(ds, 10);
  ASSERT_EQ(stats.size(), 1u);
  EXPECT_EQ(stats[0].count, 2u);
  EXPECT_DOUBLE_EQ(stats[0].mean_chars, 4.0);
  EXPECT_DOUBLE_EQ(stats[0].median_chars, 4.0);
}

TEST(RankLabels, MatchesBruteForceAndTruncates) {
  const Dataset ds = testing::synthetic_dataset(30, 5);
  // Brute force: collect lengths per label over train + validation.
  std::map<std::string, std::vector<double>> lens;
  for (const auto& s : ds.splits) {
    if (s.name == "test") continue;
    for (const auto& d : s.documents) {
      for (const auto& e : d.entities) lens[e.label].push_back(static_cast<double>(utf8::length(e.text)));
    }
  }
  const auto stats = rank_labels_by_length(ds, 10);
  ASSERT_EQ(stats.size(), lens.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    auto v = lens[stats[i].label];
    double sum = 0;
    for (double x : v) sum += x;
    std::sort(v.begin(), v.end());
    const double med = v.size() % 2 ? v[v.size() / 2] : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2;
    EXPECT_EQ(stats[i].count, v.size());
    EXPECT_DOUBLE_EQ(stats[i].mean_chars, sum / static_cast<double>(v.size()));
    EXPECT_DOUBLE_EQ(stats[i].median_chars, med);
    if (i > 0) {
      EXPECT_GE(stats[i - 1].mean_chars, stats[i].mean_chars);
    }
  }
  EXPECT_EQ(rank_labels_by_length(ds, 2).size(), 2u);
  EXPECT_THROW(rank_labels_by_length(ds, 0), std::invalid_argument);
}

TEST(RankLabels, LabelsWithoutEntitiesAreOmitted) {
  Document d = make_document("d", {"abc"});
  d.entities = {make_entity(d, "a", 0, 1)};
  Dataset ds{"r", {"a", "b"}, {{"train", {d}}}};
  EXPECT_EQ(rank_labels_by_length(ds, 10).size(), 1u);
}

}  // namespace
}  // namespace docie
