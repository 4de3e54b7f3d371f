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

#include <set>

#include "docie/dataset_io.hpp"
#include "docie/qa_convert.hpp"
#include "support/oracles.hpp"

namespace docie {
namespace {

const std::filesystem::path kFixture = std::filesystem::path(DOCIE_SOURCE_DIR) / "tests" / "data" / "fixture";

TEST(Question, DefaultTemplate) {
  EXPECT_EQ(qa::label_to_question("company"), "What is the company?");
  EXPECT_EQ(qa::label_to_question("effective_date"), "What is the effective date?");
  EXPECT_EQ(qa::label_to_question("Effective Date", "Find the <LABEL>."), "Find the effective date.");
}

TEST(Question, Errors) {
  EXPECT_THROW(qa::label_to_question(""), std::invalid_argument);
  EXPECT_THROW(qa::label_to_question("x", "no placeholder"), qa::TemplateError);
  EXPECT_THROW(qa::label_to_question("x", "<LABEL> <LABEL>"), qa::TemplateError);
}

TEST(ToQa, FixtureWithoutUnanswerable) {
  const Dataset ds = load(kFixture);
  const auto qa_ds = qa::to_qa(ds, qa::kDefaultTemplate, false);
  const auto& samples = qa_ds.splits.at(0).samples;
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[0].label, "company");
  EXPECT_EQ(samples[0].answers.size(), 2u);
  EXPECT_EQ(samples[0].answers[0].text, "ACME Sdn Bhd");
  EXPECT_EQ(samples[0].answers[0].char_start, 0u);
  EXPECT_EQ(samples[0].answers[1].text, "Beta Mart");
  EXPECT_EQ(samples[1].label, "date");
  EXPECT_EQ(samples[1].answers.size(), 1u);
  EXPECT_EQ(qa::qa_stats(qa_ds).at("train"), 2u);
}

TEST(ToQa, FixtureWithUnanswerableOnTheAnnotatedDocument) {
  Dataset ds = load(kFixture);
  ds.splits[0].documents.pop_back();  // keep the annotated receipt only
  const auto samples = qa::to_qa(ds.splits[0], ds.label_set, qa::kDefaultTemplate, true);
  ASSERT_EQ(samples.size(), 4u);
  std::size_t unanswerable = 0;
  for (const auto& s : samples) unanswerable += s.unanswerable && s.answers.empty();
  EXPECT_EQ(unanswerable, 2u);
}

TEST(ToQa, NoEntitiesNoSamples) {
  Split s{"train", {make_document("a", {"x", "y"})}};
  EXPECT_TRUE(qa::to_qa(s, {"company"}, qa::kDefaultTemplate, false).empty());
}

TEST(ToQa, AnswerCharSpansPointIntoText) {
  Document d = make_document("u", {"Prix", "total", "€", "12,50"});
  d.entities = {make_entity(d, "total", 2, 2)};
  const auto samples = qa::to_qa(Split{"t", {d}}, {"total"}, qa::kDefaultTemplate, false);
  ASSERT_EQ(samples.size(), 1u);
  const auto& a = samples[0].answers[0];
  EXPECT_EQ(a.char_start, 11u);
  EXPECT_EQ(a.char_len, 7u);
  EXPECT_EQ(utf8::substr(d.text, a.char_start, a.char_len), "€ 12,50");
}

TEST(ToQaProperty, CountsMatchEnumerationOnRandomDatasets) {
  SplitMix64 rng(31337);
  const std::vector<std::string> labels{"a", "b", "c", "d"};
  for (int trial = 0; trial < 500; ++trial) {
    Split split{"train", {}};
    const std::size_t n_docs = rng.below(6);
    std::size_t n_entities = 0;
    std::set<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < n_docs; ++i) {
      Document d = testing::random_document(rng, "d" + std::to_string(i), 1, 20);
      d.entities = testing::random_layout(rng, d, labels, 3);
      n_entities += d.entities.size();
      for (const auto& e : d.entities) pairs.insert({d.id, e.label});
      split.documents.push_back(std::move(d));
    }
    const auto off = qa::to_qa(split, labels, qa::kDefaultTemplate, false);
    const auto on = qa::to_qa(split, labels, qa::kDefaultTemplate, true);
    ASSERT_EQ(off.size(), pairs.size());
    ASSERT_LE(off.size(), std::min(n_entities, n_docs * labels.size()));
    ASSERT_EQ(on.size(), n_docs * labels.size());
    for (const auto& s : off) {
      ASSERT_FALSE(s.answers.empty());
      ASSERT_FALSE(s.unanswerable);
    }
  }
}

TEST(Squad, ExportCarriesContextsAndAnswers) {
  const Dataset ds = load(kFixture);
  const auto j = qa::to_squad(qa::to_qa(ds, qa::kDefaultTemplate, true));
  const auto& data = j.at("splits").at("train").at("data");
  ASSERT_EQ(data.size(), 2u);
  const auto& para = data[0].at("paragraphs")[0];
  EXPECT_EQ(para.at("context"), ds.splits[0].documents[0].text);
  EXPECT_EQ(para.at("qas").size(), 4u);
  EXPECT_EQ(para.at("qas")[0].at("answers")[0].at("text"), "ACME Sdn Bhd");
}

}  // namespace
}  // namespace docie
