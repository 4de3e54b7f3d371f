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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "docie/dataset_io.hpp"
#include "docie/experiment.hpp"
#include "support/synthetic.hpp"

namespace docie {
namespace {

using namespace experiment;

const std::filesystem::path kRoot = DOCIE_SOURCE_DIR;

std::shared_ptr<const Dataset> receipts() {
  static const auto ds = std::make_shared<const Dataset>(load(kRoot / "tests" / "data" / "receipts"));
  return ds;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("docie-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(d);
  return d;
}

ExperimentConfig base_config(Setting setting, protocol::Mode mode = protocol::Mode::kQa) {
  ExperimentConfig c;
  c.dataset = kRoot / "tests" / "data" / "receipts";
  c.setting = setting;
  c.mode = mode;
  c.pipeline.mode = mode;
  c.pipeline.match = mode == protocol::Mode::kQa ? MatchMode::kText : MatchMode::kSpan;
  c.pipeline.chunk = {16, 8};
  return c;
}

GridReport run_with(const ExperimentConfig& c, const std::string& endpoint,
                    const CellObserver& observer = {}) {
  auto ds = receipts();
  return run(c, ds, make_scorer_factory(endpoint, ds, c.pipeline.question_template), {}, observer);
}

TEST(Experiment, VanillaGoldIsPerfect) {
  for (auto mode : {protocol::Mode::kQa, protocol::Mode::kTc}) {
    const auto g = run_with(base_config(Setting::kVanilla, mode), "builtin:gold");
    ASSERT_EQ(g.cells.size(), 1u);
    ASSERT_TRUE(g.cells[0].ok) << g.cells[0].error;
    EXPECT_DOUBLE_EQ(g.cells[0].report.weighted_avg.f1, 1.0);
    ASSERT_EQ(g.ratios.size(), 1u);
    EXPECT_DOUBLE_EQ(g.ratios[0].std_f1, 0.0);
  }
}

TEST(Experiment, MetricsComeFromTheUntouchedTestSplit) {
  auto c = base_config(Setting::kNoisyTags);
  c.ratios = {0.1, 0.5};
  c.seeds = {0, 1};
  const Split& expected = receipts()->split("test");
  std::mutex mu;
  std::size_t seen = 0;
  run_with(c, "builtin:noisy", [&](const CellKey&, const Split& test) {
    std::lock_guard lock(mu);
    EXPECT_EQ(test, expected);
    ++seen;
  });
  EXPECT_EQ(seen, 4u);
}

TEST(Experiment, ParallelismDoesNotChangeResults) {
  auto c = base_config(Setting::kFewShotDocs);
  c.ratios = {0.3, 0.7};
  c.seeds = {0, 1, 2};
  c.jobs = 1;
  const auto serial = run_with(c, "builtin:noisy");
  c.jobs = 4;
  const auto parallel = run_with(c, "builtin:noisy");
  EXPECT_EQ(dump_json(to_json(serial)), dump_json(to_json(parallel)));
}

TEST(Experiment, EmitCardinalityAndDeterminism) {
  auto c = base_config(Setting::kNoisyTags);
  const auto g = run_with(c, "builtin:noisy");
  EXPECT_EQ(g.cells.size(), 25u);
  EXPECT_EQ(g.ratios.size(), 5u);
  const auto a = temp_dir("emit-a"), b = temp_dir("emit-b");
  const auto fa = emit(g, a);
  emit(run_with(c, "builtin:noisy"), b);
  auto count_lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
  EXPECT_EQ(count_lines(slurp(fa.cells_csv)), 26);
  EXPECT_EQ(count_lines(slurp(fa.plot_csv)), 6);
  for (const char* f : {"report.json", "cells.csv", "plot.csv", "summary.md"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  // The report round-trips through its JSON form.
  const auto back = grid_report_from_json(parse_json_file(fa.report_json));
  EXPECT_EQ(dump_json(to_json(back)), slurp(fa.report_json));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST(Experiment, NoisyRecallTracksRatio) {
  const auto g = run_with(base_config(Setting::kNoisyTags), "builtin:noisy");
  double prev = -1;
  for (const auto& r : g.ratios) {
    EXPECT_NEAR(r.mean_recall, r.ratio, 0.1) << r.ratio;
    EXPECT_GT(r.mean_recall, prev);
    prev = r.mean_recall;
  }
}

TEST(Experiment, ZeroShotUnseenLabelScoresZero) {
  auto c = base_config(Setting::kZeroShot);
  c.zero_shot_labels = {"party"};
  const auto g = run_with(c, "builtin:gold");
  ASSERT_TRUE(g.cells[0].ok) << g.cells[0].error;
  EXPECT_EQ(g.labels, std::vector<std::string>{"party"});
  EXPECT_DOUBLE_EQ(g.cells[0].report.weighted_avg.f1, 0.0);
}

TEST(Experiment, ZeroShotRequiresQa) {
  auto c = base_config(Setting::kZeroShot, protocol::Mode::kTc);
  c.zero_shot_labels = {"party"};
  EXPECT_THROW(c.check(), std::invalid_argument);
}

TEST(Experiment, FailingScorerMarksCellAndContinues) {
  auto c = base_config(Setting::kNoisyTags);
  c.ratios = {0.5, 0.9};
  c.seeds = {0};
  auto ds = receipts();
  auto inner = make_scorer_factory("builtin:gold", ds, c.pipeline.question_template);
  ScorerFactory flaky = [&](const CellKey& k, const std::string& dir) -> std::unique_ptr<Scorer> {
    if (k.ratio == 0.5) return transport::connect("stdio:/nonexistent/scorer");
    return inner(k, dir);
  };
  const auto g = run(c, ds, flaky);
  ASSERT_EQ(g.cells.size(), 2u);
  EXPECT_FALSE(g.cells[0].ok);
  EXPECT_FALSE(g.cells[0].error.empty());
  EXPECT_TRUE(g.cells[1].ok);
  EXPECT_EQ(g.failed(), 1u);
  ASSERT_EQ(g.ratios.size(), 2u);
  EXPECT_EQ(g.ratios[0].cells, 0u);
  EXPECT_EQ(g.ratios[1].cells, 1u);
}

TEST(Experiment, TrainingRunsTheScheduleAgainstTheScorer) {
  auto c = base_config(Setting::kFewShotDocs, protocol::Mode::kTc);
  c.ratios = {0.5};
  c.seeds = {3};
  c.training.enabled = true;
  const auto g = run_with(c, "builtin:gold");
  ASSERT_TRUE(g.cells[0].ok) << g.cells[0].error;
  EXPECT_EQ(g.cells[0].schedule_epochs, 80u);
  EXPECT_LT(g.cells[0].schedule_final_lr, 1e-7);
}

TEST(Config, ParsesAndRejectsUnknownKeys) {
  const auto c = load_config(kRoot / "configs" / "noisy-tags-qa.json");
  EXPECT_EQ(c.setting, Setting::kNoisyTags);
  EXPECT_EQ(c.ratios.size(), 5u);
  EXPECT_EQ(c.jobs, 4u);
  EXPECT_EQ(c.pipeline.chunk.window, 512u);
  EXPECT_TRUE(std::filesystem::exists(c.dataset));
  protocol::json j = {{"dataset", "x"}, {"colour", "red"}};
  EXPECT_THROW(config_from_json(j), std::invalid_argument);
  j = {{"dataset", "x"}, {"chunk", {{"window", 8}, {"stride", 2}}}};
  EXPECT_THROW(config_from_json(j), std::invalid_argument);
  j = {{"dataset", "x"}, {"ratios", {0.0}}, {"setting", "noisy_tags"}};
  EXPECT_THROW(config_from_json(j), std::invalid_argument);
}

TEST(Config, EveryShippedConfigParses) {
  for (const auto& e : std::filesystem::directory_iterator(kRoot / "configs")) {
    if (e.path().extension() == ".json") {
      EXPECT_NO_THROW(load_config(e.path())) << e.path();
    }
  }
}

TEST(Config, EnvironmentOverridesEndpoint) {
  auto c = load_config(kRoot / "configs" / "vanilla-oracle.json");
  c.scorer = "builtin:constant:-1";
  ::setenv(kEndpointEnv, "builtin:gold", 1);
  const auto g = run(c);
  ::unsetenv(kEndpointEnv);
  ASSERT_TRUE(g.cells[0].ok);
  EXPECT_DOUBLE_EQ(g.cells[0].report.weighted_avg.f1, 1.0);
  EXPECT_DOUBLE_EQ(run(c).cells[0].report.weighted_avg.f1, 0.0);
}

TEST(Config, EndpointStrings) {
  auto ds = receipts();
  EXPECT_NO_THROW(make_scorer_factory("builtin:noisy:drop=0.2:seed=4", ds, "q"));
  EXPECT_THROW(make_scorer_factory("builtin:noisy:colour=1", ds, "q"), std::invalid_argument);
  EXPECT_THROW(make_scorer_factory("ftp://x", ds, "q"), std::invalid_argument);
  EXPECT_EQ(substitute("a {seed} b {seed}", "{seed}", "7"), "a 7 b 7");
}

}  // namespace
}  // namespace docie
