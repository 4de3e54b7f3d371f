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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"

#include "docie/dataset_io.hpp"
#include "docie/metrics.hpp"
#include "docie/pipeline.hpp"
#include "docie/schedule.hpp"
#include "docie/scorers.hpp"
#include "docie/subsample.hpp"
#include "docie/transport.hpp"

namespace docie::experiment {

using json = nlohmann::json;

inline constexpr const char* kEndpointEnv = "DOCIE_SCORER_ENDPOINT";

enum class Setting { kVanilla, kNoisyTags, kFewShotDocs, kZeroShot };

inline Setting parse_setting(std::string_view s) {
  if (s == "vanilla") return Setting::kVanilla;
  if (s == "noisy_tags") return Setting::kNoisyTags;
  if (s == "few_shot_docs") return Setting::kFewShotDocs;
  if (s == "zero_shot") return Setting::kZeroShot;
  throw std::invalid_argument("unknown setting '" + std::string(s) + "'");
}

inline std::string to_string(Setting s) {
  switch (s) {
    case Setting::kVanilla: return "vanilla";
    case Setting::kNoisyTags: return "noisy_tags";
    case Setting::kFewShotDocs: return "few_shot_docs";
    case Setting::kZeroShot: return "zero_shot";
  }
  return "";
}

struct TrainingConfig {
  bool enabled = false;
  ScheduleConfig schedule;
  // Passed through to the scorer untouched.
  std::size_t batch_size = 0;                   // 0: mode default (tc 2, qa 4)
  std::size_t gradient_accumulation_steps = 0;  // 0: mode default (tc 1, qa 2)
};

struct ExperimentConfig {
  std::filesystem::path dataset;
  std::string adapter = "canonical";
  protocol::Mode mode = protocol::Mode::kQa;
  Setting setting = Setting::kVanilla;
  std::vector<double> ratios{0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::string scorer = "builtin:gold";
  PipelineSettings pipeline;
  TagSelection tag_selection = TagSelection::kBernoulli;
  std::vector<std::string> zero_shot_labels;
  std::string test_split = "test";
  std::size_t jobs = 1;
  std::size_t max_in_flight = 1;
  TrainingConfig training;

  void check() const {
    if (seeds.empty()) throw std::invalid_argument("seeds must not be empty");
    for (double r : ratios) {
      if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("ratios must lie in (0, 1]");
    }
    if ((setting == Setting::kNoisyTags || setting == Setting::kFewShotDocs) && ratios.empty()) {
      throw std::invalid_argument("ratios must not be empty");
    }
    if (setting == Setting::kZeroShot) {
      if (mode != protocol::Mode::kQa) {
        throw std::invalid_argument("zero_shot requires mode qa: token classification cannot predict unseen labels");
      }
      if (zero_shot_labels.empty()) throw std::invalid_argument("zero_shot requires zero_shot_labels");
    }
    pipeline.chunk.check();
    pipeline.extract.check();
    if (jobs == 0) throw std::invalid_argument("jobs must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// Config file (JSON). Keys mirror ExperimentConfig; unknown keys are rejected.

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* a) { return k == a; }) == keys.end()) {
      throw std::invalid_argument(where + ": unknown key '" + k + "'");
    }
  }
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  detail::reject_unknown(j,
                         {"dataset", "adapter", "mode", "setting", "ratios", "seeds", "scorer", "chunk", "extract",
                          "match_mode", "repair_policy", "template", "zero_shot_labels", "tag_selection",
                          "test_split", "jobs", "max_in_flight", "training"},
                         "config");
  ExperimentConfig c;
  try {
    c.dataset = j.at("dataset").get<std::string>();
    if (c.dataset.is_relative() && !base_dir.empty()) c.dataset = base_dir / c.dataset;
    c.adapter = j.value("adapter", c.adapter);
    c.mode = protocol::parse_mode(j.value("mode", std::string("qa")));
    c.setting = parse_setting(j.value("setting", std::string("vanilla")));
    if (j.contains("ratios")) c.ratios = j["ratios"].get<std::vector<double>>();
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    c.scorer = j.value("scorer", c.scorer);
    auto& p = c.pipeline;
    p.mode = c.mode;
    p.match = c.mode == protocol::Mode::kQa ? MatchMode::kText : MatchMode::kSpan;
    if (j.contains("chunk")) {
      const auto& ch = j["chunk"];
      detail::reject_unknown(ch, {"window", "overlap"}, "config.chunk");
      p.chunk.window = ch.value("window", std::size_t{512});
      p.chunk.overlap = ch.contains("overlap") ? ch["overlap"].get<std::size_t>() : default_overlap(p.chunk.window);
    }
    if (j.contains("extract")) {
      const auto& ex = j["extract"];
      detail::reject_unknown(ex, {"k", "top_k", "max_answer_len", "answerability", "allow_overlap"}, "config.extract");
      p.extract.k = ex.value("k", p.extract.k);
      p.extract.max_answer_len = ex.value("max_answer_len", p.extract.max_answer_len);
      p.extract.answerability = parse_answerability(ex.value("answerability", std::string("raw_positive")));
      p.extract.allow_overlap = ex.value("allow_overlap", false);
      p.top_k = parse_top_k_mode(ex.value("top_k", std::string("gold_count")));
    }
    if (j.contains("match_mode")) p.match = parse_match_mode(j["match_mode"].get<std::string>());
    if (j.contains("repair_policy")) p.repair = iob::RepairPolicy::parse(j["repair_policy"].get<std::string>());
    p.question_template = j.value("template", p.question_template);
    if (j.contains("zero_shot_labels")) c.zero_shot_labels = j["zero_shot_labels"].get<std::vector<std::string>>();
    c.tag_selection = parse_tag_selection(j.value("tag_selection", std::string("bernoulli")));
    c.test_split = j.value("test_split", c.test_split);
    c.jobs = j.value("jobs", c.jobs);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    if (j.contains("training")) {
      const auto& t = j["training"];
      detail::reject_unknown(t,
                             {"enabled", "initial_lr", "patience", "floor", "max_epochs", "batch_size",
                              "gradient_accumulation_steps"},
                             "config.training");
      c.training.enabled = t.value("enabled", false);
      c.training.schedule.initial_lr = t.value("initial_lr", c.training.schedule.initial_lr);
      c.training.schedule.patience = t.value("patience", c.training.schedule.patience);
      c.training.schedule.floor = t.value("floor", c.training.schedule.floor);
      c.training.schedule.max_epochs = t.value("max_epochs", c.training.schedule.max_epochs);
      c.training.batch_size = t.value("batch_size", std::size_t{0});
      c.training.gradient_accumulation_steps = t.value("gradient_accumulation_steps", std::size_t{0});
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.check();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(parse_json_file(path), path.parent_path());
}

// Settings a run depends on, recorded verbatim in every report.
inline json settings_json(const ExperimentConfig& c) {
  const bool qa = c.mode == protocol::Mode::kQa;
  return json{{"mode", protocol::to_string(c.mode)},
              {"setting", to_string(c.setting)},
              {"scorer", c.scorer},
              {"chunk_window", c.pipeline.chunk.window},
              {"chunk_overlap", c.pipeline.chunk.overlap},
              {"top_k", to_string(c.pipeline.top_k)},
              {"k", c.pipeline.extract.k},
              {"max_answer_len", c.pipeline.extract.max_answer_len},
              {"answerability", to_string(c.pipeline.extract.answerability)},
              {"allow_overlap", c.pipeline.extract.allow_overlap},
              {"repair_policy", c.pipeline.repair.name()},
              {"match_mode", to_string(c.pipeline.match)},
              {"template", c.pipeline.question_template},
              {"tag_selection", to_string(c.tag_selection)},
              {"zero_shot_labels", c.zero_shot_labels},
              {"batch_size", c.training.batch_size ? c.training.batch_size : (qa ? 4 : 2)},
              {"gradient_accumulation_steps",
               c.training.gradient_accumulation_steps ? c.training.gradient_accumulation_steps : (qa ? 2 : 1)},
              {"schedule_patience", c.training.schedule.patience},
              {"schedule_initial_lr", c.training.schedule.initial_lr},
              {"schedule_floor", c.training.schedule.floor}};
}

// ---------------------------------------------------------------------------
// Grid results

struct CellKey {
  double ratio = 1.0;
  std::uint64_t seed = 0;

  std::string id() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "r%.2f_s%llu", ratio, static_cast<unsigned long long>(seed));
    return buf;
  }
};

struct CellResult {
  CellKey key;
  bool ok = false;
  std::string error;
  std::size_t train_docs = 0;
  std::size_t train_entities = 0;
  std::size_t validation_docs = 0;
  std::size_t validation_entities = 0;
  std::size_t schedule_epochs = 0;
  double schedule_final_lr = 0.0;
  Report report;
};

struct RatioSummary {
  double ratio = 1.0;
  std::size_t cells = 0;  // successful cells
  double mean_f1 = 0.0;
  double std_f1 = 0.0;    // sample standard deviation, 0 for a single cell
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double std_recall = 0.0;
};

struct GridReport {
  json settings;
  std::vector<std::string> labels;
  std::vector<CellResult> cells;
  std::vector<RatioSummary> ratios;

  std::size_t failed() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const CellResult& c) { return !c.ok; }));
  }
};

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline std::vector<RatioSummary> summarize(const std::vector<CellResult>& cells) {
  std::vector<double> ratios;
  for (const auto& c : cells) {
    if (std::find(ratios.begin(), ratios.end(), c.key.ratio) == ratios.end()) ratios.push_back(c.key.ratio);
  }
  std::sort(ratios.begin(), ratios.end());
  std::vector<RatioSummary> out;
  for (double r : ratios) {
    std::vector<double> f1, p, rec;
    for (const auto& c : cells) {
      if (c.key.ratio != r || !c.ok) continue;
      f1.push_back(c.report.weighted_avg.f1);
      p.push_back(c.report.weighted_avg.precision);
      rec.push_back(c.report.weighted_avg.recall);
    }
    out.push_back({r, f1.size(), mean_of(f1), sample_std(f1), mean_of(p), mean_of(rec), sample_std(rec)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scorer endpoints
//
//   builtin:gold
//   builtin:noisy[:drop=P][:seed=S]   without drop: 1 - cell ratio; without seed: cell seed
//   builtin:constant:V
//   stdio:<command>                   {ratio} {seed} {cell_dir} are substituted
//   http://host:port[/path]

using ScorerFactory = std::function<std::unique_ptr<Scorer>(const CellKey&, const std::string& cell_dir)>;

inline std::string substitute(std::string s, std::string_view key, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = s.find(key, pos)) != std::string::npos) {
    s.replace(pos, key.size(), value);
    pos += value.size();
  }
  return s;
}

inline ScorerFactory make_scorer_factory(const std::string& endpoint, std::shared_ptr<const Dataset> dataset,
                                         const std::string& question_template, std::size_t max_in_flight = 1) {
  if (endpoint == "builtin:gold") {
    return [dataset, question_template](const CellKey&, const std::string&) -> std::unique_ptr<Scorer> {
      return std::make_unique<mock::GoldOracle>(dataset, question_template);
    };
  }
  if (endpoint.starts_with("builtin:noisy")) {
    std::optional<double> drop;
    std::optional<std::uint64_t> seed;
    std::string_view rest = std::string_view(endpoint).substr(std::string_view("builtin:noisy").size());
    while (!rest.empty()) {
      if (rest.front() != ':') throw std::invalid_argument("malformed endpoint '" + endpoint + "'");
      rest.remove_prefix(1);
      const auto next = rest.find(':');
      const std::string item(rest.substr(0, next));
      rest = next == std::string_view::npos ? std::string_view{} : rest.substr(next);
      if (item.starts_with("drop=")) drop = std::stod(item.substr(5));
      else if (item.starts_with("seed=")) seed = std::stoull(item.substr(5));
      else throw std::invalid_argument("unknown noisy oracle option '" + item + "'");
    }
    return [dataset, question_template, drop, seed](const CellKey& key, const std::string&) -> std::unique_ptr<Scorer> {
      return std::make_unique<mock::NoisyOracle>(dataset, drop.value_or(1.0 - key.ratio), seed.value_or(key.seed),
                                                 question_template);
    };
  }
  if (endpoint.starts_with("builtin:constant:")) {
    const double v = std::stod(endpoint.substr(std::string("builtin:constant:").size()));
    return [v](const CellKey&, const std::string&) -> std::unique_ptr<Scorer> {
      return std::make_unique<mock::Constant>(v);
    };
  }
  if (endpoint.starts_with("stdio:") || endpoint.starts_with("http://")) {
    return [endpoint, max_in_flight](const CellKey& key, const std::string& cell_dir) {
      char ratio[32];
      std::snprintf(ratio, sizeof ratio, "%.2f", key.ratio);
      std::string e = substitute(endpoint, "{ratio}", ratio);
      e = substitute(e, "{seed}", std::to_string(key.seed));
      e = substitute(e, "{cell_dir}", cell_dir);
      return transport::connect(e, static_cast<std::ptrdiff_t>(max_in_flight));
    };
  }
  throw std::invalid_argument("unsupported scorer endpoint '" + endpoint + "'");
}

// Called once per cell with the split its metrics were computed on.
using CellObserver = std::function<void(const CellKey&, const Split& test_split)>;

inline std::vector<CellKey> cell_keys(const ExperimentConfig& c) {
  if (c.setting == Setting::kVanilla || c.setting == Setting::kZeroShot) return {{1.0, c.seeds.front()}};
  std::vector<CellKey> keys;
  for (double r : c.ratios) {
    for (auto s : c.seeds) keys.push_back({r, s});
  }
  return keys;
}

// Runs every (ratio, seed) cell. Train and validation splits are degraded per
// cell; metrics always come from the untouched test split. A cell whose
// scorer fails is recorded as failed and the run continues.
inline GridReport run(const ExperimentConfig& config, std::shared_ptr<const Dataset> dataset,
                      const ScorerFactory& factory, const std::filesystem::path& output_dir = {},
                      const CellObserver& observer = {}) {
  config.check();
  const Split& test = dataset->split(config.test_split);
  const std::vector<std::string> labels =
      config.setting == Setting::kZeroShot ? config.zero_shot_labels : dataset->label_set;

  const auto keys = cell_keys(config);
  std::vector<CellResult> results(keys.size());
  std::atomic<std::size_t> next{0};

  auto run_cell = [&](std::size_t idx) {
    CellResult& cell = results[idx];
    cell.key = keys[idx];
    try {
      std::string cell_dir;
      if (config.setting == Setting::kNoisyTags || config.setting == Setting::kFewShotDocs) {
        SubsampleSpec spec{config.setting == Setting::kNoisyTags ? SubsampleKind::kTags : SubsampleKind::kDocuments,
                           cell.key.ratio, cell.key.seed, config.tag_selection};
        const Dataset degraded = subsample_training_splits(*dataset, spec);
        if (const auto* tr = degraded.find_split("train")) {
          cell.train_docs = tr->documents.size();
          cell.train_entities = entity_count(*tr);
        }
        if (const auto* va = degraded.find_split("validation")) {
          cell.validation_docs = va->documents.size();
          cell.validation_entities = entity_count(*va);
        }
        if (!output_dir.empty()) {
          const auto dir = output_dir / "cells" / cell.key.id() / "data";
          save(degraded, dir);
          cell_dir = dir.string();
        }
      } else {
        if (const auto* tr = dataset->find_split("train")) {
          cell.train_docs = tr->documents.size();
          cell.train_entities = entity_count(*tr);
        }
        if (const auto* va = dataset->find_split("validation")) {
          cell.validation_docs = va->documents.size();
          cell.validation_entities = entity_count(*va);
        }
      }
      auto scorer = factory(cell.key, cell_dir);
      if (config.training.enabled) {
        json options = settings_json(config);
        options["cell"] = cell.key.id();
        if (!cell_dir.empty()) options["cell_dir"] = cell_dir;
        const auto sched = drive_schedule(*scorer, config.training.schedule, options, cell.key.id() + "/schedule");
        cell.schedule_epochs = sched.final_state.epoch;
        cell.schedule_final_lr = sched.final_state.lr;
      }
      if (observer) observer(cell.key, test);
      cell.report = evaluate(test, labels, *scorer, config.pipeline, cell.key.id()).report;
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  };

  const std::size_t workers = std::min(config.jobs, keys.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < keys.size(); ++i) run_cell(i);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < keys.size(); i = next++) run_cell(i);
      });
    }
  }

  GridReport report;
  report.settings = settings_json(config);
  report.settings["dataset"] = dataset->name;
  report.settings["test_split"] = config.test_split;
  report.labels = labels;
  report.cells = std::move(results);
  report.ratios = summarize(report.cells);
  return report;
}

// Loads the dataset named in the config and runs it against the configured
// endpoint; the DOCIE_SCORER_ENDPOINT environment variable overrides it.
inline GridReport run(ExperimentConfig config, const std::filesystem::path& output_dir = {}) {
  if (const char* env = std::getenv(kEndpointEnv); env && *env) config.scorer = env;
  auto dataset = std::make_shared<const Dataset>(load(config.dataset, parse_adapter(config.adapter)));
  auto factory = make_scorer_factory(config.scorer, dataset, config.pipeline.question_template, config.max_in_flight);
  return run(config, dataset, factory, output_dir);
}

// ---------------------------------------------------------------------------
// Report (de)serialization and emission

inline json to_json(const LabelMetrics& m) {
  return json{{"label", m.label}, {"tp", m.true_positives}, {"fp", m.false_positives}, {"fn", m.false_negatives},
              {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

inline LabelMetrics label_metrics_from_json(const json& j) {
  LabelMetrics m;
  m.label = j.at("label").get<std::string>();
  m.true_positives = j.at("tp").get<std::size_t>();
  m.false_positives = j.at("fp").get<std::size_t>();
  m.false_negatives = j.at("fn").get<std::size_t>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.support = j.at("support").get<std::size_t>();
  return m;
}

inline json to_json(const Report& r) {
  json labels = json::array();
  for (const auto& l : r.labels) labels.push_back(to_json(l));
  return json{{"match_mode", to_string(r.match_mode)},
              {"labels", labels},
              {"weighted_avg",
               {{"precision", r.weighted_avg.precision}, {"recall", r.weighted_avg.recall}, {"f1", r.weighted_avg.f1}}}};
}

inline Report report_from_json(const json& j) {
  Report r;
  r.match_mode = parse_match_mode(j.at("match_mode").get<std::string>());
  for (const auto& l : j.at("labels")) r.labels.push_back(label_metrics_from_json(l));
  const auto& w = j.at("weighted_avg");
  r.weighted_avg = {w.at("precision").get<double>(), w.at("recall").get<double>(), w.at("f1").get<double>()};
  return r;
}

inline json to_json(const GridReport& g) {
  json cells = json::array();
  for (const auto& c : g.cells) {
    cells.push_back(json{{"id", c.key.id()},
                         {"ratio", c.key.ratio},
                         {"seed", c.key.seed},
                         {"ok", c.ok},
                         {"error", c.error},
                         {"train_docs", c.train_docs},
                         {"train_entities", c.train_entities},
                         {"validation_docs", c.validation_docs},
                         {"validation_entities", c.validation_entities},
                         {"schedule_epochs", c.schedule_epochs},
                         {"schedule_final_lr", c.schedule_final_lr},
                         {"report", to_json(c.report)}});
  }
  json ratios = json::array();
  for (const auto& r : g.ratios) {
    ratios.push_back(json{{"ratio", r.ratio}, {"cells", r.cells}, {"mean_f1", r.mean_f1}, {"std_f1", r.std_f1},
                          {"mean_precision", r.mean_precision}, {"mean_recall", r.mean_recall},
                          {"std_recall", r.std_recall}});
  }
  return json{{"settings", g.settings}, {"labels", g.labels}, {"cells", cells}, {"ratios", ratios}};
}

inline GridReport grid_report_from_json(const json& j) {
  GridReport g;
  try {
    g.settings = j.at("settings");
    g.labels = j.at("labels").get<std::vector<std::string>>();
    for (const auto& c : j.at("cells")) {
      CellResult r;
      r.key = {c.at("ratio").get<double>(), c.at("seed").get<std::uint64_t>()};
      r.ok = c.at("ok").get<bool>();
      r.error = c.at("error").get<std::string>();
      r.train_docs = c.at("train_docs").get<std::size_t>();
      r.train_entities = c.at("train_entities").get<std::size_t>();
      r.validation_docs = c.at("validation_docs").get<std::size_t>();
      r.validation_entities = c.at("validation_entities").get<std::size_t>();
      r.schedule_epochs = c.at("schedule_epochs").get<std::size_t>();
      r.schedule_final_lr = c.at("schedule_final_lr").get<double>();
      r.report = report_from_json(c.at("report"));
      g.cells.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("report: ") + e.what());
  }
  g.ratios = summarize(g.cells);
  return g;
}

inline std::string cells_csv(const GridReport& g) {
  std::string out =
      "cell,ratio,seed,status,precision,recall,f1,tp,fp,fn,support,train_docs,train_entities,validation_docs,"
      "validation_entities\n";
  for (const auto& c : g.cells) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& l : c.report.labels) {
      tp += l.true_positives;
      fp += l.false_positives;
      fn += l.false_negatives;
    }
    out += c.key.id() + "," + fmt_fixed(c.key.ratio, 2) + "," + std::to_string(c.key.seed) + "," +
           (c.ok ? "ok" : "failed") + "," + fmt_fixed(c.report.weighted_avg.precision) + "," +
           fmt_fixed(c.report.weighted_avg.recall) + "," + fmt_fixed(c.report.weighted_avg.f1) + "," +
           std::to_string(tp) + "," + std::to_string(fp) + "," + std::to_string(fn) + "," + std::to_string(tp + fn) +
           "," + std::to_string(c.train_docs) + "," + std::to_string(c.train_entities) + "," +
           std::to_string(c.validation_docs) + "," + std::to_string(c.validation_entities) + "\n";
  }
  return out;
}

// Error-bar data: one row per ratio.
inline std::string plot_csv(const GridReport& g) {
  std::string out = "ratio,cells,mean_f1,std_f1,mean_recall,std_recall\n";
  for (const auto& r : g.ratios) {
    out += fmt_fixed(r.ratio, 2) + "," + std::to_string(r.cells) + "," + fmt_fixed(r.mean_f1) + "," +
           fmt_fixed(r.std_f1) + "," + fmt_fixed(r.mean_recall) + "," + fmt_fixed(r.std_recall) + "\n";
  }
  return out;
}

// Per-label metrics averaged over the successful cells of one ratio.
inline Report mean_report(const GridReport& g, double ratio) {
  Report out;
  std::size_t n = 0;
  for (const auto& c : g.cells) {
    if (c.key.ratio != ratio || !c.ok) continue;
    if (n == 0) {
      out = c.report;
      for (auto& l : out.labels) l.precision = l.recall = l.f1 = 0.0;
      out.weighted_avg = {};
    }
    ++n;
    for (std::size_t i = 0; i < out.labels.size() && i < c.report.labels.size(); ++i) {
      out.labels[i].precision += c.report.labels[i].precision;
      out.labels[i].recall += c.report.labels[i].recall;
      out.labels[i].f1 += c.report.labels[i].f1;
    }
    out.weighted_avg.precision += c.report.weighted_avg.precision;
    out.weighted_avg.recall += c.report.weighted_avg.recall;
    out.weighted_avg.f1 += c.report.weighted_avg.f1;
  }
  if (n > 0) {
    const auto dn = static_cast<double>(n);
    for (auto& l : out.labels) {
      l.precision /= dn;
      l.recall /= dn;
      l.f1 /= dn;
    }
    out.weighted_avg.precision /= dn;
    out.weighted_avg.recall /= dn;
    out.weighted_avg.f1 /= dn;
  }
  return out;
}

inline std::string summary_markdown(const GridReport& g) {
  std::string out = "# Experiment summary\n\n## Settings\n\n| Setting | Value |\n|---|---|\n";
  for (const auto& [k, v] : g.settings.items()) out += "| " + k + " | " + (v.is_string() ? v.get<std::string>() : v.dump()) + " |\n";
  out += "\n## Weighted F1 by ratio\n\n| Ratio | Cells | Mean F1 | Std F1 | Mean Precision | Mean Recall |\n";
  out += "|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& r : g.ratios) {
    out += "| " + fmt_fixed(r.ratio, 2) + " | " + std::to_string(r.cells) + " | " + fmt_fixed(100 * r.mean_f1, 2) +
           " | " + fmt_fixed(100 * r.std_f1, 2) + " | " + fmt_fixed(100 * r.mean_precision, 2) + " | " +
           fmt_fixed(100 * r.mean_recall, 2) + " |\n";
  }
  for (const auto& r : g.ratios) {
    out += "\n## Per-label metrics, ratio " + fmt_fixed(r.ratio, 2) + " (mean over cells)\n\n";
    out += to_markdown(mean_report(g, r.ratio));
  }
  if (const auto failed = g.failed(); failed > 0) {
    out += "\n## Failed cells\n\n";
    for (const auto& c : g.cells) {
      if (!c.ok) out += "- " + c.key.id() + ": " + c.error + "\n";
    }
  }
  return out;
}

struct EmittedFiles {
  std::filesystem::path report_json, cells_csv, plot_csv, summary_md;
};

inline EmittedFiles emit(const GridReport& g, const std::filesystem::path& dir) {
  EmittedFiles f{dir / "report.json", dir / "cells.csv", dir / "plot.csv", dir / "summary.md"};
  write_file(f.report_json, dump_json(to_json(g)));
  write_file(f.cells_csv, cells_csv(g));
  write_file(f.plot_csv, plot_csv(g));
  write_file(f.summary_md, summary_markdown(g));
  for (const auto& c : g.cells) write_file(dir / "cells" / c.key.id() / "report.csv", to_csv(c.report));
  return f;
}

}  // namespace docie::experiment
