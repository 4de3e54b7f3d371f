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

// Acceptance checks: one PASS/FAIL/SKIP line per criterion, nonzero exit on
// any FAIL.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "docie/chunker.hpp"
#include "docie/dataset_io.hpp"
#include "docie/experiment.hpp"
#include "docie/iob.hpp"
#include "docie/metrics.hpp"
#include "docie/pipeline.hpp"
#include "docie/qa_convert.hpp"
#include "docie/schedule.hpp"
#include "docie/subsample.hpp"
#include "docie/transport.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace {

using namespace docie;
using Clock = std::chrono::steady_clock;

struct Outcome {
  enum { kPass, kFail, kSkip } status = kPass;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::kFail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::kSkip, std::move(d)}; }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::filesystem::path scratch(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("docie-accept-" + std::to_string(::getpid())) / name;
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

std::string slurp(const std::filesystem::path& p) { return read_file(p); }

// ---------------------------------------------------------------------------

Outcome span_oracle() {
  const auto t0 = Clock::now();
  SplitMix64 rng(derive_seed(1, "span-oracle"));
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    QALogits l;
    for (std::size_t i = 0; i < n; ++i) {
      // Half-integer grid so ties occur.
      l.start_logits.push_back(std::round((rng.uniform() * 10 - 5) * 2) / 2);
      l.end_logits.push_back(std::round((rng.uniform() * 10 - 5) * 2) / 2);
    }
    l.null_start = std::round((rng.uniform() * 6 - 3) * 2) / 2;
    l.null_end = std::round((rng.uniform() * 6 - 3) * 2) / 2;
    ExtractConfig cfg;
    cfg.k = 1 + rng.below(4);
    cfg.max_answer_len = 1 + rng.below(n + 2);
    cfg.answerability = trial % 2 ? Answerability::kNullDiff : Answerability::kRawPositive;
    cfg.allow_overlap = rng.below(2) == 1;
    const auto want = testing::brute_force_spans(l.start_logits, l.end_logits, l.null_start, l.null_end, cfg.k,
                                                 cfg.max_answer_len, cfg.answerability == Answerability::kNullDiff,
                                                 cfg.allow_overlap);
    const auto got = extract_spans(l, cfg);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = got[i].token_start == want[i].s && got[i].token_end == want[i].e && got[i].score == want[i].score;
    }
    if (!same) return fail("instance " + std::to_string(trial) + " differs from brute force");
  }
  const double secs = seconds_since(t0);
  if (secs >= 5.0) return fail("1000 instances took " + fmt("%.2f s", secs));
  return pass("1000 instances in " + fmt("%.3f s", secs));
}

Outcome iob_round_trip() {
  const std::vector<std::string> labels{"x", "y", "total"};
  const std::vector<iob::RepairPolicy> policies{iob::RepairPolicy::strict(), iob::RepairPolicy::begin_on_orphan(),
                                                iob::RepairPolicy::bridge(1)};
  SplitMix64 rng(derive_seed(1, "iob"));
  for (int trial = 0; trial < 1000; ++trial) {
    const Document doc = testing::random_document(rng, "d", 0, 40);
    const auto ents = testing::random_layout(rng, doc, labels);
    const auto seq = iob::encode(doc.tokens.size(), ents, labels);
    for (const auto& p : policies) {
      if (iob::decode(seq, p, doc.tokens) != ents) return fail("layout " + std::to_string(trial) + " under " + p.name());
    }
  }
  std::vector<std::string> tags;
  for (char c : std::string("BIIIIOIIIII")) tags.push_back(c == 'O' ? "O" : std::string(1, c) + "-x");
  const auto seq = iob::TagSequence::parse(tags, labels);
  const auto orphan = iob::decode(seq, iob::RepairPolicy::begin_on_orphan());
  const auto bridged = iob::decode(seq, iob::RepairPolicy::bridge(1));
  if (orphan.size() != 2 || bridged.size() != 1) {
    return fail("BIIIIOIIIII gave " + std::to_string(orphan.size()) + " / " + std::to_string(bridged.size()));
  }
  return pass("1000 layouts x 3 policies; BIIIIOIIIII -> 2 (begin_on_orphan), 1 (bridge(1))");
}

Outcome metrics() {
  const Dataset ds = testing::synthetic_dataset(20, 5);
  std::vector<std::vector<Entity>> gold;
  for (const auto& d : ds.split("test").documents) gold.push_back(d.entities);
  for (auto mode : {MatchMode::kSpan, MatchMode::kText}) {
    const Report r = score(gold, gold, ds.label_set, mode);
    if (r.weighted_avg.f1 != 1.0 || r.weighted_avg.precision != 1.0 || r.weighted_avg.recall != 1.0) {
      return fail("identity fixture is not all 1.0");
    }
  }
  const std::vector<std::vector<Entity>> empty(gold.size());
  const Report z = score(empty, gold, ds.label_set, MatchMode::kSpan);
  if (z.weighted_avg.f1 != 0.0 || z.weighted_avg.precision != 0.0 || z.weighted_avg.recall != 0.0) {
    return fail("empty predictions are not 0/0/0");
  }
  const std::vector<std::string> two{"company", "date"};
  const std::vector<std::vector<Entity>> g{{{"company", 0, 2, "A B"}, {"date", 5, 1, "d"}}};
  const std::vector<std::vector<Entity>> p{{{"company", 0, 2, "A B"}, {"date", 4, 2, "c d"}}};
  if (score(p, g, two, MatchMode::kSpan).weighted_avg.f1 != 0.5) return fail("mixed case f1 != 0.5");
  SplitMix64 rng(derive_seed(1, "metrics"));
  const std::vector<std::string> labels{"a", "b", "c"};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::vector<Entity>> gg, pp;
    std::size_t count = 0;
    for (std::size_t d = 0, n = 1 + rng.below(4); d < n; ++d) {
      const Document doc = testing::random_document(rng, "d", 1, 15);
      gg.push_back(testing::random_layout(rng, doc, labels, 3));
      pp.push_back(testing::random_layout(rng, doc, labels, 3));
      if (rng.below(2)) pp.back().insert(pp.back().end(), gg.back().begin(), gg.back().end());
      count += gg.back().size();
    }
    const Report r = score(pp, gg, labels, MatchMode::kSpan);
    std::size_t tp_fn = 0;
    for (const auto& l : r.labels) tp_fn += l.true_positives + l.false_negatives;
    if (tp_fn != count) return fail("tp+fn != gold count on case " + std::to_string(trial));
  }
  return pass("identity 1.0, empty 0/0/0, mixed 0.5, 500 random cases tp+fn == gold");
}

Outcome schedule() {
  ScheduleState s = ScheduleState::initial(2e-5);
  while (!s.stopped && s.epoch < 1000) s = schedule_step(s, 0.0, 10, 1e-7);
  if (s.halvings != 8 || s.epoch != 80 || !s.stopped) {
    return fail(std::to_string(s.halvings) + " halvings, stopped at epoch " + std::to_string(s.epoch));
  }
  return pass("8 halvings, stop at epoch 80");
}

Outcome chunker() {
  std::vector<std::pair<std::size_t, std::size_t>> got;
  for (const auto& c : chunk("d", 10, {4, 2})) got.emplace_back(c.start, c.end);
  if (got != std::vector<std::pair<std::size_t, std::size_t>>{{0, 4}, {2, 6}, {4, 8}, {6, 10}}) {
    return fail("10/4/2 example");
  }
  SplitMix64 rng(derive_seed(1, "chunker"));
  const std::vector<std::string> labels{"a", "b"};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t window = 1 + rng.below(24);
    const std::size_t overlap = rng.below(window);
    Document doc = testing::random_document(rng, "d", 0, 90);
    doc.entities = testing::random_layout(rng, doc, labels, overlap + 1);
    const auto cs = chunk(doc, {window, overlap});
    std::vector<bool> covered(doc.tokens.size(), false);
    for (const auto& c : cs) {
      for (std::size_t t = c.start; t < c.end; ++t) covered[t] = true;
    }
    if (std::find(covered.begin(), covered.end(), false) != covered.end()) return fail("coverage, trial " + std::to_string(trial));
    for (const auto& e : doc.entities) {
      if (e.token_len > overlap + 1) continue;
      const bool inside = std::any_of(cs.begin(), cs.end(), [&](const Chunk& c) {
        return c.start <= e.token_start && e.token_end() <= c.end;
      });
      if (!inside) return fail("containment, trial " + std::to_string(trial));
    }
  }
  return pass("10/4/2 example; 1000 random specs covered and contained");
}

Outcome qa_conversion() {
  const Dataset fx = load(std::filesystem::path(DOCIE_SOURCE_DIR) / "tests" / "data" / "fixture");
  for (const auto& split : fx.splits) {
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& d : split.documents) {
      for (const auto& e : d.entities) pairs.insert({d.id, e.label});
    }
    const auto off = qa::to_qa(split, fx.label_set, qa::kDefaultTemplate, false);
    const auto on = qa::to_qa(split, fx.label_set, qa::kDefaultTemplate, true);
    if (off.size() != pairs.size() || off.size() != 2) return fail("fixture answerable count " + std::to_string(off.size()));
    if (on.size() != split.documents.size() * fx.label_set.size()) return fail("fixture count with unanswerable");
  }
  SplitMix64 rng(derive_seed(1, "qa-convert"));
  const std::vector<std::string> labels{"a", "b", "c", "d"};
  for (int trial = 0; trial < 500; ++trial) {
    Split split{"train", {}};
    std::size_t n_entities = 0;
    const std::size_t n_docs = rng.below(6);
    for (std::size_t i = 0; i < n_docs; ++i) {
      Document d = testing::random_document(rng, "d" + std::to_string(i), 1, 20);
      d.entities = testing::random_layout(rng, d, labels, 3);
      n_entities += d.entities.size();
      split.documents.push_back(std::move(d));
    }
    const auto off = qa::to_qa(split, labels, qa::kDefaultTemplate, false);
    if (off.size() > std::min(n_entities, n_docs * labels.size())) return fail("count bound, trial " + std::to_string(trial));
    for (const auto& s : off) {
      if (s.answers.empty()) return fail("answerless sample with the flag off, trial " + std::to_string(trial));
    }
  }
  return pass("fixture counts match enumeration; bound and positivity on 500 random datasets");
}

Outcome end_to_end() {
  const auto t0 = Clock::now();
  const auto dir = scratch("e2e");
  const Dataset ds = testing::synthetic_dataset(100, 11);
  save(ds, dir);
  const Split& test = ds.split("test");
  std::string detail;
  for (auto mode : {protocol::Mode::kQa, protocol::Mode::kTc}) {
    auto scorer = transport::connect("stdio:" DOCIE_MOCK_SCORER " --dataset '" + dir.string() + "'");
    PipelineSettings s;
    s.mode = mode;
    s.match = mode == protocol::Mode::kQa ? MatchMode::kText : MatchMode::kSpan;
    s.chunk = {48, 16};
    const auto ev = evaluate(test, ds.label_set, *scorer, s);
    const double f1 = ev.report.weighted_avg.f1;
    if (f1 != 1.0) return fail(protocol::to_string(mode) + " weighted f1 " + fmt("%.4f", f1));
    detail += protocol::to_string(mode) + " f1 1.0; ";
  }
  const double secs = seconds_since(t0);
  if (secs >= 30.0) return fail("took " + fmt("%.1f s", secs));
  return pass(detail + std::to_string(test.documents.size()) + " docs in " + fmt("%.2f s", secs));
}

experiment::GridReport noisy_grid(const std::shared_ptr<const Dataset>& ds, std::size_t jobs) {
  experiment::ExperimentConfig c;
  c.setting = experiment::Setting::kNoisyTags;
  c.jobs = jobs;
  c.pipeline.chunk = {64, 16};
  return experiment::run(c, ds, experiment::make_scorer_factory("builtin:noisy", ds, c.pipeline.question_template));
}

Outcome robustness_curve() {
  auto ds = std::make_shared<const Dataset>(testing::synthetic_dataset(100, 21));
  const auto g = noisy_grid(ds, 4);
  std::ostringstream detail;
  double prev = -1.0;
  bool ok = g.failed() == 0;
  for (const auto& r : g.ratios) {
    detail << fmt("%.1f", r.ratio) << ":" << fmt("%.3f", r.mean_recall) << " ";
    ok = ok && std::abs(r.mean_recall - r.ratio) <= 0.07 && r.mean_recall >= prev;
    prev = r.mean_recall;
  }
  if (g.ratios.size() != 5) ok = false;
  return ok ? pass("mean recall " + detail.str()) : fail("mean recall " + detail.str());
}

Outcome determinism() {
  auto ds = std::make_shared<const Dataset>(testing::synthetic_dataset(40, 3));
  std::vector<std::string> runs;
  for (int i = 0; i < 2; ++i) {
    const auto dir = scratch("det-" + std::to_string(i));
    save(subsample_training_splits(*ds, {SubsampleKind::kTags, 0.4, 9, TagSelection::kBernoulli}), dir / "tags");
    save(subsample_training_splits(*ds, {SubsampleKind::kDocuments, 0.4, 9, TagSelection::kExactCount}), dir / "docs");
    write_file(dir / "qa.json", dump_json(qa::to_squad(qa::to_qa(*ds))));
    const auto g = noisy_grid(ds, i == 0 ? 1 : 3);
    const auto files = experiment::emit(g, dir / "grid");
    std::string blob;
    for (const auto& f : {dir / "tags" / "train.json", dir / "tags" / "validation.json", dir / "docs" / "train.json",
                          dir / "qa.json", files.report_json, files.cells_csv, files.plot_csv, files.summary_md}) {
      blob += slurp(f);
      blob.push_back('\0');
    }
    runs.push_back(std::move(blob));
  }
  if (runs[0] != runs[1]) return fail("artifacts differ between reruns");
  return pass("subsample, QA export and grid reports byte-identical across reruns (jobs 1 vs 3)");
}

// ---------------------------------------------------------------------------
// Data-dependent checks.

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return v && *v ? v : nullptr;
}

std::size_t qa_count(const qa::QADataset& q, const std::string& split) {
  const auto stats = qa::qa_stats(q);
  auto it = stats.find(split);
  return it == stats.end() ? 0 : it->second;
}

Outcome sroie_counts() {
  const char* dir = env("DOCIE_SROIE_DIR");
  if (!dir) return skip("DOCIE_SROIE_DIR not set");
  const Dataset ds = load(dir, Adapter::kSroie);
  const auto q = qa::to_qa(ds);
  const auto train = qa_count(q, "train"), test = qa_count(q, "test");
  const std::string d = "train " + std::to_string(train) + " / test " + std::to_string(test) + " (want 2498 / 1384)";
  return train == 2498 && test == 1384 ? pass(d) : fail(d);
}

Outcome kleister_counts() {
  const char* dir = env("DOCIE_KLEISTER_DIR");
  if (!dir) return skip("DOCIE_KLEISTER_DIR not set");
  const Dataset ds = load(dir, Adapter::kKleister);
  const auto q = qa::to_qa(ds);
  const auto train = qa_count(q, "train");
  // The released test split has no answers; the held-out counts come from dev-0.
  const auto test = qa_count(q, "validation");
  const std::string d = "train " + std::to_string(train) + " / dev " + std::to_string(test) + " (want 744 / 254)";
  return train == 744 && test == 254 ? pass(d) : fail(d);
}

Outcome cuad_ranking() {
  const char* path = env("DOCIE_CUAD_PATH");
  if (!path) return skip("DOCIE_CUAD_PATH not set");
  AdapterOptions opt;
  opt.train_fraction = 1.0;
  const auto stats = rank_labels_by_length(load(path, Adapter::kCuad, opt), 1000);
  for (const auto& s : stats) {
    if (s.label != "Affiliate License-Licensor" && s.label != "Affiliated License Licensor") continue;
    const std::string d = "count " + std::to_string(s.count) + " mean " + fmt("%.1f", s.mean_chars) + " median " +
                          fmt("%.1f", s.median_chars) + " (want 96 / 576 / 485)";
    return s.count == 96 && std::abs(s.mean_chars - 576) <= 1 && std::abs(s.median_chars - 485) <= 1 ? pass(d) : fail(d);
  }
  return fail("affiliate licensor label not found");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> checks{
      {"span-extraction-oracle", span_oracle},
      {"iob-round-trip", iob_round_trip},
      {"metrics", metrics},
      {"schedule", schedule},
      {"chunker", chunker},
      {"qa-conversion", qa_conversion},
      {"end-to-end-gold-oracle-stdio", end_to_end},
      {"robustness-curve", robustness_curve},
      {"determinism", determinism},
      {"sroie-qa-counts", sroie_counts},
      {"kleister-qa-counts", kleister_counts},
      {"cuad-label-ranking", cuad_ranking},
  };
  int failures = 0;
  for (const auto& [name, fn] : checks) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.status == Outcome::kPass ? "PASS" : o.status == Outcome::kFail ? "FAIL" : "SKIP";
    std::printf("%s %s: %s\n", tag, name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.status == Outcome::kFail;
  }
  std::filesystem::remove_all(std::filesystem::temp_directory_path() / ("docie-accept-" + std::to_string(::getpid())));
  return failures == 0 ? 0 : 1;
}
