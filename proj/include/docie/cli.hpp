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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "docie/chunker.hpp"
#include "docie/dataset_io.hpp"
#include "docie/decode.hpp"
#include "docie/experiment.hpp"
#include "docie/metrics.hpp"
#include "docie/pipeline.hpp"
#include "docie/qa_convert.hpp"
#include "docie/subsample.hpp"

// Command-line front end. Every stage reads and writes files so pipelines
// compose in shell scripts:
//
//   validate     check a dataset against the core invariants
//   convert      native layout -> canonical dataset, or dataset -> QA file
//   chunk        document windows with remapped entity spans
//   subsample    degrade train/validation splits (tags or documents)
//   score        query a scorer for every chunk of a split (JSON lines)
//   decode       scores -> predicted entities
//   eval         predictions vs gold -> metrics report
//   rank-labels  labels by mean entity length
//   experiment   full setting grid from a config file
//   report       re-emit report files from report.json
namespace docie::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct DatasetArgs {
  std::string path;
  std::string adapter = "canonical";
  int page_width = 0;
  int page_height = 0;
  std::vector<std::string> labels;

  Dataset load() const {
    AdapterOptions opt;
    opt.page_width = page_width;
    opt.page_height = page_height;
    opt.labels = labels;
    return docie::load(path, parse_adapter(adapter), opt);
  }
};

struct Args {
  DatasetArgs ds;
  std::string split = "test";
  std::string out;
  std::string format = "qa";
  std::string question_template = std::string(qa::kDefaultTemplate);
  bool include_unanswerable = false;
  std::size_t window = 512;
  std::optional<std::size_t> overlap;
  std::string boundary = "drop";
  std::string kind = "tags";
  double ratio = 1.0;
  std::uint64_t seed = 0;
  std::string tag_selection = "bernoulli";
  std::string mode = "qa";
  std::string scorer = "builtin:gold";
  std::size_t max_in_flight = 1;
  std::vector<std::string> eval_labels;
  std::string scores;
  std::size_t k = 1;
  std::string top_k = "gold_count";
  std::size_t max_answer_len = 100;
  std::string answerability = "raw_positive";
  bool allow_overlap = false;
  std::string policy = "begin_on_orphan";
  std::string predictions;
  std::optional<std::string> match_mode;
  std::size_t n = 10;
  std::string config;
  std::string output_dir = "docie-out";
  std::optional<std::size_t> jobs;
  std::string input;
};

namespace detail {

inline void add_dataset_flags(CLI::App* sub, DatasetArgs& ds, bool with_labels = true) {
  sub->add_option("--dataset", ds.path, "Dataset directory (or file for cuad-style)")->required();
  sub->add_option("--adapter", ds.adapter, "canonical | funsd-style | sroie-style | kleister-style | cuad-style")
      ->capture_default_str();
  sub->add_option("--page-width", ds.page_width, "Native page width for box normalization (0: infer)");
  sub->add_option("--page-height", ds.page_height, "Native page height for box normalization (0: infer)");
  if (with_labels) sub->add_option("--labels", ds.labels, "cuad-style: categories to keep");
}

inline const Split& require_split(const Dataset& ds, const std::string& name) { return ds.split(name); }

inline json predicted_json(const Document& doc, const std::vector<PredictedSpan>& spans) {
  json ents = json::array();
  for (const auto& s : spans) {
    ents.push_back(json{{"label", s.label}, {"token_start", s.token_start}, {"token_len", s.token_len},
                        {"text", entity_text(doc, s.token_start, s.token_len)}, {"score", s.score}});
  }
  return json{{"doc_id", doc.id}, {"entities", ents}};
}

inline PipelineSettings settings_from(const Args& a) {
  PipelineSettings s;
  s.mode = protocol::parse_mode(a.mode);
  s.chunk = {a.window, a.overlap.value_or(default_overlap(a.window))};
  s.extract.k = a.k;
  s.extract.max_answer_len = a.max_answer_len;
  s.extract.answerability = parse_answerability(a.answerability);
  s.extract.allow_overlap = a.allow_overlap;
  s.top_k = parse_top_k_mode(a.top_k);
  s.repair = iob::RepairPolicy::parse(a.policy);
  s.question_template = a.question_template;
  s.match = a.match_mode ? parse_match_mode(*a.match_mode)
                         : (s.mode == protocol::Mode::kQa ? MatchMode::kText : MatchMode::kSpan);
  return s;
}

inline int run_validate(const Args& a, std::ostream& out) {
  Dataset ds;
  try {
    ds = a.ds.load();
  } catch (const ValidationError& e) {
    for (const auto& v : e.violations()) out << v.to_string() << "\n";
    return kExitFailure;
  }
  out << ds.name << ": ok";
  for (const auto& s : ds.splits) out << ", " << s.name << "=" << s.documents.size() << " docs/" << entity_count(s) << " entities";
  out << "\n";
  return kExitOk;
}

inline int run_convert(const Args& a, std::ostream& out) {
  const Dataset ds = a.ds.load();
  if (a.format == "canonical") {
    save(ds, a.out);
    out << "wrote canonical dataset " << a.out << "\n";
    return kExitOk;
  }
  if (a.format != "qa") throw std::invalid_argument("unknown --format '" + a.format + "'");
  const auto qa_ds = qa::to_qa(ds, a.question_template, a.include_unanswerable);
  write_file(a.out, dump_json(qa::to_squad(qa_ds)));
  for (const auto& [split, count] : qa::qa_stats(qa_ds)) out << split << "\t" << count << "\n";
  return kExitOk;
}

inline int run_chunk(const Args& a, std::ostream& out) {
  const Dataset ds = a.ds.load();
  const ChunkSpec spec{a.window, a.overlap.value_or(default_overlap(a.window))};
  const auto policy = parse_boundary_policy(a.boundary);
  json chunks = json::array();
  for (const auto& doc : require_split(ds, a.split).documents) {
    for (const auto& c : chunk(doc, spec)) {
      json spans = json::array();
      for (const auto& s : remap(c, doc.entities, policy)) {
        spans.push_back(json{{"label", s.label}, {"start", s.start}, {"len", s.len}, {"clipped", s.clipped},
                             {"partial", s.partial}});
      }
      chunks.push_back(json{{"doc_id", c.doc_id}, {"chunk_index", c.index}, {"token_start", c.start},
                            {"token_end", c.end}, {"spans", spans}});
    }
  }
  write_file(a.out, dump_json(json{{"window", spec.window}, {"overlap", spec.overlap},
                                   {"boundary", to_string(policy)}, {"chunks", chunks}}));
  out << "wrote " << chunks.size() << " chunks to " << a.out << "\n";
  return kExitOk;
}

inline int run_subsample(const Args& a, std::ostream& out) {
  const Dataset ds = a.ds.load();
  const SubsampleSpec spec{parse_subsample_kind(a.kind), a.ratio, a.seed, parse_tag_selection(a.tag_selection)};
  const Dataset degraded = subsample_training_splits(ds, spec);
  save(degraded, a.out);
  for (const auto& s : degraded.splits) {
    out << s.name << "\t" << s.documents.size() << " docs\t" << entity_count(s) << " entities\n";
  }
  return kExitOk;
}

inline int run_score(const Args& a, std::ostream& out) {
  auto ds = std::make_shared<const Dataset>(a.ds.load());
  const auto settings = settings_from(a);
  const auto labels = a.eval_labels.empty() ? ds->label_set : a.eval_labels;
  auto factory = experiment::make_scorer_factory(a.scorer, ds, a.question_template, a.max_in_flight);
  auto scorer = factory({1.0, a.seed}, "");
  std::string lines;
  std::size_t n = 0;
  for (const auto& doc : require_split(*ds, a.split).documents) {
    for (const auto& c : chunk(doc, settings.chunk)) {
      if (settings.mode == protocol::Mode::kQa) {
        for (const auto& label : labels) {
          const auto req = make_qa_request(doc, c, qa::label_to_question(label, a.question_template),
                                           "score/" + doc.id + "/" + label + "/" + std::to_string(c.index));
          const auto resp = scorer->score(req);
          protocol::check_response(req, resp);
          lines += json{{"doc_id", doc.id}, {"label", label}, {"chunk_index", c.index}, {"chunk_start", c.start},
                        {"response", protocol::to_json(resp)}}
                       .dump() +
                   "\n";
          ++n;
        }
      } else {
        const auto req = make_tc_request(doc, c, labels, "score/" + doc.id + "/" + std::to_string(c.index));
        const auto resp = scorer->score(req);
        protocol::check_response(req, resp);
        lines += json{{"doc_id", doc.id}, {"labels", labels}, {"chunk_index", c.index}, {"chunk_start", c.start},
                      {"response", protocol::to_json(resp)}}
                     .dump() +
                 "\n";
        ++n;
      }
    }
  }
  write_file(a.out, lines);
  out << "wrote " << n << " scored chunks to " << a.out << "\n";
  return kExitOk;
}

inline int run_decode(const Args& a, std::ostream& out) {
  const Dataset ds = a.ds.load();
  const Split& split = require_split(ds, a.split);
  const auto settings = settings_from(a);
  std::istringstream in(read_file(a.scores));
  // doc -> label -> chunks (qa); doc -> chunks (tc)
  std::map<std::string, std::map<std::string, std::vector<ChunkQA>>> qa_chunks;
  std::map<std::string, std::vector<ChunkTags>> tc_chunks;
  std::map<std::string, std::vector<std::string>> tc_labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DatasetError(a.scores + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const auto resp = protocol::response_from_json(j.at("response"));
    const std::string doc_id = j.at("doc_id").get<std::string>();
    const std::size_t start = j.at("chunk_start").get<std::size_t>();
    if (resp.mode != settings.mode) throw std::invalid_argument("scores file mode differs from --mode");
    if (resp.mode == protocol::Mode::kQa) {
      qa_chunks[doc_id][j.at("label").get<std::string>()].push_back({start, resp.qa});
    } else {
      tc_chunks[doc_id].push_back({start, resp.tag_logits});
      tc_labels[doc_id] = j.at("labels").get<std::vector<std::string>>();
    }
  }
  json docs = json::array();
  for (const auto& doc : split.documents) {
    std::vector<PredictedSpan> spans;
    if (settings.mode == protocol::Mode::kQa) {
      for (const auto& [label, chunks] : qa_chunks[doc.id]) {
        const auto got = decode_qa_chunks(label, chunks, extract_config_for(doc, label, settings));
        spans.insert(spans.end(), got.begin(), got.end());
      }
      sort_by_position(spans);
    } else if (tc_chunks.count(doc.id)) {
      spans = decode_tc_chunks(tc_labels[doc.id], tc_chunks[doc.id], settings.repair);
    }
    docs.push_back(predicted_json(doc, spans));
  }
  json result{{"mode", a.mode}, {"split", a.split}, {"documents", docs}};
  if (settings.mode == protocol::Mode::kQa) {
    result["top_k"] = a.top_k;
    result["answerability"] = a.answerability;
  } else {
    result["repair_policy"] = settings.repair.name();
  }
  write_file(a.out, dump_json(result));
  out << "wrote predictions for " << docs.size() << " documents to " << a.out << "\n";
  return kExitOk;
}

inline int run_eval(const Args& a, std::ostream& out) {
  const Dataset ds = a.ds.load();
  const Split& split = require_split(ds, a.split);
  const json preds = parse_json_file(a.predictions);
  std::map<std::string, std::vector<Entity>> by_doc;
  for (const auto& d : preds.at("documents")) {
    auto& v = by_doc[d.at("doc_id").get<std::string>()];
    for (const auto& e : d.at("entities")) v.push_back(e.get<Entity>());
  }
  const auto labels = a.eval_labels.empty() ? ds.label_set : a.eval_labels;
  const auto mode = protocol::parse_mode(preds.value("mode", a.mode));
  const MatchMode match =
      a.match_mode ? parse_match_mode(*a.match_mode) : (mode == protocol::Mode::kQa ? MatchMode::kText : MatchMode::kSpan);
  std::vector<std::vector<Entity>> pred, gold;
  for (const auto& doc : split.documents) {
    pred.push_back(by_doc[doc.id]);
    gold.push_back(gold_for(doc, labels));
  }
  const Report r = score(pred, gold, labels, match);
  if (!a.output_dir.empty()) {
    write_file(std::filesystem::path(a.output_dir) / "report.csv", to_csv(r));
    write_file(std::filesystem::path(a.output_dir) / "report.md", to_markdown(r));
  }
  out << "match mode: " << to_string(match) << "\n" << to_markdown(r);
  return kExitOk;
}

inline int run_rank_labels(const Args& a, std::ostream& out) {
  const Dataset ds = a.ds.load();
  const auto stats = rank_labels_by_length(ds, a.n);
  std::string csv = "label,count,mean_chars,median_chars\n";
  out << "| Label | Count | Average #characters | Median #characters |\n|---|---:|---:|---:|\n";
  for (const auto& s : stats) {
    csv += s.label + "," + std::to_string(s.count) + "," + fmt_fixed(s.mean_chars, 2) + "," +
           fmt_fixed(s.median_chars, 2) + "\n";
    out << "| " << s.label << " | " << s.count << " | " << fmt_fixed(s.mean_chars, 2) << " | "
        << fmt_fixed(s.median_chars, 2) << " |\n";
  }
  if (!a.out.empty()) write_file(a.out, csv);
  return kExitOk;
}

inline int run_experiment(const Args& a, std::ostream& out) {
  auto cfg = experiment::load_config(a.config);
  if (a.jobs) cfg.jobs = *a.jobs;
  const auto report = experiment::run(cfg, a.output_dir);
  const auto files = experiment::emit(report, a.output_dir);
  out << experiment::plot_csv(report);
  out << "wrote " << files.report_json.string() << "\n";
  if (const auto failed = report.failed(); failed > 0) {
    out << failed << " cell(s) failed\n";
    return kExitFailure;
  }
  return kExitOk;
}

inline int run_report(const Args& a, std::ostream& out) {
  const auto report = experiment::grid_report_from_json(parse_json_file(a.input));
  experiment::emit(report, a.output_dir);
  out << experiment::summary_markdown(report);
  return report.failed() > 0 ? kExitFailure : kExitOk;
}

}  // namespace detail

// Builds the full command tree bound to `a`. Exposed so the flag set can be
// inspected by tests.
inline std::unique_ptr<CLI::App> build_app(Args& a) {
  auto app = std::make_unique<CLI::App>("Document information extraction experiment harness", "docie");
  app->require_subcommand(1);

  auto* validate = app->add_subcommand("validate", "Check a dataset against the core invariants");
  detail::add_dataset_flags(validate, a.ds);

  auto* convert = app->add_subcommand("convert", "Convert a dataset to canonical form or to a QA file");
  detail::add_dataset_flags(convert, a.ds);
  convert->add_option("--out", a.out, "Output file (qa) or directory (canonical)")->required();
  convert->add_option("--format", a.format, "qa | canonical")->capture_default_str();
  convert->add_option("--template", a.question_template, "Question template with one <LABEL> placeholder")
      ->capture_default_str();
  convert->add_flag("--include-unanswerable", a.include_unanswerable, "Also emit empty-answer samples");

  auto* chunk_cmd = app->add_subcommand("chunk", "Split documents into overlapping windows");
  detail::add_dataset_flags(chunk_cmd, a.ds);
  chunk_cmd->add_option("--split", a.split, "Split to chunk")->capture_default_str();
  chunk_cmd->add_option("--window", a.window, "Context tokens per chunk")->capture_default_str();
  chunk_cmd->add_option("--overlap", a.overlap, "Tokens shared by consecutive chunks (default: 128, or window/2)");
  chunk_cmd->add_option("--boundary", a.boundary, "drop | clip | mark_partial")->capture_default_str();
  chunk_cmd->add_option("--out", a.out, "Output JSON file")->required();

  auto* sub = app->add_subcommand("subsample", "Degrade the train and validation splits");
  detail::add_dataset_flags(sub, a.ds);
  sub->add_option("--kind", a.kind, "tags | documents")->capture_default_str();
  sub->add_option("--ratio", a.ratio, "Fraction kept, in (0, 1]")->capture_default_str();
  sub->add_option("--seed", a.seed, "Random seed")->required();
  sub->add_option("--tag-selection", a.tag_selection, "bernoulli | exact")->capture_default_str();
  sub->add_option("--out", a.out, "Output dataset directory")->required();

  auto add_scoring_flags = [&](CLI::App* cmd) {
    cmd->add_option("--split", a.split, "Split to process")->capture_default_str();
    cmd->add_option("--mode", a.mode, "qa | tc")->capture_default_str();
    cmd->add_option("--window", a.window, "Context tokens per chunk")->capture_default_str();
    cmd->add_option("--overlap", a.overlap, "Tokens shared by consecutive chunks (default: 128, or window/2)");
    cmd->add_option("--template", a.question_template, "Question template with one <LABEL> placeholder")
        ->capture_default_str();
  };

  auto* score_cmd = app->add_subcommand("score", "Score every chunk of a split with a scorer");
  detail::add_dataset_flags(score_cmd, a.ds, false);
  add_scoring_flags(score_cmd);
  score_cmd->add_option("--scorer", a.scorer,
                        "builtin:gold | builtin:noisy[:drop=P][:seed=S] | builtin:constant:V | stdio:CMD | http://HOST:PORT/PATH")
      ->capture_default_str();
  score_cmd->add_option("--seed", a.seed, "Seed for seeded built-in scorers")->capture_default_str();
  score_cmd->add_option("--max-in-flight", a.max_in_flight, "Outstanding requests allowed")->capture_default_str();
  score_cmd->add_option("--labels", a.eval_labels, "Labels to ask about (default: dataset label set)");
  score_cmd->add_option("--out", a.out, "Output JSON-lines file")->required();

  auto* decode_cmd = app->add_subcommand("decode", "Turn scores into predicted entities");
  detail::add_dataset_flags(decode_cmd, a.ds, false);
  add_scoring_flags(decode_cmd);
  decode_cmd->add_option("--scores", a.scores, "JSON-lines file written by `score`")->required();
  decode_cmd->add_option("--k", a.k, "Answers per question when --top-k fixed")->capture_default_str();
  decode_cmd->add_option("--top-k", a.top_k, "gold_count | fixed")->capture_default_str();
  decode_cmd->add_option("--max-answer-len", a.max_answer_len, "Longest answer span in tokens")->capture_default_str();
  decode_cmd->add_option("--answerability", a.answerability, "raw_positive | null_diff")->capture_default_str();
  decode_cmd->add_flag("--allow-overlap", a.allow_overlap, "Allow overlapping answers for one question");
  decode_cmd->add_option("--policy", a.policy, "strict | begin_on_orphan | bridge(N)")->capture_default_str();
  decode_cmd->add_option("--out", a.out, "Output predictions file")->required();

  auto* eval = app->add_subcommand("eval", "Score predictions against gold entities");
  detail::add_dataset_flags(eval, a.ds, false);
  eval->add_option("--split", a.split, "Gold split")->capture_default_str();
  eval->add_option("--predictions", a.predictions, "Predictions file written by `decode`")->required();
  eval->add_option("--match-mode", a.match_mode, "span | text (default: span for tc, text for qa)");
  eval->add_option("--labels", a.eval_labels, "Labels to evaluate (default: dataset label set)");
  eval->add_option("--output-dir", a.output_dir, "Directory for report.csv and report.md")->capture_default_str();

  auto* rank = app->add_subcommand("rank-labels", "Rank labels by mean entity length in characters");
  detail::add_dataset_flags(rank, a.ds);
  rank->add_option("--n", a.n, "Number of labels to keep")->capture_default_str();
  rank->add_option("--out", a.out, "Optional CSV output");

  auto* exp = app->add_subcommand("experiment", "Run a setting grid from a config file");
  exp->add_option("--config", a.config, "Experiment config (JSON)")->required();
  exp->add_option("--output-dir", a.output_dir, "Directory for emitted reports")->capture_default_str();
  exp->add_option("--jobs", a.jobs, "Cells run in parallel");

  auto* rep = app->add_subcommand("report", "Re-emit report files from report.json");
  rep->add_option("--input", a.input, "report.json written by `experiment`")->required();
  rep->add_option("--output-dir", a.output_dir, "Directory for emitted reports")->capture_default_str();

  return app;
}

inline int dispatch(const std::vector<std::string>& argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  Args a;
  auto app = build_app(a);
  std::vector<const char*> raw;
  raw.push_back("docie");
  for (const auto& s : argv) raw.push_back(s.c_str());
  try {
    app->parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp&) {
    out << app->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app->help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // Subcommand help requests surface as ParseError subclasses with exit 0.
    if (e.get_exit_code() == 0) {
      for (auto* sub : app->get_subcommands()) out << sub->help();
      return kExitOk;
    }
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  const std::string name = app->get_subcommands().front()->get_name();
  try {
    if (name == "validate") return detail::run_validate(a, out);
    if (name == "convert") return detail::run_convert(a, out);
    if (name == "chunk") return detail::run_chunk(a, out);
    if (name == "subsample") return detail::run_subsample(a, out);
    if (name == "score") return detail::run_score(a, out);
    if (name == "decode") return detail::run_decode(a, out);
    if (name == "eval") return detail::run_eval(a, out);
    if (name == "rank-labels") return detail::run_rank_labels(a, out);
    if (name == "experiment") return detail::run_experiment(a, out);
    if (name == "report") return detail::run_report(a, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  err << "unknown subcommand " << name << "\n";
  return kExitUsage;
}

}  // namespace docie::cli
