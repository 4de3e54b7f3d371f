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
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "docie/model.hpp"
#include "docie/rng.hpp"
#include "docie/utf8.hpp"

namespace docie {

using json = nlohmann::json;

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// JSON mapping of the core types. Field names match the struct members.

inline void to_json(json& j, const Box& b) { j = json::array({b.x0, b.y0, b.x1, b.y1}); }

inline void from_json(const json& j, Box& b) {
  if (!j.is_array() || j.size() != 4) throw DatasetError("box must be an array of 4 integers");
  b = {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

inline void to_json(json& j, const Token& t) {
  j = json{{"text", t.text}, {"page", t.page}, {"box", t.box}, {"char_start", t.char_start}, {"char_len", t.char_len}};
}

inline void from_json(const json& j, Token& t) {
  t.text = j.at("text").get<std::string>();
  t.page = j.at("page").get<int>();
  t.box = j.at("box").get<Box>();
  t.char_start = j.at("char_start").get<std::size_t>();
  t.char_len = j.at("char_len").get<std::size_t>();
}

inline void to_json(json& j, const Entity& e) {
  j = json{{"label", e.label}, {"token_start", e.token_start}, {"token_len", e.token_len}, {"text", e.text}};
}

inline void from_json(const json& j, Entity& e) {
  e.label = j.at("label").get<std::string>();
  e.token_start = j.at("token_start").get<std::size_t>();
  e.token_len = j.at("token_len").get<std::size_t>();
  e.text = j.at("text").get<std::string>();
}

inline void to_json(json& j, const Document& d) {
  j = json{{"id", d.id}, {"tokens", d.tokens}, {"text", d.text}, {"entities", d.entities}};
}

inline void from_json(const json& j, Document& d) {
  d.id = j.at("id").get<std::string>();
  d.tokens = j.at("tokens").get<std::vector<Token>>();
  d.text = j.at("text").get<std::string>();
  d.entities = j.at("entities").get<std::vector<Entity>>();
}

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DatasetError("write failed for '" + path.string() + "'");
}

inline json parse_json_file(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  try {
    return json::parse(content);
  } catch (const json::parse_error& e) {
    throw DatasetError(path.string() + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

inline std::string dump_json(const json& j) { return j.dump(1, ' ', false) + "\n"; }

// ---------------------------------------------------------------------------
// Canonical format: a directory holding `dataset.json`
//   {"name": ..., "label_set": [...], "splits": ["train", ...]}
// and one `<split>.json` array of documents per split.

inline constexpr const char* kManifestFile = "dataset.json";

inline std::vector<Document> parse_documents(const json& j, const std::string& where) {
  if (!j.is_array()) throw DatasetError(where + ": expected a document array");
  std::vector<Document> docs;
  docs.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      docs.push_back(j[i].get<Document>());
    } catch (const json::exception& e) {
      throw DatasetError(where + ": document " + std::to_string(i) + ": " + e.what());
    } catch (const DatasetError& e) {
      throw DatasetError(where + ": document " + std::to_string(i) + ": " + e.what());
    }
  }
  return docs;
}

inline Dataset load_canonical(const std::filesystem::path& dir) {
  const auto manifest_path = dir / kManifestFile;
  const json manifest = parse_json_file(manifest_path);
  Dataset ds;
  try {
    ds.name = manifest.at("name").get<std::string>();
    ds.label_set = manifest.at("label_set").get<std::vector<std::string>>();
    for (const auto& split_name : manifest.at("splits").get<std::vector<std::string>>()) {
      const auto path = dir / (split_name + ".json");
      ds.splits.push_back({split_name, parse_documents(parse_json_file(path), path.string())});
    }
  } catch (const json::exception& e) {
    throw DatasetError(manifest_path.string() + ": " + e.what());
  }
  return ds;
}

inline void save_canonical(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json split_names = json::array();
  for (const auto& s : ds.splits) split_names.push_back(s.name);
  write_file(dir / kManifestFile, dump_json(json{{"name", ds.name}, {"label_set", ds.label_set}, {"splits", split_names}}));
  for (const auto& s : ds.splits) write_file(dir / (s.name + ".json"), dump_json(json(s.documents)));
}

// ---------------------------------------------------------------------------
// Native layout adapters

enum class Adapter { kCanonical, kFunsd, kSroie, kKleister, kCuad };

inline Adapter parse_adapter(std::string_view s) {
  if (s == "canonical") return Adapter::kCanonical;
  if (s == "funsd-style") return Adapter::kFunsd;
  if (s == "sroie-style") return Adapter::kSroie;
  if (s == "kleister-style") return Adapter::kKleister;
  if (s == "cuad-style") return Adapter::kCuad;
  throw std::invalid_argument("unknown format adapter '" + std::string(s) + "'");
}

struct AdapterOptions {
  // Page size used to normalize native boxes; 0 infers it from the largest
  // coordinate seen in the document.
  int page_width = 0;
  int page_height = 0;
  // cuad-style: restrict to these categories (empty keeps all).
  std::vector<std::string> labels;
  // cuad-style: fraction of documents (ordered by id hash) put in "train".
  double train_fraction = 0.8;
};

namespace detail {

struct RawWord {
  std::string text;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline int clamp_scale(long v, long extent) {
  if (extent <= 0) return 0;
  const long scaled = v * kBoxScale / extent;
  return static_cast<int>(std::clamp<long>(scaled, 0, kBoxScale));
}

// Builds a canonical document from native words, normalizing boxes.
inline Document build_document(std::string id, const std::vector<RawWord>& words, const AdapterOptions& opt) {
  long w = opt.page_width;
  long h = opt.page_height;
  if (w <= 0 || h <= 0) {
    long mx = 0, my = 0;
    for (const auto& rw : words) {
      mx = std::max<long>(mx, std::max(rw.x0, rw.x1));
      my = std::max<long>(my, std::max(rw.y0, rw.y1));
    }
    if (w <= 0) w = mx;
    if (h <= 0) h = my;
  }
  std::vector<std::string> texts;
  std::vector<Box> boxes;
  for (const auto& rw : words) {
    texts.push_back(rw.text);
    Box b{clamp_scale(std::min(rw.x0, rw.x1), w), clamp_scale(std::min(rw.y0, rw.y1), h),
          clamp_scale(std::max(rw.x0, rw.x1), w), clamp_scale(std::max(rw.y0, rw.y1), h)};
    boxes.push_back(b);
  }
  return make_document(std::move(id), texts, std::move(boxes));
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// First occurrence of `needle` as a contiguous token run not touching `used`.
inline std::optional<std::size_t> find_run(const Document& doc, const std::vector<std::string>& needle,
                                           const std::vector<bool>& used, bool case_insensitive) {
  if (needle.empty() || needle.size() > doc.tokens.size()) return std::nullopt;
  for (std::size_t s = 0; s + needle.size() <= doc.tokens.size(); ++s) {
    bool ok = true;
    for (std::size_t k = 0; k < needle.size() && ok; ++k) {
      if (used[s + k]) ok = false;
      else if (case_insensitive) ok = lower(doc.tokens[s + k].text) == lower(needle[k]);
      else ok = doc.tokens[s + k].text == needle[k];
    }
    if (ok) return s;
  }
  return std::nullopt;
}

inline void tag_value(Document& doc, const std::string& label, const std::string& value, std::vector<bool>& used,
                      bool case_insensitive) {
  const auto words = split_ws(value);
  if (auto s = find_run(doc, words, used, case_insensitive)) {
    for (std::size_t k = 0; k < words.size(); ++k) used[*s + k] = true;
    doc.entities.push_back(make_entity(doc, label, *s, words.size()));
  }
}

inline void sort_entities(Document& doc) {
  std::sort(doc.entities.begin(), doc.entities.end(),
            [](const Entity& a, const Entity& b) { return a.token_start < b.token_start; });
}

inline std::vector<std::filesystem::path> sorted_files(const std::filesystem::path& dir, std::string_view ext) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline Dataset load_funsd(const std::filesystem::path& root, const AdapterOptions& opt) {
  Dataset ds{"funsd", {"header", "question", "answer"}, {}};
  const std::pair<const char*, const char*> layout[] = {{"training_data", "train"}, {"testing_data", "test"}};
  for (const auto& [dir, split_name] : layout) {
    const auto ann = root / dir / "annotations";
    if (!std::filesystem::is_directory(ann)) continue;
    Split split{split_name, {}};
    for (const auto& file : sorted_files(ann, ".json")) {
      const json j = parse_json_file(file);
      std::vector<RawWord> words;
      struct Pending {
        std::string label;
        std::size_t start, len;
      };
      std::vector<Pending> pending;
      try {
        for (const auto& block : j.at("form")) {
          const std::string label = block.value("label", "other");
          const std::size_t start = words.size();
          for (const auto& w : block.at("words")) {
            const auto box = w.at("box");
            for (const auto& piece : split_ws(w.at("text").get<std::string>())) {
              words.push_back({piece, box[0].get<int>(), box[1].get<int>(), box[2].get<int>(), box[3].get<int>()});
            }
          }
          const std::size_t len = words.size() - start;
          if (len > 0 && label != "other") pending.push_back({label, start, len});
        }
      } catch (const json::exception& e) {
        throw DatasetError(file.string() + ": " + e.what());
      }
      Document doc = build_document(file.stem().string(), words, opt);
      for (const auto& p : pending) doc.entities.push_back(make_entity(doc, p.label, p.start, p.len));
      split.documents.push_back(std::move(doc));
    }
    ds.splits.push_back(std::move(split));
  }
  if (ds.splits.empty()) throw DatasetError(root.string() + ": no funsd-style split directories found");
  return ds;
}

inline Dataset load_sroie(const std::filesystem::path& root, const AdapterOptions& opt) {
  Dataset ds{"sroie", {"company", "address", "total", "date"}, {}};
  for (const char* split_name : {"train", "validation", "test"}) {
    const auto box_dir = root / split_name / "box";
    if (!std::filesystem::is_directory(box_dir)) continue;
    Split split{split_name, {}};
    for (const auto& file : sorted_files(box_dir, ".txt")) {
      std::istringstream in(read_file(file));
      std::vector<RawWord> words;
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<long> coords;
        std::size_t pos = 0;
        for (int k = 0; k < 8; ++k) {
          const std::size_t comma = line.find(',', pos);
          if (comma == std::string::npos) {
            throw DatasetError(file.string() + ":" + std::to_string(line_no) + ": expected 8 coordinates");
          }
          try {
            coords.push_back(std::stol(line.substr(pos, comma - pos)));
          } catch (const std::exception&) {
            throw DatasetError(file.string() + ":" + std::to_string(line_no) + ": bad coordinate");
          }
          pos = comma + 1;
        }
        const long x0 = std::min({coords[0], coords[2], coords[4], coords[6]});
        const long x1 = std::max({coords[0], coords[2], coords[4], coords[6]});
        const long y0 = std::min({coords[1], coords[3], coords[5], coords[7]});
        const long y1 = std::max({coords[1], coords[3], coords[5], coords[7]});
        for (const auto& piece : split_ws(line.substr(pos))) {
          words.push_back({piece, static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(x1), static_cast<int>(y1)});
        }
      }
      Document doc = build_document(file.stem().string(), words, opt);
      const auto ent_file = root / split_name / "entities" / file.filename();
      if (std::filesystem::exists(ent_file)) {
        const json values = parse_json_file(ent_file);
        std::vector<bool> used(doc.tokens.size(), false);
        for (const auto& label : ds.label_set) {
          if (values.contains(label) && values[label].is_string()) {
            tag_value(doc, label, values[label].get<std::string>(), used, false);
          }
        }
        sort_entities(doc);
      }
      split.documents.push_back(std::move(doc));
    }
    ds.splits.push_back(std::move(split));
  }
  if (ds.splits.empty()) throw DatasetError(root.string() + ": no sroie-style split directories found");
  return ds;
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    out.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
    if (tab == std::string::npos) break;
    pos = tab + 1;
  }
  return out;
}

inline std::string unescape_kleister(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size() && (s[i + 1] == 'n' || s[i + 1] == 't' || s[i + 1] == 'f')) {
      out.push_back(' ');
      ++i;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

inline Dataset load_kleister(const std::filesystem::path& root, const AdapterOptions&) {
  Dataset ds{"kleister-nda", {"party", "jurisdiction", "effective_date", "term"}, {}};
  const std::pair<const char*, const char*> layout[] = {
      {"train", "train"}, {"dev-0", "validation"}, {"test-A", "test"}};
  for (const auto& [dir, split_name] : layout) {
    const auto in_path = root / dir / "in.tsv";
    if (!std::filesystem::exists(in_path)) continue;
    std::istringstream in(read_file(in_path));
    std::vector<std::string> expected_lines;
    const auto exp_path = root / dir / "expected.tsv";
    if (std::filesystem::exists(exp_path)) {
      std::istringstream ex(read_file(exp_path));
      std::string l;
      while (std::getline(ex, l)) expected_lines.push_back(l);
    }
    Split split{split_name, {}};
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      const auto cols = split_tabs(line);
      if (cols.size() < 2) throw DatasetError(in_path.string() + ":" + std::to_string(row + 1) + ": too few columns");
      std::vector<RawWord> words;
      for (auto& w : split_ws(unescape_kleister(cols.back()))) words.push_back({std::move(w)});
      Document doc = make_document(cols.front(), [&] {
        std::vector<std::string> t;
        for (auto& w : words) t.push_back(w.text);
        return t;
      }());
      if (row < expected_lines.size()) {
        std::vector<bool> used(doc.tokens.size(), false);
        for (const auto& kv : split_ws(expected_lines[row])) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) continue;
          const std::string key = kv.substr(0, eq);
          std::string value = kv.substr(eq + 1);
          std::replace(value.begin(), value.end(), '_', ' ');
          if (std::find(ds.label_set.begin(), ds.label_set.end(), key) != ds.label_set.end()) {
            tag_value(doc, key, value, used, true);
          }
        }
        sort_entities(doc);
      }
      split.documents.push_back(std::move(doc));
      ++row;
    }
    ds.splits.push_back(std::move(split));
  }
  if (ds.splits.empty()) throw DatasetError(root.string() + ": no kleister-style split directories found");
  return ds;
}

}  // namespace detail

// Deterministic split by document id: documents ordered by id hash, the first
// round(train_fraction * n) go to "train", the rest to "test".
inline std::vector<Split> split_by_document_id(std::vector<Document> docs, double train_fraction) {
  std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) {
    const auto ha = fnv1a64(a.id), hb = fnv1a64(b.id);
    return ha != hb ? ha < hb : a.id < b.id;
  });
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(docs.size())));
  Split train{"train", {}}, test{"test", {}};
  for (std::size_t i = 0; i < docs.size(); ++i) (i < n_train ? train : test).documents.push_back(std::move(docs[i]));
  auto by_id = [](const Document& a, const Document& b) { return a.id < b.id; };
  std::sort(train.documents.begin(), train.documents.end(), by_id);
  std::sort(test.documents.begin(), test.documents.end(), by_id);
  return {std::move(train), std::move(test)};
}

namespace detail {

inline Dataset load_cuad(const std::filesystem::path& path, const AdapterOptions& opt) {
  const json root = parse_json_file(path);
  std::vector<Document> docs;
  std::vector<std::string> labels;
  std::set<std::string, std::less<>> label_seen;
  const std::set<std::string, std::less<>> wanted(opt.labels.begin(), opt.labels.end());
  try {
    for (const auto& article : root.at("data")) {
      const std::string title = article.at("title").get<std::string>();
      std::size_t para_idx = 0;
      for (const auto& para : article.at("paragraphs")) {
        const std::string context = para.at("context").get<std::string>();
        // Whitespace tokens with code-point offsets into the native context.
        std::vector<std::string> words;
        std::vector<std::pair<std::size_t, std::size_t>> native;  // [start, end) code points
        {
          std::size_t cp = 0;
          std::size_t i = 0;
          std::string cur;
          std::size_t cur_start = 0;
          while (i < context.size()) {
            const auto c = static_cast<unsigned char>(context[i]);
            std::size_t n = 1;
            if (c >= 0xF0) n = 4;
            else if (c >= 0xE0) n = 3;
            else if (c >= 0xC0) n = 2;
            n = std::min(n, context.size() - i);
            const bool ws = (n == 1 && std::isspace(c));
            if (ws) {
              if (!cur.empty()) {
                words.push_back(cur);
                native.emplace_back(cur_start, cp);
                cur.clear();
              }
            } else {
              if (cur.empty()) cur_start = cp;
              cur.append(context, i, n);
            }
            i += n;
            ++cp;
          }
          if (!cur.empty()) {
            words.push_back(cur);
            native.emplace_back(cur_start, cp);
          }
        }
        std::string id = title;
        if (para_idx > 0) id += "#" + std::to_string(para_idx);
        ++para_idx;
        Document doc = make_document(id, words);

        struct Cand {
          std::size_t label_order;
          std::size_t start, len;
          std::string label;
        };
        std::vector<Cand> cands;
        for (const auto& qa : para.at("qas")) {
          const std::string qid = qa.at("id").get<std::string>();
          const auto sep = qid.rfind("__");
          const std::string label = sep == std::string::npos ? qid : qid.substr(sep + 2);
          if (!wanted.empty() && !wanted.contains(label)) continue;
          if (label_seen.insert(label).second) labels.push_back(label);
          const std::size_t order =
              static_cast<std::size_t>(std::find(labels.begin(), labels.end(), label) - labels.begin());
          for (const auto& ans : qa.at("answers")) {
            const std::size_t a0 = ans.at("answer_start").get<std::size_t>();
            const std::size_t a1 = a0 + utf8::length(ans.at("text").get<std::string>());
            std::size_t first = words.size(), last = 0;
            for (std::size_t t = 0; t < native.size(); ++t) {
              if (native[t].first < a1 && native[t].second > a0) {
                first = std::min(first, t);
                last = t;
              }
            }
            if (first < words.size()) cands.push_back({order, first, last - first + 1, label});
          }
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
          if (a.label_order != b.label_order) return a.label_order < b.label_order;
          if (a.start != b.start) return a.start < b.start;
          return a.len > b.len;
        });
        std::vector<bool> used(doc.tokens.size(), false);
        for (const auto& c : cands) {
          bool clash = false;
          for (std::size_t t = c.start; t < c.start + c.len; ++t) clash = clash || used[t];
          if (clash) continue;
          for (std::size_t t = c.start; t < c.start + c.len; ++t) used[t] = true;
          doc.entities.push_back(make_entity(doc, c.label, c.start, c.len));
        }
        sort_entities(doc);
        docs.push_back(std::move(doc));
      }
    }
  } catch (const json::exception& e) {
    throw DatasetError(path.string() + ": " + e.what());
  }
  Dataset ds;
  ds.name = "cuad[80/20-by-id]";
  ds.label_set = !opt.labels.empty() ? opt.labels : labels;
  ds.splits = split_by_document_id(std::move(docs), opt.train_fraction);
  return ds;
}

}  // namespace detail

// Loads a dataset and validates it; throws DatasetError on parse failures and
// ValidationError when the result breaks a core invariant.
inline Dataset load(const std::filesystem::path& path, Adapter adapter = Adapter::kCanonical,
                    const AdapterOptions& options = {}) {
  Dataset ds;
  switch (adapter) {
    case Adapter::kCanonical: ds = load_canonical(path); break;
    case Adapter::kFunsd: ds = detail::load_funsd(path, options); break;
    case Adapter::kSroie: ds = detail::load_sroie(path, options); break;
    case Adapter::kKleister: ds = detail::load_kleister(path, options); break;
    case Adapter::kCuad: ds = detail::load_cuad(path, options); break;
  }
  if (auto v = validate(ds); !v.empty()) throw ValidationError(std::move(v));
  return ds;
}

inline void save(const Dataset& ds, const std::filesystem::path& dir) { save_canonical(ds, dir); }

// ---------------------------------------------------------------------------
// Label length statistics

struct LabelLengthStat {
  std::string label;
  std::size_t count = 0;
  double mean_chars = 0.0;
  double median_chars = 0.0;

  friend bool operator==(const LabelLengthStat&, const LabelLengthStat&) = default;
};

inline double median(std::vector<std::size_t> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return static_cast<double>(v[n / 2]);
  return (static_cast<double>(v[n / 2 - 1]) + static_cast<double>(v[n / 2])) / 2.0;
}

// Per-label entity character lengths over train + validation, longest mean
// first, truncated to n.
inline std::vector<LabelLengthStat> rank_labels_by_length(const Dataset& ds, std::size_t n) {
  if (n == 0) throw std::invalid_argument("rank_labels_by_length: n must be >= 1");
  std::map<std::string, std::vector<std::size_t>, std::less<>> lengths;
  for (const auto& split : ds.splits) {
    if (split.name != "train" && split.name != "validation") continue;
    for (const auto& doc : split.documents) {
      for (const auto& e : doc.entities) lengths[e.label].push_back(utf8::length(e.text));
    }
  }
  std::vector<LabelLengthStat> stats;
  for (const auto& label : ds.label_set) {
    auto it = lengths.find(label);
    if (it == lengths.end() || it->second.empty()) continue;
    double sum = 0;
    for (auto l : it->second) sum += static_cast<double>(l);
    stats.push_back({label, it->second.size(), sum / static_cast<double>(it->second.size()), median(it->second)});
  }
  std::stable_sort(stats.begin(), stats.end(),
                   [](const LabelLengthStat& a, const LabelLengthStat& b) { return a.mean_chars > b.mean_chars; });
  if (stats.size() > n) stats.resize(n);
  return stats;
}

}  // namespace docie
