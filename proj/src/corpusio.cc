// Copyright 2026 The evalbench Authors.
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

#include "evalbench/corpusio.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>

#include <fmt/format.h>

#include "evalbench/common.h"

namespace evalbench {

namespace {

constexpr const char *kModule = "corpusio";
constexpr std::string_view kMetaPrefix = "meta::";

[[noreturn]] void malformed(std::size_t line, const std::string &what) {
  throw Error(ErrorCode::kMalformedLine, kModule,
              fmt::format("line {}: {}", line, what), line);
}

bool parse_int(std::string_view s, int &out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool is_detachable(std::string_view ch) {
  static constexpr std::string_view kPunct[] = {
      ".", ",", ";", ":", "!", "?", "(", ")", "\"", "'", "«", "»"};
  return std::find(std::begin(kPunct), std::end(kPunct), ch) != std::end(kPunct);
}

// Builds the synthetic tree for plain-text sentences: token 1 is the root and
// all others attach to it.
Sentence make_plain_sentence(std::vector<std::string> forms) {
  Sentence s;
  s.annotated = false;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    Token t;
    t.index = static_cast<int>(i + 1);
    t.form = std::move(forms[i]);
    t.upos = is_detachable(t.form) ? "PUNCT" : "X";
    t.head = i == 0 ? 0 : 1;
    t.deprel = i == 0 ? "root" : "dep";
    s.tokens.push_back(std::move(t));
  }
  return s;
}

class ConlluParser {
 public:
  Document parse(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      ++line_no;
      handle_line(line, line_no);
      if (end == text.size()) break;
      pos = end + 1;
    }
    finish_sentence();
    return std::move(doc_);
  }

 private:
  void handle_line(std::string_view line, std::size_t line_no) {
    if (trim(line).empty()) {
      finish_sentence();
      return;
    }
    if (line.front() == '#') {
      handle_comment(line.substr(1));
      return;
    }
    std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 10) {
      malformed(line_no, fmt::format("expected 10 tab-separated columns, found {}", cols.size()));
    }
    const std::string &id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) {
      // Multiword range or empty node; only validate that it looks numeric.
      if (id.find_first_not_of("0123456789-.") != std::string::npos) {
        malformed(line_no, fmt::format("non-numeric ID '{}'", id));
      }
      return;
    }
    Token tok;
    if (!parse_int(id, tok.index) || tok.index < 1) {
      malformed(line_no, fmt::format("non-numeric ID '{}'", id));
    }
    if (static_cast<std::size_t>(tok.index) != current_.tokens.size() + 1) {
      malformed(line_no, fmt::format("token ID {} out of sequence (expected {})", tok.index,
                                     current_.tokens.size() + 1));
    }
    if (!parse_int(cols[6], tok.head) || tok.head < 0) {
      malformed(line_no, fmt::format("non-numeric HEAD '{}'", cols[6]));
    }
    tok.form = cols[1];
    if (cols[2] != "_") tok.lemma = cols[2];
    tok.upos = cols[3] == "_" ? "X" : cols[3];
    if (!is_upos_tag(tok.upos)) {
      malformed(line_no, fmt::format("unknown UPOS tag '{}'", tok.upos));
    }
    tok.deprel = cols[7] == "_" ? "" : cols[7];
    current_.tokens.push_back(std::move(tok));
    token_lines_.push_back(line_no);
  }

  void handle_comment(std::string_view body) {
    body = trim(body);
    std::size_t eq = body.find('=');
    if (eq == std::string_view::npos) return;
    std::string_view key = trim(body.substr(0, eq));
    std::string_view value = trim(body.substr(eq + 1));
    if (key == "sent_id") {
      current_.source_id = std::string(value);
    } else if (key.substr(0, kMetaPrefix.size()) == kMetaPrefix) {
      doc_.meta[std::string(key.substr(kMetaPrefix.size()))] = std::string(value);
    }
  }

  void finish_sentence() {
    if (current_.tokens.empty()) {
      current_.source_id.reset();
      return;
    }
    if (auto bad = find_tree_violation(current_)) {
      const Token &t = current_.tokens[*bad];
      const std::size_t line = token_lines_[*bad];
      std::string why;
      if (t.head == t.index) {
        why = "self-loop";
      } else if (static_cast<std::size_t>(t.head) > current_.tokens.size()) {
        why = fmt::format("dangling head {}", t.head);
      } else if (t.head == 0) {
        why = "multiple roots";
      } else {
        why = "cycle or missing root";
      }
      throw Error(ErrorCode::kInvalidTree, kModule,
                  fmt::format("line {}: invalid tree at token {} ({})", line, t.index, why), line);
    }
    doc_.sentences.push_back(std::move(current_));
    current_ = Sentence{};
    token_lines_.clear();
  }

  Document doc_;
  Sentence current_;
  std::vector<std::size_t> token_lines_;
};

}  // namespace

bool is_upos_tag(std::string_view tag) {
  return std::find(std::begin(kUposTags), std::end(kUposTags), tag) != std::end(kUposTags);
}

std::vector<std::string> Sentence::forms() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto &t : tokens) out.push_back(t.form);
  return out;
}

std::size_t Document::token_count() const {
  std::size_t n = 0;
  for (const auto &s : sentences) n += s.size();
  return n;
}

Corpus::Corpus(std::vector<Document> documents) {
  for (auto &d : documents) add(std::move(d));
}

void Corpus::add(Document doc) {
  sentence_count_ += doc.sentences.size();
  token_count_ += doc.token_count();
  documents_.push_back(std::move(doc));
}

std::vector<const Sentence *> Corpus::sentences() const {
  std::vector<const Sentence *> out;
  out.reserve(sentence_count_);
  for (const auto &d : documents_) {
    for (const auto &s : d.sentences) out.push_back(&s);
  }
  return out;
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "conllu") return CorpusFormat::kConllu;
  if (name == "plain") return CorpusFormat::kPlain;
  throw Error(ErrorCode::kInvalidArgument, kModule,
              fmt::format("unknown corpus format '{}' (expected conllu|plain)", name));
}

std::optional<std::size_t> find_tree_violation(const Sentence &s) {
  const std::size_t n = s.tokens.size();
  std::optional<std::size_t> root;
  for (std::size_t i = 0; i < n; ++i) {
    const Token &t = s.tokens[i];
    if (t.index != static_cast<int>(i + 1) || t.head < 0) return i;
    if (t.head == t.index || static_cast<std::size_t>(t.head) > n) return i;
    if (t.head == 0) {
      if (root) return i;
      root = i;
    }
  }
  // Every head chain must reach the root within n steps.
  for (std::size_t i = 0; i < n; ++i) {
    int cur = s.tokens[i].index;
    std::size_t steps = 0;
    while (cur != 0 && steps <= n) {
      cur = s.tokens[cur - 1].head;
      ++steps;
    }
    if (cur != 0) return i;
  }
  if (n > 0 && !root) return 0;
  return std::nullopt;
}

Document parse_conllu(std::string_view text) { return ConlluParser().parse(text); }

std::string to_conllu(const Document &doc) {
  std::string out;
  for (const auto &[key, value] : doc.meta) {
    out += fmt::format("# {}{} = {}\n", kMetaPrefix, key, value);
  }
  for (const auto &s : doc.sentences) {
    if (s.source_id) out += fmt::format("# sent_id = {}\n", *s.source_id);
    for (const auto &t : s.tokens) {
      out += fmt::format("{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t_\n", t.index, t.form,
                         t.lemma.value_or("_"), t.upos, t.head,
                         t.deprel.empty() ? "_" : t.deprel);
    }
    out += '\n';
  }
  return out;
}

std::vector<Sentence> tokenize_plain(std::string_view text) {
  std::vector<Sentence> out;
  for (const std::string &raw_line : split(text, '\n')) {
    std::vector<std::string> chunks;
    {
      std::string_view line = raw_line;
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) chunks.emplace_back(line.substr(i, j - i));
        i = j;
      }
    }
    std::vector<std::string> forms;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      auto chars = utf8_chars(chunks[c]);
      std::size_t lead = 0;
      while (lead < chars.size() && is_detachable(chars[lead])) ++lead;
      std::size_t trail = chars.size();
      while (trail > lead && is_detachable(chars[trail - 1])) --trail;
      for (std::size_t k = 0; k < lead; ++k) forms.emplace_back(chars[k]);
      if (trail > lead) {
        std::string core;
        for (std::size_t k = lead; k < trail; ++k) core.append(chars[k]);
        forms.push_back(std::move(core));
      }
      for (std::size_t k = trail; k < chars.size(); ++k) forms.emplace_back(chars[k]);

      const std::string_view last = chars.back();
      const bool final_punct = last == "." || last == "!" || last == "?";
      if (final_punct && c + 1 < chunks.size()) {
        out.push_back(make_plain_sentence(std::move(forms)));
        forms.clear();
      }
    }
    if (!forms.empty()) out.push_back(make_plain_sentence(std::move(forms)));
  }
  return out;
}

namespace {

Document read_document(const std::filesystem::path &file, CorpusFormat format) {
  const std::string text = read_file(file.string(), kModule);
  try {
    Document doc;
    if (format == CorpusFormat::kConllu) {
      doc = parse_conllu(text);
    } else {
      doc.sentences = tokenize_plain(text);
    }
    doc.meta["path"] = file.string();
    return doc;
  } catch (const Error &e) {
    throw Error(e.code(), e.module(), fmt::format("{}: {}", file.string(), e.what()), e.line());
  }
}

}  // namespace

Corpus read_corpus(const std::string &path, CorpusFormat format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path root(path);
  if (!fs::exists(root, ec)) {
    throw Error(ErrorCode::kIoError, kModule, fmt::format("{}: no such file or directory", path));
  }
  Corpus corpus;
  if (!fs::is_directory(root, ec)) {
    corpus.add(read_document(root, format));
    return corpus;
  }
  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(root, ec);
       it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) break;
    if (it->is_regular_file()) files.push_back(it->path());
  }
  if (ec) {
    throw Error(ErrorCode::kIoError, kModule, fmt::format("{}: {}", path, ec.message()));
  }
  std::sort(files.begin(), files.end());
  for (const auto &file : files) {
    Document doc = read_document(file, format);
    const fs::path rel = file.lexically_relative(root);
    auto first = rel.begin();
    if (std::distance(rel.begin(), rel.end()) >= 2 && !first->empty()) {
      doc.meta["domain"] = first->string();
    }
    corpus.add(std::move(doc));
  }
  return corpus;
}

}  // namespace evalbench
