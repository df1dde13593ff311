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

// Document model shared by all modules, plus readers for CoNLL-U treebanks
// and plain text.

#ifndef EVALBENCH_CORPUSIO_H_
#define EVALBENCH_CORPUSIO_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evalbench {

// The 17 universal POS tags.
inline constexpr std::string_view kUposTags[] = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

bool is_upos_tag(std::string_view tag);

struct Token {
  int index = 0;  // 1-based position in the sentence
  std::string form;
  std::string upos = "X";
  int head = 0;  // 0 = root
  std::string deprel;
  std::optional<std::string> lemma;

  bool operator==(const Token &) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::optional<std::string> source_id;
  // False for the synthetic trees built from plain text; syntactic features
  // are undefined on those.
  bool annotated = true;

  std::size_t size() const { return tokens.size(); }
  std::vector<std::string> forms() const;

  bool operator==(const Sentence &) const = default;
};

struct Document {
  std::vector<Sentence> sentences;
  std::map<std::string, std::string> meta;

  std::size_t token_count() const;
  bool operator==(const Document &) const = default;
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> documents);

  const std::vector<Document> &documents() const { return documents_; }
  std::size_t token_count() const { return token_count_; }
  std::size_t sentence_count() const { return sentence_count_; }

  void add(Document doc);

  // All sentences in document order.
  std::vector<const Sentence *> sentences() const;

 private:
  std::vector<Document> documents_;
  std::size_t token_count_ = 0;
  std::size_t sentence_count_ = 0;
};

enum class CorpusFormat { kConllu, kPlain };

CorpusFormat parse_corpus_format(std::string_view name);

// Parses CoNLL-U text into one Document. Multiword ranges ("1-2") and empty
// nodes ("1.1") are skipped. Raises MalformedLine or InvalidTree with the
// 1-based line number of the offending token.
Document parse_conllu(std::string_view text);

// Writes the fields the document model keeps; the rest become "_".
std::string to_conllu(const Document &doc);

// Checks the single-rooted tree invariant by walking every head chain.
// Returns the 0-based token position that breaks it, or nullopt.
std::optional<std::size_t> find_tree_violation(const Sentence &s);

// Sentences split at newlines and after . ! ? followed by whitespace; tokens
// split on whitespace with the characters .,;:!?()"'«» detached one by one
// from either end. Detached punctuation gets upos PUNCT, everything else
// "X", and a synthetic tree rooted at 1.
std::vector<Sentence> tokenize_plain(std::string_view text);

// Reads one file, or every regular file under a directory (recursively, in
// sorted path order), one Document per file. Files under <root>/<dir>/ get
// meta["domain"] = <dir>; every document gets meta["path"].
Corpus read_corpus(const std::string &path, CorpusFormat format);

}  // namespace evalbench

#endif  // EVALBENCH_CORPUSIO_H_
