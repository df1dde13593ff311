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

#include "evalbench/freqdict.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <thread>

#include <fmt/format.h>

#include "evalbench/common.h"

namespace evalbench {

namespace {

constexpr const char *kModule = "freqdict";

bool ranks_before(const std::pair<std::string, uint64_t> &a,
                  const std::pair<std::string, uint64_t> &b) {
  if (a.second != b.second) return a.second > b.second;
  return a.first < b.first;
}

bool all_punct(std::string_view form) {
  if (form.empty()) return false;
  for (std::string_view ch : utf8_chars(form)) {
    const bool ascii_punct = ch.size() == 1 && std::ispunct(static_cast<unsigned char>(ch[0]));
    if (!ascii_punct && ch != "«" && ch != "»") return false;
  }
  return true;
}

void check_permille(int permille) {
  if (permille < 1 || permille > 1000) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("permille must be in [1, 1000], got {}", permille));
  }
}

}  // namespace

FreqDict::FreqDict(std::unordered_map<std::string, uint64_t> counts) : counts_(std::move(counts)) {
  ranked_.reserve(counts_.size());
  for (const auto &[form, c] : counts_) {
    if (c == 0) {
      throw Error(ErrorCode::kInvalidArgument, kModule, fmt::format("zero count for '{}'", form));
    }
    ranked_.emplace_back(form, c);
    total_ += c;
  }
  std::sort(ranked_.begin(), ranked_.end(), ranks_before);
}

uint64_t FreqDict::count(std::string_view form) const {
  auto it = counts_.find(std::string(form));
  return it == counts_.end() ? 0 : it->second;
}

std::size_t FreqDict::top_set_size(int permille, TopSetMode mode) const {
  check_permille(permille);
  const uint64_t p = static_cast<uint64_t>(permille);
  if (mode == TopSetMode::kTypes) {
    return static_cast<std::size_t>((p * ranked_.size() + 999) / 1000);
  }
  // Shortest prefix with cumulative * 1000 >= permille * total.
  uint64_t cumulative = 0;
  for (std::size_t i = 0; i < ranked_.size(); ++i) {
    if (cumulative * 1000 >= p * total_) return i;
    cumulative += ranked_[i].second;
  }
  return ranked_.size();
}

std::unordered_set<std::string> FreqDict::top_set(int permille, TopSetMode mode) const {
  const std::size_t k = top_set_size(permille, mode);
  std::unordered_set<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.insert(ranked_[i].first);
  return out;
}

std::string FreqDict::to_tsv() const {
  std::string out;
  for (const auto &[form, c] : ranked_) {
    if (form.find_first_of("\t\n") != std::string::npos) {
      throw Error(ErrorCode::kFormatError, kModule,
                  fmt::format("form '{}' cannot be written to TSV", form));
    }
    out += fmt::format("{}\t{}\n", form, c);
  }
  return out;
}

FreqDict FreqDict::from_tsv(std::string_view text) {
  std::unordered_map<std::string, uint64_t> counts;
  std::pair<std::string, uint64_t> prev;
  std::size_t line_no = 0;
  for (const std::string &raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
      throw Error(ErrorCode::kFormatError, kModule,
                  fmt::format("line {}: expected form<TAB>count", line_no), line_no);
    }
    std::pair<std::string, uint64_t> entry{std::string(line.substr(0, tab)), 0};
    std::string_view num = line.substr(tab + 1);
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), entry.second);
    if (ec != std::errc() || ptr != num.data() + num.size() || entry.second == 0) {
      throw Error(ErrorCode::kFormatError, kModule,
                  fmt::format("line {}: bad count '{}'", line_no, num), line_no);
    }
    if (!counts.empty() && !ranks_before(prev, entry)) {
      throw Error(ErrorCode::kFormatError, kModule,
                  fmt::format("line {}: entries not sorted by (count desc, form asc)", line_no),
                  line_no);
    }
    if (!counts.emplace(entry.first, entry.second).second) {
      throw Error(ErrorCode::kFormatError, kModule,
                  fmt::format("line {}: duplicate form '{}'", line_no, entry.first), line_no);
    }
    prev = std::move(entry);
  }
  return FreqDict(std::move(counts));
}

bool dictionary_form(const Token &tok, const FreqDictOptions &opts, std::string &out) {
  if (!opts.include_punct && (tok.upos == "PUNCT" || all_punct(tok.form))) return false;
  out = opts.lowercase ? lowercase_latin(tok.form) : tok.form;
  return true;
}

FreqDict build_freq_dict(const Corpus &corpus, const FreqDictOptions &opts) {
  const std::vector<const Sentence *> sentences = corpus.sentences();
  if (corpus.token_count() == 0) {
    throw Error(ErrorCode::kEmptyInput, kModule, "corpus has no tokens");
  }
  using Counts = std::unordered_map<std::string, uint64_t>;
  auto count_range = [&](std::size_t begin, std::size_t end, Counts &counts) {
    std::string form;
    for (std::size_t i = begin; i < end; ++i) {
      for (const Token &t : sentences[i]->tokens) {
        if (dictionary_form(t, opts, form)) ++counts[form];
      }
    }
  };
  const unsigned threads =
      std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(sentences.size())));
  std::vector<Counts> shards(threads);
  if (threads == 1) {
    count_range(0, sentences.size(), shards[0]);
  } else {
    const std::size_t chunk = (sentences.size() + threads - 1) / threads;
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t begin = std::min(sentences.size(), w * chunk);
      const std::size_t end = std::min(sentences.size(), begin + chunk);
      workers.emplace_back([&, begin, end, w] { count_range(begin, end, shards[w]); });
    }
    for (auto &w : workers) w.join();
  }
  Counts merged = std::move(shards[0]);
  for (unsigned w = 1; w < threads; ++w) {
    for (auto &[form, c] : shards[w]) merged[form] += c;
  }
  if (merged.empty()) {
    throw Error(ErrorCode::kEmptyInput, kModule, "no tokens left after filtering");
  }
  return FreqDict(std::move(merged));
}

double top_hit_rate(std::span<const std::string> text_tokens, const FreqDict &dict,
                    int permille, TopSetMode mode) {
  if (text_tokens.empty()) {
    throw Error(ErrorCode::kEmptyInput, kModule, "no text tokens");
  }
  if (dict.types() == 0) {
    throw Error(ErrorCode::kEmptyInput, kModule, "empty dictionary");
  }
  const auto top = dict.top_set(permille, mode);
  std::size_t hits = 0;
  for (const auto &tok : text_tokens) {
    if (top.count(tok)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(text_tokens.size());
}

}  // namespace evalbench
