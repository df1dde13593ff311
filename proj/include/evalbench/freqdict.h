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

// Reference token-frequency dictionary and the top-permille hit rate.

#ifndef EVALBENCH_FREQDICT_H_
#define EVALBENCH_FREQDICT_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "evalbench/corpusio.h"

namespace evalbench {

// How the top set is cut: by rank over vocabulary types (default), or as the
// shortest ranked prefix holding the given share of token mass.
enum class TopSetMode { kTypes, kMass };

struct FreqDictOptions {
  bool lowercase = false;
  bool include_punct = true;  // PUNCT-tagged or all-punctuation forms
  unsigned threads = 1;
};

class FreqDict {
 public:
  FreqDict() = default;

  // `counts` may be in any order; every count must be >= 1.
  explicit FreqDict(std::unordered_map<std::string, uint64_t> counts);

  uint64_t total() const { return total_; }
  std::size_t types() const { return ranked_.size(); }
  uint64_t count(std::string_view form) const;

  // Entries sorted by (count desc, form asc).
  const std::vector<std::pair<std::string, uint64_t>> &ranked() const { return ranked_; }

  // kTypes: the ceil(permille * types / 1000) highest-ranked forms.
  std::unordered_set<std::string> top_set(int permille,
                                          TopSetMode mode = TopSetMode::kTypes) const;
  std::size_t top_set_size(int permille, TopSetMode mode = TopSetMode::kTypes) const;

  // Two columns, form<TAB>count, in ranked order.
  std::string to_tsv() const;
  // Validates column count, positive counts, uniqueness and ranked order.
  static FreqDict from_tsv(std::string_view text);

  bool operator==(const FreqDict &o) const { return ranked_ == o.ranked_; }

 private:
  std::unordered_map<std::string, uint64_t> counts_;
  std::vector<std::pair<std::string, uint64_t>> ranked_;
  uint64_t total_ = 0;
};

// Normalizes a form per the options; returns false if the token is skipped.
bool dictionary_form(const Token &tok, const FreqDictOptions &opts, std::string &out);

FreqDict build_freq_dict(const Corpus &corpus, const FreqDictOptions &opts = {});

// Share of `text_tokens` whose form is in dict.top_set(permille). Forms are
// looked up as given; callers normalize with the dictionary's options.
double top_hit_rate(std::span<const std::string> text_tokens, const FreqDict &dict,
                    int permille, TopSetMode mode = TopSetMode::kTypes);

}  // namespace evalbench

#endif  // EVALBENCH_FREQDICT_H_
