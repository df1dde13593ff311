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

// Word-level Markov chain text generator (the human-evaluation baseline).
//
// A state is the tuple of the previous `state_size` symbols. Each sentence is
// padded as BEGIN^state_size + forms + END, and every (state, next) pair is
// counted. In the public API BEGIN and END are std::nullopt, which keeps them
// apart from any real form; forms must be non-empty.
//
// Sampling is reproducible: next symbols are kept in (count desc, form asc)
// order with END ranked as the empty string, a threshold t = Rng::uniform(total)
// is drawn, and the first symbol whose cumulative count exceeds t is chosen.

#ifndef EVALBENCH_MARKOV_H_
#define EVALBENCH_MARKOV_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evalbench/common.h"
#include "evalbench/corpusio.h"

namespace evalbench {

// nullopt is BEGIN in a state and END as a next symbol.
using MarkovSymbol = std::optional<std::string>;
using MarkovState = std::vector<MarkovSymbol>;

struct Continuation {
  std::vector<std::string> tokens;
  bool ended_early = false;  // END reached before the requested length
};

inline constexpr double kDefaultAlpha = 0.1;

class MarkovModel {
 public:
  // Raises InvalidArgument for state_size < 1 or an empty form, EmptyInput
  // for no sentences. Counting is sharded over `threads` and merged exactly.
  static MarkovModel train(std::span<const std::vector<std::string>> sentences,
                           int state_size, unsigned threads = 1);
  static MarkovModel train(std::span<const Sentence> sentences, int state_size,
                           unsigned threads = 1);

  int state_size() const { return state_size_; }
  std::size_t vocab_size() const { return forms_.size() - kFirstForm; }
  std::size_t state_count() const { return table_.size(); }
  bool in_vocab(std::string_view form) const { return ids_.count(std::string(form)) > 0; }

  // Next-symbol counts for `state` in sampling order; nullopt if unseen.
  std::optional<std::vector<std::pair<MarkovSymbol, uint64_t>>> next_counts(
      const MarkovState &state) const;

  // Every stored state in sorted order.
  std::vector<MarkovState> states() const;

  // Walk from the BEGIN state until END or max_tokens.
  std::vector<std::string> generate(std::size_t max_tokens, uint64_t seed) const;

  // Walk from the last state_size prompt tokens. Raises InvalidArgument when
  // the prompt is too short and UnseenState when its final state never
  // occurred in training.
  Continuation continue_from(std::span<const std::string> prompt, std::size_t n_tokens,
                             uint64_t seed) const;

  // Sum of natural-log probabilities of tokens + END under add-alpha smoothing
  // over vocab + END; unseen states contribute log(1 / (|vocab| + 1)).
  double score(std::span<const std::string> tokens, double alpha = kDefaultAlpha) const;

  // JSON lines: a header {"format":"evalbench-markov","version":1,
  // "state_size":k} followed by one {"state":[...],"next":[[sym,count],...]}
  // record per state, states sorted, null standing for BEGIN / END.
  std::string to_jsonl() const;
  static MarkovModel from_jsonl(std::string_view text);

 private:
  using Id = uint32_t;
  static constexpr Id kBegin = 0;
  static constexpr Id kEnd = 1;
  static constexpr Id kFirstForm = 2;
  static constexpr Id kUnknown = UINT32_MAX;

  struct Row {
    std::vector<std::pair<Id, uint64_t>> next;  // sampling order
    uint64_t total = 0;
  };

  MarkovModel() = default;
  Id intern(const std::string &form);
  Id lookup(std::string_view form) const;
  static std::string key_of(std::span<const Id> state);
  const Row *find_row(std::span<const Id> state) const;
  std::string_view sort_key(Id id) const;
  void finalize(std::unordered_map<std::string, std::unordered_map<Id, uint64_t>> raw);
  Id sample(const Row &row, Rng &rng) const;
  MarkovSymbol symbol(Id id) const;
  void walk(std::vector<Id> state, std::size_t limit, uint64_t seed,
            std::vector<std::string> &out, bool &ended) const;

  int state_size_ = 0;
  std::vector<std::string> forms_;  // id -> form, first two slots unused
  std::unordered_map<std::string, Id> ids_;
  std::unordered_map<std::string, Row> table_;  // packed state -> row
};

}  // namespace evalbench

#endif  // EVALBENCH_MARKOV_H_
