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

// Per-domain perplexity, either from externally supplied per-token
// log-probabilities or from the Markov scorer. All logs are natural.

#ifndef EVALBENCH_PERPLEXITY_H_
#define EVALBENCH_PERPLEXITY_H_

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "evalbench/common.h"
#include "evalbench/corpusio.h"
#include "evalbench/markov.h"

namespace evalbench {

struct LogProbRecord {
  std::string doc_id;
  std::string token;
  double logprob = 0.0;  // natural log, <= 0
};

struct DomainPerplexity {
  std::string domain;
  uint64_t token_count = 0;
  double mean_neg_logprob = 0.0;
  double perplexity = 1.0;
};

struct PerplexityReport {
  std::string unit = "word";
  std::vector<DomainPerplexity> domains;
  DomainPerplexity overall;
};

using DomainOf = std::function<std::string(const std::string &doc_id)>;

// Default domain mapping: the doc_id prefix before the first '/', or
// "default" when there is none.
std::string default_domain_of(const std::string &doc_id);

// Streaming accumulator. Sums are exactly rounded, so record order, sharding
// and merging do not change the result.
class PerplexityAccumulator {
 public:
  // Raises NonFiniteLogProb / InvalidLogProb naming `record_index`.
  void add(const std::string &domain, double logprob, uint64_t record_index);
  // Adds a pre-summed block of `tokens` log-probabilities.
  void add_block(const std::string &domain, double logprob_sum, uint64_t tokens);
  void merge(const PerplexityAccumulator &other);

  uint64_t records() const { return records_; }

  // Domains listed in `order` come first (when present), the rest sorted.
  PerplexityReport report(const std::vector<std::string> &order = {},
                          const std::string &unit = "word") const;

 private:
  struct Cell {
    ExactSum neg_sum;
    uint64_t n = 0;
  };
  std::map<std::string, Cell> cells_;
  uint64_t records_ = 0;
};

PerplexityReport perplexity_from_logprobs(std::span<const LogProbRecord> records,
                                          const DomainOf &domain_of = default_domain_of,
                                          const std::vector<std::string> &order = {},
                                          const std::string &unit = "word");

// Reads the JSON-lines format: a header {"log_base":"e"|"2"|"10",
// "unit":"subword"|"word"} then one {"doc_id","token","logprob"} per line.
// Log-probabilities are converted to natural log while streaming.
PerplexityReport perplexity_from_jsonl(std::istream &in,
                                       const DomainOf &domain_of = default_domain_of,
                                       const std::vector<std::string> &order = {});

// Scores every sentence; each contributes len + 1 tokens (the END step).
// Domain comes from document meta "domain", else "default".
PerplexityReport perplexity_of_markov(const MarkovModel &model, const Corpus &corpus,
                                      double alpha = kDefaultAlpha,
                                      const std::vector<std::string> &order = {});

// Both renderings re-check perplexity == exp(mean_neg_logprob).
std::string render_perplexity_csv(const PerplexityReport &report);
std::string render_perplexity_text(const PerplexityReport &report);

}  // namespace evalbench

#endif  // EVALBENCH_PERPLEXITY_H_
