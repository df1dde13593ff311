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

// Linguistic profile features: characters per token, tokens per sentence and
// per clause, dependency link lengths and the UPOS distribution, computed per
// sentence and aggregated to corpus mean / population std.

#ifndef EVALBENCH_PROFILING_H_
#define EVALBENCH_PROFILING_H_

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "evalbench/corpusio.h"

namespace evalbench {

enum class Feature { kCpt, kTps, kTpc, kLlMax, kLlAvg, kLlMaxNorm };

inline constexpr std::array<Feature, 6> kFeatures = {
    Feature::kCpt, Feature::kTps, Feature::kTpc,
    Feature::kLlMax, Feature::kLlAvg, Feature::kLlMaxNorm};

// "cpt", "tps", "tpc", "ll_max", "ll_avg", "ll_max_norm"
std::string_view feature_name(Feature f);

// The POS rows of the comparison table, in report order.
inline constexpr std::array<std::string_view, 13> kReportPos = {
    "AUX", "PROPN", "PUNCT", "DET", "NUM", "ADP", "PRON",
    "SCONJ", "NOUN", "VERB", "ADV", "CCONJ", "ADJ"};

struct SentenceProfile {
  std::optional<double> cpt;  // absent when every token is PUNCT
  int tps = 0;
  std::optional<double> tpc;
  std::optional<int> ll_max;
  std::optional<double> ll_avg;
  std::optional<double> ll_max_norm;
  std::map<std::string, double> pos_dist;

  std::optional<double> get(Feature f) const;
};

struct FeatureStats {
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t n = 0;

  bool operator==(const FeatureStats &) const = default;
};

struct CorpusProfile {
  // Only features present in at least one sentence have an entry.
  std::map<Feature, FeatureStats> features;
  // Per-sentence proportions, zero-filled for sentences lacking the tag.
  std::map<std::string, FeatureStats> pos_stats;
  std::optional<double> ll_max_over_tps;
  std::size_t sentence_count = 0;

  bool operator==(const CorpusProfile &) const = default;
};

// Clauses are tokens that are VERB with deprel outside {aux, aux:pass, cop},
// or that head at least one cop dependent. Link length is |dep - head| over
// non-root arcs whose deprel is not "punct".
SentenceProfile profile_sentence(const Sentence &s);

// Profiles every sentence of the corpus, fanning out over `threads` workers.
// Output order is corpus order regardless of thread count.
std::vector<SentenceProfile> profile_corpus(const Corpus &corpus, unsigned threads = 1);

// Mean and population std (two-pass, exactly rounded sums). Empty input
// raises EmptyInput.
FeatureStats compute_stats(std::span<const double> values);

CorpusProfile aggregate_profiles(std::span<const SentenceProfile> profiles);

struct ComparisonRow {
  std::string name;
  std::optional<FeatureStats> a;
  std::optional<FeatureStats> b;
  std::optional<double> diff;  // b.mean - a.mean
};

struct ComparisonReport {
  std::string label_a = "original";
  std::string label_b = "generated";
  std::vector<ComparisonRow> feature_rows;
  std::vector<ComparisonRow> pos_rows;
  std::optional<double> ratio_a;  // ll_max_over_tps
  std::optional<double> ratio_b;
};

ComparisonReport compare_profiles(const CorpusProfile &a, const CorpusProfile &b,
                                  std::string label_a = "original",
                                  std::string label_b = "generated");

std::string render_comparison_csv(const ComparisonReport &report);
std::string render_comparison_text(const ComparisonReport &report, int decimals = 3);

void to_json(nlohmann::json &j, const CorpusProfile &p);
void from_json(const nlohmann::json &j, CorpusProfile &p);

}  // namespace evalbench

#endif  // EVALBENCH_PROFILING_H_
