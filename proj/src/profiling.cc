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

#include "evalbench/profiling.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>

#include "evalbench/common.h"

namespace evalbench {

namespace {

constexpr const char *kModule = "profiling";

bool is_clause_head(const Sentence &s, std::size_t i,
                    const std::vector<bool> &has_cop_dependent) {
  const Token &t = s.tokens[i];
  if (has_cop_dependent[i]) return true;
  return t.upos == "VERB" && t.deprel != "aux" && t.deprel != "aux:pass" &&
         t.deprel != "cop";
}

std::string format_value(const std::optional<double> &v, int decimals) {
  if (!v) return "—";
  return fmt::format("{:.{}f}", *v, decimals);
}

}  // namespace

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::kCpt: return "cpt";
    case Feature::kTps: return "tps";
    case Feature::kTpc: return "tpc";
    case Feature::kLlMax: return "ll_max";
    case Feature::kLlAvg: return "ll_avg";
    case Feature::kLlMaxNorm: return "ll_max_norm";
  }
  return "";
}

std::optional<double> SentenceProfile::get(Feature f) const {
  switch (f) {
    case Feature::kCpt: return cpt;
    case Feature::kTps: return static_cast<double>(tps);
    case Feature::kTpc: return tpc;
    case Feature::kLlMax:
      if (ll_max) return static_cast<double>(*ll_max);
      return std::nullopt;
    case Feature::kLlAvg: return ll_avg;
    case Feature::kLlMaxNorm: return ll_max_norm;
  }
  return std::nullopt;
}

SentenceProfile profile_sentence(const Sentence &s) {
  SentenceProfile p;
  const std::size_t n = s.tokens.size();
  p.tps = static_cast<int>(n);
  if (n == 0) return p;

  // Integer numerators keep every ratio a single correctly rounded division.
  std::size_t chars = 0, words = 0;
  std::map<std::string, std::size_t> pos_counts;
  for (const Token &t : s.tokens) {
    ++pos_counts[t.upos];
    if (t.upos != "PUNCT") {
      chars += utf8_length(t.form);
      ++words;
    }
  }
  if (words > 0) p.cpt = static_cast<double>(chars) / static_cast<double>(words);
  for (const auto &[tag, count] : pos_counts) {
    p.pos_dist[tag] = static_cast<double>(count) / static_cast<double>(n);
  }

  if (!s.annotated) return p;

  std::vector<bool> has_cop_dependent(n, false);
  std::size_t link_sum = 0, link_count = 0;
  int link_max = 0;
  for (const Token &t : s.tokens) {
    if (t.head == 0) continue;
    if (t.deprel == "cop") has_cop_dependent[t.head - 1] = true;
    if (t.deprel == "punct") continue;
    const int len = std::abs(t.index - t.head);
    link_sum += static_cast<std::size_t>(len);
    ++link_count;
    link_max = std::max(link_max, len);
  }
  std::size_t clauses = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_clause_head(s, i, has_cop_dependent)) ++clauses;
  }
  if (clauses > 0) p.tpc = static_cast<double>(n) / static_cast<double>(clauses);
  if (link_count > 0) {
    p.ll_max = link_max;
    p.ll_avg = static_cast<double>(link_sum) / static_cast<double>(link_count);
    p.ll_max_norm = static_cast<double>(link_max) / static_cast<double>(n);
  }
  return p;
}

std::vector<SentenceProfile> profile_corpus(const Corpus &corpus, unsigned threads) {
  const std::vector<const Sentence *> sentences = corpus.sentences();
  std::vector<SentenceProfile> out(sentences.size());
  threads = std::max(1u, std::min<unsigned>(threads, std::max<std::size_t>(1, sentences.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < sentences.size(); ++i) out[i] = profile_sentence(*sentences[i]);
    return out;
  }
  std::vector<std::jthread> workers;
  const std::size_t chunk = (sentences.size() + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(sentences.size(), begin + chunk);
    workers.emplace_back([&, begin, end] {
      for (std::size_t i = begin; i < end; ++i) out[i] = profile_sentence(*sentences[i]);
    });
  }
  for (auto &w : workers) w.join();
  return out;
}

FeatureStats compute_stats(std::span<const double> values) {
  if (values.empty()) {
    throw Error(ErrorCode::kEmptyInput, kModule, "no values to aggregate");
  }
  FeatureStats st;
  st.n = values.size();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    st.mean = *lo;
    st.std = 0.0;
    return st;
  }
  ExactSum sum;
  for (double v : values) sum.add(v);
  st.mean = std::clamp(sum.value() / static_cast<double>(st.n), *lo, *hi);
  ExactSum sq;
  for (double v : values) sq.add((v - st.mean) * (v - st.mean));
  st.std = std::sqrt(sq.value() / static_cast<double>(st.n));
  return st;
}

CorpusProfile aggregate_profiles(std::span<const SentenceProfile> profiles) {
  if (profiles.empty()) {
    throw Error(ErrorCode::kEmptyInput, kModule, "no sentence profiles to aggregate");
  }
  CorpusProfile cp;
  cp.sentence_count = profiles.size();
  for (Feature f : kFeatures) {
    std::vector<double> values;
    for (const auto &p : profiles) {
      if (auto v = p.get(f)) values.push_back(*v);
    }
    if (!values.empty()) cp.features[f] = compute_stats(values);
  }

  std::vector<std::string> tags(std::begin(kUposTags), std::end(kUposTags));
  for (const auto &p : profiles) {
    for (const auto &[tag, _] : p.pos_dist) {
      if (std::find(tags.begin(), tags.end(), tag) == tags.end()) tags.push_back(tag);
    }
  }
  for (const auto &tag : tags) {
    std::vector<double> values;
    values.reserve(profiles.size());
    for (const auto &p : profiles) {
      auto it = p.pos_dist.find(tag);
      values.push_back(it == p.pos_dist.end() ? 0.0 : it->second);
    }
    cp.pos_stats[tag] = compute_stats(values);
  }

  auto ll = cp.features.find(Feature::kLlMax);
  auto tps = cp.features.find(Feature::kTps);
  if (ll != cp.features.end() && tps != cp.features.end() && tps->second.mean > 0) {
    cp.ll_max_over_tps = ll->second.mean / tps->second.mean;
  }
  return cp;
}

ComparisonReport compare_profiles(const CorpusProfile &a, const CorpusProfile &b,
                                  std::string label_a, std::string label_b) {
  ComparisonReport r;
  r.label_a = std::move(label_a);
  r.label_b = std::move(label_b);
  auto make_row = [](std::string name, std::optional<FeatureStats> x,
                     std::optional<FeatureStats> y) {
    ComparisonRow row{std::move(name), x, y, std::nullopt};
    if (x && y) row.diff = y->mean - x->mean;
    return row;
  };
  auto lookup_feature = [](const CorpusProfile &p, Feature f) -> std::optional<FeatureStats> {
    auto it = p.features.find(f);
    if (it == p.features.end()) return std::nullopt;
    return it->second;
  };
  auto lookup_pos = [](const CorpusProfile &p, std::string_view tag) -> std::optional<FeatureStats> {
    auto it = p.pos_stats.find(std::string(tag));
    if (it == p.pos_stats.end()) return std::nullopt;
    return it->second;
  };
  for (Feature f : kFeatures) {
    r.feature_rows.push_back(
        make_row(std::string(feature_name(f)), lookup_feature(a, f), lookup_feature(b, f)));
  }
  for (std::string_view tag : kReportPos) {
    r.pos_rows.push_back(make_row(std::string(tag), lookup_pos(a, tag), lookup_pos(b, tag)));
  }
  r.ratio_a = a.ll_max_over_tps;
  r.ratio_b = b.ll_max_over_tps;
  return r;
}

std::string render_comparison_csv(const ComparisonReport &report) {
  std::string out = fmt::format("section,row,{0}_mean,{0}_std,{0}_n,{1}_mean,{1}_std,{1}_n,diff\n",
                                report.label_a, report.label_b);
  auto cell = [](const std::optional<FeatureStats> &s) {
    if (!s) return std::string(",,0");
    return fmt::format("{},{},{}", s->mean, s->std, s->n);
  };
  auto emit = [&](std::string_view section, const std::vector<ComparisonRow> &rows) {
    for (const auto &row : rows) {
      out += fmt::format("{},{},{},{},{}\n", section, row.name, cell(row.a), cell(row.b),
                         row.diff ? fmt::format("{}", *row.diff) : std::string());
    }
  };
  emit("feature", report.feature_rows);
  emit("pos", report.pos_rows);
  auto ratio = [](const std::optional<double> &v) {
    return v ? fmt::format("{}", *v) : std::string();
  };
  out += fmt::format("ratio,ll_max_over_tps,{},,,{},,,\n", ratio(report.ratio_a),
                     ratio(report.ratio_b));
  return out;
}

std::string render_comparison_text(const ComparisonReport &report, int decimals) {
  const int w = 10;
  std::string out;
  out += fmt::format("{:<16}{:>{w}}{:>{w}}{:>{w}}{:>{w}}{:>{w}}\n", "", report.label_a, "",
                     report.label_b, "", "", fmt::arg("w", w));
  out += fmt::format("{:<16}{:>{w}}{:>{w}}{:>{w}}{:>{w}}{:>{w}}\n", "feature", "mean", "std",
                     "mean", "std", "diff", fmt::arg("w", w));
  auto emit = [&](const std::vector<ComparisonRow> &rows) {
    for (const auto &row : rows) {
      auto mean = [](const std::optional<FeatureStats> &s) {
        return s ? std::optional<double>(s->mean) : std::nullopt;
      };
      auto sd = [](const std::optional<FeatureStats> &s) {
        return s ? std::optional<double>(s->std) : std::nullopt;
      };
      out += fmt::format("{:<16}{:>{w}}{:>{w}}{:>{w}}{:>{w}}{:>{w}}\n", row.name,
                         format_value(mean(row.a), decimals), format_value(sd(row.a), decimals),
                         format_value(mean(row.b), decimals), format_value(sd(row.b), decimals),
                         format_value(row.diff, decimals), fmt::arg("w", w));
    }
  };
  emit(report.feature_rows);
  out += '\n';
  emit(report.pos_rows);
  out += fmt::format("\nll_max/tps  {} {}  {} {}\n", report.label_a,
                     format_value(report.ratio_a, decimals), report.label_b,
                     format_value(report.ratio_b, decimals));
  return out;
}

void to_json(nlohmann::json &j, const CorpusProfile &p) {
  auto stats = [](const FeatureStats &s) {
    return nlohmann::json{{"mean", s.mean}, {"std", s.std}, {"n", s.n}};
  };
  j = nlohmann::json::object();
  j["sentence_count"] = p.sentence_count;
  nlohmann::json features = nlohmann::json::object();
  for (const auto &[f, s] : p.features) features[std::string(feature_name(f))] = stats(s);
  j["features"] = features;
  nlohmann::json pos = nlohmann::json::object();
  for (const auto &[tag, s] : p.pos_stats) pos[tag] = stats(s);
  j["pos"] = pos;
  j["ll_max_over_tps"] = p.ll_max_over_tps ? nlohmann::json(*p.ll_max_over_tps) : nlohmann::json();
}

void from_json(const nlohmann::json &j, CorpusProfile &p) {
  auto stats = [](const nlohmann::json &s) {
    return FeatureStats{s.at("mean").get<double>(), s.at("std").get<double>(),
                        s.at("n").get<std::size_t>()};
  };
  p = CorpusProfile{};
  p.sentence_count = j.at("sentence_count").get<std::size_t>();
  for (const auto &[name, s] : j.at("features").items()) {
    auto it = std::find_if(kFeatures.begin(), kFeatures.end(),
                           [&](Feature f) { return feature_name(f) == name; });
    if (it == kFeatures.end()) {
      throw Error(ErrorCode::kFormatError, kModule, fmt::format("unknown feature '{}'", name));
    }
    p.features[*it] = stats(s);
  }
  for (const auto &[tag, s] : j.at("pos").items()) p.pos_stats[tag] = stats(s);
  if (j.contains("ll_max_over_tps") && !j["ll_max_over_tps"].is_null()) {
    p.ll_max_over_tps = j["ll_max_over_tps"].get<double>();
  }
}

}  // namespace evalbench
