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

#include <cmath>

#include "doctest.h"
#include "evalbench/profiling.h"
#include "profiling_oracle.h"
#include "testkit.h"

using namespace evalbench;

namespace {

Sentence fixture(const std::string &name) {
  const auto doc = parse_conllu(read_file(std::string(EVALBENCH_TEST_DATA) + "/" + name, "test"));
  REQUIRE(doc.sentences.size() == 1);
  return doc.sentences[0];
}

}  // namespace

TEST_CASE("hand fixture: simple verbal clause") {
  const SentenceProfile p = profile_sentence(fixture("tree.conllu"));
  CHECK(p.cpt == 4.0);
  CHECK(p.tps == 5);
  CHECK(p.tpc == 5.0);
  CHECK(p.ll_avg == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(p.ll_max == 2);
  CHECK(p.ll_max_norm == 0.4);
  CHECK(p.pos_dist.size() == 5);
  for (const auto &[tag, share] : p.pos_dist) CHECK(share == 0.2);
}

TEST_CASE("hand fixture: copular clause") {
  const Sentence s = fixture("cop.conllu");
  const SentenceProfile p = profile_sentence(s);
  CHECK(p.tpc == 5.0);  // one clause, headed by "nero"
  CHECK(testkit::profile_oracle(s).tpc == 5.0);
}

TEST_CASE("single token sentence") {
  Sentence s;
  s.tokens.push_back(Token{1, "Sì", "INTJ", 0, "root", std::nullopt});
  const SentenceProfile p = profile_sentence(s);
  CHECK(p.tps == 1);
  CHECK(p.cpt == 2.0);
  CHECK_FALSE(p.tpc.has_value());
  CHECK_FALSE(p.ll_max.has_value());
  CHECK_FALSE(p.ll_avg.has_value());
  CHECK_FALSE(p.ll_max_norm.has_value());
}

TEST_CASE("plain-text sentences get no syntactic features") {
  const auto s = tokenize_plain("uno due tre .");
  const SentenceProfile p = profile_sentence(s[0]);
  CHECK(p.tps == 4);
  CHECK(p.cpt == 3.0);
  CHECK_FALSE(p.tpc.has_value());
  CHECK_FALSE(p.ll_max.has_value());
}

TEST_CASE("random trees match the brute-force oracle exactly") {
  Rng rng(2024);
  for (int i = 0; i < 500; ++i) {
    const Sentence s = testkit::random_tree(rng, 15);
    const SentenceProfile p = profile_sentence(s);
    const testkit::ProfileOracle o = testkit::profile_oracle(s);
    REQUIRE(p.tps == o.tps);
    REQUIRE(p.cpt == o.cpt);
    REQUIRE(p.tpc == o.tpc);
    REQUIRE(p.ll_max == o.ll_max);
    REQUIRE(p.ll_avg == o.ll_avg);
    REQUIRE(p.ll_max_norm == o.ll_max_norm);
    REQUIRE(p.pos_dist == o.pos);
    double total = 0;
    for (const auto &[tag, share] : p.pos_dist) total += share;
    CHECK(std::fabs(total - 1.0) < 1e-9);
    if (p.ll_max) {
      CHECK(*p.ll_max < p.tps);
      CHECK(*p.ll_avg <= *p.ll_max);
      CHECK(*p.ll_max_norm <= 1.0);
    }
  }
}

TEST_CASE("compute_stats") {
  const std::vector<double> two = {10, 30};
  const FeatureStats s = compute_stats(two);
  CHECK(s.mean == 20.0);
  CHECK(s.std == 10.0);
  CHECK(s.n == 2);
  const std::vector<double> one = {4.2};
  CHECK(compute_stats(one).std == 0.0);
  CHECK(compute_stats(one).mean == 4.2);
  CHECK_THROWS_AS(compute_stats(std::span<const double>{}), Error);

  Rng rng(8);
  std::vector<double> xs;
  for (int i = 0; i < 999; ++i) xs.push_back(rng.uniform_real() * 100);
  long double m = 0;
  for (double x : xs) m += x;
  m /= xs.size();
  long double v = 0;
  for (double x : xs) v += (x - m) * (x - m);
  const double sd = static_cast<double>(std::sqrt(v / xs.size()));
  const FeatureStats st = compute_stats(xs);
  CHECK(std::fabs(st.std - sd) <= 1e-9 * sd);
  CHECK(std::fabs(st.mean - static_cast<double>(m)) <= 1e-12 * static_cast<double>(m));
}

TEST_CASE("aggregate counts presence and zero-fills POS") {
  std::vector<SentenceProfile> ps(5);
  for (int i = 0; i < 5; ++i) {
    ps[i].tps = 10 * (i + 1);
    if (i < 3) ps[i].ll_max = i + 1;
    ps[i].pos_dist[i == 0 ? "NOUN" : "VERB"] = 1.0;
  }
  const CorpusProfile cp = aggregate_profiles(ps);
  CHECK(cp.features.at(Feature::kLlMax).n == 3);
  CHECK(cp.features.at(Feature::kTps).n == 5);
  CHECK(cp.features.count(Feature::kTpc) == 0);
  CHECK(cp.pos_stats.at("NOUN").n == 5);
  CHECK(cp.pos_stats.at("NOUN").mean == 0.2);
  CHECK(cp.pos_stats.at("ADJ").mean == 0.0);
  REQUIRE(cp.ll_max_over_tps.has_value());
  CHECK(*cp.ll_max_over_tps == doctest::Approx(2.0 / 30.0));
  CHECK_THROWS_AS(aggregate_profiles(std::span<const SentenceProfile>{}), Error);
}

TEST_CASE("identical sentences aggregate to the single-sentence values") {
  const Sentence s = fixture("tree.conllu");
  Document doc;
  for (int i = 0; i < 7; ++i) doc.sentences.push_back(s);
  Corpus c;
  c.add(doc);
  const auto single = profile_sentence(s);
  const CorpusProfile cp = aggregate_profiles(profile_corpus(c));
  for (const auto &[tag, share] : single.pos_dist) {
    CHECK(cp.pos_stats.at(tag).mean == share);
    CHECK(cp.pos_stats.at(tag).std == 0.0);
  }
  CHECK(cp.features.at(Feature::kCpt).mean == 4.0);
}

TEST_CASE("thread count does not change the profile") {
  Rng rng(99);
  Document doc;
  for (int i = 0; i < 300; ++i) doc.sentences.push_back(testkit::random_tree(rng, 15));
  Corpus c;
  c.add(doc);
  const CorpusProfile one = aggregate_profiles(profile_corpus(c, 1));
  for (unsigned t : {2u, 3u, 8u}) CHECK(aggregate_profiles(profile_corpus(c, t)) == one);
}

TEST_CASE("comparison report") {
  const Sentence s = fixture("tree.conllu");
  Document doc;
  doc.sentences = {s, fixture("cop.conllu")};
  Corpus c;
  c.add(doc);
  const CorpusProfile p = aggregate_profiles(profile_corpus(c));
  const ComparisonReport r = compare_profiles(p, p, "a", "b");
  REQUIRE(r.feature_rows.size() == 6);
  CHECK(r.feature_rows[0].name == "cpt");
  for (const auto &row : r.feature_rows) CHECK(row.diff == 0.0);
  REQUIRE(r.pos_rows.size() == kReportPos.size());
  CHECK(r.pos_rows[0].name == "AUX");
  for (const auto &row : r.pos_rows) CHECK(row.diff == 0.0);

  const std::string csv = render_comparison_csv(r);
  CHECK(csv.rfind("section,row,a_mean,a_std,a_n,b_mean,b_std,b_n,diff\n", 0) == 0);
  CHECK(render_comparison_text(r) == render_comparison_text(r));

  nlohmann::json j;
  to_json(j, p);
  CorpusProfile back;
  from_json(nlohmann::json::parse(j.dump()), back);
  CHECK(back == p);
}
